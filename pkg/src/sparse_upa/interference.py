"""Region interference: total power received by a grid of users in the XoZ plane."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .geometry import SystemConfig
from .powerfield import field_power

__all__ = ["UserGrid", "region_interference", "user_powers"]


@dataclass(frozen=True)
class UserGrid:
    """Users on a regular grid; ``z_offset_range`` is relative to the focus."""

    x_range: tuple[float, float]
    z_offset_range: tuple[float, float]
    x_count: int = 201
    z_count: int = 301

    def __post_init__(self):
        for name in ("x_range", "z_offset_range"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConfigurationError(f"{name} must be an increasing pair, got {(lo, hi)}")
        if self.x_count < 1 or self.z_count < 1:
            raise ConfigurationError("user counts must be positive")

    @classmethod
    def around_focus(cls, wavelength: float, x_half: float = 2000.0, z_half: float = 3000.0,
                     x_count: int = 201, z_count: int = 301) -> UserGrid:
        """Symmetric region given in wavelength multiples."""
        return cls((-x_half * wavelength, x_half * wavelength),
                   (-z_half * wavelength, z_half * wavelength), x_count, z_count)

    @property
    def n_users(self) -> int:
        return self.x_count * self.z_count

    @property
    def cell_area(self) -> float:
        dx = (self.x_range[1] - self.x_range[0]) / max(self.x_count - 1, 1)
        dz = (self.z_offset_range[1] - self.z_offset_range[0]) / max(self.z_count - 1, 1)
        return dx * dz

    def positions(self, focus_distance: float) -> np.ndarray:
        """User coordinates, shape ``(n_users, 3)``, x-major order."""
        xs = np.linspace(*self.x_range, self.x_count)
        zs = focus_distance + np.linspace(*self.z_offset_range, self.z_count)
        xx, zz = np.meshgrid(xs, zs, indexing="ij")
        return np.column_stack([xx.ravel(), np.zeros(xx.size), zz.ravel()])


def user_powers(config: SystemConfig, focus_distance: float, grid: UserGrid, threads: int = 1) -> np.ndarray:
    """Power at each user with focal-plane amplitudes, shape ``(x_count, z_count)``."""
    pts = grid.positions(focus_distance)
    powers = field_power(config, focus_distance, pts, amplitude_mode="focal_plane", threads=threads)
    return powers.reshape(grid.x_count, grid.z_count)


def region_interference(config: SystemConfig, focus_distance: float, grid: UserGrid, threads: int = 1) -> float:
    """Sum of received power over all users.

    ``math.fsum`` makes the reduction exactly rounded, hence independent
    of summation order.
    """
    return math.fsum(user_powers(config, focus_distance, grid, threads).ravel())
