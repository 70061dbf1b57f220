"""System configuration and uniform planar array (UPA) coordinates.

Arrays lie in a plane parallel to XoY with normal +z. Antenna ``(n, m)``
with ``n, m = 1..side_count`` sits at ``center + (x_n, y_m, 0)`` where

    x_n = (n - (side_count + 1) / 2) * spacing

and likewise for ``y_m``. Positions are stored row-major (``n`` outer,
``m`` inner).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, NamedTuple

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "SystemConfig",
    "Point3",
    "ArrayGeometry",
    "index_offsets",
    "upa_positions",
    "antenna_positions",
    "load_config",
]


class Point3(NamedTuple):
    """Cartesian point in meters."""

    x: float
    y: float
    z: float


ORIGIN = Point3(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SystemConfig:
    """Transmit array parameters.

    Parameters
    ----------
    wavelength : float
        Carrier wavelength in meters.
    side_count : int
        Antennas per side; the array holds ``side_count**2`` antennas.
    spacing : float
        Inter-antenna spacing in meters.
    total_power : float
        Total transmit power in watts, split evenly across antennas.
    """

    wavelength: float
    side_count: int
    spacing: float
    total_power: float = 1.0

    def __post_init__(self):
        if isinstance(self.side_count, bool) or int(self.side_count) != self.side_count:
            raise ConfigurationError(f"side_count must be an integer, got {self.side_count!r}")
        object.__setattr__(self, "side_count", int(self.side_count))
        for name in ("wavelength", "spacing", "total_power"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value) and value > 0):
                raise ConfigurationError(f"{name} must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.side_count < 2:
            raise ConfigurationError(f"side_count must be >= 2, got {self.side_count}")

    @property
    def n_antennas(self) -> int:
        return self.side_count**2

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def antenna_power(self) -> float:
        return self.total_power / self.n_antennas

    @property
    def aperture(self) -> float:
        """Diagonal aperture ``sqrt(2) * d * (side_count - 1)``."""
        return math.sqrt(2.0) * self.spacing * (self.side_count - 1)

    def with_spacing(self, spacing: float) -> SystemConfig:
        return SystemConfig(self.wavelength, self.side_count, spacing, self.total_power)

    def with_side_count(self, side_count: int) -> SystemConfig:
        return SystemConfig(self.wavelength, side_count, self.spacing, self.total_power)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> SystemConfig:
        """Build from the file keys ``wavelength_m``, ``side_count``,
        ``spacing_in_wavelengths`` and optional ``total_power_w``."""
        try:
            wavelength = float(data["wavelength_m"])
            side_count = data["side_count"]
            spacing = float(data["spacing_in_wavelengths"]) * wavelength
        except KeyError as exc:
            raise ConfigurationError(f"missing config key {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(str(exc)) from None
        return cls(wavelength, side_count, spacing, data.get("total_power_w", 1.0))

    def to_mapping(self) -> dict[str, Any]:
        return {
            "wavelength_m": self.wavelength,
            "side_count": self.side_count,
            "spacing_in_wavelengths": self.spacing / self.wavelength,
            "total_power_w": self.total_power,
        }


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a JSON key-value config file and return the raw mapping."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigurationError("config file must hold a JSON object")
    return data


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """Antenna coordinates of an axis-aligned UPA.

    ``positions`` has shape ``(side_count**2, 3)`` in row-major ``(n, m)``
    order.
    """

    positions: np.ndarray
    center: Point3
    side_count: int
    spacing: float

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def offsets(self) -> np.ndarray:
        return self.positions - np.asarray(self.center)

    @property
    def area(self) -> float:
        """Physical area, each antenna occupying a ``spacing`` x ``spacing`` cell."""
        return (self.side_count * self.spacing) ** 2

    def point(self, n: int, m: int) -> Point3:
        """Position of antenna ``(n, m)`` using 1-based indices."""
        if not (1 <= n <= self.side_count and 1 <= m <= self.side_count):
            raise IndexError(f"antenna index ({n}, {m}) out of range")
        return Point3(*self.positions[(n - 1) * self.side_count + (m - 1)])


def index_offsets(side_count: int, spacing: float) -> np.ndarray:
    """Per-axis offsets ``(n - (side_count + 1)/2) * spacing`` for n = 1..side_count."""
    return (np.arange(1, side_count + 1) - (side_count + 1) / 2.0) * spacing


def upa_positions(side_count: int, spacing: float, center: Point3 = ORIGIN) -> ArrayGeometry:
    """UPA geometry from raw parameters; ``side_count == 1`` is allowed here."""
    if int(side_count) != side_count or side_count < 1:
        raise ConfigurationError(f"side_count must be a positive integer, got {side_count!r}")
    if not (math.isfinite(spacing) and spacing > 0):
        raise ConfigurationError(f"spacing must be positive, got {spacing!r}")
    center = Point3(*map(float, center))
    if not all(math.isfinite(c) for c in center):
        raise ConfigurationError(f"center must be finite, got {center}")
    side_count = int(side_count)
    offs = index_offsets(side_count, spacing)
    xx, yy = np.meshgrid(offs, offs, indexing="ij")
    pos = np.column_stack([xx.ravel(), yy.ravel(), np.zeros(side_count * side_count)])
    pos += np.asarray(center)
    pos.setflags(write=False)
    return ArrayGeometry(pos, center, side_count, float(spacing))


def antenna_positions(config: SystemConfig, center: Point3 = ORIGIN) -> ArrayGeometry:
    """Transmit-array geometry for ``config`` centred at ``center``."""
    return upa_positions(config.side_count, config.spacing, center)
