"""Main-lobe geometry, the z-axis feasibility condition and characteristic distances."""

from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

from .errors import ConfigurationError, FeasibilityError, SearchError
from .geometry import SystemConfig
from .powerfield import rho2

__all__ = [
    "BMin",
    "LobeReport",
    "find_b_min",
    "default_b_min",
    "focusing_ratio",
    "main_lobe_width",
    "farfield_sin_theta",
    "main_lobe_length",
    "min_spacing",
    "min_antennas",
    "z_resolution_distance",
    "fraunhofer_distance",
    "feasibility_report",
]

B_MIN_START = 1e-4
B_MIN_STEP = 1e-3
_B_SEARCH_LIMIT = 100.0


class BMin(NamedTuple):
    value: float
    step: float


def find_b_min(side_count: int = 35, step: float = B_MIN_STEP, start: float = B_MIN_START) -> BMin:
    """First local minimum of ``rho2`` by a fixed-step ascending walk.

    Starting at ``start``, ``b`` advances by ``step`` while ``rho2`` keeps
    strictly decreasing; the last ``b`` before the first non-decrease is
    returned.
    """
    if not (step > 0 and start > 0):
        raise ConfigurationError("step and start must be positive")
    k = 0
    b = start
    rho_prev = rho2(b, side_count)
    while True:
        # start + k*step rather than repeated addition, so no drift accumulates
        b_new = start + (k + 1) * step
        if b_new > _B_SEARCH_LIMIT:
            raise SearchError(f"no local minimum of rho2 below b = {_B_SEARCH_LIMIT}")
        rho_new = rho2(b_new, side_count)
        if rho_new < rho_prev:
            k += 1
            b = b_new
            rho_prev = rho_new
        else:
            return BMin(b, step)


@functools.lru_cache(maxsize=None)
def default_b_min() -> float:
    """``b_min`` with the default walk (about 1.9111), computed once per process."""
    return find_b_min().value


def _b(b_min):
    return default_b_min() if b_min is None else float(b_min)


def _check_focus(L):
    if not (math.isfinite(L) and L > 0):
        raise ConfigurationError(f"focus distance must be positive, got {L!r}")


def focusing_ratio(config: SystemConfig, focus_distance: float, b_min: float | None = None) -> float:
    """``pi d^2 (sqrt(N)-1)^2 / (4 b_min^2 lambda L)``; range focusing needs this > 1."""
    _check_focus(focus_distance)
    b = _b(b_min)
    return (math.pi * config.spacing**2 * (config.side_count - 1) ** 2
            / (4.0 * b * b * config.wavelength * focus_distance))


def main_lobe_width(config: SystemConfig, focus_distance: float) -> float:
    """Distance from the focus to the first lateral null, ``lambda L / (d sqrt(N))``."""
    _check_focus(focus_distance)
    return config.wavelength * focus_distance / (config.spacing * config.side_count)


def farfield_sin_theta(config: SystemConfig) -> float:
    return config.wavelength / (config.spacing * config.side_count)


def main_lobe_length(config: SystemConfig, focus_distance: float, b_min: float | None = None) -> tuple[float, float]:
    """Range extent ``(length_minus, length_plus)`` of the main lobe around the focus.

    Raises
    ------
    FeasibilityError
        If the lobe does not close behind the focus (ratio <= 1). The
        exception carries the minimum spacing that would make it feasible.
    """
    q = focusing_ratio(config, focus_distance, b_min)
    if q <= 1.0:
        raise FeasibilityError(
            f"main lobe does not concentrate along z (ratio {q:.6g} <= 1)",
            min_spacing=min_spacing(config, focus_distance, b_min),
        )
    return -focus_distance / (q + 1.0), focus_distance / (q - 1.0)


def min_spacing(config: SystemConfig, focus_distance: float, b_min: float | None = None) -> float:
    """Smallest spacing for which range focusing is possible."""
    _check_focus(focus_distance)
    b = _b(b_min)
    return 2.0 * b * math.sqrt(config.wavelength * focus_distance / math.pi) / (config.side_count - 1)


def min_antennas(config: SystemConfig, focus_distance: float, b_min: float | None = None) -> float:
    """Real-valued lower bound on ``(sqrt(N) - 1)^2``."""
    _check_focus(focus_distance)
    b = _b(b_min)
    return 4.0 * b * b * config.wavelength * focus_distance / (math.pi * config.spacing**2)


def z_resolution_distance(config: SystemConfig, b_min: float | None = None) -> float:
    """Largest focus distance at which users can be separated by range."""
    b = _b(b_min)
    return (math.pi * config.spacing**2 * (config.side_count - 1) ** 2
            / (4.0 * b * b * config.wavelength))


def fraunhofer_distance(config: SystemConfig) -> float:
    """``2 D^2 / lambda`` with ``D`` the diagonal aperture."""
    return 2.0 * config.aperture**2 / config.wavelength


@dataclass(frozen=True)
class LobeReport:
    wavelength: float
    side_count: int
    spacing: float
    focus_distance: float
    b_min: float
    width_x: float
    farfield_sin_theta: float
    focusing_ratio: float
    feasible: bool
    length_minus: float | None
    length_plus: float | None
    z_length: float | None
    min_spacing: float
    min_antennas: float
    z_resolution_distance: float
    fraunhofer_distance: float

    def as_dict(self) -> dict:
        return asdict(self)


def feasibility_report(config: SystemConfig, focus_distance: float, b_min: float | None = None) -> LobeReport:
    """Collect every lobe quantity; infeasibility is reported, never raised."""
    b = _b(b_min)
    q = focusing_ratio(config, focus_distance, b)
    feasible = q > 1.0
    if feasible:
        minus, plus = main_lobe_length(config, focus_distance, b)
        z_len = plus - minus
    else:
        minus = plus = z_len = None
    return LobeReport(
        wavelength=config.wavelength,
        side_count=config.side_count,
        spacing=config.spacing,
        focus_distance=float(focus_distance),
        b_min=b,
        width_x=main_lobe_width(config, focus_distance),
        farfield_sin_theta=farfield_sin_theta(config),
        focusing_ratio=q,
        feasible=feasible,
        length_minus=minus,
        length_plus=plus,
        z_length=z_len,
        min_spacing=min_spacing(config, focus_distance, b),
        min_antennas=min_antennas(config, focus_distance, b),
        z_resolution_distance=z_resolution_distance(config, b),
        fraunhofer_distance=fraunhofer_distance(config),
    )
