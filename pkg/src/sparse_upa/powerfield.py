"""Arrived-signal power around the focal point.

The brute-force field (:func:`field_power`) sums every antenna's
Green's-function contribution under the conjugate focusing phases. The
closed forms approximate it along the two axes through the focus:

* x-axis (lateral offset ``x_off`` in the focal plane)::

      P1 = P N / (4 pi L)^2 * sinc^2(d x_off sqrt(N) / (lambda L)) / sinc^2(d x_off / (lambda L))

* z-axis (range offset ``z_off``)::

      P2 = P / (4 pi (L + z_off))^2 * rho2(b)
      rho2(b) = (sqrt(N) - 1)^4 / N * (C(b)^2 + S(b)^2)^2 / b^4

  with ``A = pi d^2 / (lambda L)``, ``eta = z_off / (L + z_off)`` and
  ``b = sqrt(|A eta|) (sqrt(N) - 1) / 2``. ``C`` and ``S`` are the
  normalized Fresnel integrals.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import special

from ._parallel import ordered_map
from .channel import AMPLITUDE_MODES
from .errors import ConfigurationError, DomainError, SingularityError
from .geometry import Point3, SystemConfig, index_offsets

__all__ = [
    "PowerSample",
    "FresnelPair",
    "Rho2Params",
    "field_power",
    "exact_power",
    "focal_power",
    "p1_closed_form",
    "fresnel",
    "rho2",
    "rho2_params",
    "rho2_sum",
    "p2_closed_form",
    "euler_maclaurin_gap",
    "RHO2_SMALL_B",
]

# Below this b, rho2 takes its b = 0 limit. The relative gap between the
# two branches is O(b^4), far below 1e-7 here.
RHO2_SMALL_B = 1e-4

_CHUNK_ELEMENTS = 2**21


class PowerSample(NamedTuple):
    location: Point3
    power: float


class FresnelPair(NamedTuple):
    c: float | np.ndarray
    s: float | np.ndarray


class Rho2Params(NamedTuple):
    a_factor: float
    eta: float | np.ndarray
    b: float | np.ndarray


def _check_focus(focus_distance):
    if not (math.isfinite(focus_distance) and focus_distance > 0):
        raise ConfigurationError(f"focus distance must be positive, got {focus_distance!r}")


def field_power(
    config: SystemConfig,
    focus_distance: float,
    points,
    amplitude_mode: str = "exact",
    threads: int = 1,
) -> np.ndarray:
    """Exact received power at each row of ``points`` (shape ``(M, 3)``).

    The array is centred at the origin and focused on ``(0, 0, L)``.
    ``"focal_plane"`` mode replaces every ``1/(4 pi r)`` amplitude by
    ``1/(4 pi L)``.
    """
    _check_focus(focus_distance)
    if amplitude_mode not in AMPLITUDE_MODES:
        raise ConfigurationError(f"amplitude_mode must be one of {AMPLITUDE_MODES}, got {amplitude_mode!r}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != 3:
        raise ValueError(f"points must have shape (M, 3), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")

    k = config.wavenumber
    L = float(focus_distance)
    offs = index_offsets(config.side_count, config.spacing)
    ax, ay = (a.ravel() for a in np.meshgrid(offs, offs, indexing="ij"))
    r_focus = np.sqrt(ax**2 + ay**2 + L**2)
    tol = 1e-12 * max(L, config.spacing * config.side_count)

    def chunk_power(rows: slice) -> np.ndarray:
        p = pts[rows]
        dist = np.sqrt((p[:, 0:1] - ax) ** 2 + (p[:, 1:2] - ay) ** 2 + p[:, 2:3] ** 2)
        if np.any(dist <= tol):
            raise SingularityError("observation point coincides with an antenna")
        # k (r - r_focus) keeps the phase small before exponentiation.
        phasor = np.exp(1j * k * (dist - r_focus))
        if amplitude_mode == "exact":
            total = (phasor / dist).sum(axis=1)
        else:
            total = phasor.sum(axis=1) / L
        return np.abs(total) ** 2

    step = max(1, _CHUNK_ELEMENTS // ax.size)
    slices = [slice(i, i + step) for i in range(0, len(pts), step)]
    out = np.concatenate(ordered_map(chunk_power, slices, threads)) if slices else np.empty(0)
    return config.antenna_power * out / (4.0 * math.pi) ** 2


def exact_power(
    config: SystemConfig,
    focus_distance: float,
    obs: Point3,
    amplitude_mode: str = "exact",
) -> PowerSample:
    """Brute-force power at a single observation point."""
    obs = Point3(*map(float, obs))
    power = field_power(config, focus_distance, [obs], amplitude_mode)[0]
    return PowerSample(obs, float(power))


def focal_power(config: SystemConfig, focus_distance: float) -> float:
    """Peak ``P N / (4 pi L)^2`` with all phasors aligned."""
    return config.total_power * config.n_antennas / (4.0 * math.pi * focus_distance) ** 2


def p1_closed_form(config: SystemConfig, focus_distance: float, x_off):
    """Closed-form power at lateral offset ``x_off`` (m) in the focal plane.

    Where ``sinc(d x_off / (lambda L))`` vanishes (grating-lobe centres) the
    Dirichlet kernel takes its limit instead of dividing by zero.
    """
    _check_focus(focus_distance)
    x = np.asarray(x_off, dtype=float)
    sn = config.side_count
    u = config.spacing * x / (config.wavelength * focus_distance)
    den = np.sin(np.pi * u)
    num = np.sin(np.pi * sn * u)
    near_int = np.abs(den) < 1e-12
    safe_den = np.where(near_int, 1.0, den)
    # Dirichlet ratio sin^2(pi sqrt(N) u) / (N sin^2(pi u)), equal to 1 at integer u.
    ratio = np.where(near_int, 1.0, (num / safe_den) ** 2 / sn**2)
    power = focal_power(config, focus_distance) * ratio
    return float(power) if power.ndim == 0 else power


def fresnel(x) -> FresnelPair:
    """Normalized Fresnel integrals ``C(x) = int_0^x cos(pi t^2 / 2) dt`` and ``S(x)``."""
    s, c = special.fresnel(x)
    if np.ndim(c) == 0:
        return FresnelPair(float(c), float(s))
    return FresnelPair(c, s)


def rho2(b, side_count: int):
    """Normalized z-axis gain factor; equals ``(sqrt(N)-1)^4 / N`` at ``b = 0``."""
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr < 0) or not np.all(np.isfinite(b_arr)):
        raise DomainError("b must be finite and non-negative")
    peak = (side_count - 1) ** 4 / side_count**2
    small = b_arr < RHO2_SMALL_B
    bb = np.where(small, 1.0, b_arr)
    s, c = special.fresnel(bb)
    value = np.where(small, peak, peak * (c * c + s * s) ** 2 / bb**4)
    return float(value) if value.ndim == 0 else value


def rho2_params(config: SystemConfig, focus_distance: float, z_off) -> Rho2Params:
    """``A``, ``eta`` and ``b`` for a range offset ``z_off`` (m)."""
    _check_focus(focus_distance)
    z = np.asarray(z_off, dtype=float)
    if np.any(z <= -focus_distance):
        raise DomainError("z offset must satisfy L + z_off > 0")
    a_factor = math.pi * config.spacing**2 / (config.wavelength * focus_distance)
    eta = z / (focus_distance + z)
    b = np.sqrt(np.abs(a_factor * eta)) * (config.side_count - 1) / 2.0
    if z.ndim == 0:
        return Rho2Params(a_factor, float(eta), float(b))
    return Rho2Params(a_factor, eta, b)


def p2_closed_form(config: SystemConfig, focus_distance: float, z_off):
    """Closed-form power at range offset ``z_off`` (m) on the array axis."""
    params = rho2_params(config, focus_distance, z_off)
    dist = focus_distance + np.asarray(z_off, dtype=float)
    power = config.total_power / (4.0 * math.pi * dist) ** 2 * rho2(params.b, config.side_count)
    return float(power) if np.ndim(power) == 0 else power


def _centered_gauss_sum(side_count: int, a_eta: np.ndarray) -> np.ndarray:
    n = np.arange(side_count) - (side_count - 1) / 2.0
    return np.exp(-1j * np.multiply.outer(a_eta, n**2)).sum(axis=-1)


def rho2_sum(config: SystemConfig, focus_distance: float, z_off):
    """``(1/N) |sum_n exp(-i A eta n^2)|^4``: the paraxial z-axis factor before
    the sum is replaced by an integral."""
    a_factor, eta, _ = rho2_params(config, focus_distance, z_off)
    eps = _centered_gauss_sum(config.side_count, a_factor * np.asarray(eta))
    value = np.abs(eps) ** 4 / config.n_antennas
    return float(value) if value.ndim == 0 else value


def euler_maclaurin_gap(config: SystemConfig, focus_distance: float, z_off):
    """``|sum - integral| / sqrt(N)`` for the centred Gaussian phase sum.

    The integral over ``[-(sqrt(N)-1)/2, (sqrt(N)-1)/2]`` is evaluated
    exactly through Fresnel integrals.
    """
    a_factor, eta, _ = rho2_params(config, focus_distance, z_off)
    a = a_factor * np.asarray(eta, dtype=float)
    half = (config.side_count - 1) / 2.0
    total = _centered_gauss_sum(config.side_count, a)
    mag = np.abs(a)
    nz = mag > 0
    scale = np.sqrt(2.0 * np.where(nz, mag, 1.0) / math.pi)
    s, c = special.fresnel(half * scale)
    integral = np.where(nz, 2.0 / scale * (c - 1j * np.sign(a) * s), 2.0 * half)
    gap = np.abs(total - integral) / config.side_count
    return float(gap) if gap.ndim == 0 else gap
