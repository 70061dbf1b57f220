"""Green's-function channel coefficients, focusing phases and channel matrices."""

from __future__ import annotations

import cmath
import csv
import math
from pathlib import Path

import numpy as np

from ._parallel import ordered_map
from .errors import ConfigurationError, SingularityError
from .geometry import ArrayGeometry, Point3, SystemConfig, index_offsets

__all__ = [
    "AMPLITUDE_MODES",
    "green_coefficient",
    "focusing_phases",
    "channel_matrix",
    "write_channel_csv",
]

AMPLITUDE_MODES = ("exact", "focal_plane")

# Relative distance below which two points are treated as coincident.
_COINCIDENT_RTOL = 1e-12


def _check_mode(amplitude_mode, focal_distance):
    if amplitude_mode not in AMPLITUDE_MODES:
        raise ConfigurationError(f"amplitude_mode must be one of {AMPLITUDE_MODES}, got {amplitude_mode!r}")
    if amplitude_mode == "focal_plane" and not (focal_distance and focal_distance > 0):
        raise ConfigurationError("focal_plane amplitude mode needs a positive focal_distance")


def green_coefficient(
    tx: Point3,
    rx: Point3,
    wavelength: float,
    amplitude_mode: str = "exact",
    focal_distance: float | None = None,
) -> complex:
    """Free-space Green's function between two points.

    Returns ``-exp(i k |rx - tx|) / (4 pi rho)`` with ``rho = |rx - tx|`` in
    ``"exact"`` mode and ``rho = focal_distance`` in ``"focal_plane"`` mode.
    """
    if not wavelength > 0:
        raise ConfigurationError(f"wavelength must be positive, got {wavelength!r}")
    _check_mode(amplitude_mode, focal_distance)
    dist = math.dist(tx, rx)
    scale = max(math.hypot(*tx), math.hypot(*rx), 1.0)
    if dist <= _COINCIDENT_RTOL * scale:
        raise SingularityError(f"transmit and receive points coincide at {tuple(tx)}")
    rho = dist if amplitude_mode == "exact" else focal_distance
    return -cmath.exp(1j * 2.0 * math.pi / wavelength * dist) / (4.0 * math.pi * rho)


def focusing_phases(config: SystemConfig, focus_distance: float) -> np.ndarray:
    """Conjugate phases ``-k sqrt(x_n^2 + y_m^2 + L^2)`` focusing on ``(0, 0, L)``.

    Returns a ``side_count x side_count`` array indexed ``[n-1, m-1]``.
    """
    if not (math.isfinite(focus_distance) and focus_distance > 0):
        raise ConfigurationError(f"focus distance must be positive, got {focus_distance!r}")
    offs = index_offsets(config.side_count, config.spacing)
    xx, yy = np.meshgrid(offs, offs, indexing="ij")
    return -config.wavenumber * np.sqrt(xx**2 + yy**2 + focus_distance**2)


def _pair_distances(tx_pos: np.ndarray, rx_pos: np.ndarray) -> np.ndarray:
    diff = rx_pos[:, None, :] - tx_pos[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def channel_matrix(
    tx: ArrayGeometry,
    rx: ArrayGeometry,
    wavelength: float,
    threads: int = 1,
) -> np.ndarray:
    """Exact-mode channel matrix with entry ``(j, i) = g(tx_i, rx_j)``.

    Rows index receive antennas and columns transmit antennas, both in
    row-major array order.
    """
    if not wavelength > 0:
        raise ConfigurationError(f"wavelength must be positive, got {wavelength!r}")
    k = 2.0 * math.pi / wavelength
    tx_pos = np.asarray(tx.positions, dtype=float)
    rx_pos = np.asarray(rx.positions, dtype=float)

    step = max(1, 2**20 // len(tx_pos))
    slices = [slice(i, i + step) for i in range(0, len(rx_pos), step)]
    dist = np.vstack(ordered_map(lambda rows: _pair_distances(tx_pos, rx_pos[rows]), slices, threads))
    scale = max(np.abs(tx_pos).max(), np.abs(rx_pos).max(), 1.0)
    if np.any(dist <= _COINCIDENT_RTOL * scale):
        raise SingularityError("transmit and receive arrays overlap")
    return -np.exp(1j * k * dist) / (4.0 * math.pi * dist)


def write_channel_csv(matrix: np.ndarray, path: str | Path) -> None:
    """Export as ``row, col, re, im`` with 0-based indices."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "col", "re", "im"])
        for (j, i), value in np.ndenumerate(matrix):
            writer.writerow([j, i, repr(float(value.real)), repr(float(value.imag))])
