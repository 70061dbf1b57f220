"""Effective degrees of freedom (EDoF) of array-to-array channels.

Three estimators are provided:

* :func:`edof_direct` counts the singular values needed to capture a
  fraction (default 99.9%) of the channel energy;
* :func:`edof_area` is the aperture-product rule ``A_S A_R / (lambda L)^2``;
* :func:`edof_trace` is ``(sum mu^2)^2 / sum mu^4``.

:class:`EDoFSurfaceRegressor` fits the direct EDoF over user positions
``(theta, r)`` in the XoZ plane with the total-degree-5 polynomial basis
``cos(theta)^i (r / lambda)^j``, ``i + j <= 5``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._parallel import ordered_map
from .channel import channel_matrix
from .errors import ConfigurationError, DegenerateChannelError, FittingError, InvalidInputError, NumericError
from .geometry import Point3, SystemConfig, antenna_positions, upa_positions

__all__ = [
    "SingularSpectrum",
    "ReceiveArray",
    "EDoFGrid",
    "EDoFSurface",
    "EDoFSurfaceRegressor",
    "REFERENCE_COEFFICIENTS",
    "surface_terms",
    "singular_spectrum",
    "edof_direct",
    "edof_area",
    "edof_trace",
    "edof_trace_matrix",
    "fitting_constraint",
    "edof_grid",
    "fit_edof_surface",
    "eval_edof_surface",
    "default_thetas",
    "default_radii",
]

SURFACE_DEGREE = 5

# Reference coefficients for a 35x35 transmit UPA (d = 10 lambda) serving a
# 9x9 receive UPA (spacing 2 lambda), theta in [0, pi/2 - pi/30],
# r in [1000, 4000] lambda. Terms with i + j > 5 are zero.
REFERENCE_COEFFICIENTS = {
    (0, 0): 63.36, (0, 1): -0.1048, (0, 2): 8.034e-5, (0, 3): -3.129e-8, (0, 4): 6.014e-12, (0, 5): -4.513e-16,
    (1, 0): 204.0, (1, 1): -0.2026, (1, 2): 9.282e-5, (1, 3): -1.957e-8, (1, 4): 1.518e-12,
    (2, 0): -91.16, (2, 1): 0.03111, (2, 2): -1.074e-5, (2, 3): 1.609e-9,
    (3, 0): 95.1, (3, 1): 0.003449, (3, 2): -1.735e-6,
    (4, 0): -84.82, (4, 1): 0.0008277,
    (5, 0): 29.58,
}


def surface_terms(degree: int = SURFACE_DEGREE) -> list[tuple[int, int]]:
    """Exponent pairs ``(i, j)`` with ``i + j <= degree`` in ``i``-major order."""
    return [(i, j) for i in range(degree + 1) for j in range(degree + 1 - i)]


class SingularSpectrum(NamedTuple):
    values: np.ndarray


def singular_spectrum(matrix: np.ndarray) -> SingularSpectrum:
    """All singular values of ``matrix`` in descending order."""
    g = np.asarray(matrix)
    if not np.all(np.isfinite(g)):
        raise NumericError("channel matrix contains non-finite entries")
    try:
        mu = np.linalg.svd(g, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD failed: {exc}") from None
    return SingularSpectrum(np.sort(mu)[::-1])


def _energies(spectrum) -> np.ndarray:
    mu = np.asarray(getattr(spectrum, "values", spectrum), dtype=float)
    if mu.size == 0:
        raise DegenerateChannelError("empty singular spectrum")
    if np.any(mu < 0) or not np.all(np.isfinite(mu)):
        raise ValueError("singular values must be finite and non-negative")
    top = mu.max()
    if top == 0:
        raise DegenerateChannelError("all singular values are zero")
    # Normalizing by the largest value makes the estimators exactly scale-invariant.
    return np.sort(mu / top)[::-1] ** 2


def edof_direct(spectrum, energy_fraction: float = 0.999) -> int:
    """Smallest ``n`` whose leading ``n`` squared singular values hold
    ``energy_fraction`` of the total energy."""
    if not 0 < energy_fraction < 1:
        raise ConfigurationError(f"energy_fraction must lie in (0, 1), got {energy_fraction!r}")
    e = _energies(spectrum)
    cum = np.cumsum(e)
    n = int(np.searchsorted(cum, energy_fraction * cum[-1], side="left")) + 1
    return min(n, e.size)


def edof_area(area_tx: float, area_rx: float, wavelength: float, distance: float) -> float:
    """Aperture-product estimate ``A_S A_R / (lambda^2 L^2)``."""
    for name, value in (("area_tx", area_tx), ("area_rx", area_rx), ("wavelength", wavelength), ("distance", distance)):
        if not value > 0:
            raise ConfigurationError(f"{name} must be positive, got {value!r}")
    return area_tx * area_rx / (wavelength**2 * distance**2)


def edof_trace(spectrum) -> float:
    """``(sum mu^2)^2 / sum mu^4`` from a singular spectrum."""
    e = _energies(spectrum)
    return math.fsum(e) ** 2 / math.fsum(e * e)


def edof_trace_matrix(matrix: np.ndarray) -> float:
    """``tr(G G^H)^2 / ||G G^H||_F^2`` computed without an SVD."""
    g = np.asarray(matrix)
    gram = g @ g.conj().T
    fro2 = float(np.sum(np.abs(gram) ** 2))
    if fro2 == 0:
        raise DegenerateChannelError("channel matrix is zero")
    return float(np.trace(gram).real) ** 2 / fro2


def fitting_constraint(config_tx: SystemConfig, rx_spacing: float, r_min: float) -> bool:
    """True when the nearest receive antenna lies before the first lateral null
    at every distance ``r >= r_min``: ``d d_rx sqrt(N) / (lambda r_min) < 1``."""
    if not (rx_spacing >= 0 and r_min > 0):
        raise ConfigurationError("rx_spacing must be >= 0 and r_min > 0")
    return config_tx.spacing * rx_spacing * config_tx.side_count / (config_tx.wavelength * r_min) < 1.0


@dataclass(frozen=True)
class ReceiveArray:
    side_count: int
    spacing: float


def default_thetas(n: int | None = None) -> np.ndarray:
    """Angles on ``[0, pi/2 - pi/30]``; step ``pi/60`` unless ``n`` points are requested."""
    hi = math.pi / 2 - math.pi / 30
    if n is None:
        return np.arange(29) * (math.pi / 60)
    return np.linspace(0.0, hi, n)


def default_radii(wavelength: float, n: int | None = None) -> np.ndarray:
    """Distances on ``[1000, 4000] lambda``; step ``100 lambda`` unless ``n`` points are requested."""
    if n is None:
        return (1000.0 + 100.0 * np.arange(31)) * wavelength
    return np.linspace(1000.0, 4000.0, n) * wavelength


@dataclass
class EDoFGrid:
    """Direct EDoF (and the two closed-form estimates) on a ``(theta, r)`` grid."""

    thetas: np.ndarray
    radii: np.ndarray
    values: np.ndarray
    trace: np.ndarray | None = None
    area: np.ndarray | None = None

    def samples(self) -> tuple[np.ndarray, np.ndarray]:
        """Flatten to ``X = [[theta, r], ...]`` and ``y`` in theta-major order."""
        tt, rr = np.meshgrid(self.thetas, self.radii, indexing="ij")
        return np.column_stack([tt.ravel(), rr.ravel()]), self.values.ravel().astype(float)


def edof_grid(
    config_tx: SystemConfig,
    rx: ReceiveArray,
    thetas,
    radii,
    energy_fraction: float = 0.999,
    threads: int = 1,
) -> EDoFGrid:
    """Direct EDoF with the receive UPA centred at ``(r sin theta, 0, r cos theta)``.

    The receive array stays parallel to the transmit array.

    Raises
    ------
    InvalidInputError
        If the fitting constraint fails at ``min(radii)``.
    """
    thetas = np.asarray(thetas, dtype=float).ravel()
    radii = np.asarray(radii, dtype=float).ravel()
    if thetas.size == 0 or radii.size == 0:
        raise ConfigurationError("thetas and radii must be non-empty")
    if not fitting_constraint(config_tx, rx.spacing, radii.min()):
        raise InvalidInputError(
            "Invalid Input: d * d_rx * sqrt(N) / (lambda * r_min) must be < 1 "
            f"(got {config_tx.spacing * rx.spacing * config_tx.side_count / (config_tx.wavelength * radii.min()):.6g})"
        )
    tx = antenna_positions(config_tx)
    lam = config_tx.wavelength
    area_tx = tx.area

    def cell(idx):
        theta, r = thetas[idx[0]], radii[idx[1]]
        rx_geo = upa_positions(rx.side_count, rx.spacing, Point3(r * math.sin(theta), 0.0, r * math.cos(theta)))
        spec = singular_spectrum(channel_matrix(tx, rx_geo, lam))
        return (edof_direct(spec, energy_fraction), edof_trace(spec), edof_area(area_tx, rx_geo.area, lam, r))

    cells = [(i, j) for i in range(thetas.size) for j in range(radii.size)]
    results = np.array(ordered_map(cell, cells, threads), dtype=float).reshape(thetas.size, radii.size, 3)
    return EDoFGrid(thetas, radii, results[..., 0].astype(int), results[..., 1], results[..., 2])


def _design(theta: np.ndarray, r_over_lambda: np.ndarray, terms) -> np.ndarray:
    c = np.cos(theta)
    return np.column_stack([c**i * r_over_lambda**j for i, j in terms])


class EDoFSurfaceRegressor(RegressorMixin, BaseEstimator):
    """Least-squares polynomial surface in ``cos(theta)`` and ``r / wavelength``.

    Parameters
    ----------
    wavelength : float
        Used to express ``r`` in wavelengths.
    degree : int
        Total degree of the basis; 5 gives 21 terms.

    Attributes
    ----------
    coef_ : ndarray of shape (n_terms,)
        Coefficients ordered as ``terms_``.
    terms_ : list of (i, j)
    r2_ : float
        Coefficient of determination on the training data.
    max_residual_ : float
    """

    def __init__(self, wavelength: float = 0.01, degree: int = SURFACE_DEGREE):
        self.wavelength = wavelength
        self.degree = degree

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        if X.shape[1] != 2:
            raise ValueError("X must have two columns: theta (rad), r (m)")
        if not self.wavelength > 0:
            raise ConfigurationError("wavelength must be positive")
        terms = surface_terms(self.degree)
        if len(np.unique(X, axis=0)) < len(terms):
            raise FittingError(f"need at least {len(terms)} distinct (theta, r) points")
        A = _design(X[:, 0], X[:, 1] / self.wavelength, terms)
        # Column scaling: (r/lambda)^5 spans ~1e15 over typical grids.
        norms = np.linalg.norm(A, axis=0)
        if np.any(norms == 0):
            raise FittingError("basis column vanishes on the grid")
        scaled, _, rank, sv = np.linalg.lstsq(A / norms, y, rcond=None)
        if rank < len(terms):
            raise FittingError(f"design matrix is rank deficient ({rank} < {len(terms)})")
        self.terms_ = terms
        self.coef_ = scaled / norms
        self.condition_number_ = float(sv[0] / sv[-1])
        resid = y - A @ self.coef_
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        self.r2_ = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
        self.max_residual_ = float(np.max(np.abs(resid)))
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        return _design(X[:, 0], X[:, 1] / self.wavelength, self.terms_) @ self.coef_

    def to_surface(self) -> EDoFSurface:
        check_is_fitted(self, "coef_")
        return EDoFSurface(dict(zip(self.terms_, map(float, self.coef_))), self.r2_, self.max_residual_)


@dataclass
class EDoFSurface:
    """Coefficients ``p_ij`` of ``sum p_ij cos(theta)^i (r/lambda)^j``."""

    coefficients: dict[tuple[int, int], float]
    r2: float | None = None
    max_residual: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        expected = set(surface_terms())
        given = set(self.coefficients)
        if not given <= expected:
            raise ConfigurationError(f"coefficients outside i + j <= {SURFACE_DEGREE}: {sorted(given - expected)}")
        self.coefficients = {t: float(self.coefficients.get(t, 0.0)) for t in surface_terms()}

    def __call__(self, theta, r, wavelength):
        return eval_edof_surface(self, theta, r, wavelength)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if self.r2 is not None:
                fh.write(f"# r2: {float(self.r2)!r}\n")
            if self.max_residual is not None:
                fh.write(f"# max_residual: {float(self.max_residual)!r}\n")
            for key, value in self.meta.items():
                fh.write(f"# {key}: {value}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["i", "j", "p_ij"])
            for (i, j), p in self.coefficients.items():
                writer.writerow([i, j, repr(p)])

    @classmethod
    def from_csv(cls, path: str | Path) -> EDoFSurface:
        coeffs, meta = {}, {}
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        body = []
        for line in lines:
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
            elif line.strip():
                body.append(line)
        for row in csv.DictReader(body):
            coeffs[int(row["i"]), int(row["j"])] = float(row["p_ij"])
        r2 = float(meta.pop("r2")) if "r2" in meta else None
        max_res = float(meta.pop("max_residual")) if "max_residual" in meta else None
        return cls(coeffs, r2, max_res, meta)


def fit_edof_surface(grid: EDoFGrid, wavelength: float) -> EDoFSurface:
    """Fit the degree-5 surface to ``grid`` and report R^2 and max residual."""
    X, y = grid.samples()
    return EDoFSurfaceRegressor(wavelength=wavelength).fit(X, y).to_surface()


def eval_edof_surface(surface: EDoFSurface, theta, r, wavelength: float):
    """Evaluate the fitted surface at angle ``theta`` (rad) and distance ``r`` (m)."""
    c = np.cos(np.asarray(theta, dtype=float))
    x = np.asarray(r, dtype=float) / wavelength
    total = np.zeros(np.broadcast(c, x).shape)
    for (i, j), p in surface.coefficients.items():
        if p:
            total = total + p * c**i * x**j
    return float(total) if total.ndim == 0 else total
