import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_upa import ConfigurationError, Point3, SingularityError, SystemConfig, upa_positions
from sparse_upa.channel import channel_matrix, focusing_phases, green_coefficient, write_channel_csv
from sparse_upa.powerfield import field_power, focal_power

LAM = 0.01

points = st.tuples(*[st.floats(-1.0, 1.0)] * 3)


def test_green_at_one_wavelength():
    g = green_coefficient(Point3(0, 0, 0), Point3(0, 0, LAM), LAM)
    assert g == pytest.approx(-1 / (4 * math.pi * LAM), rel=1e-12, abs=1e-9)


def test_green_at_half_wavelength():
    g = green_coefficient(Point3(0, 0, 0), Point3(0, 0, LAM / 2), LAM)
    assert g.real == pytest.approx(1 / (2 * math.pi * LAM), rel=1e-12)
    assert abs(g.imag) < 1e-9


@settings(max_examples=100, deadline=None)
@given(points, points)
def test_green_modulus(a, b):
    d = math.dist(a, b)
    if d < 1e-6:
        return
    g = green_coefficient(Point3(*a), Point3(*b), LAM)
    assert abs(g) * 4 * math.pi * d == pytest.approx(1.0, rel=1e-12)


def test_green_focal_plane_amplitude():
    g = green_coefficient(Point3(0, 0, 0), Point3(0.1, 0, 40.0), LAM, "focal_plane", 40.0)
    assert abs(g) == pytest.approx(1 / (4 * math.pi * 40.0), rel=1e-14)


def test_green_errors():
    with pytest.raises(SingularityError):
        green_coefficient(Point3(1, 2, 3), Point3(1, 2, 3), LAM)
    with pytest.raises(ConfigurationError):
        green_coefficient(Point3(0, 0, 0), Point3(0, 0, 1), 0.0)
    with pytest.raises(ConfigurationError):
        green_coefficient(Point3(0, 0, 0), Point3(0, 0, 1), LAM, "focal_plane")
    with pytest.raises(ConfigurationError):
        green_coefficient(Point3(0, 0, 0), Point3(0, 0, 1), LAM, "bogus")


def test_exact_modulus_decreases_with_distance():
    mags = [abs(green_coefficient(Point3(0, 0, 0), Point3(0, 0, z), LAM)) for z in np.linspace(0.01, 5, 50)]
    assert np.all(np.diff(mags) < 0)


def test_focusing_phase_center_and_symmetry():
    cfg = SystemConfig(LAM, 35, 10 * LAM)
    L = 40.0
    th = focusing_phases(cfg, L)
    assert th.shape == (35, 35)
    assert th[17, 17] == pytest.approx(-2 * math.pi * L / LAM, rel=1e-15)
    np.testing.assert_array_equal(th, th.T)
    np.testing.assert_array_equal(th, th[::-1, :])
    assert np.all(th <= 0) and np.all(np.isfinite(th))


def test_focusing_phase_rejects_bad_distance():
    with pytest.raises(ConfigurationError):
        focusing_phases(SystemConfig(LAM, 3, LAM), 0.0)


def _focus_power(cfg, L, phases):
    """P0 with focal-plane amplitudes for arbitrary phases."""
    offs = (np.arange(1, cfg.side_count + 1) - (cfg.side_count + 1) / 2) * cfg.spacing
    xx, yy = np.meshgrid(offs, offs, indexing="ij")
    t = -np.exp(1j * cfg.wavenumber * np.sqrt(xx**2 + yy**2 + L**2)) / (4 * math.pi * L)
    return cfg.antenna_power * abs(np.sum(t * np.exp(1j * phases))) ** 2


def test_aligned_phasors_reach_peak():
    cfg = SystemConfig(LAM, 15, 2 * LAM, 3.0)
    L = 5.0
    p0 = _focus_power(cfg, L, focusing_phases(cfg, L))
    assert p0 == pytest.approx(cfg.total_power * cfg.n_antennas / (4 * math.pi * L) ** 2, rel=1e-10)
    assert focal_power(cfg, L) == pytest.approx(p0, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 48), st.floats(1e-3, math.pi - 1e-3))
def test_single_phase_perturbation_never_increases_power(idx, delta):
    cfg = SystemConfig(LAM, 7, 3 * LAM)
    L = 2.0
    phases = focusing_phases(cfg, L)
    best = _focus_power(cfg, L, phases)
    phases.flat[idx] += delta
    assert _focus_power(cfg, L, phases) < best


def test_one_by_one_channel():
    tx = upa_positions(1, LAM)
    rx = upa_positions(1, LAM, Point3(0, 0, LAM))
    G = channel_matrix(tx, rx, LAM)
    assert G.shape == (1, 1)
    assert G[0, 0] == pytest.approx(-1 / (4 * math.pi * LAM), rel=1e-12, abs=1e-9)


def test_reciprocity():
    tx = upa_positions(3, 2 * LAM)
    rx = upa_positions(4, LAM, Point3(0.1, 0.0, 1.0))
    np.testing.assert_allclose(channel_matrix(rx, tx, LAM), channel_matrix(tx, rx, LAM).T, rtol=1e-14)


def test_channel_matrix_against_entrywise_oracle():
    """3x3 arrays at L = 100 lambda: singular values of a per-entry cmath rebuild."""
    tx = upa_positions(3, LAM / 2)
    rx = upa_positions(3, LAM / 2, Point3(0, 0, 100 * LAM))
    G = channel_matrix(tx, rx, LAM, threads=2)
    oracle = np.empty((9, 9), dtype=complex)
    for j, r in enumerate(rx.positions):
        for i, t in enumerate(tx.positions):
            d = math.sqrt(sum((a - b) ** 2 for a, b in zip(r, t)))
            oracle[j, i] = -cmath.exp(2j * math.pi * d / LAM) / (4 * math.pi * d)
    np.testing.assert_allclose(G, oracle, rtol=1e-12)
    # Independent decomposition: eigenvalues of the Gram matrix.
    ev = np.sort(np.linalg.eigvalsh(oracle @ oracle.conj().T))[::-1]
    sv = np.linalg.svd(G, compute_uv=False)
    top = sv[0]
    np.testing.assert_allclose(sv[:3], np.sqrt(ev[:3]), rtol=1e-10)
    np.testing.assert_allclose(sv**2 / top**2, np.clip(ev, 0, None) / top**2, atol=1e-12)


def test_channel_overlap_is_singular():
    with pytest.raises(SingularityError):
        channel_matrix(upa_positions(2, LAM), upa_positions(2, LAM), LAM)


def test_channel_entries_match_green():
    tx = upa_positions(2, LAM)
    rx = upa_positions(2, LAM, Point3(0.0, 0.05, 0.5))
    G = channel_matrix(tx, rx, LAM)
    for j, r in enumerate(rx.positions):
        for i, t in enumerate(tx.positions):
            assert G[j, i] == pytest.approx(green_coefficient(Point3(*t), Point3(*r), LAM), rel=1e-12)


def test_channel_csv(tmp_path):
    G = channel_matrix(upa_positions(2, LAM), upa_positions(2, LAM, Point3(0, 0, 1.0)), LAM)
    path = tmp_path / "g.csv"
    write_channel_csv(G, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "row,col,re,im"
    assert len(lines) == 17
    row, col, re, im = lines[6].split(",")
    assert complex(float(re), float(im)) == G[int(row), int(col)]


def test_field_power_focus_equals_peak():
    cfg = SystemConfig(LAM, 35, 10 * LAM)
    L = 40.0
    p = field_power(cfg, L, [[0, 0, L]], "focal_plane")[0]
    assert p == pytest.approx(focal_power(cfg, L), rel=1e-12)
