import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import pdist

from sparse_upa import ConfigurationError, Point3, SystemConfig, antenna_positions, load_config, upa_positions
from sparse_upa.geometry import index_offsets

configs = st.builds(
    SystemConfig,
    wavelength=st.floats(1e-3, 1.0),
    side_count=st.integers(2, 12),
    spacing=st.floats(1e-3, 1.0),
    total_power=st.floats(0.1, 10.0),
)


def test_middle_antenna_at_center():
    cfg = SystemConfig(0.01, 3, 0.005)
    geo = antenna_positions(cfg, Point3(0, 0, 0))
    assert geo.point(2, 2) == (0.0, 0.0, 0.0)


def test_two_by_two_offsets():
    geo = upa_positions(2, 1.0)
    assert sorted(set(geo.positions[:, 0])) == [-0.5, 0.5]
    np.testing.assert_array_equal(index_offsets(2, 1.0), [-0.5, 0.5])


def test_row_major_order():
    geo = upa_positions(3, 1.0, Point3(1.0, 2.0, 3.0))
    # n outer (x), m inner (y)
    np.testing.assert_allclose(geo.positions[:3, 0], 0.0)
    np.testing.assert_allclose(geo.positions[:3, 1], [1.0, 2.0, 3.0])
    np.testing.assert_allclose(geo.positions[:, 2], 3.0)
    assert geo.point(1, 3) == (0.0, 3.0, 3.0)


@settings(max_examples=50, deadline=None)
@given(configs)
def test_offsets_sum_to_zero(cfg):
    geo = antenna_positions(cfg, Point3(0.3, -0.2, 1.0))
    assert len(geo) == cfg.n_antennas
    np.testing.assert_allclose(geo.offsets.sum(axis=0), 0.0, atol=1e-12 * cfg.spacing * cfg.n_antennas)


@settings(max_examples=50, deadline=None)
@given(configs)
def test_max_pairwise_distance_is_diagonal_aperture(cfg):
    geo = antenna_positions(cfg)
    assert pdist(geo.positions).max() == pytest.approx(math.sqrt(2) * cfg.spacing * (cfg.side_count - 1), rel=1e-12)
    assert cfg.aperture == pytest.approx(pdist(geo.positions).max(), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(configs)
def test_reversed_indices_negate_offsets(cfg):
    offs = antenna_positions(cfg).offsets
    np.testing.assert_allclose(offs[::-1], -offs, atol=1e-15)


def test_adjacent_spacing():
    geo = upa_positions(5, 0.25)
    assert np.diff(geo.positions[::5, 0]) == pytest.approx([0.25] * 4)
    assert np.diff(geo.positions[:5, 1]) == pytest.approx([0.25] * 4)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(wavelength=0.0, side_count=3, spacing=1.0),
        dict(wavelength=0.01, side_count=1, spacing=1.0),
        dict(wavelength=0.01, side_count=3, spacing=-1.0),
        dict(wavelength=0.01, side_count=3, spacing=1.0, total_power=0.0),
        dict(wavelength=0.01, side_count=2.5, spacing=1.0),
        dict(wavelength=float("nan"), side_count=3, spacing=1.0),
    ],
)
def test_invalid_config(kwargs):
    with pytest.raises(ConfigurationError):
        SystemConfig(**kwargs)


def test_derived_quantities():
    cfg = SystemConfig(0.01, 35, 0.1, 2.0)
    assert cfg.n_antennas == 1225
    assert cfg.wavenumber == pytest.approx(200 * math.pi)
    assert cfg.antenna_power == pytest.approx(2.0 / 1225)


def test_config_file_roundtrip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"wavelength_m": 0.01, "side_count": 35, "spacing_in_wavelengths": 10, "total_power_w": 1}))
    cfg = SystemConfig.from_mapping(load_config(path))
    assert cfg.spacing == pytest.approx(0.1)
    assert SystemConfig.from_mapping(cfg.to_mapping()) == cfg


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        load_config(bad)
    with pytest.raises(ConfigurationError):
        SystemConfig.from_mapping({"wavelength_m": 0.01, "side_count": 3})
