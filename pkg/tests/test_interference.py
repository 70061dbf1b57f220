import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_upa import ConfigurationError, SingularityError, SystemConfig
from sparse_upa.interference import UserGrid, region_interference, user_powers
from sparse_upa.powerfield import focal_power

LAM = 0.01
L = 4000 * LAM


def test_single_user_at_focus(sparse):
    grid = UserGrid((0.0, 1.0), (0.0, 1.0), 1, 1)
    assert region_interference(sparse, L, grid) == pytest.approx(
        sparse.total_power * sparse.n_antennas / (4 * math.pi * L) ** 2, rel=1e-12)
    assert region_interference(sparse, L, grid) == pytest.approx(focal_power(sparse, L), rel=1e-12)


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        UserGrid((1.0, 1.0), (0.0, 1.0))
    with pytest.raises(ConfigurationError):
        UserGrid((0.0, 1.0), (0.0, 1.0), 0, 3)


def test_layout():
    grid = UserGrid.around_focus(LAM, x_count=5, z_count=7)
    pts = grid.positions(L)
    assert grid.n_users == 35 == len(pts)
    assert pts[0, 0] == pytest.approx(-2000 * LAM) and pts[-1, 2] == pytest.approx(L + 3000 * LAM)
    assert np.all(pts[:, 1] == 0)
    assert grid.cell_area == pytest.approx((4000 * LAM / 4) * (6000 * LAM / 6))


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 10.0), st.floats(10.0, 1500.0), st.floats(-2000.0, 2000.0))
def test_mirror_invariance(d, x_hi, z_lo):
    cfg = SystemConfig(LAM, 11, d * LAM)
    a = UserGrid((5 * LAM, x_hi * LAM), (z_lo * LAM, (z_lo + 500) * LAM), 9, 7)
    b = UserGrid((-x_hi * LAM, -5 * LAM), (z_lo * LAM, (z_lo + 500) * LAM), 9, 7)
    assert region_interference(cfg, L, a) == pytest.approx(region_interference(cfg, L, b), rel=1e-9)


def test_adding_users_increases_sum(sparse):
    base = UserGrid.around_focus(LAM, x_count=11, z_count=13)
    powers = user_powers(sparse, L, base)
    assert np.all(powers > 0)
    flat = powers.ravel()
    sums = [math.fsum(flat[:k]) for k in range(1, flat.size + 1)]
    assert np.all(np.diff(sums) > 0)


def test_order_independent(sparse):
    grid = UserGrid.around_focus(LAM, x_count=21, z_count=31)
    p = user_powers(sparse, L, grid).ravel()
    rng = np.random.default_rng(0)
    assert math.fsum(rng.permutation(p)) == region_interference(sparse, L, grid)
    assert region_interference(sparse, L, grid, threads=4) == region_interference(sparse, L, grid)


def test_singularity(sparse):
    grid = UserGrid((0.0, 0.1), (-L, -L + 1.0), 2, 2)
    with pytest.raises(SingularityError):
        region_interference(sparse, L, grid)


@pytest.mark.slow
@pytest.mark.parametrize("d", [0.5, 10.0])
def test_refinement_stable(d):
    cfg = SystemConfig(LAM, 35, d * LAM)
    coarse = UserGrid.around_focus(LAM)
    fine = UserGrid.around_focus(LAM, x_count=401, z_count=601)
    a = region_interference(cfg, L, coarse, threads=4) * coarse.cell_area
    b = region_interference(cfg, L, fine, threads=4) * fine.cell_area
    assert abs(a - b) / b < 0.05
