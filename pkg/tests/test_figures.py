import math

import numpy as np
import pytest
from scipy import integrate, special

from quasiprob import eigen_lattice
from quasiprob.figures import (
    EPSILON_SWEEP,
    check_panel,
    figure_panels,
    local_extrema,
    radial_wigner_profile,
)
from quasiprob.wigner_reg import DensityGrid, GridSpec


@pytest.fixture(scope="module", params=[1, 3, 8])
def panels(request):
    return request.param, figure_panels(request.param, 128)


def test_panel_sets(panels):
    figure, got = panels
    expected = {1: 4, 3: 5, 8: len(EPSILON_SWEEP)}[figure]
    assert len(got) == expected
    assert all(p.density.resolution == (128, 128) for p in got)


def test_panel_bumps_match_predictions(panels):
    for panel in panels[1]:
        result = check_panel(panel)
        assert result.ok, result
        assert result.n_extrema > 0


def test_fig3_atom_counts():
    for panel in figure_panels(3, 32):
        if panel.kind == "mh":
            m = panel.measure.meta["m"]
            assert len(panel.lattice) == (m + 1) ** 2
            assert len(panel.measure) <= (m + 1) ** 2


def test_fig8_lattice_is_spin_three_halves():
    panel = figure_panels(8, 32)[0]
    assert len(panel.lattice) == (3 * 5 + 1) ** 2
    assert [p.density.epsilon for p in figure_panels(8, 16)] == list(EPSILON_SWEEP)


def test_plateau_counts_once():
    values = np.zeros((7, 7))
    values[2:4, 3] = 1.0  # two tied pixels
    values[5, 5] = -0.5
    grid = DensityGrid(GridSpec.square(3.0, 7), values)
    ext = sorted(local_extrema(grid), key=lambda e: e.sign)
    assert [(e.sign, e.x1, e.x2) for e in ext] == [(-1, 2.0, 2.0), (1, -0.5, 0.0)]


def test_small_extrema_ignored():
    values = np.zeros((9, 9))
    values[2, 2], values[6, 6] = 1.0, 0.01
    ext = local_extrema(DensityGrid(GridSpec.square(1.0, 9), values))
    assert len(ext) == 1


def test_radial_profile_matches_plane_quadrature():
    # direct 2-d quadrature of cos|xi| exp(-eps |xi|^2) exp(-i x.xi) at (r, 0)
    eps = 0.01
    top = math.sqrt(-math.log(1e-14) / eps)
    for r in (0.0, 0.6, 1.0735):
        def integrand(rho, phi):
            return math.cos(rho) * math.exp(-eps * rho * rho) * math.cos(r * rho * math.cos(phi)) * rho

        val, _ = integrate.dblquad(integrand, 0, math.pi, 0, top, epsabs=1e-10, epsrel=1e-10)
        assert radial_wigner_profile(r, eps)[0][0] == pytest.approx(val / (2 * math.pi ** 2), abs=1e-8)


def test_radial_profile_values():
    p, dp = radial_wigner_profile(np.array([0.6, 1.0735]), 0.01)
    assert p[0] == pytest.approx(-0.43229, abs=1e-4)
    assert p[1] == pytest.approx(1.0710, abs=1e-3)
    assert abs(dp[1]) < 1e-2
    # derivative agrees with a central difference
    h = 1e-4
    fd = (radial_wigner_profile(0.9 + h, 0.01)[0] - radial_wigner_profile(0.9 - h, 0.01)[0]) / (2 * h)
    assert radial_wigner_profile(0.9, 0.01)[1][0] == pytest.approx(fd[0], rel=1e-5)
    assert special.j0(0) == 1


def test_ring_plateau_sits_on_its_medial_line():
    grid = GridSpec.square(1.0, 41)
    x1, x2 = grid.axes()
    r = np.hypot(x1[:, None], x2[None, :])
    values = np.where(np.abs(r - 0.6) <= 0.08, 1.0, 0.5 - np.abs(r - 0.6))
    ext = local_extrema(DensityGrid(grid, values))
    top = [e for e in ext if e.sign == 1]
    assert len(top) == 1
    assert math.hypot(top[0].x1, top[0].x2) == pytest.approx(0.6, abs=0.05)
