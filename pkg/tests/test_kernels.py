import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fracosgood.grid import Field, Grid, InitialData, ResolutionError, sample_u0
from fracosgood.kernels import (
    KernelSet,
    estimate_band,
    green_G,
    kernel_Y,
    kernel_Z,
    lp_thresholds,
    mass,
    predicted_lp_slope,
    r_apply,
    s_apply,
    subordination_rule,
    validate_lp_laws,
    validate_pointwise_bands,
    volterra_link_residual,
    y_mass_target,
)
from fracosgood.specfun import DomainError, gamma_kernel
from fracosgood.symbol import SpectralMeasure, Symbol

SYM1 = Symbol(1.0, SpectralMeasure.symmetric())


@pytest.fixture(scope="module")
def wide():
    return Grid(1, 1 << 16, 2000.0)


class TestGreen:
    @pytest.mark.parametrize("t", [0.3, 1.0])
    def test_cauchy(self, wide, t):
        G = green_G(KernelSet(0.5, SYM1, wide), t)
        x = wide.x
        inner = np.abs(x) < 100
        assert_allclose(G.values[inner], (t / (math.pi * (t * t + x * x)))[inner], atol=1e-6)

    def test_mass_and_positivity(self, wide):
        G = green_G(KernelSet(0.5, Symbol(1.5, SpectralMeasure.symmetric()), wide), 0.7)
        assert_allclose(mass(G), 1.0, rtol=1e-12)
        assert G.values.min() >= -1e-8 * G.values.max()

    def test_semigroup(self, wide):
        ks = KernelSet(0.5, SYM1, wide)
        lhs = ks.apply_hat(ks.g_hat(0.4), green_G(ks, 0.6))
        assert_allclose(lhs.values, green_G(ks, 1.0).values, atol=1e-8)

    def test_alias_check(self):
        ks = KernelSet(0.5, SYM1, Grid(1, 256, 4.0))
        with pytest.raises(ResolutionError):
            green_G(ks, 1.0)
        green_G(ks, 1.0, check=False)


class TestZY:
    @pytest.mark.parametrize("alpha", [0.3, 0.6, 0.9])
    @pytest.mark.parametrize("t", [0.1, 1.0])
    def test_masses(self, alpha, t):
        ks = KernelSet(alpha, Symbol(1.2, SpectralMeasure.symmetric()), Grid(1, 1 << 15, 4000.0))
        assert_allclose(mass(kernel_Z(ks, t)), 1.0, rtol=1e-10)
        assert_allclose(mass(kernel_Y(ks, t)), gamma_kernel(alpha, t), rtol=1e-10)
        assert y_mass_target(alpha, t) == gamma_kernel(alpha, t)

    @pytest.mark.parametrize("alpha,beta", [(0.3, 0.8), (0.5, 1.0), (0.8, 1.5)])
    def test_positivity(self, alpha, beta):
        ks = KernelSet(alpha, Symbol(beta, SpectralMeasure.symmetric()), Grid(1, 1 << 17, 16000.0))
        for K in (kernel_Z(ks, 0.5), kernel_Y(ks, 0.5)):
            assert K.values.min() >= -1e-8 * K.values.max()

    @pytest.mark.parametrize("t", [0.05, 0.5])
    def test_scaling_on_matched_grids(self, t):
        alpha, beta = 0.7, 1.3
        sym = Symbol(beta, SpectralMeasure.symmetric())
        base = Grid(1, 1 << 15, 3000.0)
        ell = t ** (alpha / beta)
        ks1 = KernelSet(alpha, sym, base)
        kst = KernelSet(alpha, sym, base.rescaled(ell))
        z1, zt = kernel_Z(ks1, 1.0).values, kernel_Z(kst, t).values
        assert_allclose(zt, t ** (-alpha / beta) * z1, rtol=1e-6, atol=1e-12 * z1.max())
        y1, yt = kernel_Y(ks1, 1.0).values, kernel_Y(kst, t).values
        assert_allclose(yt, t ** (-alpha / beta + alpha - 1) * y1, rtol=1e-6, atol=1e-12 * y1.max())

    def test_cross_route_half_order(self):
        ks = KernelSet(0.5, SYM1, Grid(1, 1 << 16, 5000.0))
        zs = kernel_Z(ks, 0.5).values
        zq = kernel_Z(ks, 0.5, route="subordination").values
        assert np.max(np.abs(zs - zq)) <= 1e-4 * np.max(zs)

    def test_subordination_weights(self):
        for alpha in (0.3, 0.5, 0.8):
            s, w = subordination_rule(alpha)
            assert np.all(w > 0) and np.all(s > 0)
            assert_allclose(w.sum(), 1.0, atol=1e-6)

    def test_volterra_link(self):
        ks = KernelSet(0.6, SYM1, Grid(1, 1 << 15, 4000.0))
        res, zmax = volterra_link_residual(ks, 0.5)
        assert res <= 1e-3 * zmax

    def test_invalid(self):
        with pytest.raises(DomainError):
            KernelSet(1.0, SYM1, Grid(1, 16, 1.0))
        with pytest.raises(DomainError):
            KernelSet(0.5, SYM1, Grid(2, 16, 1.0))
        with pytest.raises(DomainError):
            KernelSet(0.5, SYM1, Grid(1, 16, 1.0), route="fox")
        ks = KernelSet(0.5, SYM1, Grid(1, 1 << 12, 500.0))
        with pytest.raises(DomainError):
            kernel_Z(ks, 0.0)


class TestOperators:
    @pytest.fixture
    def ks(self):
        return KernelSet(0.4, Symbol(0.9, SpectralMeasure.symmetric()), Grid(1, 1 << 12, 200.0))

    def test_s_on_constant(self, ks):
        u = sample_u0(ks.grid, InitialData.constant(3.0))
        assert_allclose(s_apply(ks, 0.7, u).values, 3.0, rtol=1e-13)

    def test_r_on_constant(self, ks):
        u = sample_u0(ks.grid, InitialData.constant(3.0))
        assert_allclose(r_apply(ks, 0.7, u).values, 3.0 * gamma_kernel(0.4, 0.7), rtol=1e-13)

    def test_positivity_preserved(self, ks):
        u = sample_u0(ks.grid, InitialData.gaussian(0.5))
        for op in (s_apply, r_apply):
            v = op(ks, 0.3, u).values
            assert v.min() >= -1e-8 * v.max()

    def test_grid_mismatch(self, ks):
        other = Field(Grid(1, 1 << 11, 200.0), np.ones(1 << 11))
        with pytest.raises(DomainError):
            s_apply(ks, 0.5, other)


@pytest.fixture(scope="module")
def lp_ks():
    return KernelSet(0.6, SYM1, Grid(1, 1 << 16, 4000.0))


class TestLpLaws:
    def test_z_p1_flat(self, lp_ks):
        rep = validate_lp_laws(lp_ks, 1, np.geomspace(1e-2, 1, 5), "Z")
        assert abs(rep.slope) < 1e-10

    def test_z_p2(self, lp_ks):
        rep = validate_lp_laws(lp_ks, 2, np.geomspace(1e-2, 1, 5), "Z")
        assert rep.predicted == pytest.approx(-0.3)
        assert rep.passed(0.05)

    def test_y_p1(self, lp_ks):
        rep = validate_lp_laws(lp_ks, 1, np.geomspace(1e-2, 1, 5), "Y")
        assert_allclose(rep.slope, -0.4, atol=1e-10)
        assert rep.c_lower > 0 and rep.c_upper / rep.c_lower < 1.01

    def test_membership_fails_above_threshold(self):
        ks = KernelSet(0.6, Symbol(0.8, SpectralMeasure.symmetric()), Grid(1, 1 << 15, 16000.0))
        rep = validate_lp_laws(ks, 6, np.geomspace(1e-2, 1, 5), "Z")
        assert not rep.member
        assert np.all(np.diff(rep.refinement_norms) > 0)

    def test_thresholds(self):
        assert lp_thresholds(1, 1.0) == (math.inf, math.inf)
        k1, k2 = lp_thresholds(2, 0.8)
        assert_allclose([k1, k2], [2 / 1.2, 2 / 0.4])
        assert predicted_lp_slope(0.6, 1.0, 1, 1, "Y") == pytest.approx(-0.4)

    def test_short_range_rejected(self, lp_ks):
        with pytest.raises(DomainError):
            validate_lp_laws(lp_ks, 2, [0.1, 0.5, 1.0])


class TestBands:
    def test_regime_and_log_factor(self):
        b = estimate_band("Z", 0.5, 1.0, 1, 1.0, 0.01)
        assert b.regime == "inner"
        assert b.envelope(1.0) == pytest.approx(abs(math.log(0.01)) + 1)
        assert estimate_band("Z", 0.5, 1.0, 1, 1.0, 4.0).regime == "outer"

    def test_z_inner_critical_dimension(self):
        ks = KernelSet(0.6, SYM1, Grid(1, 1 << 12, 50.0))
        rep = validate_pointwise_bands(ks, 1.0, np.geomspace(1e-3, 1, 13), "Z")
        assert rep.bounded

    def test_z_tail(self):
        ks = KernelSet(0.6, SYM1, Grid(1, 1 << 12, 50.0))
        rep = validate_pointwise_bands(ks, 0.5, np.geomspace(2, 200, 9), "Z")
        assert np.all(rep.omegas >= 1)
        assert rep.bounded

    def test_y_inner_supercritical(self):
        ks = KernelSet(0.6, Symbol(0.4, SpectralMeasure.symmetric()), Grid(1, 1 << 12, 50.0))
        rep = validate_pointwise_bands(ks, 1.0, np.geomspace(1e-3, 0.9, 10), "Y")
        assert rep.bounded
        assert rep.to_json()["bounded"]

    def test_t_range(self):
        ks = KernelSet(0.6, SYM1, Grid(1, 1 << 12, 50.0))
        with pytest.raises(DomainError):
            validate_pointwise_bands(ks, 2.0, [0.5])
