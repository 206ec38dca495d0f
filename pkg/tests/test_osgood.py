import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from fracosgood.osgood import (
    OsgoodFunction,
    TruncationIndex,
    _f_log,
    f_eval,
    f_n_eval,
    f_tilde_eval,
    lipschitz_constant,
    osgood_divergence_report,
    osgood_type_check,
    power_bound_constant,
)
from fracosgood.specfun import DomainError

OF = OsgoodFunction(2, 4)


class TestConstruction:
    @pytest.mark.parametrize("k,phi0", [(1.0, 4.0), (0.5, 4.0), (2.0, 2.0), (3.0, 1.4)])
    def test_invalid(self, k, phi0):
        with pytest.raises(DomainError):
            OsgoodFunction(k, phi0)

    @pytest.mark.parametrize("k,phi0", [(2, 4), (4, 4), (1.5, 5.0)])
    def test_separation(self, k, phi0):
        of = OsgoodFunction(k, phi0)
        i = np.arange(1, 40)
        assert np.all(of.log_phi(i - 1) < of.log_phi(i) - math.log(2))

    def test_thresholds_exact(self):
        assert [OF.phi(i) for i in range(4)] == [4.0, 16.0, 256.0, 65536.0]
        assert OF.phi(12) == math.inf
        assert_allclose(OF.log_phi(30), 2.0**30 * math.log(4))

    def test_index_of(self):
        ls = np.log([4.0, 15.9, 16.0, 255.0, 256.0])
        assert list(OF.index_of(ls)) == [1, 1, 2, 2, 3]

    def test_truncation_index(self):
        with pytest.raises(DomainError):
            TruncationIndex(0)
        assert TruncationIndex(3).n == 3


class TestValues:
    def test_polynomial_branch(self):
        assert f_eval(OF, 2.0) == 3.0

    def test_first_junction_both_branches(self):
        assert f_eval(OF, 4.0) == 12.0
        assert OF.poly_coeff * 4.0**2 == OF.step(1) == 12.0

    def test_ramp(self):
        assert_allclose(f_eval(OF, 10.0), 69.0, rtol=1e-15)

    def test_plateau_levels_exact(self):
        for i in range(1, 4):
            assert f_eval(OF, OF.phi(i - 1)) == OF.phi(i) - OF.phi(i - 1)

    def test_zero(self):
        assert f_eval(OF, 0.0) == 0.0
        assert f_tilde_eval(OF, 0.0) == 0.0

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            f_eval(OF, -1.0)

    @pytest.mark.parametrize("k,phi0", [(2, 4), (4, 4), (2.5, 3.0)])
    def test_junction_continuity(self, k, phi0):
        of = OsgoodFunction(k, phi0)
        # phi0: polynomial versus the first plateau
        assert_allclose(math.log(of.poly_coeff) + k * of.log_phi0, of.step_log(1), rtol=1e-12)
        for i in range(1, 21):
            lphi = np.array([of.log_phi(i)])
            # phi_i: end of ramp i versus plateau i + 1
            assert_allclose(_f_log(of, lphi, np.array([i])), _f_log(of, lphi, np.array([i + 1])), rtol=1e-12)

    def test_half_threshold_continuity_direct(self):
        # phi_i / 2 is exact in floating point while phi_{i+1} is representable
        for i in range(1, 8):
            half = 0.5 * OF.phi(i)
            plateau = f_eval(OF, np.nextafter(half, 0.0))
            assert f_eval(OF, half) == plateau == OF.step(i)
            ramp_start = f_eval(OF, half * (1 + 1e-15))
            assert abs(ramp_start - plateau) <= 1e-12 * plateau * OF.phi(i)

    def test_log_and_direct_agree(self):
        s = np.geomspace(1e-3, 1e150, 3000)
        direct = np.log(f_eval(OF, s))
        assert_allclose(f_eval(OF, np.log(s), in_log=True), direct, rtol=1e-12)

    def test_huge_arguments_in_log(self):
        ls = np.array([1e4, 1e8])
        v = f_eval(OF, ls, in_log=True)
        assert np.all(np.isfinite(v)) and np.all(np.diff(v) > 0)
        assert np.all(np.isinf(f_eval(OF, np.array([1e300, np.inf]))))

    def test_monotone_and_positive(self):
        s = np.geomspace(1e-6, 1e300, 20000)
        v = f_eval(OF, s)
        assert np.all(v > 0)
        lv = f_eval(OF, np.linspace(-10, 1e5, 200001), in_log=True)
        assert np.all(np.diff(lv) >= 0)


class TestEnvelope:
    def test_examples(self):
        assert f_tilde_eval(OF, 3.0) == 0.0
        assert f_tilde_eval(OF, 5.0) == 12.0
        assert f_tilde_eval(OF, 16.0) == 240.0

    @settings(max_examples=200, deadline=None)
    @given(ls=st.floats(-20, 2000))
    def test_below_f(self, ls):
        assert f_tilde_eval(OF, ls, in_log=True) <= f_eval(OF, ls, in_log=True) + 1e-12 * abs(ls)

    def test_below_f_sweep(self):
        for of in (OF, OsgoodFunction(4, 4), OsgoodFunction(1.5, 6.0)):
            s = np.geomspace(1e-2, 1e290, 5000)
            assert np.all(f_tilde_eval(of, s) <= f_eval(of, s))


class TestTruncation:
    def test_examples(self):
        assert f_n_eval(OF, 1, -1.0) == 0.0
        assert f_n_eval(OF, 1, 100.0) == 240.0
        assert f_n_eval(OF, TruncationIndex(2), 3.0) == 3.0 * 3.0 * 0.75

    def test_monotone_in_level(self):
        s = np.linspace(-5, 1e6, 20001)
        prev = f_n_eval(OF, 1, s)
        for n in (2, 3, 4):
            cur = f_n_eval(OF, n, s)
            assert np.all(cur >= prev)
            prev = cur

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_lipschitz(self, n):
        c = lipschitz_constant(OF, n)
        s = np.linspace(-10, OF.phi(n) * 1.2, 400001)
        q = np.abs(np.diff(f_n_eval(OF, n, s))) / np.diff(s)
        assert q.max() <= c * (1 + 1e-10)
        assert q.max() >= 0.99 * c


class TestDivergence:
    def test_first_block(self):
        rep = osgood_divergence_report(OF, 1)
        assert_allclose(rep.contributions[0], 1 / 3, rtol=1e-15)

    def test_limit(self):
        rep = osgood_divergence_report(OF, 30)
        assert abs(rep.contributions[29] - 0.5) < 1e-6
        assert rep.limit_estimate == rep.contributions[-1]

    def test_partial_sums(self):
        rep = osgood_divergence_report(OF, 100)
        assert rep.partial_sums[-1] > 25
        assert rep.unbounded_trend

    def test_matches_quadrature(self):
        # closed form versus direct integration of ds / f on I_2
        of = OF
        lo, hi = of.phi(1), of.phi(2) / 2
        s = np.linspace(lo, hi, 100001)
        ref = np.trapezoid(1.0 / f_eval(of, s), s)
        assert_allclose(osgood_divergence_report(of, 2).contributions[1], ref, rtol=1e-10)

    def test_blocks_validated(self):
        with pytest.raises(DomainError):
            osgood_divergence_report(OF, 0)


class TestOsgoodType:
    def test_self(self):
        rep = osgood_type_check(lambda s: f_eval(OF, s), OF)
        assert_allclose(rep.ratios, 1.0, rtol=1e-12)
        assert rep.bounded

    def test_scaled(self):
        rep = osgood_type_check(lambda s: 2 * f_eval(OF, s), OF)
        assert_allclose(rep.ratios, 2.0, rtol=1e-12)
        assert rep.bounded

    def test_power_rejected(self):
        rep = osgood_type_check(lambda s: s**2, OF)
        assert not rep.bounded
        assert rep.max > 1e10

    def test_negative_f(self):
        with pytest.raises(DomainError):
            osgood_type_check(lambda s: -s, OF)


class TestPowerBound:
    def test_value(self):
        C = power_bound_constant(OF)
        assert_allclose(C, 1.0, rtol=1e-12)

    def test_dominates(self):
        C = power_bound_constant(OF)
        s = np.geomspace(1e-3, 1e150, 10000)
        assert np.all(f_eval(OF, s) <= C * s**2 * (1 + 1e-12))

    def test_other_family(self):
        of = OsgoodFunction(3, 2.0)
        C = power_bound_constant(of)
        s = np.geomspace(1e-3, 1e100, 10000)
        assert np.all(f_eval(of, s) <= C * s**3 * (1 + 1e-12))
