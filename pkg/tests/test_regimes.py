import csv
from fractions import Fraction

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fracosgood.regimes import (
    VERDICT_COLUMNS,
    InfeasibleError,
    RegimeParams,
    blowup_condition,
    classify_rows,
    exact,
    global_window,
    pick_tau_rho,
    q_critical,
    tau_rho_margin,
    write_verdicts,
)
from fracosgood.specfun import DomainError


class TestCriticalExponent:
    @pytest.mark.parametrize("k,alpha,beta,d,expected", [(2, 0.5, 1, 2, 1.0), (3, 0.5, 0.5, 1, 1.5), (3, 0.25, 0.5, 1, 1.0)])
    def test_examples(self, k, alpha, beta, d, expected):
        assert q_critical(RegimeParams(alpha, beta, d, k)) == expected

    def test_fraction_output(self):
        p = RegimeParams("1/3", "2/3", 1, 3)
        assert q_critical(p, as_fraction=True) == Fraction(1)

    def test_equivalence_on_lattice(self):
        # integer cross-multiplication: alpha = a/100, beta = b/100, k = kn/10, q = qn/10
        rng = np.random.default_rng(11)
        n = 10_000
        a = rng.integers(1, 100, n)
        b = rng.integers(1, 200, n)
        d = rng.integers(1, 4, n)
        kn = rng.integers(11, 80, n)
        qn = rng.integers(10, 60, n)
        # force a share of exact boundary cases k = q (1 + beta/(alpha d))
        m = n // 10
        qn[:m] = 10 * a[:m] * d[:m]
        kn[:m] = 10 * (a[:m] * d[:m] + b[:m])
        for i in range(n):
            ad, bb = int(a[i]) * int(d[i]), int(b[i])
            # k > q (ad + b) / ad with k, q sharing the denominator 10
            oracle = int(kn[i]) * ad > int(qn[i]) * (ad + bb)
            p = RegimeParams(Fraction(int(a[i]), 100), Fraction(bb, 100), int(d[i]),
                             Fraction(int(kn[i]), 10), Fraction(int(qn[i]), 10))
            assert blowup_condition(p) == oracle
            assert (p.q < q_critical(p, as_fraction=True)) == oracle

    def test_float_inputs_read_as_decimals(self):
        assert exact(0.8) == Fraction(4, 5)
        assert exact("3/7") == Fraction(3, 7)
        assert exact(np.float64(0.05)) == Fraction(1, 20)
        assert exact(np.int64(3)) == 3
        with pytest.raises(DomainError):
            exact(float("nan"))


class TestBlowupCondition:
    def test_true(self):
        assert blowup_condition(RegimeParams(0.8, 1, 1, 4, 1))

    def test_false(self):
        assert not blowup_condition(RegimeParams(0.8, 1, 1, 2, 1))

    def test_boundary_is_not_satisfied(self):
        assert not blowup_condition(RegimeParams(0.8, 1, 1, 2.25, 1))
        assert blowup_condition(RegimeParams(0.8, 1, 1, "2.2500000001", 1))


class TestGlobalWindow:
    def test_example(self):
        v = global_window(RegimeParams(0.9, 0.5, 1, 2, 3))
        assert v.q_prime == 2
        assert v.window == (2, Fraction(18, 5))
        assert v.global_window_nonempty and v.q_in_window and v.q_prime_ge_1

    def test_empty_at_half(self):
        v = global_window(RegimeParams(0.5, 0.5, 1, 2))
        assert v.q_hi == v.q_lo == 2
        assert not v.global_window_nonempty
        assert not v.q_in_window

    def test_q_prime_flag(self):
        v = global_window(RegimeParams(0.9, 1.5, 1, 1.2))
        assert v.q_prime < 1 and not v.q_prime_ge_1

    @pytest.mark.parametrize("beta,k,d", [(0.5, 2, 1), (1.0, 3, 2), (1.5, 2.5, 1), (0.3, 1.5, 2)])
    def test_monotone_in_alpha(self, beta, k, d):
        flags = [global_window(RegimeParams(Fraction(j, 200), beta, d, k)).global_window_nonempty
                 for j in range(1, 200)]
        # once open, the window stays open as alpha grows
        first = flags.index(True) if True in flags else len(flags)
        assert all(flags[first:]) and not any(flags[:first])


class TestTauRho:
    def test_example_pair_feasible(self):
        p = RegimeParams(0.8, 1, 1, 4, 1)
        assert_allclose(4 - tau_rho_margin(p, 0.9, 0.7), (1 + 1 / 0.7) / 0.9)
        assert tau_rho_margin(p, 0.9, 0.7) > 0

    @pytest.mark.parametrize("alpha,beta,d,k,q", [(0.8, 1, 1, 4, 1), (0.5, 0.5, 2, 3, 1.5), (0.3, 1.2, 1, 20, 1)])
    def test_returned_pair_admissible(self, alpha, beta, d, k, q):
        p = RegimeParams(alpha, beta, d, k, q)
        tau, rho, margin = pick_tau_rho(p)
        assert 0 < tau < d / float(p.q)
        assert 0 < rho < float(p.alpha / p.beta)
        assert margin > 0
        assert_allclose(margin, tau_rho_margin(p, tau, rho))

    def test_near_threshold_refines(self):
        # just above the threshold 2.25 the admissible region hugs the corner
        tau, rho, margin = pick_tau_rho(RegimeParams(0.8, 1, 1, 2.3, 1))
        assert margin > 0

    def test_precondition(self):
        with pytest.raises(DomainError):
            pick_tau_rho(RegimeParams(0.8, 1, 1, 2, 1))

    def test_depth_cap(self):
        with pytest.raises(InfeasibleError):
            pick_tau_rho(RegimeParams(0.8, 1, 1, "2.2500001", 1), max_depth=1)


def test_disjointness_sweep():
    # with q > k the blow-up condition needs k > q, so it never meets the window
    hits = 0
    for a in np.linspace(0.05, 0.95, 10):
        for b in np.linspace(0.1, 1.9, 10):
            for d in (1, 2):
                for k in (1.5, 2, 3, 5):
                    for q in (k + 0.25, k + 1, 2 * k):
                        v = global_window(RegimeParams(round(a, 4), round(b, 4), d, k, q))
                        hits += v.blowup_condition and v.q_in_window
    assert hits == 0


@pytest.mark.parametrize("alpha,beta,d", [(0.0, 1, 1), (1.0, 1, 1), (0.5, 2, 1), (0.5, 1, 0)])
def test_validation(alpha, beta, d):
    with pytest.raises(DomainError):
        RegimeParams(alpha, beta, d, 2)


def test_classify_rows_and_csv(tmp_path):
    rows = classify_rows([RegimeParams(0.9, 0.5, 1, 2, 3), RegimeParams(0.8, 1, 1, 4, 1)])
    assert rows[0]["q_lo"] == "2.0" and rows[0]["q_hi"] == "3.6"
    assert rows[0]["global_ok"] == "true" and rows[0]["blowup"] == "false"
    assert rows[1]["blowup"] == "true"
    path = tmp_path / "verdicts.csv"
    write_verdicts(rows, path)
    with open(path) as fh:
        back = list(csv.DictReader(fh))
    assert list(back[0].keys()) == VERDICT_COLUMNS
    assert back == rows
