"""Critical probability: maximization route, recursion route, agreement."""

import math

import numpy as np
import pytest
from scipy import stats

from gwboot import (DiagnosticError, DomainError, critical_probability,
                    make_constant, make_corpus, make_table, maximize_kernel,
                    recursion_limit, recursion_step, threshold_by_bisection)


def grid_oracle(dist, r, n=1_000_001):
    """Independent maximizer: quotient form P(Bin(k,1-x) <= r-1)/x via scipy
    on a dense grid (x=0 handled by the polynomial limit)."""
    xs = np.linspace(0.0, 1.0, n)[1:]  # skip 0; checked separately
    total = np.zeros_like(xs)
    for k, p in zip(dist.ks, dist.probs):
        total += p * stats.binom.cdf(r - 1, int(k), 1.0 - xs) / xs
    at_zero = float(r) * float(dist.probs[dist.ks == r].sum())
    i = int(np.argmax(total))
    if at_zero >= total[i]:
        return at_zero, 0.0
    return float(total[i]), float(xs[i])


class TestMaximize:
    def test_constant3_closed_form(self, warm_kernels):
        m, x_star = maximize_kernel(make_constant(3), 2, 1e-10)
        # stationary point of 3x - 2x^2 at x = 3/4, value 9/8
        assert m == pytest.approx(9 / 8, abs=1e-12)
        assert x_star == pytest.approx(0.75, abs=1e-6)
        m_oracle, x_oracle = grid_oracle(make_constant(3), 2)
        assert m == pytest.approx(m_oracle, abs=1e-9)
        assert x_star == pytest.approx(x_oracle, abs=1e-5)

    def test_constant_r_maximum_at_zero(self):
        for r in (2, 3, 5):
            m, x_star = maximize_kernel(make_constant(r), r, 1e-10)
            assert m == float(r)
            assert x_star == 0.0

    def test_at_least_one(self, corpus_r2):
        for name, d in corpus_r2.items():
            m, _ = maximize_kernel(d, 2, 1e-10)
            assert m >= 1.0, name

    def test_matches_grid_oracle_on_small_members(self, corpus_r2):
        for name, d in corpus_r2.items():
            if d.max_stored > 300:
                continue
            m, _ = maximize_kernel(d, 2, 1e-10)
            m_oracle, _ = grid_oracle(d, 2, n=200_001)
            assert m == pytest.approx(m_oracle, rel=1e-7), name


class TestCriticalProbability:
    def test_constant3(self):
        prof = critical_probability(make_constant(3), 2, 1e-10)
        assert prof.p_c == pytest.approx(1 / 9, abs=1e-9)
        assert not prof.degenerate
        assert prof.p_c == pytest.approx(1.0 - 1.0 / prof.max_value, abs=1e-14)

    def test_constant_r(self):
        for r in range(2, 7):
            prof = critical_probability(make_constant(r), r, 1e-10)
            assert prof.p_c == pytest.approx(1.0 - 1.0 / r, abs=1e-9)

    def test_degenerate_mass_below_threshold(self):
        d = make_table([(1, 0.5), (3, 0.5)])
        prof = critical_probability(d, 2, 1e-10)
        assert prof.degenerate and prof.p_c == 1.0
        assert math.isinf(prof.max_value)

    def test_bounds_and_flags(self, corpus_r2):
        for name, d in corpus_r2.items():
            prof = critical_probability(d, 2, 1e-10)
            assert 0.0 <= prof.p_c < 1.0
            assert not prof.degenerate

    def test_y_match_consistency(self, corpus_r2, corpus_r3):
        for r, corpus in ((2, corpus_r2), (3, corpus_r3)):
            for name, d in corpus.items():
                prof = critical_probability(d, r, 1e-10)
                y = prof.y_match
                geo = math.fsum(y ** i for i in range(r))
                assert abs(geo - prof.max_value) <= 1e-10, name
                assert prof.p_c >= (r - 1) / r * y - 1e-10, name
                # the identity p_c = y(1-y^(r-1))/(1-y^r) away from y = 1
                if y < 1.0 - 1e-9:
                    ident = y * (1 - y ** (r - 1)) / (1 - y ** r)
                    assert prof.p_c == pytest.approx(ident, abs=1e-10), name


class TestRecursionStep:
    def test_zero_fixed(self):
        assert recursion_step(make_constant(3), 2, 0.37, 0.0) == 0.0

    def test_identity_at_p_zero(self):
        # y * K(y) with K(0.5) = 1.0 for the 3-regular kernel
        assert recursion_step(make_constant(3), 2, 0.0, 0.5) == pytest.approx(0.5, abs=1e-14)

    def test_scaling_in_p(self):
        assert recursion_step(make_constant(3), 2, 0.1, 0.5) == pytest.approx(0.45, abs=1e-14)

    def test_clamped_to_one_minus_p(self):
        v = recursion_step(make_constant(2), 2, 0.2, 1.0)
        assert v <= 0.8 + 1e-15

    def test_domain(self):
        with pytest.raises(DomainError):
            recursion_step(make_constant(3), 2, -0.1, 0.5)


class TestRecursionLimit:
    def test_survives_at_p_zero(self):
        trace = recursion_limit(make_constant(5), 2, 0.0)
        assert trace.classified == "survives"
        assert trace.limit == pytest.approx(1.0, abs=1e-12)

    def test_extinct_above_threshold(self):
        trace = recursion_limit(make_constant(3), 2, 0.12)
        assert trace.classified == "extinct"
        assert trace.converged

    def test_survives_below_threshold_with_known_limit(self):
        # fixed point of y = 0.92 y (3y - 2y^2): largest root of
        # 2y^2 - 3y + 1/0.92 = 0
        trace = recursion_limit(make_constant(3), 2, 0.08)
        root = (3 + math.sqrt(9 - 8 / 0.92)) / 4
        assert trace.classified == "survives"
        assert trace.limit > 0.1
        assert trace.limit == pytest.approx(root, abs=1e-6)

    def test_monotone_iterates(self, corpus_r2):
        for name, d in corpus_r2.items():
            for p in (0.02, 0.3, 0.8):
                trace = recursion_limit(d, 2, p, max_iter=5000)
                it = trace.iterates
                assert it[0] == 1.0 - p
                assert np.all(it[1:] <= it[:-1] + 1e-15), name
                assert np.all((0.0 <= it) & (it <= 1.0)), name

    def test_nonconvergence_reported_not_raised(self):
        trace = recursion_limit(make_constant(3), 2, 0.1111111, max_iter=5)
        assert not trace.converged
        assert len(trace.iterates) == 6

    def test_monotone_threshold_classification(self, corpus_r2):
        for name, d in corpus_r2.items():
            p_c = critical_probability(d, 2, 1e-10).p_c
            for dp in (0.01, 0.05):
                lo = max(p_c - dp, 0.0)
                hi = min(p_c + dp, 1.0)
                assert recursion_limit(d, 2, lo).classified == "survives", name
                assert recursion_limit(d, 2, hi).classified == "extinct", name


class TestBisection:
    def test_examples(self, warm_kernels):
        assert threshold_by_bisection(make_constant(3), 2, 1e-7) == pytest.approx(1 / 9, abs=1e-6)
        assert threshold_by_bisection(make_constant(2), 2, 1e-7) == pytest.approx(0.5, abs=1e-6)
        for r in (2, 3, 4):
            assert threshold_by_bisection(make_constant(r), r, 1e-7) == pytest.approx(
                1.0 - 1.0 / r, abs=1e-6)

    def test_route_agreement_spot(self, corpus_r3):
        for name in ("geometric_q0.3", "powerlaw_beta2.5", "eta_b6"):
            d = corpus_r3[name]
            pf = critical_probability(d, 3, 1e-10).p_c
            pb = threshold_by_bisection(d, 3, 1e-7)
            assert abs(pf - pb) <= 1e-6, name

    def test_support_below_threshold_rejected(self):
        with pytest.raises((DomainError, DiagnosticError)):
            threshold_by_bisection(make_table([(1, 0.5), (3, 0.5)]), 2, 1e-6)
