"""Moment lower bounds: constant pipeline, integral inequalities, sharpness."""

import math

import mpmath
import numpy as np
import pytest

from gwboot import (DomainError, alpha_grid, asymptotic_ratio,
                    critical_probability, integral_moment_check, make_constant,
                    make_eta, make_geometric, moment, moment_lower_bound,
                    rth_moment_bound, sharpness_sweep, truncate)
from gwboot.bounds import gamma_factor, harmonic_factor


def pipeline_oracle(r, alpha, mom):
    """Recompute the whole constant pipeline at 40 digits with mpmath."""
    with mpmath.workdps(40):
        a = mpmath.mpf(alpha)
        t = int(mpmath.floor(a))
        den = mpmath.mpf(1)
        for i in range(t + 1):
            den *= (r - 1 - i)
        c1 = mpmath.gamma(r - 1 - a) / (den * mpmath.gamma(r - 1 - t))
        c2 = mpmath.fsum(1 / (a + 1 - i) for i in range(t + 2))
        two_a = 2 * a * (a + 1)
        c2p = (1 / (two_a * c2)) ** (1 / a)
        c1p = (two_a * r * c1) ** (-1 / a)
        cra = mpmath.mpf(r - 1) / r * min(c1p, c2p)
        return float(cra), float(cra * mpmath.mpf(mom) ** (-1 / a))


class TestConstantPipeline:
    def test_r3_alpha_half_example(self):
        rep = moment_lower_bound(3, 0.5, make_constant(3))
        assert rep.gamma_factor == pytest.approx(0.44311, abs=5e-6)
        assert rep.harmonic_factor == pytest.approx(8 / 3, rel=1e-14)
        assert rep.direct_const == pytest.approx(0.0625, rel=1e-13)
        assert rep.integral_const == pytest.approx(0.2515, abs=5e-5)
        assert rep.combined_const == pytest.approx(1 / 24, rel=1e-12)
        # independent gamma-ratio oracle: Gamma(1.5) / (2 Gamma(2))
        with mpmath.workdps(40):
            oracle = float(mpmath.gamma(1.5) / (2 * mpmath.gamma(2)))
        assert rep.gamma_factor == pytest.approx(oracle, rel=1e-13)

    def test_r2_alpha_half_example(self):
        rep = moment_lower_bound(2, 0.5, make_constant(2))
        assert rep.gamma_factor == pytest.approx(math.sqrt(math.pi), rel=1e-13)
        assert rep.integral_const == pytest.approx(0.03537, abs=5e-6)
        assert rep.bound == pytest.approx(0.00221, abs=5e-6)
        assert rep.bound <= 0.5

    def test_pipeline_matches_high_precision_oracle(self):
        for r, alpha, dist in ((2, 0.25, make_constant(4)),
                               (3, 0.5, make_constant(7)),
                               (4, 2.5, make_constant(5)),
                               (5, 3.75, make_geometric(5, 0.5))):
            rep = moment_lower_bound(r, alpha, dist)
            cra, bound = pipeline_oracle(r, alpha, rep.moment_value)
            assert rep.combined_const == pytest.approx(cra, rel=1e-11)
            assert rep.bound == pytest.approx(bound, rel=1e-11)

    def test_integer_alpha_uses_shifted_exponent(self):
        rep = moment_lower_bound(4, 2.0, make_constant(4))
        assert rep.alpha == 2.0
        assert rep.alpha_eval == pytest.approx(2.0 - 1e-6, abs=1e-12)
        assert rep.bound <= critical_probability(make_constant(4), 4).p_c

    def test_endpoint_delegates_to_rth_moment(self):
        for r, dist in ((2, make_constant(3)), (3, make_constant(5))):
            rep = moment_lower_bound(r, float(r - 1), dist)
            assert rep.bound == pytest.approx(rth_moment_bound(r, dist), rel=1e-14)
            assert rep.t0 is not None

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            moment_lower_bound(2, 0.0, make_constant(2))
        with pytest.raises(DomainError):
            moment_lower_bound(2, 1.5, make_constant(2))
        with pytest.raises(DomainError):
            moment_lower_bound(3, -0.5, make_constant(3))

    def test_gamma_factor_lower_bounds(self):
        # t < r-2: the factor is at least (r-1)^(-alpha);
        # t = r-2: at least 1/(2 (r-1)! (1-frac))
        for r in (3, 4, 5):
            for alpha in (0.25, 0.5, 0.75, 1.3, r - 1.5, r - 1.25):
                if not (0 < alpha < r - 1):
                    continue
                t = math.floor(alpha)
                c1 = gamma_factor(r, alpha)
                if t < r - 2:
                    assert c1 >= (r - 1.0) ** (-alpha) - 1e-13
                else:
                    eps = alpha - t
                    assert c1 >= 1.0 / (2 * math.factorial(r - 1) * (1 - eps)) - 1e-13

    def test_combined_const_vanishes_at_the_edge(self):
        for r in (2, 3, 4):
            values = [moment_lower_bound(r, r - 1 - delta, make_constant(r)).combined_const
                      for delta in (0.1, 0.01, 0.001)]
            assert values[0] > values[1] > values[2] > 0.0

    def test_no_uniform_constant_beyond_the_edge(self):
        # alpha = 2 at r = 2: p_c * E[X^3]^(1/2) must decay toward 0 along
        # the constant family, so no constant can work for alpha > r-1.
        # (At b = 64 the product is ~0.0625; reaching 0.01 needs b ~ 4096.)
        alpha = 2.0
        prods = []
        for b in (16, 64, 256, 1024, 4096):
            p_c = critical_probability(make_constant(b), 2, 1e-10).p_c
            prods.append(p_c * moment(make_constant(b), 1 + alpha) ** (1 / alpha))
        assert all(a > b for a, b in zip(prods, prods[1:]))
        assert prods[-1] < 0.01


class TestRthMomentBound:
    def test_examples(self):
        assert rth_moment_bound(2, make_constant(3)) == pytest.approx(1 / 18, rel=1e-14)
        assert rth_moment_bound(2, make_constant(2)) == pytest.approx(0.125, rel=1e-14)

    def test_below_p_c_for_constant_r(self):
        for r in (2, 3, 4, 5):
            b = rth_moment_bound(r, make_constant(r))
            assert b < 1.0 - 1.0 / r


class TestIntegralCheck:
    def test_atom_at_threshold_is_zero(self):
        chk = integral_moment_check(make_constant(2), 2, 0.5)
        assert chk.integral == pytest.approx(0.0, abs=1e-12)
        assert chk.closed_form == 0.0
        assert chk.ok_upper

    def test_atom_closed_form_equals_beta_sum(self):
        # single atom k, r = 2, alpha = 0.5: sum_{i=2}^{k-1} i B(i-1, 1/2)
        from gwboot import log_beta
        k = 7
        chk = integral_moment_check(make_constant(k), 2, 0.5)
        manual = math.fsum(i * math.exp(log_beta(i - 1.0, 0.5)) for i in range(2, k))
        assert chk.closed_form == pytest.approx(manual, rel=1e-13)
        assert chk.integral == pytest.approx(manual, rel=1e-8)

    def test_atom_grid(self):
        for r in (2, 3):
            for k in (r + 1, r + 5, r + 20):
                for alpha in (0.25, 0.5):
                    chk = integral_moment_check(make_constant(k), r, alpha)
                    assert chk.ok_closed_form, (r, k, alpha)
                    assert chk.ok_upper, (r, k, alpha)
                    if chk.ok_lower is not None:
                        assert chk.ok_lower, (r, k, alpha)

    def test_corpus_inequalities(self, corpus_r2, corpus_r3):
        for r, corpus in ((2, corpus_r2), (3, corpus_r3)):
            alphas = {0.25, 0.5}
            if r - 1.5 > 0 and (r - 1.5) != int(r - 1.5):
                alphas.add(r - 1.5)
            for name, d in corpus.items():
                dd = truncate(d, 1e-13) if d.tail_bound > 0 else d
                for alpha in sorted(alphas):
                    chk = integral_moment_check(dd, r, alpha)
                    assert chk.ok_closed_form, (name, alpha)
                    assert chk.ok_upper, (name, alpha)
                    if chk.ok_lower is not None:
                        assert chk.ok_lower, (name, alpha)

    def test_rejects_integer_alpha(self):
        with pytest.raises(DomainError):
            integral_moment_check(make_constant(5), 3, 1.0)


class TestMasterProperty:
    def test_bound_below_p_c_everywhere(self, corpus_r2, corpus_r3):
        for r, corpus in ((2, corpus_r2), (3, corpus_r3)):
            grid = alpha_grid(r)
            for name, d in corpus.items():
                p_c = critical_probability(d, r, 1e-10).p_c
                for alpha in grid:
                    rep = moment_lower_bound(r, alpha, d)
                    assert rep.bound <= p_c + 1e-9, (r, name, alpha)

    def test_alpha_grid_contents(self):
        assert alpha_grid(2) == [0.25, 0.5, 0.75, 1.0]
        assert alpha_grid(3) == [0.25, 0.5, 0.75, 1.0, 2.0]


class TestSharpness:
    def test_small_sweep(self):
        sweep = sharpness_sweep(3, [12.0, 15.0, 18.0], 0.5)
        assert len(sweep.rows) == 3
        for row in sweep.rows:
            assert row.bound <= row.p_c + 1e-9
            assert row.p_c > 0
        assert sweep.slope_log_pc < 0
        assert sweep.slope_log_moment_root <= 1.1 / 2

    def test_rejects_r2(self):
        with pytest.raises(DomainError):
            sharpness_sweep(2, [12.0, 15.0], 0.5)


class TestAsymptoticRatio:
    def test_at_least_one(self):
        for r, b in ((2, 4), (2, 32), (3, 5), (3, 20), (4, 9)):
            assert asymptotic_ratio(r, b) >= 1.0 - 1e-9

    def test_r2_monotone_trend(self, warm_kernels):
        ratios = [asymptotic_ratio(2, b) for b in (4, 8, 16, 32, 64, 128)]
        assert all(a >= b - 1e-12 for a, b in zip(ratios, ratios[1:]))
        assert 1.0 - 1e-9 <= ratios[-1] <= 1.2

    def test_rejects_b_below_r(self):
        with pytest.raises(DomainError):
            asymptotic_ratio(3, 2)
