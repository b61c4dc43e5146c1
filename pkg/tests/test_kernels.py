"""Degree kernel and offspring-averaged kernel: identities and stability."""

import math

import numpy as np
import pytest

from gwboot import (DomainError, binom_tail_le, degree_kernel, make_constant,
                    make_corpus, make_geometric, make_table, mean_kernel)


class TestDegreeKernel:
    def test_threshold_form_at_half(self):
        # k = r: kernel is 1 + (1-x) + ... + (1-x)^(r-1)
        assert degree_kernel(2, 2, 0.5) == pytest.approx(1.5, abs=1e-15)
        assert degree_kernel(3, 3, 0.5) == pytest.approx(1.75, abs=1e-15)

    def test_value_one_at_x_one(self):
        for k, r in ((2, 2), (5, 2), (7, 3), (80, 4), (3000, 2)):
            assert degree_kernel(k, r, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_cubic_case(self):
        # k=3, r=2: x^2 + 3x(1-x), evaluated directly
        x = 0.5
        assert degree_kernel(3, 2, x) == pytest.approx(x * x + 3 * x * (1 - x), abs=1e-15)
        assert degree_kernel(3, 2, 0.5) == pytest.approx(1.0, abs=1e-15)

    def test_endpoints_at_zero(self):
        for r in (2, 3, 4, 5):
            assert degree_kernel(r, r, 0.0) == float(r)
            for k in (r + 1, r + 7, 300):
                assert degree_kernel(k, r, 0.0) == 0.0

    def test_recurrence_increments(self):
        # kernel(r) - kernel(k) equals the explicit sum of its increments
        for r in (2, 3):
            for k in range(r + 1, r + 41):
                for x in np.arange(0.0, 1.0001, 0.05):
                    inc = math.fsum(
                        math.comb(i, r - 1) * x ** (i - r) * (1 - x) ** r
                        for i in range(r, k))
                    lhs = degree_kernel(r, r, x) - degree_kernel(k, r, x)
                    assert abs(lhs - inc) <= 1e-10

    def test_quotient_consistency(self):
        # away from x = 0 the polynomial form equals the binomial-tail form
        for k, r in ((2, 2), (9, 2), (12, 3), (60, 2), (200, 4)):
            for x in np.linspace(0.01, 1.0, 34):
                quot = binom_tail_le(k, r - 1, 1.0 - x) / x
                assert abs(degree_kernel(k, r, x) - quot) <= 1e-10

    def test_tail_lower_bound(self):
        # kernel(k, r, 1-t) >= (1 - k^r t^r / r!) / (1-t)
        for k, r in ((2, 2), (5, 2), (8, 3), (40, 3)):
            for t in np.linspace(0.0, 0.999, 41):
                lb = (1.0 - k ** r * t ** r / math.factorial(r)) / (1.0 - t)
                assert degree_kernel(k, r, 1.0 - t) >= lb - 1e-10

    def test_monotone_decreasing_in_k(self):
        for x in (0.0, 0.3, 0.85, 1.0):
            vals = [degree_kernel(k, 2, x) for k in range(2, 60)]
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            degree_kernel(1, 2, 0.5)
        with pytest.raises(DomainError):
            degree_kernel(3, 2, 1.5)


class TestMeanKernel:
    def test_single_atom_matches_degree_kernel(self):
        d = make_constant(6)
        for x in np.linspace(0.0, 1.0, 17):
            ev = mean_kernel(d, 2, x)
            assert ev.value == pytest.approx(degree_kernel(6, 2, x), abs=1e-13)
            assert ev.truncation_error == 0.0

    def test_two_atom_example(self):
        d = make_table([(3, 0.5), (4, 0.5)])
        # (kernel_3 + kernel_4)/2 at x = 0.5: (1.0 + 0.625)/2
        assert degree_kernel(4, 2, 0.5) == pytest.approx(0.625, abs=1e-15)
        assert mean_kernel(d, 2, 0.5).value == pytest.approx(0.8125, abs=1e-14)

    def test_value_one_at_one(self, corpus_r2):
        for name, d in corpus_r2.items():
            ev = mean_kernel(d, 2, 1.0)
            assert ev.value + ev.truncation_error == pytest.approx(1.0, abs=1e-12), name

    def test_domination(self, corpus_r2, corpus_r3):
        for r, corpus in ((2, corpus_r2), (3, corpus_r3)):
            for name, d in corpus.items():
                for x in np.linspace(0.0, 1.0, 29):
                    ev = mean_kernel(d, r, x)
                    assert ev.value <= degree_kernel(r, r, x) + 1e-10, name

    def test_walk_matches_per_entry_sum(self, corpus_r2):
        for name, d in corpus_r2.items():
            if d.max_stored > 3000:
                continue
            for x in (0.0, 0.15, 0.5, 0.9, 1.0):
                direct = math.fsum(
                    p * degree_kernel(int(k), 2, x)
                    for k, p in zip(d.ks, d.probs))
                ev = mean_kernel(d, 2, x)
                assert ev.value == pytest.approx(direct, abs=max(1e-12, ev.truncation_error + 1e-13)), name

    def test_truncation_error_within_budget(self):
        d = make_geometric(2, 0.7)
        for tol in (1e-6, 1e-10, 1e-12):
            ev = mean_kernel(d, 2, 0.8, tol=tol)
            assert 0.0 <= ev.truncation_error <= tol

    def test_support_below_threshold_rejected(self):
        d = make_table([(1, 0.5), (4, 0.5)])
        with pytest.raises(DomainError):
            mean_kernel(d, 2, 0.5)

    def test_evaluation_fields(self):
        ev = mean_kernel(make_geometric(2, 0.5), 2, 0.25, tol=1e-10)
        assert ev.x == 0.25
        assert ev.terms_used >= 1
        assert ev.value >= 0.0
