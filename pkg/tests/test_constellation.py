import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secgdof.constellation import (
    DiscreteDistribution,
    PamSet,
    add_independent,
    pam_entropy_bits,
    pam_for_budget,
    pam_halfwidth,
    pam_second_moment,
    pam_sum_distribution,
)
from secgdof.errors import DomainError


def brute_second_moment(step, q):
    return math.fsum((step * a) ** 2 for a in range(-q, q + 1)) / (2 * q + 1)


def brute_sum_pmf(a: PamSet, b: PamSet, ra=None, rb=None):
    """Exact pmf of the sum using rational steps."""
    ra = Fraction(a.step) if ra is None else ra
    rb = Fraction(b.step) if rb is None else rb
    counts = Counter(i * ra + j * rb for i in a.indices().tolist() for j in b.indices().tolist())
    n = a.cardinality * b.cardinality
    return {k: Fraction(v, n) for k, v in counts.items()}


class TestPamSet:
    def test_cardinality_and_peak(self):
        s = PamSet(0.5, 3)
        assert s.cardinality == 7
        assert s.max_magnitude == 1.5
        assert np.allclose(s.points(), -s.points()[::-1])
        assert np.allclose(np.diff(s.points()), 0.5)

    @pytest.mark.parametrize("step,q", [(0.0, 1), (-1.0, 2), (1.0, 0), (1.0, 1.5), (float("inf"), 1)])
    def test_rejects_invalid(self, step, q):
        with pytest.raises(DomainError):
            PamSet(step, q)

    def test_index_of_roundtrip_and_rejection(self):
        s = PamSet(0.125, 4)
        assert s.index_of(0.375) == 3
        assert list(s.index_of(s.points())) == list(range(-4, 5))
        with pytest.raises(DomainError):
            s.index_of(0.1)
        with pytest.raises(DomainError):
            s.index_of(0.625)
        assert not s.contains(0.2)


class TestMoments:
    def test_example_values(self):
        assert pam_second_moment(PamSet(0.003125, 5)) == pytest.approx(9.765625e-5, rel=1e-14)
        assert pam_second_moment(PamSet(1.0, 1)) == pytest.approx(2 / 3, rel=1e-15)

    @pytest.mark.parametrize("q", [1, 2, 7, 64, 1000, 10_000])
    def test_matches_enumeration(self, q):
        step = 1 / (3 * q)
        assert pam_second_moment(PamSet(step, q)) == pytest.approx(brute_second_moment(step, q), rel=1e-12)

    @pytest.mark.parametrize("q", [1, 5, 40, 999])
    def test_bound_two_gamma_squared_over_three(self, q):
        gamma = 1 / 64
        assert pam_second_moment(PamSet(gamma / q, q)) <= 2 * gamma**2 / 3 + 1e-18

    def test_entropy(self):
        assert pam_entropy_bits(PamSet(1, 1)) == pytest.approx(1.584962500721156)
        assert pam_entropy_bits(PamSet(1, 100)) == pytest.approx(math.log2(201))
        s = pam_for_budget(0.1, 1e6, 0.5)
        assert s.halfwidth == 31
        assert pam_entropy_bits(s) == pytest.approx(math.log2(63))


class TestHalfwidth:
    def test_floor_and_minimum(self):
        assert pam_halfwidth(1e6, 0.5) == 31
        assert pam_halfwidth(1e6, 1.0) == 1000
        assert pam_halfwidth(10.0, 0.01) == 1
        assert pam_halfwidth(1e6, 0.0) == 1

    def test_negative_budget(self):
        with pytest.raises(DomainError):
            pam_halfwidth(1e6, -0.1)

    def test_step_uses_unfloored_size(self):
        s = pam_for_budget(1.0, 1e6, 0.3, divisor=2)
        assert s.step == pytest.approx(1 / (2 * 1e6**0.15))


class TestSumDistribution:
    def test_unit_convolution(self):
        d = pam_sum_distribution(PamSet(1, 1), PamSet(1, 1))
        assert np.allclose(d.values, [-2, -1, 0, 1, 2])
        assert np.allclose(d.probs, np.array([1, 2, 3, 2, 1]) / 9)

    def test_integer_ratio_support(self):
        # 5 x 3 sums collapse onto the 9 integers in [-4, 4]
        d = pam_sum_distribution(PamSet(1, 2), PamSet(2, 1))
        assert d.support_size == len(brute_sum_pmf(PamSet(1, 2), PamSet(2, 1))) == 9

    def test_equal_sets_support_4q_plus_1(self):
        s = PamSet(0.01, 9)
        d = pam_sum_distribution(s, s)
        assert d.support_size == 4 * 9 + 1
        assert d.entropy_bits() <= math.log2(4 * 9 + 1)

    @settings(max_examples=60, deadline=None)
    @given(
        qa=st.integers(1, 8),
        qb=st.integers(1, 8),
        num=st.integers(1, 6),
        den=st.integers(1, 6),
    )
    def test_matches_rational_enumeration(self, qa, qb, num, den):
        a = PamSet(0.25, qa)
        b = PamSet(0.25 * num / den, qb)
        d = pam_sum_distribution(a, b)
        oracle = brute_sum_pmf(a, b, Fraction(1, 4), Fraction(num, 4 * den))
        assert d.support_size == len(oracle)
        ref = sorted((float(k), float(v)) for k, v in oracle.items())
        assert np.allclose(d.values, [k for k, _ in ref], atol=1e-12)
        assert np.allclose(d.probs, [v for _, v in ref], atol=1e-14)
        assert d.total_mass() == pytest.approx(1.0, abs=1e-12)
        assert d.entropy_bits() <= pam_entropy_bits(a) + pam_entropy_bits(b) + 1e-12

    def test_incommensurate_steps_keep_all_points(self):
        a, b = PamSet(1.0, 2), PamSet(math.sqrt(2), 3)
        d = pam_sum_distribution(a, b)
        assert d.support_size == a.cardinality * b.cardinality
        assert d.total_mass() == pytest.approx(1.0, abs=1e-12)

    def test_integer_eta_compression(self):
        # steps in ratio 4 as produced by the integer-spacing construction
        q1, q2 = 7, 3
        small = PamSet(1.0, q1)
        big = PamSet(4.0, q2)
        d = add_independent(
            pam_sum_distribution(small, big), DiscreteDistribution.uniform_pam(PamSet(1.0, q1))
        )
        assert d.support_size <= 6 * max(q1, 4 * q2) + 1

    def test_sampling_matches_pmf(self, rng):
        d = pam_sum_distribution(PamSet(1, 2), PamSet(1, 2))
        x = d.sample(rng, 200_000)
        emp = np.array([(x == v).mean() for v in d.values])
        assert np.allclose(emp, d.probs, atol=5e-3)
