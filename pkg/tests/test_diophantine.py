import itertools
import math

import numpy as np
import pytest

from secgdof.diophantine import (
    LEMMA_IDS,
    MinDistProblem,
    lemma_instance,
    measure_bound,
    min_distance,
    min_nonzero_combination,
    outage_fraction,
    three_term_measure,
    two_term_measure,
)
from secgdof.errors import DomainError, SearchSpaceTooLargeError


def naive_min_distance(coeffs, ranges):
    """Compare every pair of distinct points in the box."""
    box = list(itertools.product(*[range(-r, r + 1) for r in ranges]))
    best = math.inf
    for q, p in itertools.combinations(box, 2):
        d = [a - b for a, b in zip(q, p)]
        total = coeffs[0] * d[0]
        for c, di in zip(coeffs[1:], d[1:]):
            total = total + c * di
        best = min(best, abs(total))
    return best


def random_problem(rng, k):
    scales = tuple(rng.choice([1.0, 0.5, 2.0, 10 ** rng.uniform(-1, 1)]) for _ in range(k))
    gains = tuple(rng.uniform(1, 2, k))
    ranges = tuple(int(r) for r in rng.integers(0, 7, k))
    if not any(ranges):
        ranges = (1,) + ranges[1:]
    return MinDistProblem(scales, gains, ranges)


def test_examples():
    assert min_distance(MinDistProblem((1, 1), (1, 1), (1, 1))) == 0
    assert min_distance(MinDistProblem((1, 1), (1, math.sqrt(2)), (1, 1))) == pytest.approx(math.sqrt(2) - 1)
    assert min_distance(MinDistProblem((1, 1, 1), (1, 1, 1), (1, 1, 1))) == 0


def test_two_by_two_box():
    # differences up to 4 admit 3 - 2 sqrt 2 = (sqrt 2 - 1)^2
    v = min_distance(MinDistProblem((1, 1), (1, math.sqrt(2)), (2, 2)))
    assert v == pytest.approx(3 - 2 * math.sqrt(2), rel=1e-12)
    assert v == pytest.approx(naive_min_distance((1, math.sqrt(2)), (2, 2)), rel=0, abs=0)


@pytest.mark.parametrize("k", [2, 3])
def test_matches_naive_exactly(k):
    rng = np.random.default_rng(100 + k)
    for _ in range(60 if k == 2 else 25):
        p = random_problem(rng, k)
        assert min_distance(p) == naive_min_distance(p.coefficients, p.ranges)


def test_validation():
    with pytest.raises(DomainError):
        MinDistProblem((1,), (1,), (1,))
    with pytest.raises(DomainError):
        MinDistProblem((0, 1), (1, 1), (1, 1))
    with pytest.raises(DomainError):
        MinDistProblem((1, 1), (1, 1), (0, 0))
    with pytest.raises(DomainError):
        MinDistProblem((1, 1), (1, 1), (1.5, 1))


def test_cap():
    with pytest.raises(SearchSpaceTooLargeError):
        min_distance(MinDistProblem((1, 1, 1), (1.1, 1.3, 1.7), (300, 300, 300)))
    assert min_nonzero_combination([1.0, math.sqrt(2)], [3, 3], cap=49) > 0
    with pytest.raises(SearchSpaceTooLargeError):
        min_nonzero_combination([1.0, 1.5], [3, 3], cap=48)


@pytest.mark.parametrize("a", [0.5, 2.0, 7.25])
def test_scale_equivariance(a):
    rng = np.random.default_rng(1)
    for _ in range(20):
        c = rng.uniform(1, 2, 3)
        r = [3, 2, 4]
        assert min_nonzero_combination(a * c, r) == pytest.approx(a * min_nonzero_combination(c, r), rel=1e-9)


def test_measure_bound_examples():
    v = measure_bound("ic_two_term", 0.1, 0.1, 1e8)
    assert v.value == pytest.approx(6.4 * 10**-0.4) and v.vacuous
    assert measure_bound("ic_two_term", 0.1, 0.5, 1e8).value == pytest.approx(0.064)
    assert not measure_bound("ic_two_term", 0.1, 0.5, 1e8).vacuous
    assert measure_bound("mac_small_b", 0.1, 0.5, 1e8).value == pytest.approx(3.584)
    assert measure_bound("ic_two_term", 0.0, 0.5, 1e8).value == 0
    with pytest.raises(DomainError):
        measure_bound("lemma_x", 0.1, 0.5, 1e8)


@pytest.mark.parametrize("lemma", LEMMA_IDS)
def test_measure_bound_decreasing_in_P(lemma):
    vals = [measure_bound(lemma, 0.1, 0.3, P).value for P in (1e4, 1e6, 1e8, 1e10)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_generic_measure_helpers_scale_linearly():
    assert two_term_measure(0.2, 2, 3, 4, 1, 1) == pytest.approx(2 * two_term_measure(0.1, 2, 3, 4, 1, 1))
    assert three_term_measure(0.2, 3, 4, 5, 1, 1) == pytest.approx(2 * three_term_measure(0.1, 3, 4, 5, 1, 1))


def test_ic_outage_within_bound():
    est = outage_fraction(0.8, 1e8, 0.5, 0.1, "ic_two_term", n_draws=2000, seed=3)
    assert est.mean <= 0.064 + 3 * est.stderr


def test_outage_vanishes_with_kappa():
    assert outage_fraction(0.8, 1e8, 0.5, 1e-9, "ic_two_term", n_draws=500, seed=3).mean == 0


def test_outage_is_seeded():
    a = outage_fraction(0.8, 1e6, 0.5, 0.5, "ic_two_term", n_draws=300, seed=5)
    b = outage_fraction(0.8, 1e6, 0.5, 0.5, "ic_two_term", n_draws=300, seed=5)
    assert a == b


@pytest.mark.parametrize(
    "lemma,kw",
    [("mac_small_b", dict(alpha=0.6, B=0.1)), ("mac_three_term", dict(alpha=0.8, B=0.2)), ("mac_alpha_one", dict(alpha=1.0))],
)
def test_instances_run(lemma, kw):
    inst = lemma_instance(lemma, kw["alpha"], 1e6, 0.1, 0.1, B=kw.get("B"))
    h = np.array([1.3, 1.7, 1.1, 1.9])
    assert inst.d_min(h) >= 0
    assert len(inst.gains(h)) == len(inst.scales) == len(inst.bounds)


def test_instance_domain():
    with pytest.raises(DomainError):
        lemma_instance("ic_two_term", 0.5, 1e6, 0.1, 0.1)
    with pytest.raises(DomainError):
        outage_fraction(0.8, 1e6, 0.5, 0.1, n_draws=0)
