"""Minimum distance of scaled integer combinations and the measure of their outage sets.

The outage set of a construction is the set of channel gains for which some
nonzero integer vector q inside a box makes |sum_i A_i g_i q_i| smaller than a
threshold.  ``outage_fraction`` estimates its measure under uniform channel
draws and ``measure_bound`` returns the closed-form bound it should respect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import sample_coefficients, trial_rng
from .errors import DomainError, SearchSpaceTooLargeError
from .estimates import McEstimate
from .scheme_macwt import eta_factors

__all__ = [
    "DEFAULT_CAP",
    "MinDistProblem",
    "McEstimate",
    "MeasureBound",
    "LemmaInstance",
    "LEMMA_IDS",
    "min_nonzero_combination",
    "min_distance",
    "evaluate_combination",
    "lemma_instance",
    "outage_fraction",
    "measure_bound",
    "two_term_measure",
    "three_term_measure",
]

DEFAULT_CAP = 10_000_000


@dataclass(frozen=True)
class MinDistProblem:
    """Terms A_i * g_i * q_i with q_i in [-range_i, range_i]."""

    scales: tuple[float, ...]
    gains: tuple[float, ...]
    ranges: tuple[int, ...]

    def __post_init__(self):
        n = len(self.scales)
        if n not in (2, 3) or len(self.gains) != n or len(self.ranges) != n:
            raise DomainError("a problem has two or three terms with matching scales, gains and ranges")
        if any(not a > 0 for a in self.scales):
            raise DomainError("scale factors must be positive")
        if any(int(r) != r or r < 0 for r in self.ranges):
            raise DomainError("ranges must be nonnegative integers")
        if all(r == 0 for r in self.ranges):
            raise DomainError("at least one range must be nonzero")
        object.__setattr__(self, "scales", tuple(float(a) for a in self.scales))
        object.__setattr__(self, "gains", tuple(float(g) for g in self.gains))
        object.__setattr__(self, "ranges", tuple(int(r) for r in self.ranges))

    @property
    def coefficients(self) -> tuple[float, ...]:
        return tuple(a * g for a, g in zip(self.scales, self.gains))


def evaluate_combination(coeffs: Sequence[float], q: np.ndarray) -> np.ndarray:
    """|sum_i c_i q_i| for rows of integer matrix ``q``, summed left to right."""
    q = np.asarray(q)
    total = coeffs[0] * q[..., 0]
    for i in range(1, len(coeffs)):
        total = total + coeffs[i] * q[..., i]
    return np.abs(total)


def min_nonzero_combination(coeffs: Sequence[float], bounds: Sequence[int], cap: int = DEFAULT_CAP) -> float:
    """min |sum c_i q_i| over nonzero integer q with |q_i| <= bounds_i; inf if the box is {0}.

    All coordinates but one are enumerated; the remaining one is the nearest
    integer (clipped) to the value that zeroes the sum, checked with its two
    neighbours, which is exact because |s + c q| is convex in q.
    """
    coeffs = [float(c) for c in coeffs]
    bounds = [int(b) for b in bounds]
    if len(coeffs) != len(bounds) or not coeffs:
        raise DomainError("coefficients and bounds must match")
    size = math.prod(2 * b + 1 for b in bounds)
    if size > cap:
        raise SearchSpaceTooLargeError(f"search space of {size} points exceeds cap {cap}")
    if all(b == 0 for b in bounds):
        return math.inf
    k = len(coeffs)
    live = [i for i in range(k) if coeffs[i] != 0.0 and bounds[i] > 0]
    if not live:
        return 0.0
    last = max(live, key=lambda i: (bounds[i], i))
    others = [i for i in range(k) if i != last]
    if others:
        grids = np.meshgrid(*[np.arange(-bounds[i], bounds[i] + 1) for i in others], indexing="ij")
        prefix = np.stack([g.ravel() for g in grids], axis=1)
    else:
        prefix = np.zeros((1, 0), dtype=np.int64)
    partial = np.zeros(prefix.shape[0])
    for j, i in enumerate(others):
        partial = partial + coeffs[i] * prefix[:, j]
    c = coeffs[last]
    b = bounds[last]
    centre = np.clip(np.rint(-partial / c), -b, b)
    best = math.inf
    for shift in (-1, 0, 1):
        ql = np.clip(centre + shift, -b, b).astype(np.int64)
        q = np.empty((prefix.shape[0], k), dtype=np.int64)
        q[:, others] = prefix
        q[:, last] = ql
        vals = evaluate_combination(coeffs, q)
        nonzero = np.any(q != 0, axis=1)
        if np.any(nonzero):
            best = min(best, float(np.min(vals[nonzero])))
    return best


def min_distance(p: MinDistProblem, cap: int = DEFAULT_CAP) -> float:
    """Smallest gap between two distinct noiseless points sum_i A_i g_i q_i."""
    return min_nonzero_combination(p.coefficients, [2 * r for r in p.ranges], cap)


@dataclass(frozen=True)
class MeasureBound:
    value: float
    vacuous: bool


# leading constants of the four outage-measure bounds, all of the form C * kappa * P^(-eps/2)
_CONSTANTS = {
    "ic_two_term": 64.0,
    "mac_small_b": 3584.0,
    "mac_three_term": 193536.0,
    "mac_alpha_one": 1792.0,
}
LEMMA_IDS = tuple(_CONSTANTS)


def measure_bound(lemma_id: str, kappa: float, eps: float, P: float) -> MeasureBound:
    if lemma_id not in _CONSTANTS:
        raise DomainError(f"unknown lemma id {lemma_id!r}; expected one of {LEMMA_IDS}")
    if kappa < 0 or eps <= 0 or P < 1:
        raise DomainError("need kappa >= 0, eps > 0, P >= 1")
    v = _CONSTANTS[lemma_id] * kappa * P ** (-eps / 2.0)
    return MeasureBound(v, v >= 1.0)


def two_term_measure(beta, eta, Q0, Q1, A0, A1) -> float:
    """Measure bound for {(g0, g1) in (1, eta]^2 : some nonzero |A1 g1 q1 + A0 g0 q0| < beta}."""
    return 8.0 * beta * (eta - 1) * min(Q0 * Q1 / A1, Q1 * Q0 / A0, Q0 * eta / A1, Q1 * eta / A0)


def three_term_measure(beta, Q0, Q1, Q2, A1, A2) -> float:
    """Measure bound for the three-term set with unit first scale over (1, 4]^3."""
    qt1 = min(Q1, 8.0 * max(Q0, A2 * Q2) / A1)
    qt2 = min(Q2, 8.0 * max(Q0, A1 * Q1) / A2)
    return 504.0 * beta * (2 * Q0 / A2 + Q0 * qt2 / A1 + 2 * Q0 / A1 + Q0 * qt1 / A2)


@dataclass(frozen=True)
class LemmaInstance:
    """Outage test for one construction: its search box and distance threshold."""

    lemma_id: str
    scales: tuple[float, ...]
    bounds: tuple[int, ...]
    nominal_bounds: tuple[float, ...]
    threshold: float
    params: dict

    def gains(self, h: np.ndarray) -> tuple[float, ...]:
        h11, h12, h21, h22 = (float(v) for v in h)
        p = self.params
        if self.lemma_id == "ic_two_term":
            return (h11, h12)
        if self.lemma_id == "mac_small_b":
            return (p["eta_2c"] * h12 * h21 / h22, h11 / 2.0)
        if self.lemma_id == "mac_three_term":
            return (h11 / 4.0, p["eta_1c"] * h11 / 2.0, p["eta_2c"] * h12 * h21 / (2.0 * h22))
        return (p["eta_1c"] * h11, p["eta_2c"] * h12 * h21 / h22)

    def d_min(self, h, cap: int = DEFAULT_CAP) -> float:
        coeffs = [a * g for a, g in zip(self.scales, self.gains(h))]
        return min_nonzero_combination(coeffs, self.bounds, cap)

    def in_outage(self, h, cap: int = DEFAULT_CAP) -> bool:
        return self.d_min(h, cap) < self.threshold


def _box(x: float) -> int:
    return max(0, math.floor(x * (1.0 + 1e-12)))


def lemma_instance(
    lemma_id: str,
    alpha: float,
    P: float,
    eps: float,
    kappa: float,
    *,
    B: float | None = None,
    pair: tuple[float, float] | None = None,
) -> LemmaInstance:
    """Build a construction's outage test from scheme parameters."""
    sp = lambda e: P ** (e / 2.0)  # noqa: E731
    if lemma_id == "ic_two_term":
        if not (2.0 / 3.0 - 1e-12 <= alpha < 1.0):
            raise DomainError("the two-term interference construction needs 2/3 <= alpha < 1")
        qmax = max(1, math.floor(P ** ((alpha / 2.0 - eps) / 2.0) * (1.0 + 1e-12)))
        nominal = (2.0 * qmax, 4.0 * qmax)
        return LemmaInstance(
            lemma_id,
            (sp(1 - alpha), 1.0),
            (2 * qmax, 4 * qmax),
            nominal,
            kappa * P ** (-(1.5 * alpha - 1.0) / 2.0),
            {"Q_max": qmax},
        )
    if lemma_id == "mac_small_b":
        B = 0.0 if B is None else B
        if not (0 <= B <= max(2 * alpha - 1, 0.0) + 1e-12 and alpha <= 2.0 / 3.0 + 1e-12):
            raise DomainError("small-B construction needs alpha <= 2/3 and B <= (2 alpha - 1)^+")
        _, eta2 = eta_factors(P, alpha - eps, B - eps)
        nominal = (2 * sp(B - eps), 2 * sp(1 - alpha - B - eps))
        return LemmaInstance(
            lemma_id,
            (sp(2 * alpha - 1 - B + eps), sp(B + eps)),
            tuple(_box(q) for q in nominal),
            nominal,
            kappa * sp(eps),
            {"eta_2c": eta2},
        )
    if lemma_id == "mac_three_term":
        B = 0.0 if B is None else B
        if not (2.0 / 3.0 - 1e-12 <= alpha < 1.0 and 0 <= B <= 3 * alpha - 2 + 1e-12):
            raise DomainError("three-term construction needs 2/3 <= alpha < 1 and 0 <= B <= 3 alpha - 2")
        eta1, eta2 = eta_factors(P, alpha - B - eps, B - eps)
        nominal = (2 * sp(1 - alpha - eps), 2 * sp(alpha - B - eps), 2 * sp(B - eps))
        return LemmaInstance(
            lemma_id,
            (1.0, sp(1 - alpha + B), sp(2 * alpha - 1 - B)),
            tuple(_box(q) for q in nominal),
            nominal,
            kappa * sp(eps),
            {"eta_1c": eta1, "eta_2c": eta2},
        )
    if lemma_id == "mac_alpha_one":
        d1, d2 = pair if pair is not None else (0.5, 0.5)
        eta1, eta2 = eta_factors(P, d1 - eps, d2 - eps)
        nominal = (2 * sp(d1 - eps), 2 * sp(d2 - eps))
        return LemmaInstance(
            lemma_id,
            (sp(1 - d1 + eps), sp(1 - d2 + eps)),
            tuple(_box(q) for q in nominal),
            nominal,
            kappa * sp(eps),
            {"eta_1c": eta1, "eta_2c": eta2},
        )
    raise DomainError(f"unknown lemma id {lemma_id!r}; expected one of {LEMMA_IDS}")


_DEFAULT_ALPHA = {"ic_two_term": 0.8, "mac_small_b": 0.6, "mac_three_term": 0.8, "mac_alpha_one": 1.0}
_DEFAULT_B = {"mac_small_b": 0.1, "mac_three_term": 0.2}


def outage_fraction(
    alpha: float | None,
    P: float,
    eps: float,
    kappa: float,
    regime: str = "ic_two_term",
    n_draws: int = 10_000,
    seed: int = 0,
    *,
    B: float | None = None,
    pair: tuple[float, float] | None = None,
    cap: int = DEFAULT_CAP,
) -> McEstimate:
    """Fraction of uniform channel draws whose minimum distance falls below the threshold."""
    if int(n_draws) != n_draws or n_draws <= 0:
        raise DomainError(f"n_draws must be a positive integer, got {n_draws!r}")
    if alpha is None:
        alpha = _DEFAULT_ALPHA.get(regime, 0.8)
    if B is None:
        B = _DEFAULT_B.get(regime)
    inst = lemma_instance(regime, alpha, P, eps, kappa, B=B, pair=pair)
    hs = sample_coefficients(trial_rng(seed, 0), int(n_draws))
    hits = 0
    for h in hs:
        hits += inst.in_outage(h, cap)
    return McEstimate.from_counts(hits, int(n_draws), seed)

