"""PAM constellations with their moments and exact sum distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError

__all__ = [
    "PamSet",
    "DiscreteDistribution",
    "pam_second_moment",
    "pam_entropy_bits",
    "pam_sum_distribution",
    "pam_halfwidth",
    "pam_for_budget",
    "add_independent",
]

# dense convolution is used while the offset grid stays below this many cells
_DENSE_LIMIT = 5_000_000
# outer-sum enumeration cap for incommensurate supports
_MERGE_LIMIT = 20_000_000


@dataclass(frozen=True)
class PamSet:
    """The set {step * a : a integer, |a| <= halfwidth} under a uniform prior."""

    step: float
    halfwidth: int

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise DomainError(f"PAM step must be positive and finite, got {self.step!r}")
        if int(self.halfwidth) != self.halfwidth or self.halfwidth < 1:
            raise DomainError(f"PAM half-width must be a positive integer, got {self.halfwidth!r}")
        object.__setattr__(self, "halfwidth", int(self.halfwidth))

    @property
    def cardinality(self) -> int:
        return 2 * self.halfwidth + 1

    @property
    def max_magnitude(self) -> float:
        return self.step * self.halfwidth

    def indices(self) -> np.ndarray:
        return np.arange(-self.halfwidth, self.halfwidth + 1)

    def points(self) -> np.ndarray:
        return self.step * self.indices()

    def index_of(self, value, *, rtol: float = 1e-9):
        """Integer index of ``value`` (scalar or array); raises if any value is off-grid."""
        v = np.asarray(value, dtype=float)
        k = np.rint(v / self.step)
        off = np.abs(v - k * self.step) > rtol * self.step
        if np.any(off) or np.any(np.abs(k) > self.halfwidth):
            raise DomainError(f"symbol outside PAM set (step={self.step}, Q={self.halfwidth})")
        k = k.astype(np.int64)
        return int(k) if k.ndim == 0 else k

    def contains(self, value, *, rtol: float = 1e-9) -> bool:
        try:
            self.index_of(value, rtol=rtol)
        except DomainError:
            return False
        return True


def pam_second_moment(s: PamSet) -> float:
    """E|v|^2 for v uniform on ``s``."""
    q = s.halfwidth
    return s.step * s.step * (q * (q + 1)) / 3.0


def pam_entropy_bits(s: PamSet) -> float:
    return math.log2(s.cardinality)


def pam_halfwidth(P: float, lam: float) -> int:
    """Integer half-width realizing the nominal size P^(lam/2), never below 1."""
    if lam < 0:
        raise DomainError(f"layer budget must be nonnegative, got {lam!r}")
    nominal = P ** (lam / 2.0)
    # guard against 9.999999999 style undershoot of exact powers
    return max(1, math.floor(nominal * (1.0 + 1e-12)))


def pam_for_budget(gamma: float, P: float, lam: float, *, scale: float = 1.0, divisor: int = 1) -> PamSet:
    """PAM set with step scale*gamma/(divisor*P^(lam/2)) and half-width from ``pam_halfwidth``.

    The step uses the unfloored nominal size so that step ratios between layers
    keep their designed integer relations; the floored half-width only trims
    the outermost points, which can only lower the peak amplitude.
    """
    step = scale * gamma / (divisor * P ** (lam / 2.0))
    return PamSet(step, pam_halfwidth(P, lam))


class DiscreteDistribution:
    """Finite real-valued distribution with sorted support.

    When ``step`` is set, every support value is an integer multiple of it,
    which lets sums with commensurate lattices use exact integer convolution.
    """

    __slots__ = ("values", "probs", "step")

    def __init__(self, values, probs, step: float | None = None):
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if values.shape != probs.shape or values.ndim != 1 or values.size == 0:
            raise DomainError("values and probs must be matching nonempty vectors")
        order = np.argsort(values, kind="stable")
        self.values = values[order]
        self.probs = probs[order]
        self.step = step

    @classmethod
    def uniform_pam(cls, s: PamSet, scale: float = 1.0) -> "DiscreteDistribution":
        if scale == 0:
            raise DomainError("scale must be nonzero")
        n = s.cardinality
        return cls(scale * s.points(), np.full(n, 1.0 / n), abs(scale) * s.step)

    @classmethod
    def point_mass(cls, value: float = 0.0) -> "DiscreteDistribution":
        return cls([value], [1.0], None)

    @property
    def support_size(self) -> int:
        return int(self.values.size)

    def total_mass(self) -> float:
        return float(math.fsum(self.probs))

    def entropy_bits(self) -> float:
        p = self.probs[self.probs > 0]
        return float(-np.sum(p * np.log2(p)))

    def second_moment(self) -> float:
        return float(np.sum(self.probs * self.values**2))

    def max_magnitude(self) -> float:
        return float(np.max(np.abs(self.values)))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(self.values, size=size, p=self.probs / self.probs.sum())

    def __repr__(self):
        return f"DiscreteDistribution(support={self.support_size}, step={self.step})"


def _common_lattice(s1: float, s2: float) -> tuple[float, int, int] | None:
    """Return (base, m1, m2) with s1 = m1*base and s2 = m2*base when the ratio is a small rational."""
    ratio = s2 / s1
    frac = Fraction(ratio).limit_denominator(4096)
    if frac.numerator <= 0:
        return None
    if abs(float(frac) - ratio) > 1e-9 * ratio:
        return None
    base = s1 / frac.denominator
    return base, frac.denominator, frac.numerator


def _to_offsets(d: DiscreteDistribution, mult: int) -> np.ndarray:
    k = np.rint(d.values / d.step).astype(np.int64)
    return k * mult


def add_independent(x: DiscreteDistribution, y: DiscreteDistribution) -> DiscreteDistribution:
    """Distribution of X+Y for independent X, Y."""
    if x.step is not None and y.step is not None:
        lat = _common_lattice(x.step, y.step)
        if lat is not None:
            base, mx, my = lat
            kx = _to_offsets(x, mx)
            ky = _to_offsets(y, my)
            lo = int(kx.min() + ky.min())
            span_x = int(kx.max() - kx.min()) + 1
            span_y = int(ky.max() - ky.min()) + 1
            if span_x + span_y < _DENSE_LIMIT:
                px = np.zeros(span_x)
                py = np.zeros(span_y)
                np.add.at(px, kx - kx.min(), x.probs)
                np.add.at(py, ky - ky.min(), y.probs)
                pz = np.convolve(px, py)
                nz = np.nonzero(pz > 0)[0]
                return DiscreteDistribution(base * (lo + nz), pz[nz], base)
    return _merge_sum(x, y)


def _merge_sum(x: DiscreteDistribution, y: DiscreteDistribution) -> DiscreteDistribution:
    n = x.support_size * y.support_size
    if n > _MERGE_LIMIT:
        raise DomainError(f"sum support enumeration of {n} points exceeds limit")
    vals = (x.values[:, None] + y.values[None, :]).ravel()
    probs = (x.probs[:, None] * y.probs[None, :]).ravel()
    order = np.argsort(vals, kind="stable")
    vals, probs = vals[order], probs[order]
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    new_group = np.empty(vals.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(vals) > 1e-12 * scale
    group = np.cumsum(new_group) - 1
    merged_p = np.bincount(group, weights=probs)
    merged_v = vals[new_group]
    return DiscreteDistribution(merged_v, merged_p, None)


def pam_sum_distribution(a: PamSet, b: PamSet) -> DiscreteDistribution:
    """Exact distribution of the sum of independent uniform draws from ``a`` and ``b``."""
    return add_independent(DiscreteDistribution.uniform_pam(a), DiscreteDistribution.uniform_pam(b))
