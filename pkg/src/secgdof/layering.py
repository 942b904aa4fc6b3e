"""Layered transmit designs and their receiver-side term decomposition.

A design places PAM sources on each transmitter as layers ``coeff * sqrt(P)^e * s``.
At a receiver every layer becomes a term whose exponent adds the link exponent
and whose coefficient picks up the channel gain.  Terms are then classified
structurally: the receiver's own messages, jamming groups that land on a
protected message (aligned), jamming groups that cancel (neutralized), and the
rest (residual, which must sit at or below the noise floor).
"""

from __future__ import annotations

import enum
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .channel import ChannelConfig, Setting
from .constellation import PamSet, pam_second_moment
from .errors import DomainError, EpsilonTooLargeError
from .gdof import GdofPoint

__all__ = [
    "Regime",
    "Layer",
    "Term",
    "AlignedGroup",
    "NeutralizedGroup",
    "RxDecomposition",
    "Budget",
    "SchemeDesign",
    "StructureReport",
    "robust_ceil",
    "default_epsilon",
    "resolve_budgets",
    "receiver_terms",
    "decompose",
    "decompose_all",
    "tx_second_moment",
    "modulate",
    "modulate_indices",
    "layer_table",
    "structure_report",
    "channel_numbers",
    "channel_det",
]

EXP_DIGITS = 9
_SEAM_TOL = 1e-9


class Regime(str, enum.Enum):
    A_HALF_TWO_THIRDS = "A_half_two_thirds"
    A_TWO_THIRDS_ONE = "A_two_thirds_one"
    A_EQ_ONE = "A_eq_one"
    A_ONE_TWO = "A_one_two"
    A_GEQ_TWO = "A_geq_two"
    W_HALF_ONE = "W_half_one"
    W_EQ_ONE = "W_eq_one"
    W_GT_ONE = "W_gt_one"
    M_LOW_SMALL_B = "M_low_smallB"
    M_LOW_LARGE_B = "M_low_largeB"
    M_MID_SMALL_B = "M_mid_smallB"
    M_MID_LARGE_B = "M_mid_largeB"
    M_EQ_ONE = "M_eq_one"


def robust_ceil(x: float) -> int:
    """Ceiling that ignores float noise just above an integer (4.000000000000001 -> 4)."""
    return math.ceil(x - _SEAM_TOL)


def _fmt(x) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class Layer:
    source: str
    coeff: Real
    exponent: float
    label: str = ""


@dataclass(frozen=True)
class Term:
    source: str
    tx: int
    coeff: Real
    exponent: float
    label: str = ""

    def amplitude(self, P: float) -> float:
        """Received coefficient multiplying the source symbol at power ``P``."""
        return float(self.coeff) * P ** (self.exponent / 2.0)


def _sum(values):
    vals = list(values)
    if all(isinstance(v, (int, Fraction)) for v in vals):
        return sum(vals, Fraction(0))
    return math.fsum(float(v) for v in vals)


@dataclass(frozen=True)
class AlignedGroup:
    exponent: float
    jammer: str
    message_terms: tuple[Term, ...]
    jammer_terms: tuple[Term, ...]

    @property
    def jammer_coeff(self):
        return _sum(t.coeff for t in self.jammer_terms)

    @property
    def mismatch(self) -> float:
        """Largest relative gap between a message coefficient and the summed jammer coefficient."""
        jc = self.jammer_coeff
        scale = max(abs(float(jc)), 1e-300)
        return max(abs(float(t.coeff - jc)) / scale for t in self.message_terms)


@dataclass(frozen=True)
class NeutralizedGroup:
    source: str
    exponent: float
    terms: tuple[Term, ...]

    @property
    def coeff_sum(self):
        return _sum(t.coeff for t in self.terms)

    @property
    def relative_residual(self) -> float:
        scale = max(abs(float(t.coeff)) for t in self.terms)
        return abs(float(self.coeff_sum)) / scale


@dataclass(frozen=True)
class RxDecomposition:
    receiver: int
    desired: tuple[Term, ...]
    aligned: tuple[AlignedGroup, ...]
    neutralized: tuple[NeutralizedGroup, ...]
    residual: tuple[Term, ...]

    @property
    def neutralized_pairs(self) -> tuple[tuple[Term, Term], ...]:
        return tuple(tuple(g.terms) for g in self.neutralized if len(g.terms) == 2)

    def terms(self) -> list[Term]:
        out = list(self.desired)
        for g in self.aligned:
            out.extend(g.message_terms)
            out.extend(g.jammer_terms)
        for g in self.neutralized:
            out.extend(g.terms)
        out.extend(self.residual)
        return out

    @property
    def max_residual_exponent(self) -> float:
        return max((t.exponent for t in self.residual), default=-math.inf)

    def noiseless_value(self, symbols: Mapping[str, object], P: float):
        """Sum of all terms for the given source values (scalars or arrays)."""
        total = 0.0
        for t in self.terms():
            total = total + t.amplitude(P) * np.asarray(symbols[t.source], dtype=float)
        return total


@dataclass(frozen=True)
class Budget:
    """A layer budget lambda = base - k * epsilon; a zero base means the layer is absent."""

    base: float
    k: int = 1

    def value(self, epsilon: float) -> float:
        return self.base - self.k * epsilon

    @property
    def present(self) -> bool:
        return self.base > _SEAM_TOL


def default_epsilon(budgets: Mapping[str, Budget]) -> float:
    limits = [b.base / (2 * b.k) for b in budgets.values() if b.present and b.k > 0]
    return min([0.1, *limits])


def resolve_budgets(budgets: Mapping[str, Budget], epsilon: float) -> dict[str, float]:
    """Evaluate budgets at ``epsilon``; absent layers map to 0."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    out = {}
    for name, b in budgets.items():
        if not b.present:
            out[name] = 0.0
            continue
        lam = b.value(epsilon)
        if lam < -1e-12:
            raise EpsilonTooLargeError(f"epsilon={epsilon} makes budget of {name} negative ({lam:.6g})")
        out[name] = max(lam, 0.0)
    return out


@dataclass(frozen=True, eq=False)
class SchemeDesign:
    setting: Setting
    regime: Regime
    alpha: float
    P: float
    tau: int
    gamma: float
    gamma_max: float
    eps_tilde: Real
    epsilon: float
    sources: Mapping[str, PamSet]
    tx_layers: tuple[tuple[Layer, ...], tuple[Layer, ...]]
    claimed: GdofPoint
    achieved: GdofPoint
    budgets: Mapping[str, float]
    exponents: Mapping[str, float]
    deltas: Mapping[str, Real]
    messages: tuple[tuple[str, ...], tuple[str, ...]]
    protected: tuple[tuple[tuple[tuple[str, ...], str], ...], tuple[tuple[tuple[str, ...], str], ...]]
    jammers: tuple[str, ...]
    decode_plans: tuple[tuple[tuple[str, ...], ...] | None, tuple[tuple[str, ...], ...] | None]
    extras: Mapping[str, float] = field(default_factory=dict)
    exact: bool = False

    def __post_init__(self):
        for name in ("sources", "budgets", "exponents", "deltas", "extras"):
            object.__setattr__(self, name, MappingProxyType(dict(getattr(self, name))))

    @property
    def message_sources(self) -> tuple[str, ...]:
        return tuple(s for s in self.sources if s not in self.jammers)

    def layers_of(self, source: str) -> list[tuple[int, Layer]]:
        return [(k + 1, lay) for k in range(2) for lay in self.tx_layers[k] if lay.source == source]


def channel_numbers(cfg: ChannelConfig, exact: bool):
    """Channel gains as exact rationals (lossless for binary floats) or floats."""
    vals = (cfg.h11, cfg.h12, cfg.h21, cfg.h22)
    if exact:
        return tuple(Fraction(v) for v in vals)
    return tuple(float(v) for v in vals)


def channel_det(h):
    """h11*h22 - h12*h21, rejecting channels where the alpha = 1 designs degenerate."""
    h11, h12, h21, h22 = h
    det = h11 * h22 - h12 * h21
    if abs(float(det)) <= 1e-12 * float(h11 * h22):
        raise DomainError("alpha = 1 design needs h11*h22 != h12*h21")
    return det


def receiver_terms(design: SchemeDesign, cfg: ChannelConfig, rx: int) -> list[Term]:
    hs = channel_numbers(cfg, design.exact)
    h = ((hs[0], hs[1]), (hs[2], hs[3]))
    out = []
    for tx in (1, 2):
        g = h[rx - 1][tx - 1]
        link = cfg.link_exponent(rx, tx)
        for lay in design.tx_layers[tx - 1]:
            out.append(Term(lay.source, tx, lay.coeff * g, lay.exponent + link, lay.label))
    return out


def _ekey(e: float) -> float:
    return round(e, EXP_DIGITS)


def decompose(design: SchemeDesign, cfg: ChannelConfig, rx: int) -> RxDecomposition:
    terms = receiver_terms(design, cfg, rx)
    own = set(design.messages[rx - 1])
    jam = set(design.jammers)

    desired = [t for t in terms if t.source in own]
    foreign = [t for t in terms if t.source not in own and t.source not in jam]
    groups: dict[tuple[str, float], list[Term]] = defaultdict(list)
    for t in terms:
        if t.source in jam:
            groups[(t.source, _ekey(t.exponent))].append(t)

    aligned = []
    used_msgs: set[int] = set()
    for msgs, jammer in design.protected[rx - 1]:
        by_exp: dict[float, list[Term]] = defaultdict(list)
        for i, t in enumerate(foreign):
            if t.source in msgs:
                by_exp[_ekey(t.exponent)].append((i, t))
        for e, items in sorted(by_exp.items()):
            key = (jammer, e)
            if key not in groups:
                continue
            jt = groups.pop(key)
            used_msgs.update(i for i, _ in items)
            aligned.append(AlignedGroup(items[0][1].exponent, jammer, tuple(t for _, t in items), tuple(jt)))

    residual = [t for i, t in enumerate(foreign) if i not in used_msgs]
    neutralized = []
    for (src, _), ts in sorted(groups.items(), key=lambda kv: (kv[0][0], -kv[0][1])):
        if len(ts) >= 2:
            neutralized.append(NeutralizedGroup(src, ts[0].exponent, tuple(ts)))
        else:
            residual.extend(ts)
    return RxDecomposition(rx, tuple(desired), tuple(aligned), tuple(neutralized), tuple(residual))


def decompose_all(design: SchemeDesign, cfg: ChannelConfig) -> tuple[RxDecomposition, RxDecomposition]:
    return decompose(design, cfg, 1), decompose(design, cfg, 2)


def tx_second_moment(design: SchemeDesign, tx: int) -> float:
    """Exact E|x_tx|^2 under independent uniform sources."""
    per_source: dict[str, float] = defaultdict(float)
    for lay in design.tx_layers[tx - 1]:
        per_source[lay.source] += float(lay.coeff) * design.P ** (lay.exponent / 2.0)
    return math.fsum(amp * amp * pam_second_moment(design.sources[s]) for s, amp in per_source.items())


def _layer_amplitudes(design: SchemeDesign):
    return [
        [(lay.source, float(lay.coeff) * design.P ** (lay.exponent / 2.0)) for lay in design.tx_layers[k]]
        for k in range(2)
    ]


def modulate(design: SchemeDesign, symbols: Mapping[str, object]):
    """Channel inputs (x1, x2) for source values; every value must lie in its PAM set."""
    idx = {}
    for name, pam in design.sources.items():
        if name not in symbols:
            raise DomainError(f"missing symbol for source {name!r}")
        idx[name] = pam.index_of(symbols[name])
    extra = set(symbols) - set(design.sources)
    if extra:
        raise DomainError(f"unknown sources {sorted(extra)}")
    x1, x2 = modulate_indices(design, idx)
    if np.ndim(x1) == 0:
        return float(x1), float(x2)
    return x1, x2


def modulate_indices(design: SchemeDesign, idx: Mapping[str, object]):
    """Channel inputs from integer symbol indices (no membership checks)."""
    out = []
    for layers in _layer_amplitudes(design):
        x = 0.0
        for src, amp in layers:
            x = x + amp * design.sources[src].step * np.asarray(idx[src], dtype=float)
        out.append(x)
    return out[0], out[1]


def layer_table(design: SchemeDesign) -> str:
    """Deterministic, human-readable export of a design."""
    lines = [
        f"setting={design.setting.value}",
        f"regime={design.regime.value}",
        f"alpha={_fmt(design.alpha)}",
        f"P={_fmt(design.P)}",
        f"tau={design.tau}",
        f"gamma={_fmt(design.gamma)}",
        f"eps_tilde={_fmt(design.eps_tilde)}",
        f"epsilon={_fmt(design.epsilon)}",
        f"claimed=({_fmt(design.claimed.d1)},{_fmt(design.claimed.d2)},{_fmt(design.claimed.dc)})",
    ]
    for k, v in design.extras.items():
        lines.append(f"{k}={_fmt(v)}")
    lines.append("[sources]")
    lines.append("source,step,halfwidth,budget")
    for name, pam in design.sources.items():
        lines.append(f"{name},{_fmt(pam.step)},{pam.halfwidth},{_fmt(design.budgets.get(name, 0.0))}")
    lines.append("[exponents]")
    for name, v in design.exponents.items():
        lines.append(f"{name},{_fmt(v)}")
    lines.append("[deltas]")
    for name, v in design.deltas.items():
        lines.append(f"{name},{_fmt(v)}")
    lines.append("[layers]")
    lines.append("tx,source,label,coefficient,exponent")
    for k in range(2):
        for lay in design.tx_layers[k]:
            lines.append(f"{k + 1},{lay.source},{lay.label},{_fmt(lay.coeff)},{_fmt(lay.exponent)}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class StructureReport:
    max_neutralization_residual: float
    exact_neutralization: bool
    max_alignment_mismatch: float
    exact_alignment: bool
    tx_power: tuple[float, float]
    max_residual_exponent: float
    neutralized_groups: int
    aligned_groups: int

    def ok(self, tol: float = 1e-10) -> bool:
        return (
            self.max_neutralization_residual <= tol
            and self.max_alignment_mismatch <= tol
            and max(self.tx_power) <= 1.0
            and self.max_residual_exponent <= 1e-9
        )


def structure_report(design: SchemeDesign, cfg: ChannelConfig) -> StructureReport:
    decs = decompose_all(design, cfg)
    groups = [g for d in decs for g in d.neutralized]
    aligned = [g for d in decs for g in d.aligned]
    return StructureReport(
        max_neutralization_residual=max((g.relative_residual for g in groups), default=0.0),
        exact_neutralization=all(isinstance(g.coeff_sum, Fraction) and g.coeff_sum == 0 for g in groups),
        max_alignment_mismatch=max((g.mismatch for g in aligned), default=0.0),
        exact_alignment=all(
            isinstance(g.jammer_coeff, Fraction) and all(t.coeff == g.jammer_coeff for t in g.message_terms)
            for g in aligned
        ),
        tx_power=(tx_second_moment(design, 1), tx_second_moment(design, 2)),
        max_residual_exponent=max(d.max_residual_exponent for d in decs),
        neutralized_groups=len(groups),
        aligned_groups=len(aligned),
    )
