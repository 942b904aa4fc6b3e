"""Nearest-point decoders for layered PAM observations.

Two styles are supported: single-layer rounding with everything weaker treated
as bounded interference, and exhaustive joint search over a few integer
components whose scaled sum forms a lattice-like point set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .channel import ChannelConfig
from .constellation import PamSet
from .diophantine import DEFAULT_CAP, min_nonzero_combination
from .errors import DomainError, SearchSpaceTooLargeError, UncertifiableStepError
from .layering import RxDecomposition, SchemeDesign, decompose

__all__ = [
    "Component",
    "LayerEstimate",
    "StageReport",
    "SuccessiveResult",
    "gaussian_tail",
    "awgn_layer_decode",
    "joint_lattice_decode",
    "successive_decode",
    "receiver_components",
    "certify_plan",
    "decode_receiver",
]

# rows x candidates processed at once by the vectorised search
_CHUNK_CELLS = 4_000_000


def gaussian_tail(x: float) -> float:
    """P(Z > x) for standard normal Z."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def _error_bound(margin: float) -> float:
    if margin <= 0:
        return 1.0
    return min(1.0, 2.0 * gaussian_tail(margin))


@dataclass(frozen=True)
class Component:
    """An integer-indexed contribution ``gain * q`` with |q| <= halfwidth.

    ``sources`` has one entry for a plain layer, or several when the component
    is an aligned sum whose index is the sum of the member indices.
    """

    name: str
    sources: tuple[str, ...]
    gain: float
    halfwidth: int

    @property
    def max_magnitude(self) -> float:
        return abs(self.gain) * self.halfwidth


@dataclass(frozen=True)
class LayerEstimate:
    index: int
    symbol: float
    error_bound: float


def _round_lower(t):
    """Nearest integer, with exact halves going to the lower one."""
    return np.ceil(np.asarray(t) - 0.5)


def awgn_layer_decode(y: float, layer: tuple[float, PamSet], interference_bound: float) -> LayerEstimate:
    """Nearest point of ``coeff * PamSet`` to ``y`` plus the Gaussian-tail error bound."""
    coeff, pam = layer
    if not coeff > 0:
        raise DomainError(f"layer coefficient must be positive, got {coeff!r}")
    if interference_bound < 0:
        raise DomainError("interference bound must be nonnegative")
    q = int(np.clip(_round_lower(y / (coeff * pam.step)), -pam.halfwidth, pam.halfwidth))
    margin = coeff * pam.step / 2.0 - interference_bound
    return LayerEstimate(q, q * pam.step, _error_bound(margin))


def _nearest(y: np.ndarray, gains: Sequence[float], halfwidths: Sequence[int], cap: int) -> np.ndarray:
    """Vectorised exhaustive nearest point; returns an (n, k) index array."""
    k = len(gains)
    size = math.prod(2 * q + 1 for q in halfwidths)
    if size > cap:
        raise SearchSpaceTooLargeError(f"joint search over {size} points exceeds cap {cap}")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    last = max(range(k), key=lambda i: (halfwidths[i], -i))
    others = [i for i in range(k) if i != last]
    if others:
        prefix = np.array(list(itertools.product(*[range(-halfwidths[i], halfwidths[i] + 1) for i in others])))
        partial = prefix @ np.array([gains[i] for i in others])
    else:
        prefix = np.zeros((1, 0), dtype=np.int64)
        partial = np.zeros(1)
    g = gains[last]
    b = halfwidths[last]
    out = np.empty((y.size, k), dtype=np.int64)
    rows = max(1, _CHUNK_CELLS // max(1, partial.size))
    for start in range(0, y.size, rows):
        yc = y[start : start + rows]
        resid = yc[:, None] - partial[None, :]
        ql = np.clip(_round_lower(resid / g), -b, b)
        dev = np.abs(resid - g * ql)
        best = np.argmin(dev, axis=1)
        out[start : start + rows, last] = ql[np.arange(yc.size), best]
        if others:
            out[start : start + rows][:, others] = prefix[best]
    return out


def joint_lattice_decode(
    y,
    terms: Sequence[tuple[float, int]],
    noise_plus_bounded: float | None = None,
    *,
    cap: int = DEFAULT_CAP,
):
    """Indices (q_1, ..., q_k) minimising |y - sum_i c_i q_i| over the box |q_i| <= Q_i.

    ``y`` may be a scalar (tuple result) or an array (array of shape (n, k)).
    When ``noise_plus_bounded`` is given the call also checks that it is below
    half the minimum distance, the condition under which recovery is guaranteed.
    """
    if len(terms) not in (1, 2, 3):
        raise DomainError("joint decoding handles one to three terms")
    gains = [float(c) for c, _ in terms]
    hws = [int(q) for _, q in terms]
    if any(q < 0 for q in hws):
        raise DomainError("q-ranges must be nonnegative")
    if noise_plus_bounded is not None:
        dmin = min_nonzero_combination(gains, [2 * q for q in hws], cap)
        if noise_plus_bounded >= dmin / 2:
            raise UncertifiableStepError(
                "perturbation bound is not below half the minimum distance",
                bound=noise_plus_bounded,
                half_distance=dmin / 2,
            )
    est = _nearest(y, gains, hws, cap)
    if np.ndim(y) == 0:
        return tuple(int(v) for v in est[0])
    return est


def _stage_distance(comps: Sequence[Component], cap: int) -> float:
    if len(comps) == 1:
        return abs(comps[0].gain)
    return min_nonzero_combination([c.gain for c in comps], [2 * c.halfwidth for c in comps], cap)


@dataclass(frozen=True)
class StageReport:
    components: tuple[str, ...]
    min_distance: float
    interference_bound: float
    certified: bool
    error_bound: float

    @property
    def half_distance(self) -> float:
        return self.min_distance / 2.0


@dataclass(frozen=True)
class SuccessiveResult:
    estimates: dict
    reports: tuple[StageReport, ...]


def _stage_reports(plan: Sequence[Sequence[Component]], residual_bound: float, cap: int) -> list[StageReport]:
    reports = []
    for s, stage in enumerate(plan):
        later = sum(c.max_magnitude for st in plan[s + 1 :] for c in st)
        bound = later + residual_bound
        dmin = _stage_distance(stage, cap)
        reports.append(
            StageReport(
                tuple(c.name for c in stage),
                dmin,
                bound,
                bound < dmin / 2.0,
                _error_bound(dmin / 2.0 - bound),
            )
        )
    return reports


def successive_decode(
    y,
    plan: Sequence[Sequence[Component]],
    residual_bound: float = 0.0,
    *,
    certify: bool = True,
    cap: int = DEFAULT_CAP,
) -> SuccessiveResult:
    """Decode stage by stage, subtracting each decoded stage before the next.

    Everything not yet decoded, plus ``residual_bound``, is treated as bounded
    interference.  With ``certify`` the call refuses plans where that bound is
    not below half the stage's minimum distance.
    """
    reports = _stage_reports(plan, residual_bound, cap)
    if certify:
        for r in reports:
            if not r.certified:
                raise UncertifiableStepError(
                    f"stage {r.components}: interference bound {r.interference_bound:.6g} "
                    f">= half minimum distance {r.half_distance:.6g}",
                    step=r.components,
                    bound=r.interference_bound,
                    half_distance=r.half_distance,
                )
    scalar = np.ndim(y) == 0
    resid = np.atleast_1d(np.asarray(y, dtype=float)).copy()
    estimates = {}
    for stage in plan:
        idx = _nearest(resid, [c.gain for c in stage], [c.halfwidth for c in stage], cap)
        for j, c in enumerate(stage):
            estimates[c.name] = idx[:, j]
            resid = resid - c.gain * idx[:, j]
    if scalar:
        estimates = {k: int(v[0]) for k, v in estimates.items()}
    return SuccessiveResult(estimates, tuple(reports))


def _source_max(design: SchemeDesign, src: str) -> float:
    return design.sources[src].max_magnitude


def receiver_components(
    design: SchemeDesign, cfg: ChannelConfig, rx: int, dec: RxDecomposition | None = None
) -> tuple[dict[str, Component], float]:
    """Decodable components at ``rx`` and the worst-case magnitude of everything else."""
    if dec is None:
        dec = decompose(design, cfg, rx)
    P = design.P
    comps: dict[str, Component] = {}
    for t in dec.desired:
        pam = design.sources[t.source]
        comps[t.source] = Component(t.source, (t.source,), t.amplitude(P) * pam.step, pam.halfwidth)
    for g in dec.aligned:
        if len(g.message_terms) != 1:
            continue
        msg = g.message_terms[0]
        mp, jp = design.sources[msg.source], design.sources[g.jammer]
        if not math.isclose(mp.step, jp.step, rel_tol=1e-12):
            continue
        gain = float(g.jammer_coeff) * P ** (g.exponent / 2.0) * mp.step
        name = f"{msg.source}+{g.jammer}"
        comps[name] = Component(name, (msg.source, g.jammer), gain, mp.halfwidth + jp.halfwidth)
    residual = math.fsum(abs(t.amplitude(P)) * _source_max(design, t.source) for t in dec.residual)
    residual += math.fsum(
        abs(float(g.coeff_sum)) * P ** (g.exponent / 2.0) * _source_max(design, g.source) for g in dec.neutralized
    )
    # aligned groups that are not decoded as a unit still perturb the observation
    for g in dec.aligned:
        if any(c.sources[0] == g.message_terms[0].source and len(c.sources) == 2 for c in comps.values()):
            mismatch = max(abs(float(t.coeff - g.jammer_coeff)) for t in g.message_terms)
            residual += mismatch * P ** (g.exponent / 2.0) * _source_max(design, g.message_terms[0].source)
            continue
        residual += math.fsum(abs(t.amplitude(P)) * _source_max(design, t.source) for t in g.message_terms)
        residual += abs(float(g.jammer_coeff)) * P ** (g.exponent / 2.0) * _source_max(design, g.jammer)
    return comps, residual


def _plan_components(design: SchemeDesign, cfg: ChannelConfig, rx: int):
    stages = design.decode_plans[rx - 1]
    if stages is None:
        raise DomainError(f"receiver {rx} decodes nothing in this design")
    comps, residual = receiver_components(design, cfg, rx)
    try:
        plan = [[comps[name] for name in stage] for stage in stages]
    except KeyError as exc:
        raise DomainError(f"plan component {exc} is not decodable at receiver {rx}") from None
    listed = {name for stage in stages for name in stage}
    # anything decodable but left out of the plan counts as interference
    residual += math.fsum(c.max_magnitude for name, c in comps.items() if name not in listed)
    return plan, residual


def certify_plan(design: SchemeDesign, cfg: ChannelConfig, rx: int, cap: int = DEFAULT_CAP) -> tuple[StageReport, ...]:
    plan, residual = _plan_components(design, cfg, rx)
    return tuple(_stage_reports(plan, residual, cap))


def decode_receiver(
    design: SchemeDesign, cfg: ChannelConfig, rx: int, y, *, certify: bool = False, cap: int = DEFAULT_CAP
) -> Mapping[str, np.ndarray]:
    """Run the design's plan at ``rx``; returns integer index estimates per component."""
    plan, residual = _plan_components(design, cfg, rx)
    return successive_decode(y, plan, residual, certify=certify, cap=cap).estimates
