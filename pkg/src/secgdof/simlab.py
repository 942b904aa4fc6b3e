"""Monte Carlo experiments on top of the scheme designs.

Randomness is partitioned into fixed-size blocks, each with its own labelled
stream, so results do not depend on how blocks are spread over threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull
from scipy.special import logsumexp

from .channel import ChannelConfig, Setting, receive, trial_rng
from .constellation import DiscreteDistribution, add_independent, pam_entropy_bits
from .decoder import decode_receiver
from .errors import DomainError
from .estimates import McEstimate
from .gdof import GdofPoint, ic_sum_gdof, mac_region_contains, wth_gdof
from .layering import Regime, SchemeDesign, decompose, modulate_indices
from .scheme_macwt import design_macwt, role_swap, swap_channel

__all__ = [
    "McEstimate",
    "BLOCK",
    "mc_error_rate",
    "LeakageReport",
    "leakage_bound",
    "leakage_estimate",
    "RateReport",
    "secure_rate_eval",
    "ConverseReport",
    "converse_check",
    "finite_p_penalties",
    "RegionRow",
    "region_sweep",
    "region_hull",
]

BLOCK = 2048
_STREAM_ERROR = 0
_STREAM_LEAK = 1
_HZ_BITS = 0.5 * math.log2(2 * math.pi * math.e)


def _blocks(trials: int) -> list[tuple[int, int]]:
    if trials <= 0:
        raise DomainError(f"trials must be positive, got {trials}")
    return [(b, min(BLOCK, trials - b * BLOCK)) for b in range(math.ceil(trials / BLOCK))]


def _run_blocks(fn, blocks, workers: int):
    if workers <= 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, blocks))


def _decoding_receivers(design: SchemeDesign, receivers):
    avail = [rx for rx in (1, 2) if design.decode_plans[rx - 1] is not None]
    if receivers is None:
        return avail
    bad = [rx for rx in receivers if rx not in avail]
    if bad:
        raise DomainError(f"receivers {bad} have no decoding plan")
    return list(receivers)


def _error_block(design, cfg, seed, noiseless, receivers, block):
    b, n = block
    rng = trial_rng(seed, _STREAM_ERROR, b)
    idx = {name: rng.integers(-p.halfwidth, p.halfwidth + 1, size=n) for name, p in design.sources.items()}
    z = rng.standard_normal((2, n))
    if noiseless:
        z[:] = 0.0
    x1, x2 = modulate_indices(design, idx)
    y = receive(cfg, x1, x2, (z[0], z[1]))
    wrong = np.zeros(n, dtype=bool)
    for rx in receivers:
        est = decode_receiver(design, cfg, rx, y[rx - 1])
        for name in design.messages[rx - 1]:
            if name in est:
                wrong |= est[name] != idx[name]
    return int(wrong.sum())


def mc_error_rate(
    design: SchemeDesign,
    cfg: ChannelConfig,
    trials: int = 10_000,
    seed: int = 0,
    *,
    noiseless: bool = False,
    receivers: Sequence[int] | None = None,
    workers: int = 1,
) -> McEstimate:
    """Fraction of trials in which any message layer is decoded wrongly at a decoding receiver."""
    rxs = _decoding_receivers(design, receivers)
    counts = _run_blocks(
        lambda blk: _error_block(design, cfg, seed, noiseless, rxs, blk), _blocks(trials), workers
    )
    return McEstimate.from_counts(sum(counts), trials, seed)


# ---------------------------------------------------------------- leakage


@dataclass(frozen=True)
class LeakageReport:
    """Leakage at the eavesdropping receiver, split as in the penalty chain.

    ``discrete`` is the exact sum of H(aligned sum) - H(jammer) over aligned
    groups; ``continuous`` estimates h(residual + z) - h(z) by Monte Carlo.
    """

    estimate: McEstimate
    discrete: float
    continuous: McEstimate
    bound: float
    bound_kind: str
    receiver: int
    include_jammer: bool

    @property
    def within_bound(self) -> bool:
        return self.estimate.mean <= self.bound + 3 * self.estimate.stderr


def _eavesdropper(design: SchemeDesign) -> int:
    return 2


def _jam_entropy(design, name):
    return pam_entropy_bits(design.sources[name])


def _residual_distribution(design, dec, keep) -> DiscreteDistribution:
    P = design.P
    coeff: dict[str, float] = {}
    for t in dec.residual:
        if keep(t.source):
            coeff[t.source] = coeff.get(t.source, 0.0) + t.amplitude(P)
    for g in dec.neutralized:
        if keep(g.source):
            coeff[g.source] = coeff.get(g.source, 0.0) + float(g.coeff_sum) * P ** (g.exponent / 2.0)
    dist = DiscreteDistribution.point_mass(0.0)
    for src in sorted(coeff):
        c = coeff[src]
        if c != 0.0:
            dist = add_independent(dist, DiscreteDistribution.uniform_pam(design.sources[src], c))
    return dist


def _residual_second_moment(design, dec, keep) -> float:
    return _residual_distribution(design, dec, keep).second_moment()


def _group_sum_distribution(design, group, keep_jammer) -> DiscreteDistribution:
    dist = DiscreteDistribution.point_mass(0.0)
    for t in group.message_terms:
        dist = add_independent(dist, DiscreteDistribution.uniform_pam(design.sources[t.source]))
    if keep_jammer:
        dist = add_independent(dist, DiscreteDistribution.uniform_pam(design.sources[group.jammer]))
    return dist


def leakage_bound(design: SchemeDesign, cfg: ChannelConfig | None = None) -> tuple[float, str]:
    """Analytic leakage bound in bits and whether it is the closed form or design-evaluated."""
    tau = design.tau
    if design.setting is Setting.IC_SC:
        return math.log2(2 * math.sqrt(4 ** (tau + 1) + 5)), "closed-form"
    if design.setting is Setting.WTH:
        return math.log2(2 * math.sqrt(5)), "closed-form"
    if design.regime is Regime.M_LOW_SMALL_B:
        return math.log2(3 * math.sqrt(8 / (3 * tau**2) + 2 / (3 * tau**2 * 4**tau) + 1)), "closed-form"
    if design.regime is Regime.M_EQ_ONE:
        return math.log2(3), "closed-form"
    if cfg is None:
        raise DomainError("this MAC regime needs cfg to evaluate its bound")
    return _design_bound(design, cfg, _eavesdropper(design)), "design"


def _design_bound(design, cfg, rx):
    dec = decompose(design, cfg, rx)
    total = 0.0
    for g in dec.aligned:
        n = _group_sum_distribution(design, g, True).support_size
        total += math.log2(n) - _jam_entropy(design, g.jammer)
    total += 0.5 * math.log2(1.0 + _residual_second_moment(design, dec, lambda s: True))
    return total


def _log2_mixture_density(y: np.ndarray, dist: DiscreteDistribution) -> np.ndarray:
    """log2 of the density of (discrete + standard normal) at ``y``."""
    out = np.empty(y.size)
    logp = np.log(dist.probs / dist.probs.sum())
    rows = max(1, 2_000_000 // dist.support_size)
    for s in range(0, y.size, rows):
        d = y[s : s + rows, None] - dist.values[None, :]
        out[s : s + rows] = logsumexp(logp[None, :] - 0.5 * d * d, axis=1)
    return (out - 0.5 * math.log(2 * math.pi)) / math.log(2)


def leakage_estimate(
    design: SchemeDesign,
    cfg: ChannelConfig,
    trials: int = 10_000,
    seed: int = 0,
    *,
    include_jammer: bool = True,
    workers: int = 1,
) -> LeakageReport:
    """Plug-in estimate of the leakage chain at the eavesdropping receiver.

    With ``include_jammer=False`` every common-randomness source is switched
    off, which is the negative control: the protected layers then leak in full.
    """
    rx = _eavesdropper(design)
    dec = decompose(design, cfg, rx)
    jam = set(design.jammers)

    def keep(src):
        return include_jammer or src not in jam

    discrete = 0.0
    for g in dec.aligned:
        discrete += _group_sum_distribution(design, g, include_jammer).entropy_bits()
        if include_jammer:
            discrete -= _jam_entropy(design, g.jammer)
    resid = _residual_distribution(design, dec, keep)

    def block(blk):
        b, n = blk
        rng = trial_rng(seed, _STREAM_LEAK, b)
        y = resid.sample(rng, n) + rng.standard_normal(n)
        return -_log2_mixture_density(y, resid) - _HZ_BITS

    samples = np.concatenate(_run_blocks(block, _blocks(trials), workers))
    cont = McEstimate.from_samples(samples, seed)
    total = McEstimate(discrete + cont.mean, cont.stderr, cont.trials, seed)
    bound, kind = leakage_bound(design, cfg)
    return LeakageReport(total, discrete, cont, bound, kind, rx, include_jammer)


# ---------------------------------------------------------------- rates


@dataclass(frozen=True)
class RateReport:
    """Fano-style secure-rate lower bounds, in bits and normalised by (1/2) log2 P."""

    error_rate: tuple[McEstimate | None, McEstimate | None]
    message_entropy: tuple[float, float]
    leakage: tuple[float, float]
    rate_bits: tuple[float, float]
    gdof_proxy: tuple[float, float]
    sum_proxy: float
    dc_proxy: float
    achieved: GdofPoint


def _fano(pe: float, H: float) -> float:
    return max(0.0, (1.0 - pe) * H - 1.0)


def secure_rate_eval(
    design: SchemeDesign,
    cfg: ChannelConfig,
    trials: int = 10_000,
    seed: int = 0,
    *,
    noiseless: bool = False,
    workers: int = 1,
) -> RateReport:
    """Secure rate proxies: decoded information minus the estimated leakage.

    Interference channel: each user is charged its own leakage at the other
    receiver (by symmetry the rx1-side term is evaluated on the swapped channel).
    Wiretap: the single message is charged the eavesdropper leakage.  MAC: the
    joint leakage is split between users in proportion to their entropies.
    """
    half_log = 0.5 * math.log2(design.P)
    H = tuple(sum(pam_entropy_bits(design.sources[s]) for s in msgs) for msgs in design.messages)
    pe: list[McEstimate | None] = [None, None]
    for rx in (1, 2):
        if design.decode_plans[rx - 1] is not None:
            pe[rx - 1] = mc_error_rate(design, cfg, trials, seed, noiseless=noiseless, receivers=[rx], workers=workers)
    leak = leakage_estimate(design, cfg, trials, seed, workers=workers).estimate.mean
    if design.setting is Setting.IC_SC:
        leak_other = _ic_leak_at_rx1(design, cfg, trials, seed, workers)
        leaks = (leak, leak_other)
        rates = tuple(_fano(pe[k].mean, H[k]) - leaks[k] for k in (0, 1))
    elif design.setting is Setting.WTH:
        leaks = (leak, 0.0)
        rates = (_fano(pe[0].mean, H[0]) - leak, 0.0)
    else:
        total_H = H[0] + H[1]
        share = [H[k] / total_H if total_H > 0 else 0.0 for k in (0, 1)]
        leaks = (leak * share[0], leak * share[1])
        rates = tuple(_fano(pe[0].mean, H[k]) - leaks[k] for k in (0, 1))
    rates = tuple(max(0.0, r) for r in rates)
    dc_bits = sum(pam_entropy_bits(design.sources[j]) for j in design.jammers if j in design.sources)
    proxy = tuple(r / half_log for r in rates)
    return RateReport(
        error_rate=tuple(pe),
        message_entropy=H,
        leakage=leaks,
        rate_bits=rates,
        gdof_proxy=proxy,
        sum_proxy=sum(proxy),
        dc_proxy=dc_bits / half_log,
        achieved=design.achieved,
    )


def _ic_leak_at_rx1(design, cfg, trials, seed, workers) -> float:
    dec = decompose(design, cfg, 1)
    discrete = sum(
        _group_sum_distribution(design, g, True).entropy_bits() - _jam_entropy(design, g.jammer) for g in dec.aligned
    )
    resid = _residual_distribution(design, dec, lambda s: True)

    def block(blk):
        b, n = blk
        rng = trial_rng(seed, _STREAM_LEAK, 1, b)
        y = resid.sample(rng, n) + rng.standard_normal(n)
        return -_log2_mixture_density(y, resid) - _HZ_BITS

    samples = np.concatenate(_run_blocks(block, _blocks(trials), workers))
    return discrete + float(np.mean(samples))


# ---------------------------------------------------------------- converse


@dataclass(frozen=True)
class ConverseReport:
    setting: Setting
    alpha: float
    point: GdofPoint
    dc_lower_bound: float
    slack: float
    feasible: bool
    passed: bool
    penalty_bits: tuple[float, ...] = ()
    penalty_gdof: tuple[float, ...] = ()


def finite_p_penalties(setting, alpha: float, P: float, h) -> tuple[float, ...]:
    """Additive finite-P terms of the converse bounds, in bits."""
    h11, h12, h21, h22 = (float(v) for v in h)
    first = 0.5 * math.log2(1.0 + P ** (1.0 - alpha) * h11**2 / h21**2)
    if Setting.parse(setting) is Setting.MAC_WT:
        return first, 0.5 * math.log2(1.0 + P ** (alpha - 1.0) * h12**2 / h22**2)
    return (first,)


def converse_check(
    alpha: float,
    point: GdofPoint,
    setting=Setting.IC_SC,
    *,
    P: float | None = None,
    h=None,
    tol: float = 1e-9,
) -> ConverseReport:
    """Compare a (d-point, d_c) against the lower bound on common randomness.

    Interference channel: d_sum/2 - (1-alpha)^+.  Wiretap: d - (1-alpha)^+
    with d the legitimate GDoF.  MAC: max(d1 - (1-alpha)^+, d2 - (alpha-1)^+).
    The point must also be achievable at all, which is checked separately.
    """
    setting = Setting.parse(setting)
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    below = max(1.0 - alpha, 0.0)
    above = max(alpha - 1.0, 0.0)
    if setting is Setting.IC_SC:
        lb = point.d_sum / 2.0 - below
        feasible = point.d_sum <= ic_sum_gdof(alpha) + tol
    elif setting is Setting.WTH:
        lb = point.d1 - below
        feasible = point.d1 <= wth_gdof(alpha) + tol and point.d2 <= tol
    else:
        lb = max(point.d1 - below, point.d2 - above)
        feasible = mac_region_contains(alpha, point.d1, point.d2, tol=tol)
    lb = max(lb, 0.0)
    slack = point.dc - lb
    pen: tuple[float, ...] = ()
    pen_gdof: tuple[float, ...] = ()
    if P is not None:
        if h is None:
            raise DomainError("finite-P penalties need the channel gains")
        pen = finite_p_penalties(setting, alpha, P, h)
        pen_gdof = tuple(v / (0.5 * math.log2(P)) for v in pen) if P > 1 else ()
    return ConverseReport(setting, float(alpha), point, lb, slack, feasible, feasible and slack >= -tol, pen, pen_gdof)


# ---------------------------------------------------------------- MAC region


@dataclass(frozen=True)
class RegionRow:
    B: float
    regime: str
    claimed: GdofPoint
    achieved: GdofPoint
    design_alpha: float

    @property
    def deficit(self) -> float:
        """Largest per-user loss caused by the epsilon back-off."""
        return max(self.claimed.d1 - self.achieved.d1, self.claimed.d2 - self.achieved.d2)


def region_sweep(cfg: ChannelConfig, n_B: int = 33, *, epsilon: float | None = None) -> list[RegionRow]:
    """Claimed and achieved MAC points over an even B grid.

    Above alpha = 1 the sweep runs on the role-swapped channel and every point
    is mapped back.
    """
    swapped = cfg.alpha > 1.0 + 1e-12
    run_cfg = swap_channel(cfg) if swapped else cfg
    a = float(run_cfg.alpha)
    rows = []
    for B in np.linspace(0.0, a, n_B):
        B = float(B)
        d = design_macwt(run_cfg, B, epsilon)
        claimed, achieved = d.claimed, d.achieved
        if swapped:
            claimed = role_swap(claimed, a)[0]
            achieved = role_swap(achieved, a)[0]
        rows.append(RegionRow(B, d.regime.value, claimed, achieved, a))
    return rows


def region_hull(points) -> list[tuple[float, float]]:
    """Counter-clockwise hull of the points together with their projections onto both axes."""
    pts = [(0.0, 0.0)]
    for x, y in points:
        pts += [(x, y), (x, 0.0), (0.0, y)]
    arr = np.unique(np.round(np.asarray(pts, dtype=float), 12), axis=0)
    hull = ConvexHull(arr)
    return [(float(arr[i, 0]), float(arr[i, 1])) for i in hull.vertices]
