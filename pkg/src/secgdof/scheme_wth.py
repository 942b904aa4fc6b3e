"""Wiretap channel with a helper: the helper jams with a chain that cancels at the legitimate receiver."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .channel import ChannelConfig, Setting
from .constellation import pam_for_budget
from .errors import DomainError, UnsupportedRegimeError
from .gdof import GdofPoint, wth_gdof, wth_min_dc
from .layering import (
    Budget,
    Layer,
    Regime,
    SchemeDesign,
    channel_det,
    channel_numbers,
    decompose_all,
    default_epsilon,
    modulate,
    resolve_budgets,
    robust_ceil,
)

__all__ = ["WthParams", "wth_regime", "wth_params", "design_wth", "rx_decompose_wth", "modulate_wth"]

_TOL = 1e-12


def wth_regime(alpha: float) -> Regime:
    if alpha <= 0.5 + _TOL:
        raise UnsupportedRegimeError(
            f"alpha={alpha}: the wiretap helper needs no common randomness for alpha <= 1/2"
        )
    if abs(alpha - 1.0) <= _TOL:
        return Regime.W_EQ_ONE
    if alpha < 1.0:
        return Regime.W_HALF_ONE
    return Regime.W_GT_ONE


@dataclass(frozen=True)
class WthParams:
    """Exponents and budgets of the helper design.  ``beta_tx1`` maps layer index to beta."""

    regime: Regime
    tau: int
    gamma_max: float
    beta_tx1: dict[int, float]
    beta_tx2: dict[int, float]
    beta_p: float | None
    budgets: dict[str, Budget]


def wth_params(alpha: float) -> WthParams:
    regime = wth_regime(alpha)
    a = alpha
    if regime is Regime.W_EQ_ONE:
        tau = 1
        b1, b2, bp = {1: 0.0}, {1: 0.0}, None
        budgets = {"vc": Budget(1.0), "vp": Budget(0.0), "u": Budget(1.0)}
    elif regime is Regime.W_HALF_ONE:
        tau = robust_ceil(1.0 / (2.0 * (1.0 - a)))
        b1 = {ell: 2 * ell * (1 - a) for ell in range(1, tau)}
        b2 = {ell: (2 * ell - 1) * (1 - a) for ell in range(1, tau + 1)}
        bp = a
        budgets = {"vc": Budget(a), "vp": Budget(1 - a), "u": Budget(a)}
    else:
        tau = robust_ceil(1.0 / (2.0 * (a - 1.0)))
        b1 = {ell: 2 * ell * (a - 1) for ell in range(0, tau + 1)}
        b2 = {ell: (2 * ell - 1) * (a - 1) for ell in range(1, tau + 1)}
        bp = None
        budgets = {"vc": Budget(1.0), "vp": Budget(0.0), "u": Budget(1.0)}
    return WthParams(regime, tau, 1.0 / ((tau + 2) * 4**tau), b1, b2, bp, budgets)


def wth_deltas(regime: Regime, h, p: WthParams):
    """Chain coefficients keyed by (transmitter, layer)."""
    h11, h12, h21, h22 = h
    if regime is Regime.W_EQ_ONE:
        det = channel_det(h)
        return {(1, 1): -(h12 * h21) / det, (2, 1): h11 * h21 / det}
    r = h12 * h21 / (h11 * h22)
    out = {}
    if regime is Regime.W_HALF_ONE:
        for ell in p.beta_tx1:
            out[(1, ell)] = -(r**ell)
        for ell in p.beta_tx2:
            out[(2, ell)] = h21 / h22 * r ** (ell - 1)
    else:
        inv = 1 / r
        for ell in p.beta_tx1:
            out[(1, ell)] = inv**ell
        for ell in p.beta_tx2:
            out[(2, ell)] = -(h11 / h12) * inv ** (ell - 1)
    return out


def design_wth(cfg: ChannelConfig, epsilon: float | None = None, gamma: float | None = None, *, exact: bool = False) -> SchemeDesign:
    a = float(cfg.alpha)
    p = wth_params(a)
    if gamma is None:
        gamma = p.gamma_max
    if not (0 < gamma <= p.gamma_max * (1 + 1e-12)):
        raise DomainError(f"gamma must lie in (0, {p.gamma_max}], got {gamma}")
    if epsilon is None:
        epsilon = default_epsilon(p.budgets)
    lam = resolve_budgets(p.budgets, epsilon)

    h = channel_numbers(cfg, exact)
    h11, h12, h21, h22 = h
    if p.regime is Regime.W_EQ_ONE:
        eps_t = channel_det(h) / 8
    else:
        eps_t = Fraction(1) if exact else 1.0
    deltas = wth_deltas(p.regime, h, p)
    private = p.budgets["vp"].present

    P = float(cfg.P)
    sources = {"vc": pam_for_budget(gamma, P, lam["vc"])}
    if private:
        sources["vp"] = pam_for_budget(gamma, P, lam["vp"], divisor=2)
    sources["u"] = pam_for_budget(gamma, P, lam["u"])

    tx1 = [Layer("vc", eps_t, 0.0, "vc")]
    if private:
        tx1.append(Layer("vp", eps_t, 0.0 - p.beta_p, "vp"))
    for ell, b in p.beta_tx1.items():
        tx1.append(Layer("u", eps_t * deltas[(1, ell)], 0.0 - b, f"delta_1_{ell}"))
    tx2 = [Layer("u", eps_t * deltas[(2, ell)], 0.0 - b, f"delta_2_{ell}") for ell, b in p.beta_tx2.items()]

    d = p.budgets["vc"].base + p.budgets["vp"].base
    claimed = GdofPoint(d, 0.0, p.budgets["u"].base)
    assert abs(d - wth_gdof(a)) < 1e-9 and abs(claimed.dc - wth_min_dc(a)) < 1e-9
    achieved = GdofPoint(lam["vc"] + lam["vp"], 0.0, lam["u"])

    exps = {f"beta_u{ell}": b for ell, b in p.beta_tx1.items()}
    exps.update({f"beta'_u{ell}": b for ell, b in p.beta_tx2.items()})
    if private:
        exps["beta_p"] = p.beta_p
    plan = (("vc",), ("vp",)) if private else (("vc",),)
    return SchemeDesign(
        setting=Setting.WTH,
        regime=p.regime,
        alpha=a,
        P=P,
        tau=p.tau,
        gamma=float(gamma),
        gamma_max=p.gamma_max,
        eps_tilde=eps_t,
        epsilon=float(epsilon),
        sources=sources,
        tx_layers=(tuple(tx1), tuple(tx2)),
        claimed=claimed,
        achieved=achieved,
        budgets={name: lam[name] for name in sources},
        exponents=exps,
        deltas={f"delta_{k}_{ell}": v for (k, ell), v in sorted(deltas.items())},
        messages=(tuple(s for s in ("vc", "vp") if s in sources), ()),
        protected=((), ((("vc",), "u"),)),
        jammers=("u",),
        decode_plans=(plan, None),
        exact=exact,
    )


def rx_decompose_wth(design: SchemeDesign, cfg: ChannelConfig):
    return decompose_all(design, cfg)


def modulate_wth(design: SchemeDesign, symbols):
    return modulate(design, symbols)
