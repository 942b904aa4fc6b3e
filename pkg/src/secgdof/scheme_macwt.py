"""Multiple access wiretap channel designs, plus the role swap for alpha above 1."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .channel import ChannelConfig, Setting
from .constellation import pam_for_budget
from .errors import DomainError, UnsupportedRegimeError
from .gdof import GdofPoint, mac_region_contains
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

__all__ = [
    "MacDesignInput",
    "SwapDescriptor",
    "mac_regime",
    "mac_tau",
    "mac_budgets",
    "eta_factors",
    "design_macwt",
    "design_macwt_role_swapped",
    "rx_decompose_macwt",
    "modulate_macwt",
    "role_swap",
    "swap_channel",
]

_TOL = 1e-12


@dataclass(frozen=True)
class MacDesignInput:
    """``B`` splits rates for alpha < 1; ``pair`` is the target GDoF pair at alpha = 1."""

    cfg: ChannelConfig
    B: float | None = None
    pair: tuple[float, float] | None = None


def mac_regime(alpha: float, B: float | None) -> Regime:
    if alpha > 1.0 + _TOL:
        raise UnsupportedRegimeError(
            f"alpha={alpha} > 1: build the design at 1/alpha with design_macwt_role_swapped"
        )
    if abs(alpha - 1.0) <= _TOL:
        return Regime.M_EQ_ONE
    if B is None:
        raise DomainError("B is required for alpha < 1")
    if not (-_TOL <= B <= alpha + _TOL):
        raise DomainError(f"B={B} outside [0, alpha={alpha}]")
    if alpha <= 2.0 / 3.0 + _TOL:
        return Regime.M_LOW_SMALL_B if B <= max(2 * alpha - 1, 0.0) + _TOL else Regime.M_LOW_LARGE_B
    return Regime.M_MID_SMALL_B if B <= 2 * alpha - 1 + _TOL else Regime.M_MID_LARGE_B


def mac_tau(alpha: float, B: float | None) -> int:
    if abs(alpha - 1.0) <= _TOL:
        return 2
    m = max(robust_ceil(alpha / (1 - alpha)), robust_ceil((1 - alpha + B) / (1 - alpha)))
    return 2 * math.ceil(m / 2)


def mac_budgets(alpha: float, regime: Regime, B: float | None, pair=None) -> dict[str, Budget]:
    """Budgets of v1c, v1p, v2c, v2m as (base, multiple of epsilon)."""
    a = alpha
    if regime is Regime.M_EQ_ONE:
        d1, d2 = pair
        return {"v1c": Budget(d1), "v1p": Budget(0.0), "v2c": Budget(d2), "v2m": Budget(0.0)}
    if regime is Regime.M_LOW_SMALL_B:
        return {"v1c": Budget(a), "v1p": Budget(1 - a - B), "v2c": Budget(B), "v2m": Budget(0.0)}
    if regime is Regime.M_LOW_LARGE_B:
        pos = max(2 * a - 1, 0.0)
        p_base = max(B, 1 - a) - B
        v1p = Budget(p_base)
        # the common budget absorbs the private back-off when the private layer exists
        v1c = Budget(a) if v1p.present else Budget(1 - B, 2)
        return {"v1c": v1c, "v1p": v1p, "v2c": Budget(pos), "v2m": Budget(B - pos)}
    if regime is Regime.M_MID_SMALL_B:
        p_base = min(1 - a, 2 * a - 1 - B)
        v1p = Budget(p_base)
        v1c = Budget(1 - B - p_base) if v1p.present else Budget(1 - B, 2)
        return {"v1c": v1c, "v1p": v1p, "v2c": Budget(B), "v2m": Budget(0.0)}
    return {"v1c": Budget(1 - B), "v1p": Budget(0.0), "v2c": Budget(2 * a - 1), "v2m": Budget(B - 2 * a + 1)}


def eta_factors(P: float, lam1c: float, lam2c: float) -> tuple[float, float]:
    """Scalings that make the larger common step an integer multiple of the smaller one."""
    if lam1c >= lam2c:
        big, small = lam1c, lam2c
    else:
        big, small = lam2c, lam1c
    root = P ** ((big - small) / 2.0)
    eta_n = robust_ceil(root) / root
    return (1.0, eta_n) if lam1c >= lam2c else (eta_n, 1.0)


def _plan(regime: Regime, present: set[str], B: float, alpha: float):
    if regime is Regime.M_EQ_ONE:
        stages = [("v1c", "v2c")]
    elif regime is Regime.M_LOW_SMALL_B:
        stages = [("v1c",), ("v2c", "v1p")]
    elif regime is Regime.M_LOW_LARGE_B:
        stages = [("v1c",), ("v1p",), ("v2m",), ("v2c",)]
    elif regime is Regime.M_MID_SMALL_B:
        if B <= 3 * alpha - 2 + _TOL:
            stages = [("v1p", "v1c", "v2c")]
        else:
            stages = [("v1c",), ("v2c", "v1p")]
    else:
        stages = [("v1c",), ("v2m",), ("v2c",)]
    out = []
    for st in stages:
        kept = tuple(s for s in st if s in present)
        if kept:
            out.append(kept)
    return tuple(out)


def design_macwt(
    cfg: ChannelConfig,
    B: float | None = None,
    epsilon: float | None = None,
    gamma: float | None = None,
    *,
    pair: tuple[float, float] | None = None,
    exact: bool = False,
) -> SchemeDesign:
    """Design for alpha <= 1.  At alpha = 1 the target ``pair`` drives the budgets.

    If only ``B`` is given at alpha = 1 the target defaults to (1 - B, B).
    """
    a = float(cfg.alpha)
    regime = mac_regime(a, B)
    if regime is Regime.M_EQ_ONE:
        if pair is None:
            if B is None:
                raise DomainError("alpha = 1 needs a target pair (d1', d2') or B")
            pair = (1.0 - B, B)
        d1, d2 = (float(v) for v in pair)
        if not mac_region_contains(1.0, d1, d2):
            raise DomainError(f"target pair {pair} is outside the region at alpha = 1")
        pair = (d1, d2)
        B = d2
    tau = mac_tau(a, B)
    gmax = 1.0 / (tau * 2**tau)
    if gamma is None:
        gamma = gmax
    if not (0 < gamma <= gmax * (1 + 1e-12)):
        raise DomainError(f"gamma must lie in (0, {gmax}], got {gamma}")

    base = mac_budgets(a, regime, B, pair)
    if epsilon is None:
        epsilon = default_epsilon(base)
    lam = resolve_budgets(base, epsilon)
    present = {name for name, b in base.items() if b.present}
    lam_u1 = max(lam["v1c"], lam["v2c"] if "v2c" in present else 0.0)

    P = float(cfg.P)
    if "v2c" in present:
        eta1, eta2 = eta_factors(P, lam["v1c"], lam["v2c"])
    else:
        eta1, eta2 = 1.0, None

    sources = {"v1c": pam_for_budget(gamma, P, lam["v1c"], scale=eta1)}
    if "v1p" in present:
        sources["v1p"] = pam_for_budget(gamma, P, lam["v1p"], divisor=2)
    if "v2c" in present:
        sources["v2c"] = pam_for_budget(gamma, P, lam["v2c"], scale=eta2)
    if "v2m" in present:
        sources["v2m"] = pam_for_budget(gamma, P, lam["v2m"], divisor=2)
    sources["u1"] = pam_for_budget(gamma, P, lam_u1)
    if "v2m" in present:
        sources["u2"] = pam_for_budget(gamma, P, lam["v2m"], divisor=2)

    h = channel_numbers(cfg, exact)
    h11, h12, h21, h22 = h
    one = Fraction(1) if exact else 1.0
    if regime is Regime.M_EQ_ONE:
        det = channel_det(h)
        eps_t = det / 8
        d1s = {1: -(h12 * h21) / det}
        d2s = {1: h11 * h21 / det}
    else:
        eps_t = one
        r = h12 * h21 / (h11 * h22)
        d1s = {ell: -(r**ell) for ell in range(1, tau // 2 + 1)}
        d2s = {ell: h21 / h22 * r ** (ell - 1) for ell in range(1, tau // 2 + 1)}

    eq_one = regime is Regime.M_EQ_ONE
    beta2c = 0.0 if eq_one else 1 - a
    beta1p = a
    beta2m = a - B
    shift = 1 + B - 2 * a

    def beta1(k, ell):
        return 0.0 if eq_one else (2 * ell - k + 1) * (1 - a)

    ratio = h21 / h22
    tx1 = [Layer("v1c", eps_t, 0.0, "v1c")]
    if "v1p" in present:
        tx1.append(Layer("v1p", eps_t, 0.0 - beta1p, "v1p"))
    tx2 = []
    if "v2c" in present:
        tx2.append(Layer("v2c", eps_t * ratio, 0.0 - beta2c, "v2c"))
    if "v2m" in present:
        tx2.append(Layer("v2m", eps_t * ratio, 0.0 - beta2m, "v2m"))
    exps = {"beta_2c": beta2c}
    if "v2m" in present:
        exps["beta_2m"] = beta2m
    if "v1p" in present:
        exps["beta_1p"] = beta1p
    for k, layers, ds in ((1, tx1, d1s), (2, tx2, d2s)):
        for ell in sorted(ds):
            b = beta1(k, ell)
            exps[f"beta_1_{k}_{ell}"] = b
            layers.append(Layer("u1", eps_t * ds[ell], 0.0 - b, f"delta_{k}_{ell}"))
        if "v2m" in present:
            for ell in sorted(ds):
                b = beta1(k, ell) - shift
                exps[f"beta_2_{k}_{ell}"] = b
                layers.append(Layer("u2", eps_t * ds[ell], 0.0 - b, f"delta_{k}_{ell}"))

    def point(vals, u1):
        d1 = vals["v1c"] + vals["v1p"]
        d2 = vals["v2c"] + vals["v2m"]
        return GdofPoint(d1, d2, u1 + vals["v2m"])

    bases = {k: (b.base if b.present else 0.0) for k, b in base.items()}
    claimed = point(bases, max(bases["v1c"], bases["v2c"]))
    achieved = point({k: lam[k] if k in present else 0.0 for k in base}, lam_u1)

    extras = {"B": float(B), "eta_1c": eta1}
    if eta2 is not None:
        extras["eta_2c"] = eta2
    if eq_one:
        extras["d1_target"], extras["d2_target"] = pair
    budgets = {name: (lam[name] if name in lam else 0.0) for name in sources}
    budgets["u1"] = lam_u1
    if "u2" in sources:
        budgets["u2"] = lam["v2m"]
    messages_rx1 = tuple(s for s in ("v1c", "v1p", "v2c", "v2m") if s in sources)
    protected_rx2 = [(tuple(s for s in ("v1c", "v2c") if s in sources), "u1")]
    if "v2m" in sources:
        protected_rx2.append((("v2m",), "u2"))
    return SchemeDesign(
        setting=Setting.MAC_WT,
        regime=regime,
        alpha=a,
        P=P,
        tau=tau,
        gamma=float(gamma),
        gamma_max=gmax,
        eps_tilde=eps_t,
        epsilon=float(epsilon),
        sources=sources,
        tx_layers=(tuple(tx1), tuple(tx2)),
        claimed=claimed,
        achieved=achieved,
        budgets=budgets,
        exponents=exps,
        deltas={**{f"delta_1_{ell}": v for ell, v in d1s.items()}, **{f"delta_2_{ell}": v for ell, v in d2s.items()}},
        messages=(messages_rx1, ()),
        protected=((), tuple(protected_rx2)),
        jammers=tuple(j for j in ("u1", "u2") if j in sources),
        decode_plans=(_plan(regime, set(sources), B, a), None),
        extras=extras,
        exact=exact,
    )


def design_from_input(inp: MacDesignInput, epsilon=None, gamma=None, *, exact=False) -> SchemeDesign:
    return design_macwt(inp.cfg, inp.B, epsilon, gamma, pair=inp.pair, exact=exact)


def rx_decompose_macwt(design: SchemeDesign, cfg: ChannelConfig):
    return decompose_all(design, cfg)


def modulate_macwt(design: SchemeDesign, symbols):
    return modulate(design, symbols)


def role_swap(point: GdofPoint, alpha: float) -> tuple[GdofPoint, float]:
    """Map an achievable tuple at ``alpha`` to one at 1/alpha by exchanging the transmitters."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return GdofPoint(point.d2 / alpha, point.d1 / alpha, point.dc / alpha), 1.0 / alpha


def swap_channel(cfg: ChannelConfig) -> ChannelConfig:
    """Relabel transmitters and rescale power so the cross exponent becomes 1/alpha."""
    return replace(
        cfg,
        P=cfg.P**cfg.alpha,
        alpha=1.0 / cfg.alpha,
        h11=cfg.h12,
        h12=cfg.h11,
        h21=cfg.h22,
        h22=cfg.h21,
    )


@dataclass(frozen=True)
class SwapDescriptor:
    """How a design at ``design_alpha`` serves the original channel at ``original_alpha``.

    Transmitter 1 of the design is transmitter 2 of the original and vice versa.
    """

    original_alpha: float
    original_P: float
    design_alpha: float
    design_P: float

    def map_point(self, point: GdofPoint) -> GdofPoint:
        return role_swap(point, self.design_alpha)[0]

    def original_inputs(self, x1_design, x2_design):
        return x2_design, x1_design


def design_macwt_role_swapped(
    cfg: ChannelConfig,
    B: float | None = None,
    epsilon: float | None = None,
    gamma: float | None = None,
    *,
    pair: tuple[float, float] | None = None,
    exact: bool = False,
) -> tuple[SchemeDesign, ChannelConfig, SwapDescriptor]:
    """Serve alpha > 1 with the alpha <= 1 design on the relabelled channel."""
    if cfg.alpha <= 1.0 + _TOL:
        raise DomainError("role swap is only needed for alpha > 1")
    swapped = swap_channel(cfg)
    design = design_macwt(swapped, B, epsilon, gamma, pair=pair, exact=exact)
    desc = SwapDescriptor(float(cfg.alpha), float(cfg.P), float(swapped.alpha), float(swapped.P))
    return design, swapped, desc
