"""Interference channel with secrecy constraints: layered jamming with neutralization chains."""

from __future__ import annotations

from fractions import Fraction

from .channel import ChannelConfig, Setting
from .constellation import pam_for_budget
from .errors import DomainError, UnsupportedRegimeError
from .gdof import GdofPoint, ic_min_dc, ic_sum_gdof
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

__all__ = ["ic_regime", "ic_tau", "ic_gamma_max", "ic_budgets", "ic_deltas", "design_ic", "rx_decompose_ic", "modulate_ic"]

_TOL = 1e-12

# interval covered by each regime, closed at both ends where the seam is shared
_INTERVALS = {
    Regime.A_HALF_TWO_THIRDS: (0.5, 2.0 / 3.0),
    Regime.A_TWO_THIRDS_ONE: (2.0 / 3.0, 1.0),
    Regime.A_EQ_ONE: (1.0, 1.0),
    Regime.A_ONE_TWO: (1.0, 2.0),
    Regime.A_GEQ_TWO: (2.0, float("inf")),
}


def ic_regime(alpha: float) -> Regime:
    """Regime for ``alpha``; a seam value goes to the lower-alpha regime."""
    if alpha <= 0.5 + _TOL:
        raise UnsupportedRegimeError(
            f"alpha={alpha}: no common randomness is needed for alpha <= 1/2, no layered scheme is built"
        )
    if alpha <= 2.0 / 3.0 + _TOL:
        return Regime.A_HALF_TWO_THIRDS
    if abs(alpha - 1.0) <= _TOL:
        return Regime.A_EQ_ONE
    if alpha < 1.0:
        return Regime.A_TWO_THIRDS_ONE
    if alpha <= 2.0 + _TOL:
        return Regime.A_ONE_TWO
    return Regime.A_GEQ_TWO


def _check_forced(regime: Regime, alpha: float):
    lo, hi = _INTERVALS[regime]
    if not (lo - _TOL <= alpha <= hi + _TOL):
        raise DomainError(f"regime {regime.value} does not cover alpha={alpha}")
    if regime is Regime.A_TWO_THIRDS_ONE and alpha >= 1.0 - _TOL:
        raise DomainError("alpha=1 needs its own design")
    if regime is Regime.A_ONE_TWO and alpha <= 1.0 + _TOL:
        raise DomainError("alpha=1 needs its own design")


def ic_tau(alpha: float) -> int:
    if abs(alpha - 1.0) <= _TOL:
        return 1
    if alpha < 1.0:
        return robust_ceil(alpha / (1.0 - alpha))
    return robust_ceil(alpha / (alpha - 1.0))


def ic_gamma_max(tau: int) -> float:
    return 1.0 / (tau * 2**tau)


def ic_budgets(alpha: float, regime: Regime) -> dict[str, Budget]:
    """Layer budgets (common, private, jamming) before the back-off is applied."""
    a = alpha
    if regime is Regime.A_HALF_TWO_THIRDS:
        common, private = 2 * a - 1, 1 - a
    elif regime is Regime.A_TWO_THIRDS_ONE:
        common, private = a / 2, 1 - a
    elif regime is Regime.A_EQ_ONE:
        common, private = 0.5, 0.0
    elif regime is Regime.A_ONE_TWO:
        common, private = a / 2, 0.0
    else:
        common, private = 1.0, 0.0
    return {
        "v1c": Budget(common),
        "v1p": Budget(private),
        "v2c": Budget(common),
        "v2p": Budget(private),
        "u": Budget(common),
    }


def ic_jam_exponents(alpha: float, regime: Regime, tau: int) -> list[float]:
    """beta for jamming layers 1..tau."""
    if regime is Regime.A_EQ_ONE:
        return [0.0] * tau
    if alpha < 1:
        return [(1 - alpha) * ell for ell in range(1, tau + 1)]
    return [(alpha - 1) * (ell - 1) for ell in range(1, tau + 1)]


def ic_deltas(alpha: float, h, tau: int, regime: Regime) -> dict[tuple[int, int], object]:
    """Chain coefficients keyed by (transmitter, layer), built from ``h`` = (h11, h12, h21, h22)."""
    h11, h12, h21, h22 = h
    hm = {(1, 1): h11, (1, 2): h12, (2, 1): h21, (2, 2): h22}
    if regime is Regime.A_EQ_ONE:
        det = channel_det(h)
        return {(1, 1): (h22 * h12 - h12 * h21) / det, (2, 1): (h11 * h21 - h21 * h12) / det}
    r = h12 * h21 / (h11 * h22)
    out = {}
    for j in (1, 2):
        i = 3 - j
        for ell in range(1, tau + 1):
            if alpha < 1:
                if ell % 2 == 0:
                    d = -(r ** (ell // 2))
                else:
                    d = hm[(j, i)] / hm[(j, j)] * r ** ((ell - 1) // 2)
            else:
                inv = 1 / r
                if ell % 2 == 0:
                    d = -(hm[(i, i)] / hm[(i, j)]) * inv ** (ell // 2 - 1)
                else:
                    d = inv ** ((ell - 1) // 2)
            out[(j, ell)] = d
    return out


_PLANS = {
    Regime.A_HALF_TWO_THIRDS: (("v{k}c",), ("v{j}c+u",), ("v{k}p",)),
    Regime.A_TWO_THIRDS_ONE: (("v{k}c", "v{j}c+u"), ("v{k}p",)),
    Regime.A_EQ_ONE: (("v{k}c", "v{j}c+u"),),
    Regime.A_ONE_TWO: (("v{k}c", "v{j}c+u"),),
    Regime.A_GEQ_TWO: (("v{j}c+u",), ("v{k}c",)),
}


def _plan(regime: Regime, k: int):
    j = 3 - k
    return tuple(tuple(c.format(k=k, j=j) for c in stage) for stage in _PLANS[regime])


def design_ic(
    cfg: ChannelConfig,
    epsilon: float | None = None,
    gamma: float | None = None,
    *,
    exact: bool = False,
    regime: Regime | None = None,
) -> SchemeDesign:
    """Build the layered jamming design for the interference channel at ``cfg``.

    ``exact`` keeps every coefficient as a rational function of the channel gains
    so neutralized sums vanish identically.  ``regime`` may force the other valid
    design at a seam value of alpha.
    """
    a = float(cfg.alpha)
    if regime is None:
        regime = ic_regime(a)
    else:
        ic_regime(a)
        regime = Regime(regime)
        _check_forced(regime, a)
    tau = ic_tau(a) if regime is not Regime.A_EQ_ONE else 1
    gmax = ic_gamma_max(tau)
    if gamma is None:
        gamma = gmax
    if not (0 < gamma <= gmax * (1 + 1e-12)):
        raise DomainError(f"gamma must lie in (0, {gmax}], got {gamma}")

    base = ic_budgets(a, regime)
    if epsilon is None:
        epsilon = default_epsilon(base)
    lam = resolve_budgets(base, epsilon)

    h = channel_numbers(cfg, exact)
    h11, h12, h21, h22 = h
    eps_t = channel_det(h) / 8 if regime is Regime.A_EQ_ONE else (Fraction(1) if exact else 1.0)
    deltas = ic_deltas(a, h, tau, regime)
    betas = ic_jam_exponents(a, regime, tau)
    private = base["v1p"].present
    beta_p = a

    P = float(cfg.P)
    sources = {}
    for k in (1, 2):
        sources[f"v{k}c"] = pam_for_budget(gamma, P, lam[f"v{k}c"])
        if private:
            sources[f"v{k}p"] = pam_for_budget(gamma, P, lam[f"v{k}p"], divisor=2)
    sources["u"] = pam_for_budget(gamma, P, lam["u"])

    tx_layers = []
    for k in (1, 2):
        layers = [Layer(f"v{k}c", eps_t, 0.0, f"v{k}c")]
        if private:
            layers.append(Layer(f"v{k}p", eps_t, 0.0 - beta_p, f"v{k}p"))
        for ell in range(1, tau + 1):
            layers.append(Layer("u", eps_t * deltas[(k, ell)], 0.0 - betas[ell - 1], f"delta_{k}_{ell}"))
        tx_layers.append(tuple(layers))

    d_each = base["v1c"].base + base["v1p"].base
    claimed = GdofPoint(d_each, d_each, base["u"].base)
    achieved = GdofPoint(lam["v1c"] + lam["v1p"], lam["v2c"] + lam["v2p"], lam["u"])
    # the scheme's own budgets must reproduce the closed forms
    assert abs(2 * d_each - ic_sum_gdof(a)) < 1e-9 and abs(base["u"].base - ic_min_dc(a)) < 1e-9

    exps = {f"beta_u{ell}": betas[ell - 1] for ell in range(1, tau + 1)}
    if private:
        exps["beta_p"] = beta_p
    budgets = {name: lam[name] for name in sources}
    return SchemeDesign(
        setting=Setting.IC_SC,
        regime=regime,
        alpha=a,
        P=P,
        tau=tau,
        gamma=float(gamma),
        gamma_max=gmax,
        eps_tilde=eps_t,
        epsilon=float(epsilon),
        sources=sources,
        tx_layers=tuple(tx_layers),
        claimed=claimed,
        achieved=achieved,
        budgets=budgets,
        exponents=exps,
        deltas={f"delta_{k}_{ell}": v for (k, ell), v in sorted(deltas.items())},
        messages=(tuple(s for s in ("v1c", "v1p") if s in sources), tuple(s for s in ("v2c", "v2p") if s in sources)),
        protected=(((("v2c",), "u"),), ((("v1c",), "u"),)),
        jammers=("u",),
        decode_plans=(_plan(regime, 1), _plan(regime, 2)),
        exact=exact,
    )


def rx_decompose_ic(design: SchemeDesign, cfg: ChannelConfig):
    return decompose_all(design, cfg)


def modulate_ic(design: SchemeDesign, symbols):
    return modulate(design, symbols)
