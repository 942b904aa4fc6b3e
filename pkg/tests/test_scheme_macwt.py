import math
from fractions import Fraction

import pytest

from schemes import channels, enumerated_power, structure_violations
from secgdof.channel import ChannelConfig
from secgdof.errors import DomainError, UnsupportedRegimeError
from secgdof.gdof import GdofPoint, mac_min_dc_alpha1, mac_region_contains
from secgdof.layering import Regime, structure_report
from secgdof.scheme_macwt import (
    design_macwt,
    design_macwt_role_swapped,
    eta_factors,
    mac_regime,
    mac_tau,
    role_swap,
    swap_channel,
)

CASES = [
    (0.5, 0.25, Regime.M_LOW_LARGE_B),
    (0.6, 0.1, Regime.M_LOW_SMALL_B),
    (0.6, 0.4, Regime.M_LOW_LARGE_B),
    (0.8, 0.3, Regime.M_MID_SMALL_B),
    (0.9, 0.75, Regime.M_MID_SMALL_B),
    (0.8, 0.7, Regime.M_MID_LARGE_B),
    (1.0, 0.5, Regime.M_EQ_ONE),
]


@pytest.mark.parametrize("alpha,B,regime", CASES)
def test_regime(alpha, B, regime):
    assert mac_regime(alpha, B) is regime


def test_tau_example():
    assert mac_tau(0.5, 0.25) == 2
    assert mac_tau(0.8, 0.3) == 2 * math.ceil(max(4, math.ceil(0.5 / 0.2 - 1e-12)) / 2)


def test_errors():
    cfg = ChannelConfig(1e6, 0.6, 1.5, 1.2, 1.5, 1.2)
    with pytest.raises(DomainError):
        design_macwt(cfg, B=0.7)
    with pytest.raises(DomainError):
        design_macwt(cfg)
    with pytest.raises(UnsupportedRegimeError):
        design_macwt(ChannelConfig(1e6, 1.5, 1.5, 1.2, 1.5, 1.2), B=0.2)
    with pytest.raises(DomainError):
        design_macwt(ChannelConfig(1e6, 1.0, 1.5, 1.2, 1.5, 1.2), pair=(0.8, 0.8))


def test_eta_example():
    e1, e2 = eta_factors(1e6, 0.5, 0.3)
    assert e1 == 1.0
    assert e2 == pytest.approx(4 / 1e6**0.1)
    assert e2 == pytest.approx(1.00475, abs=1e-5)


def test_integer_step_ratio():
    d = design_macwt(ChannelConfig(1e6, 0.6, 1.5, 1.2, 1.5, 1.2), B=0.1)
    a, b = d.sources["v1c"].step, d.sources["v2c"].step
    ratio = max(a, b) / min(a, b)
    assert ratio == pytest.approx(round(ratio), rel=1e-12)


def test_alpha_one_pair():
    d = design_macwt(ChannelConfig(1e6, 1.0, 1.9, 1.3, 1.7, 1.2), pair=(0.5, 0.5), epsilon=0.05)
    assert d.budgets["v1c"] == pytest.approx(0.45) and d.budgets["v2c"] == pytest.approx(0.45)
    assert d.sources["u1"].halfwidth == max(d.sources["v1c"].halfwidth, d.sources["v2c"].halfwidth)
    assert d.claimed.dc == pytest.approx(mac_min_dc_alpha1(0.5, 0.5))


@pytest.mark.parametrize("alpha,B,regime", CASES)
def test_exact_structure(alpha, B, regime):
    for cfg in channels(20, alpha, seed=7, setting="mac"):
        d = design_macwt(cfg, B=B, exact=True)
        assert d.regime is regime
        cancel, align, loose = structure_violations(d, cfg)
        assert cancel == 0 and align == 0 and not loose
        assert structure_report(d, cfg).exact_neutralization


@pytest.mark.parametrize("alpha,B,regime", CASES)
def test_float_structure_and_power(alpha, B, regime):
    for cfg in channels(50, alpha, seed=8, setting="mac"):
        d = design_macwt(cfg, B=B)
        cancel, align, loose = structure_violations(d, cfg)
        assert cancel <= 1e-10 and align <= 1e-10 and not loose
        assert max(enumerated_power(d, 1), enumerated_power(d, 2)) <= 1.0
        assert structure_report(d, cfg).ok()


@pytest.mark.parametrize("alpha,B,regime", CASES)
def test_claimed_point_in_region(alpha, B, regime):
    d = design_macwt(ChannelConfig(1e6, alpha, 1.9, 1.3, 1.7, 1.2), B=B)
    c = d.claimed
    assert mac_region_contains(alpha, c.d1, c.d2)
    assert c.d2 == pytest.approx(B)
    assert c.d1 + c.d2 == pytest.approx(1.0) or c.d1 == pytest.approx(1 - B)


def test_role_swap_examples():
    assert role_swap(GdofPoint(0.5, 0.5, 0.5), 1.0) == (GdofPoint(0.5, 0.5, 0.5), 1.0)
    p, a = role_swap(GdofPoint(0.6, 0.4, 0.3), 0.5)
    assert a == 2.0 and p == GdofPoint(0.8, 1.2, 0.6)
    with pytest.raises(DomainError):
        role_swap(GdofPoint(0, 0, 0), 0.0)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8, 1.25, 2.0])
def test_role_swap_involution(alpha):
    pt = GdofPoint(0.3, 0.2, 0.1)
    once, a1 = role_swap(pt, alpha)
    twice, a2 = role_swap(once, a1)
    assert a2 == pytest.approx(alpha)
    assert (twice.d1, twice.d2, twice.dc) == pytest.approx((pt.d1, pt.d2, pt.dc))


def test_swap_channel_preserves_received_powers():
    cfg = ChannelConfig(1e6, 1.25, 1.9, 1.3, 1.7, 1.2)
    s = swap_channel(cfg)
    assert s.alpha == pytest.approx(0.8)
    # original rx1 sees tx2 at P^1.25 and tx1 at P; after relabelling tx1 is strong
    assert s.P ** 1 == pytest.approx(cfg.P**cfg.alpha)
    assert s.P**s.alpha == pytest.approx(cfg.P)
    assert (s.h11, s.h12) == (cfg.h12, cfg.h11)


def test_role_swapped_design():
    cfg = ChannelConfig(1e6, 1.25, 1.9, 1.3, 1.7, 1.2)
    d, swapped, desc = design_macwt_role_swapped(cfg, B=0.3)
    assert d.alpha == pytest.approx(0.8)
    mapped = desc.map_point(d.claimed)
    assert mac_region_contains(1.25, mapped.d1, mapped.d2)
    assert desc.original_inputs("a", "b") == ("b", "a")
    with pytest.raises(DomainError):
        design_macwt_role_swapped(ChannelConfig(1e6, 0.8, 1.9, 1.3, 1.7, 1.2), B=0.3)


def test_exact_alpha_one_epsilon_tilde():
    cfg = ChannelConfig(1e6, 1.0, 2.0, 1.5, 1.5, 2.0)
    d = design_macwt(cfg, pair=(0.5, 0.5), exact=True)
    assert d.eps_tilde == Fraction(7, 32)


def test_singular_channel_at_alpha_one():
    with pytest.raises(DomainError):
        design_macwt(ChannelConfig(1e6, 1.0, 1.5, 1.2, 1.5, 1.2), pair=(0.5, 0.5))
