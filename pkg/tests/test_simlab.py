import math

import numpy as np
import pytest
from scipy.stats import norm

from secgdof.channel import ChannelConfig, sample_channel
from secgdof.constellation import DiscreteDistribution, PamSet
from secgdof.decoder import certify_plan
from secgdof.errors import DomainError
from secgdof.gdof import GdofPoint, ic_min_dc, ic_sum_gdof, mac_region_vertices
from secgdof.layering import Regime
from secgdof.scheme_ic import design_ic
from secgdof.scheme_macwt import design_macwt
from secgdof.scheme_wth import design_wth
from secgdof.simlab import (
    _log2_mixture_density,
    converse_check,
    finite_p_penalties,
    leakage_bound,
    leakage_estimate,
    mc_error_rate,
    region_hull,
    region_sweep,
    secure_rate_eval,
)

CFG = dict(h11=1.9, h12=1.3, h21=1.7, h22=1.2)


def test_mixture_density_matches_direct_sum():
    d = DiscreteDistribution.uniform_pam(PamSet(0.7, 3))
    y = np.linspace(-6, 6, 41)
    direct = np.log2(sum(p * norm.pdf(y - v) for v, p in zip(d.values, d.probs)))
    assert np.allclose(_log2_mixture_density(y, d), direct, atol=1e-12)


def test_error_rate_determinism_across_workers():
    cfg = ChannelConfig(1e6, 4 / 3, **CFG)
    d = design_ic(cfg, 0.599)
    a = mc_error_rate(d, cfg, 5000, seed=3, workers=1)
    b = mc_error_rate(d, cfg, 5000, seed=3, workers=4)
    assert a == b
    assert mc_error_rate(d, cfg, 5000, seed=4) != a or a.mean in (0.0, 1.0)


def test_noiseless_error_zero_when_certified():
    cfg = ChannelConfig(1e6, 4 / 3, **CFG)
    d = design_ic(cfg, 0.599)
    assert all(r.certified for rx in (1, 2) for r in certify_plan(d, cfg, rx))
    assert mc_error_rate(d, cfg, 3000, seed=1, noiseless=True).mean == 0


def test_trials_must_be_positive():
    cfg = ChannelConfig(1e6, 4 / 3, **CFG)
    with pytest.raises(DomainError):
        mc_error_rate(design_ic(cfg), cfg, 0)


def test_error_rate_falls_with_power():
    rates = []
    for P in (1e4, 1e6, 1e8):
        cfg = ChannelConfig(P, 2.0, **CFG)
        rates.append(mc_error_rate(design_ic(cfg, 0.899, regime=Regime.A_GEQ_TWO), cfg, 3000, seed=2).mean)
    assert rates[0] >= rates[1] >= rates[2]
    assert rates[2] < 1e-2


def test_leakage_bound_values():
    d = design_ic(ChannelConfig(1e6, 0.8, **CFG))
    assert leakage_bound(d)[0] == pytest.approx(math.log2(2 * math.sqrt(4 ** (d.tau + 1) + 5)))
    w = design_wth(ChannelConfig(1e6, 0.75, **CFG))
    assert leakage_bound(w)[0] == pytest.approx(math.log2(2 * math.sqrt(5)))
    m = design_macwt(ChannelConfig(1e6, 1.0, **CFG), pair=(0.5, 0.5))
    assert leakage_bound(m)[0] == pytest.approx(math.log2(3))


@pytest.mark.parametrize(
    "build",
    [
        lambda P: design_ic(ChannelConfig(P, 0.8, **CFG)),
        lambda P: design_wth(ChannelConfig(P, 0.75, **CFG)),
        lambda P: design_macwt(ChannelConfig(P, 0.6, **CFG), B=0.1),
        lambda P: design_macwt(ChannelConfig(P, 1.0, **CFG), pair=(0.5, 0.5)),
    ],
)
@pytest.mark.parametrize("P", [1e6, 1e8])
def test_leakage_within_bound(build, P):
    d = build(P)
    cfg = ChannelConfig(P, d.alpha, **CFG)
    rep = leakage_estimate(d, cfg, 3000, seed=5)
    assert rep.within_bound
    assert rep.estimate.mean >= -3 * rep.estimate.stderr


def test_wiretap_negative_control_leaks():
    lo = leakage_estimate(design_wth(ChannelConfig(1e4, 0.75, **CFG)), ChannelConfig(1e4, 0.75, **CFG), 2000,
                          seed=1, include_jammer=False)  # fmt: skip
    cfg = ChannelConfig(1e8, 0.75, **CFG)
    hi = leakage_estimate(design_wth(cfg), cfg, 2000, seed=1, include_jammer=False)
    assert hi.estimate.mean > hi.bound
    assert hi.estimate.mean > lo.estimate.mean + 1.0


def test_leakage_determinism_across_workers():
    cfg = ChannelConfig(1e6, 0.75, **CFG)
    d = design_wth(cfg)
    a = leakage_estimate(d, cfg, 4500, seed=9, workers=1)
    b = leakage_estimate(d, cfg, 4500, seed=9, workers=3)
    assert a.estimate == b.estimate


def test_secure_rate_noiseless_proxy():
    cfg = ChannelConfig(1e6, 4 / 3, **CFG)
    d = design_ic(cfg, 0.599)
    r = secure_rate_eval(d, cfg, 2000, seed=1, noiseless=True)
    half = 0.5 * math.log2(cfg.P)
    for k in (0, 1):
        assert r.error_rate[k].mean == 0
        assert r.rate_bits[k] == pytest.approx(max(0.0, r.message_entropy[k] - 1 - r.leakage[k]))
        assert r.gdof_proxy[k] <= r.message_entropy[k] / half
    assert r.dc_proxy > 0


def test_converse_examples():
    ok = converse_check(0.8, GdofPoint(0.6, 0.6, 0.4), "ic")
    assert ok.passed and ok.slack == pytest.approx(0, abs=1e-12)
    bad = converse_check(1.0, GdofPoint(0.5, 0.5, 0.4), "mac")
    assert not bad.passed and bad.dc_lower_bound == pytest.approx(0.5)
    assert not converse_check(0.8, GdofPoint(0.8, 0.8, 1.0), "ic").feasible
    with pytest.raises(DomainError):
        converse_check(0.8, GdofPoint(0.6, 0.6, 0.4), "ic", P=1e6)


def test_penalty_example():
    (v,) = finite_p_penalties("ic", 0.5, 1e6, (1.5, 1.3, 1.5, 1.2))
    assert v == pytest.approx(0.5 * math.log2(1001))
    assert v == pytest.approx(4.9836, abs=1e-4)
    assert len(finite_p_penalties("mac", 0.5, 1e6, (1.5, 1.3, 1.5, 1.2))) == 2


@pytest.mark.parametrize("alpha", [0.55, 0.6, 2 / 3, 0.8, 0.9, 1.0, 4 / 3, 1.5, 2.0, 3.0])
def test_ic_claimed_points_meet_converse(alpha):
    half = ic_sum_gdof(alpha) / 2
    rep = converse_check(alpha, GdofPoint(half, half, ic_min_dc(alpha)), "ic")
    assert rep.passed and rep.slack == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("alpha,expected", [(0.5, [(0, 0.5), (0.5, 0.5), (1, 0)]), (0.8, [(0, 0.8), (0.2, 0.8), (1, 0)])])
def test_region_sweep_hull(alpha, expected):
    rows = region_sweep(sample_channel(1, P=1e6, alpha=alpha, setting="mac"), 17)
    hull = region_hull([(r.claimed.d1, r.claimed.d2) for r in rows])
    nonzero = sorted(v for v in hull if v != (0.0, 0.0))
    assert np.allclose(nonzero, sorted(expected), atol=1e-9)
    assert all(r.deficit >= 0 for r in rows)
    assert {tuple(np.round(v, 9)) for v in mac_region_vertices(alpha)} >= {tuple(np.round(v, 9)) for v in expected}
