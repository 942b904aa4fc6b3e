"""Command-line front end.

Every subcommand reads its options from flags, from an INI file section named
after the subcommand (``--config``), or from built-in defaults, in that order
of precedence.  CSV is the primary output; ``--format svg`` renders a plot.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__
from .channel import ChannelConfig, Setting, sample_channel
from .diophantine import DEFAULT_CAP, LEMMA_IDS, MinDistProblem, measure_bound, min_distance, outage_fraction
from .errors import DomainError, SearchSpaceTooLargeError, SecGdofError, UnsupportedRegimeError
from .gdof import (
    GdofPoint,
    ic_min_dc,
    ic_sum_gdof,
    mac_region_vertices,
    wth_gdof,
    wth_min_dc,
)
from .layering import layer_table, structure_report
from .scheme_ic import design_ic
from .scheme_macwt import design_macwt, design_macwt_role_swapped, role_swap
from .scheme_wth import design_wth
from .simlab import converse_check, leakage_estimate, mc_error_rate, region_hull, region_sweep, secure_rate_eval

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_REGIME = 4
EXIT_DOMAIN = 5
EXIT_SEARCH = 6


_ALPHA_MAX_DEN = 12


class ConfigError(Exception):
    pass


class UsageError(Exception):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".12g")
    return str(x)


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------- option parsing


def parse_range(text: str) -> list[float]:
    """``a:b:step`` (inclusive of b up to rounding) or a single number."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"not a number or a:b:step range: {text!r}") from None
    if len(nums) == 1:
        return nums
    if len(nums) != 3 or nums[2] <= 0 or nums[1] < nums[0]:
        raise UsageError(f"range must be a:b:step with a <= b and step > 0, got {text!r}")
    a, b, step = nums
    n = int(math.floor((b - a) / step + 1e-9))
    return [round(a + i * step, 12) for i in range(n + 1)]


def parse_alpha(text: str) -> float:
    """Read ``a/b`` exactly; read a decimal as the rounding of a small fraction when one fits.

    ``1.3333`` becomes 4/3 because 4/3 rounds to it at four decimals, so regime
    thresholds such as the ceiling in tau see the intended value.
    """
    text = str(text).strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return float(Fraction(num.strip()) / Fraction(den.strip()))
        value = float(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(text) from None
    mantissa = text.lower().split("e")[0]
    if "." not in mantissa or "e" in text.lower():
        return value
    decimals = len(mantissa.split(".", 1)[1])
    snapped = Fraction(text).limit_denominator(_ALPHA_MAX_DEN)
    if abs(float(snapped) - value) <= 0.5 * 10.0**-decimals:
        return float(snapped)
    return value


def parse_list(text: str, kind=float) -> list:
    try:
        return [kind(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"malformed list {text!r}") from None


@dataclass
class Opt:
    name: str
    kind: Callable
    default: object
    help: str


_COMMON = [
    Opt("setting", str, "ic", "setting: ic | wth | mac"),
    Opt("epsilon", float, None, "GDoF back-off (default: per-regime rule)"),
    Opt("gamma", float, None, "constellation scale (default: its upper bound)"),
    Opt("B", float, None, "MAC rate-split parameter"),
    Opt("seed", int, 0, "top-level seed"),
    Opt("h", str, None, "channel gains h11,h12,h21,h22 (default: drawn from the seed)"),
    Opt("out", str, None, "output path (default: stdout)"),
]

COMMANDS: dict[str, list[Opt]] = {
    "gdof-curve": [
        Opt("setting", str, "ic", "setting: ic | wth | mac"),
        Opt("alpha", str, "0:3:0.01", "alpha value or a:b:step"),
        Opt("alpha-range", str, None, "a:b:step (alias of --alpha)"),
        Opt("format", str, "csv", "csv or svg"),
        Opt("out", str, None, "output path (default: stdout)"),
    ],
    "scheme-check": _COMMON
    + [
        Opt("alpha", parse_alpha, 4.0 / 3.0, "cross-link exponent (decimal or a/b)"),
        Opt("P", float, 1e6, "base power"),
        Opt("exact", bool, False, "rational arithmetic for the structural check"),
    ],
    "simulate": _COMMON
    + [
        Opt("alpha", parse_alpha, 4.0 / 3.0, "cross-link exponent (decimal or a/b)"),
        Opt("P-grid", str, "1e4,1e6,1e8", "comma-separated powers"),
        Opt("P", float, None, "single power (overrides --P-grid)"),
        Opt("trials", int, 10_000, "Monte Carlo trials per point"),
        Opt("workers", int, 1, "threads"),
    ],
    "mindist": [
        Opt("gains", str, None, "g_i list for a direct minimum-distance query"),
        Opt("scales", str, None, "A_i list (default all 1)"),
        Opt("ranges", str, None, "q_i ranges"),
        Opt("lemma", str, "ic_two_term", "outage construction: " + ", ".join(LEMMA_IDS)),
        Opt("alpha", parse_alpha, None, "cross-link exponent (default per construction)"),
        Opt("P", float, 1e8, "base power"),
        Opt("epsilon", float, 0.5, "back-off"),
        Opt("kappa", float, 0.1, "threshold constant"),
        Opt("B", float, None, "MAC rate split"),
        Opt("trials", int, 10_000, "channel draws"),
        Opt("cap", int, DEFAULT_CAP, "largest search box"),
        Opt("seed", int, 0, "seed"),
        Opt("out", str, None, "output path (default: stdout)"),
    ],
    "converse": [
        Opt("setting", str, "ic", "setting: ic | wth | mac"),
        Opt("alpha", parse_alpha, 0.8, "cross-link exponent (decimal or a/b)"),
        Opt("point", str, None, "d1,d2,dc (default: the scheme's claimed point)"),
        Opt("B", float, None, "MAC rate split for the default point"),
        Opt("P", float, None, "power for finite-P penalty terms"),
        Opt("h", str, None, "gains for finite-P terms (default: drawn from the seed)"),
        Opt("seed", int, 0, "seed"),
        Opt("out", str, None, "output path (default: stdout)"),
    ],
    "region": [
        Opt("alpha", parse_alpha, 0.5, "cross-link exponent, values above 1 use the role swap"),
        Opt("B-count", int, 33, "number of B grid points"),
        Opt("P", float, 1e6, "base power of the designs"),
        Opt("epsilon", float, None, "back-off"),
        Opt("seed", int, 0, "seed"),
        Opt("h", str, None, "channel gains"),
        Opt("format", str, "csv", "csv or svg"),
        Opt("out", str, None, "output path (default: stdout)"),
    ],
}


def _dest(name: str) -> str:
    return name.replace("-", "_")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secgdof", description="Secure GDoF scheme laboratory")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in COMMANDS.items():
        p = sub.add_parser(cmd)
        p.add_argument("--config", help="INI file with a [%s] section" % cmd)
        for o in opts:
            if o.kind is bool:
                p.add_argument(f"--{o.name}", dest=_dest(o.name), action="store_const", const=True, help=o.help)
            else:
                p.add_argument(f"--{o.name}", dest=_dest(o.name), type=str, help=o.help)
    return parser


def _convert(opt: Opt, raw: str):
    if opt.kind is bool:
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(raw)
    if opt.kind is int:
        f = float(raw)
        if f != int(f):
            raise ValueError(raw)
        return int(f)
    return opt.kind(raw)


def resolve_options(cmd: str, ns: argparse.Namespace) -> dict:
    opts = COMMANDS[cmd]
    from_file: dict[str, str] = {}
    if ns.config:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            with open(ns.config, encoding="utf-8") as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from None
        if cp.has_section(cmd):
            known = {_dest(o.name).lower(): o for o in opts}
            for key, val in cp.items(cmd):
                k = _dest(key).lower()
                if k not in known:
                    raise ConfigError(f"unknown key {key!r} in section [{cmd}]")
                from_file[_dest(known[k].name)] = val
    out = {}
    for o in opts:
        d = _dest(o.name)
        raw = getattr(ns, d, None)
        source = "flag"
        if raw is None and d in from_file:
            raw, source = from_file[d], "config"
        if raw is None:
            out[d] = o.default
            continue
        try:
            out[d] = _convert(o, raw)
        except (TypeError, ValueError):
            msg = f"invalid value {raw!r} for {o.name}"
            if source == "config":
                raise ConfigError(msg) from None
            raise UsageError(msg) from None
    return out


# ---------------------------------------------------------------- helpers


def _setting(o) -> Setting:
    try:
        return Setting.parse(o["setting"])
    except (ValueError, KeyError):
        raise UsageError(f"unknown setting {o.get('setting')!r}") from None


def _channel(o, P: float, alpha: float, setting: Setting) -> ChannelConfig:
    if o.get("h"):
        h = parse_list(o["h"])
        if len(h) != 4:
            raise UsageError("--h needs four values h11,h12,h21,h22")
        return ChannelConfig(P, alpha, *h, setting=setting)
    return sample_channel(o["seed"], P=P, alpha=alpha, setting=setting)


def _design(o, cfg: ChannelConfig):
    """Design plus the channel it runs on (role-swapped for MAC above alpha = 1)."""
    s = cfg.setting
    eps, gamma, exact = o.get("epsilon"), o.get("gamma"), bool(o.get("exact", False))
    if s is Setting.IC_SC:
        return design_ic(cfg, eps, gamma, exact=exact), cfg
    if s is Setting.WTH:
        return design_wth(cfg, eps, gamma, exact=exact), cfg
    B = o.get("B")
    if cfg.alpha > 1.0 + 1e-12:
        design, swapped, _ = design_macwt_role_swapped(cfg, B, eps, gamma, exact=exact)
        return design, swapped
    if B is None and abs(cfg.alpha - 1.0) > 1e-12:
        raise UsageError("--B is required for the MAC setting")
    if B is None:
        B = 0.5
    return design_macwt(cfg, B, eps, gamma, exact=exact), cfg


def _emit(o, text: str | bytes):
    path = o.get("out")
    if path:
        mode = "wb" if isinstance(text, bytes) else "w"
        kwargs = {} if isinstance(text, bytes) else {"encoding": "utf-8", "newline": ""}
        with open(path, mode, **kwargs) as fh:
            fh.write(text)
    else:
        if isinstance(text, bytes):
            sys.stdout.buffer.write(text)
        else:
            sys.stdout.write(text)


def _svg(series, xlabel: str, title: str) -> bytes:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for label, xs, ys, style in series:
        ax.plot(xs, ys, style, label=label)
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    buf = io.BytesIO()
    # fixed hash salt and no date keep the file byte-stable
    plt.rcParams["svg.hashsalt"] = "secgdof"
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


# ---------------------------------------------------------------- subcommands


def cmd_gdof_curve(o) -> int:
    s = _setting(o)
    alphas = parse_range(o["alpha_range"] or o["alpha"])
    if any(a < 0 for a in alphas):
        raise DomainError("alpha must be nonnegative")
    if s is Setting.IC_SC:
        header = ["alpha", "d_sum", "d_c"]
        rows = [(a, ic_sum_gdof(a), ic_min_dc(a)) for a in alphas]
    elif s is Setting.WTH:
        header = ["alpha", "d", "d_c"]
        rows = [(a, wth_gdof(a), wth_min_dc(a)) for a in alphas]
    else:
        header = ["alpha", "d_sum_max", "d1_max", "d2_max"]
        rows = [(a, max(1.0, a), 1.0, a) for a in alphas]
    if o["format"] == "svg":
        xs = [r[0] for r in rows]
        series = [(h, xs, [r[i] for r in rows], "-") for i, h in enumerate(header) if i > 0]
        _emit(o, _svg(series, "alpha", f"{s.value}: GDoF versus alpha"))
    elif o["format"] == "csv":
        _emit(o, write_csv(header, rows))
    else:
        raise UsageError(f"unknown format {o['format']!r}")
    return EXIT_OK


def cmd_scheme_check(o) -> int:
    s = _setting(o)
    cfg = _channel(o, o["P"], o["alpha"], s)
    design, run_cfg = _design(o, cfg)
    rep = structure_report(design, run_cfg)
    lines = [
        f"setting={s.value} regime={design.regime.value} alpha={fmt(design.alpha)} P={fmt(design.P)} seed={o['seed']}",
        f"tau={design.tau} gamma={fmt(design.gamma)} epsilon={fmt(design.epsilon)}",
        f"h={','.join(fmt(float(v)) for v in (run_cfg.h11, run_cfg.h12, run_cfg.h21, run_cfg.h22))}",
        f"claimed={fmt(design.claimed.d1)},{fmt(design.claimed.d2)},{fmt(design.claimed.dc)}",
        f"neutralization_residual={fmt(rep.max_neutralization_residual)} exact={fmt(rep.exact_neutralization)}",
        f"alignment_mismatch={fmt(rep.max_alignment_mismatch)} exact={fmt(rep.exact_alignment)}",
        f"tx_power={fmt(rep.tx_power[0])},{fmt(rep.tx_power[1])}",
        f"max_residual_exponent={fmt(rep.max_residual_exponent)}",
        f"structure_ok={fmt(rep.ok())}",
        "",
        layer_table(design),
    ]
    _emit(o, "\n".join(lines).rstrip("\n") + "\n")
    return EXIT_OK if rep.ok() else EXIT_CHECK_FAILED


def cmd_simulate(o) -> int:
    if o["trials"] is None or o["trials"] <= 0:
        raise UsageError("--trials must be a positive integer")
    if o["workers"] < 1:
        raise UsageError("--workers must be at least 1")
    s = _setting(o)
    grid = [o["P"]] if o["P"] is not None else parse_list(o["P_grid"])
    if not grid:
        raise UsageError("empty power grid")
    header = [
        "setting", "alpha", "P", "regime", "error_rate", "error_stderr", "leakage_bits", "leakage_stderr",
        "leakage_bound", "rate1_gdof", "rate2_gdof", "dc_gdof", "channel_stream", "trial_stream",
    ]  # fmt: skip
    rows = []
    for i, P in enumerate(grid):
        cfg = _channel(o, P, o["alpha"], s)
        design, run_cfg = _design(o, cfg)
        tseed = o["seed"]
        err = mc_error_rate(design, run_cfg, o["trials"], tseed, workers=o["workers"])
        leak = leakage_estimate(design, run_cfg, o["trials"], tseed, workers=o["workers"])
        rate = secure_rate_eval(design, run_cfg, o["trials"], tseed, workers=o["workers"])
        chan = "h=" + ("flag" if o.get("h") else f"seed:{o['seed']}")
        rows.append(
            (
                s.value, o["alpha"], P, design.regime.value, err.mean, err.stderr,
                leak.estimate.mean, leak.estimate.stderr, leak.bound,
                rate.gdof_proxy[0], rate.gdof_proxy[1], rate.dc_proxy, chan, f"seed:{tseed}/block",
            )
        )  # fmt: skip
    _emit(o, write_csv(header, rows))
    return EXIT_OK


def cmd_mindist(o) -> int:
    if o["gains"]:
        gains = parse_list(o["gains"])
        ranges = parse_list(o["ranges"] or "", int)
        scales = parse_list(o["scales"]) if o["scales"] else [1.0] * len(gains)
        p = MinDistProblem(tuple(scales), tuple(gains), tuple(ranges))
        _emit(o, write_csv(["terms", "d_min"], [(len(gains), min_distance(p, o["cap"]))]))
        return EXIT_OK
    if o["trials"] is None or o["trials"] <= 0:
        raise UsageError("--trials must be a positive integer")
    est = outage_fraction(
        o["alpha"], o["P"], o["epsilon"], o["kappa"], o["lemma"], o["trials"], o["seed"], B=o["B"], cap=o["cap"]
    )
    mb = measure_bound(o["lemma"], o["kappa"], o["epsilon"], o["P"])
    header = ["lemma", "P", "epsilon", "kappa", "outage", "stderr", "draws", "measure_bound", "vacuous"]
    rows = [(o["lemma"], o["P"], o["epsilon"], o["kappa"], est.mean, est.stderr, est.trials, mb.value, mb.vacuous)]
    _emit(o, write_csv(header, rows))
    return EXIT_OK


def _claimed_point(o, s: Setting, alpha: float) -> GdofPoint:
    if s is Setting.IC_SC:
        half = ic_sum_gdof(alpha) / 2
        return GdofPoint(half, half, ic_min_dc(alpha))
    if s is Setting.WTH:
        return GdofPoint(wth_gdof(alpha), 0.0, wth_min_dc(alpha))
    cfg = sample_channel(o["seed"], P=1e6, alpha=alpha, setting=s)
    design, _ = _design({**o, "epsilon": None, "gamma": None}, cfg)
    if alpha > 1.0 + 1e-12:
        return role_swap(design.claimed, design.alpha)[0]
    return design.claimed


def cmd_converse(o) -> int:
    s = _setting(o)
    a = o["alpha"]
    if o["point"]:
        vals = parse_list(o["point"])
        if len(vals) != 3:
            raise UsageError("--point needs d1,d2,dc")
        point = GdofPoint(*vals)
    else:
        point = _claimed_point(o, s, a)
    h = None
    if o["P"] is not None:
        if o["h"]:
            h = parse_list(o["h"])
        else:
            c = sample_channel(o["seed"])
            h = [c.h11, c.h12, c.h21, c.h22]
    rep = converse_check(a, point, s, P=o["P"], h=h)
    header = ["setting", "alpha", "d1", "d2", "dc", "dc_lower_bound", "slack", "feasible", "passed"]
    row = [s.value, a, point.d1, point.d2, point.dc, rep.dc_lower_bound, rep.slack, rep.feasible, rep.passed]
    for i, (b, g) in enumerate(zip(rep.penalty_bits, rep.penalty_gdof), 1):
        header += [f"penalty{i}_bits", f"penalty{i}_gdof"]
        row += [b, g]
    _emit(o, write_csv(header, [row]))
    return EXIT_OK if rep.passed else EXIT_CHECK_FAILED


def cmd_region(o) -> int:
    if o["B_count"] < 2:
        raise UsageError("--B-count must be at least 2")
    a = o["alpha"]
    cfg = _channel(o, o["P"], a, Setting.MAC_WT)
    rows = region_sweep(cfg, o["B_count"], epsilon=o["epsilon"])
    hull = region_hull([(r.claimed.d1, r.claimed.d2) for r in rows])
    if o["format"] == "svg":
        vx = mac_region_vertices(a)
        series = [
            ("claimed", [r.claimed.d1 for r in rows], [r.claimed.d2 for r in rows], "o-"),
            ("achieved", [r.achieved.d1 for r in rows], [r.achieved.d2 for r in rows], "x--"),
            ("region", [v[0] for v in vx + vx[:1]], [v[1] for v in vx + vx[:1]], "k:"),
        ]
        _emit(o, _svg(series, "d1", f"MAC region, alpha={fmt(a)}"))
        return EXIT_OK
    header = ["alpha", "B", "regime", "d1", "d2", "dc", "d1_achieved", "d2_achieved", "dc_achieved", "deficit", "on_hull"]
    hull_set = {(round(x, 9), round(y, 9)) for x, y in hull}
    out = []
    for r in rows:
        on_hull = (round(r.claimed.d1, 9), round(r.claimed.d2, 9)) in hull_set
        out.append(
            (a, r.B, r.regime, r.claimed.d1, r.claimed.d2, r.claimed.dc,
             r.achieved.d1, r.achieved.d2, r.achieved.dc, r.deficit, on_hull)
        )  # fmt: skip
    _emit(o, write_csv(header, out))
    return EXIT_OK


_HANDLERS = {
    "gdof-curve": cmd_gdof_curve,
    "scheme-check": cmd_scheme_check,
    "simulate": cmd_simulate,
    "mindist": cmd_mindist,
    "converse": cmd_converse,
    "region": cmd_region,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        o = resolve_options(ns.command, ns)
        return _HANDLERS[ns.command](o)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"secgdof: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"secgdof: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedRegimeError as exc:
        print(f"secgdof: unsupported regime: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except SearchSpaceTooLargeError as exc:
        print(f"secgdof: search too large: {exc}", file=sys.stderr)
        return EXIT_SEARCH
    except (DomainError, SecGdofError) as exc:
        print(f"secgdof: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
