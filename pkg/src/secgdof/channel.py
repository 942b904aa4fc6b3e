"""Two-user symmetric real Gaussian channel with direct links at P and cross links at P^alpha."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from numbers import Real

import numpy as np

from .errors import DomainError

__all__ = ["Setting", "ChannelConfig", "sample_channel", "sample_coefficients", "receive", "trial_rng"]


class Setting(str, enum.Enum):
    IC_SC = "ic"
    WTH = "wth"
    MAC_WT = "mac"

    @classmethod
    def parse(cls, value) -> "Setting":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"ic": cls.IC_SC, "ic_sc": cls.IC_SC, "wth": cls.WTH, "mac": cls.MAC_WT, "mac_wt": cls.MAC_WT}
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown setting {value!r}") from None


@dataclass(frozen=True)
class ChannelConfig:
    """Channel state.  Coefficients may be floats or exact rationals."""

    P: float
    alpha: float
    h11: Real
    h12: Real
    h21: Real
    h22: Real
    setting: Setting = Setting.IC_SC

    def __post_init__(self):
        if not (self.P >= 1 and math.isfinite(self.P)):
            raise DomainError(f"P must be finite and >= 1, got {self.P!r}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be positive, got {self.alpha!r}")
        for name in ("h11", "h12", "h21", "h22"):
            v = getattr(self, name)
            if not (1 < v <= 2):
                raise DomainError(f"{name}={v!r} outside (1, 2]")
        object.__setattr__(self, "setting", Setting.parse(self.setting))

    @property
    def h(self) -> tuple[tuple[Real, Real], tuple[Real, Real]]:
        return ((self.h11, self.h12), (self.h21, self.h22))

    def gain(self, rx: int, tx: int) -> Real:
        """Coefficient h_{rx,tx} with 1-based indices."""
        return self.h[rx - 1][tx - 1]

    def link_exponent(self, rx: int, tx: int) -> float:
        """Power exponent of link tx -> rx: 1 for direct links, alpha for cross links."""
        return 1.0 if rx == tx else float(self.alpha)

    def with_power(self, P: float) -> "ChannelConfig":
        return replace(self, P=P)

    def with_alpha(self, alpha: float) -> "ChannelConfig":
        return replace(self, alpha=alpha)

    def with_setting(self, setting) -> "ChannelConfig":
        return replace(self, setting=Setting.parse(setting))


def sample_coefficients(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """I.i.d. uniform draws on (1, 2]; shape (4,) or (size, 4) in order h11, h12, h21, h22."""
    shape = (4,) if size is None else (size, 4)
    # random() is on [0, 1), so 2 - U lands on (1, 2]
    return 2.0 - rng.random(shape)


def sample_channel(rng_seed: int, *, P: float = 1e6, alpha: float = 1.0, setting=Setting.IC_SC) -> ChannelConfig:
    h = sample_coefficients(np.random.default_rng(rng_seed))
    return ChannelConfig(P, alpha, *(float(v) for v in h), setting=setting)


def receive(cfg: ChannelConfig, x1, x2, noise=(0.0, 0.0)):
    """Received pair (y1, y2); works elementwise on arrays."""
    sp = math.sqrt(cfg.P)
    spa = math.sqrt(cfg.P ** cfg.alpha)
    h11, h12, h21, h22 = (float(v) for v in (cfg.h11, cfg.h12, cfg.h21, cfg.h22))
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    y1 = sp * h11 * x1 + spa * h12 * x2 + np.asarray(noise[0], dtype=float)
    y2 = spa * h21 * x1 + sp * h22 * x2 + np.asarray(noise[1], dtype=float)
    if y1.ndim == 0:
        return float(y1), float(y2)
    return y1, y2


def trial_rng(seed: int, *stream) -> np.random.Generator:
    """Generator for a labelled sub-stream of ``seed``; independent of scheduling order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(s) for s in stream)))
