"""Monte Carlo summary statistic shared by the simulation modules."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int

    @classmethod
    def from_counts(cls, hits: int, trials: int, seed: int) -> "McEstimate":
        p = hits / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials, seed)

    @classmethod
    def from_samples(cls, samples: np.ndarray, seed: int) -> "McEstimate":
        n = int(samples.size)
        sd = float(np.std(samples, ddof=1)) if n > 1 else 0.0
        return cls(float(np.mean(samples)), sd / math.sqrt(n), n, seed)
