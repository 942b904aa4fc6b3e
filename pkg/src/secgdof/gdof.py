"""Closed-form secure GDoF curves and the MAC-WT region with its common-randomness cost."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "GdofPoint",
    "ReferenceRow",
    "ic_sum_gdof",
    "ic_min_dc",
    "wth_gdof",
    "wth_min_dc",
    "mac_region_contains",
    "mac_region_vertices",
    "mac_min_dc_alpha1",
    "reference_points",
    "reference_at",
]

_TOL = 1e-12


@dataclass(frozen=True)
class GdofPoint:
    d1: float
    d2: float
    dc: float

    def __post_init__(self):
        for name in ("d1", "d2", "dc"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < -_TOL:
                raise DomainError(f"{name} must be finite and nonnegative, got {v!r}")

    @property
    def d_sum(self) -> float:
        return self.d1 + self.d2


def _check_alpha(alpha: float) -> float:
    if not alpha >= 0 or not math.isfinite(alpha):
        raise DomainError(f"alpha must be a finite nonnegative number, got {alpha!r}")
    return float(alpha)


def ic_sum_gdof(alpha: float) -> float:
    """Optimal secure sum GDoF of the two-user interference channel with common randomness."""
    a = _check_alpha(alpha)
    if a <= 0.5:
        return 2.0 * (1.0 - a)
    if a <= 2.0 / 3.0:
        return 2.0 * a
    if a <= 1.0:
        return 2.0 - a
    if a <= 2.0:
        return a
    return 2.0


def ic_min_dc(alpha: float) -> float:
    a = _check_alpha(alpha)
    return max(ic_sum_gdof(a) / 2.0 - max(1.0 - a, 0.0), 0.0)


def wth_gdof(alpha: float) -> float:
    _check_alpha(alpha)
    return 1.0


def wth_min_dc(alpha: float) -> float:
    a = _check_alpha(alpha)
    return 1.0 - max(1.0 - a, 0.0)


def mac_region_contains(alpha: float, d1: float, d2: float, *, tol: float = _TOL) -> bool:
    a = _check_alpha(alpha)
    return (
        -tol <= d1 <= 1.0 + tol
        and -tol <= d2 <= a + tol
        and d1 + d2 <= max(1.0, a) + tol
    )


def mac_region_vertices(alpha: float) -> list[tuple[float, float]]:
    """Vertices of the secure GDoF region polygon, counter-clockwise from the origin."""
    a = _check_alpha(alpha)
    if a == 0:
        return [(0.0, 0.0), (1.0, 0.0)]
    if a <= 1.0:
        pts = [(0.0, 0.0), (1.0, 0.0), (1.0 - a, a), (0.0, a)]
    else:
        pts = [(0.0, 0.0), (1.0, 0.0), (1.0, a - 1.0), (0.0, a)]
    # drop repeated corners (alpha = 1 merges two of them)
    out = []
    for p in pts:
        if not out or max(abs(p[0] - out[-1][0]), abs(p[1] - out[-1][1])) > _TOL:
            out.append(p)
    return out


def mac_min_dc_alpha1(d1: float, d2: float) -> float:
    if not mac_region_contains(1.0, d1, d2):
        raise DomainError(f"pair ({d1}, {d2}) is outside the region at alpha=1")
    return max(d1, d2)


@dataclass(frozen=True)
class ReferenceRow:
    alpha: float
    no_secrecy: float
    secrecy_without_cr: float | None
    secrecy_with_cr: float


_REFERENCE = (ReferenceRow(4.0 / 3.0, 4.0 / 3.0, 8.0 / 9.0, 4.0 / 3.0),)


def reference_points() -> tuple[ReferenceRow, ...]:
    """Tabulated comparison anchors.  The curve without common randomness is known only at these rows."""
    return _REFERENCE


def reference_at(alpha: float, *, tol: float = 1e-9) -> ReferenceRow:
    """Comparison row at ``alpha``; ``secrecy_without_cr`` is None unless tabulated."""
    a = _check_alpha(alpha)
    for row in _REFERENCE:
        if abs(row.alpha - a) <= tol:
            return row
    # with common randomness the secure sum GDoF coincides with the W curve
    return ReferenceRow(a, ic_sum_gdof(a), None, ic_sum_gdof(a))
