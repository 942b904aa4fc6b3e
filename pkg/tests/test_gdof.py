import itertools

import numpy as np
import pytest

from secgdof.errors import DomainError
from secgdof.gdof import (
    ic_min_dc,
    ic_sum_gdof,
    mac_min_dc_alpha1,
    mac_region_contains,
    mac_region_vertices,
    reference_at,
    reference_points,
    wth_gdof,
    wth_min_dc,
)


def w_curve(a):
    """Independent restatement of the piecewise sum GDoF."""
    pieces = [
        (0.0, 0.5, lambda x: 2 * (1 - x)),
        (0.5, 2 / 3, lambda x: 2 * x),
        (2 / 3, 1.0, lambda x: 2 - x),
        (1.0, 2.0, lambda x: x),
        (2.0, np.inf, lambda x: 2.0),
    ]
    return [f(a) for lo, hi, f in pieces if lo <= a <= hi]


@pytest.mark.parametrize(
    "alpha,dsum,dc",
    [(0.0, 2, 0), (0.25, 1.5, 0), (0.5, 1, 0), (0.6, 1.2, 0.2), (2 / 3, 4 / 3, 1 / 3), (0.8, 1.2, 0.4),
     (1.0, 1, 0.5), (4 / 3, 4 / 3, 2 / 3), (1.5, 1.5, 0.75), (2.0, 2, 1), (3.0, 2, 1)],
)  # fmt: skip
def test_ic_values(alpha, dsum, dc):
    assert ic_sum_gdof(alpha) == pytest.approx(dsum, abs=1e-12)
    assert ic_min_dc(alpha) == pytest.approx(dc, abs=1e-12)


def test_ic_continuity_at_breakpoints():
    for a in (0.5, 2 / 3, 1.0, 2.0):
        vals = w_curve(a)
        assert len(vals) == 2 and abs(vals[0] - vals[1]) < 1e-12
        assert ic_sum_gdof(a) == pytest.approx(vals[0], abs=1e-12)


def test_ic_against_restatement_on_grid():
    for a in np.linspace(0, 4, 801):
        assert ic_sum_gdof(a) == pytest.approx(w_curve(a)[0], abs=1e-12)
        assert ic_min_dc(a) >= 0
        assert ic_min_dc(a) == pytest.approx(ic_sum_gdof(a) / 2 - max(1 - a, 0), abs=1e-12)
        if a <= 0.5:
            assert ic_min_dc(a) == 0


def test_negative_alpha():
    for f in (ic_sum_gdof, ic_min_dc, wth_gdof, wth_min_dc):
        with pytest.raises(DomainError):
            f(-0.1)


def test_wiretap():
    assert wth_gdof(0.75) == 1 and wth_min_dc(0.75) == pytest.approx(0.75)
    assert wth_gdof(2.0) == 1 and wth_min_dc(2.0) == 1
    assert wth_min_dc(0.0) == 0


def test_mac_region_examples():
    assert mac_region_contains(1, 0.5, 0.5)
    assert not mac_region_contains(0.5, 0.6, 0.5)
    assert mac_region_contains(2, 1, 1)
    assert not mac_region_contains(2, 1, 1.2)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8, 1.0, 1.25, 2.0])
def test_mac_vertices_match_constraints(alpha):
    vx = mac_region_vertices(alpha)
    for v in vx:
        assert mac_region_contains(alpha, *v)
    grid = np.linspace(0, max(1, alpha), 41)
    for d1, d2 in itertools.product(grid, grid):
        inside = d1 + d2 <= max(1, alpha) + 1e-12 and d1 <= 1 + 1e-12 and d2 <= alpha + 1e-12
        assert mac_region_contains(alpha, d1, d2) == inside


def test_mac_min_dc():
    assert mac_min_dc_alpha1(0.5, 0.5) == 0.5
    assert mac_min_dc_alpha1(1, 0) == 1
    assert mac_min_dc_alpha1(0, 0) == 0
    with pytest.raises(DomainError):
        mac_min_dc_alpha1(0.8, 0.8)


def test_reference_points():
    (row,) = reference_points()
    assert (row.alpha, row.no_secrecy, row.secrecy_without_cr, row.secrecy_with_cr) == pytest.approx(
        (4 / 3, 4 / 3, 8 / 9, 4 / 3)
    )
    assert row.secrecy_with_cr == row.no_secrecy
    assert reference_at(0.8).secrecy_without_cr is None
