import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracstab.charfun import sample_boundary
from fracstab.errors import MarginalProximity, ParameterError, SingularParameterError
from fracstab.stability import (
    RegionReport,
    Stability,
    accumulated_argument,
    boundary_for,
    classify_point,
    count_enclosed_unstable,
    count_stable_components,
    real_interval,
    scan_region,
    winding_number,
)

orders_st = st.tuples(st.floats(0.05, 1.0), st.floats(0.01, 0.99)).filter(
    lambda o: o[1] < o[0] - 1e-3)


def test_winding_examples():
    c = boundary_for((0.9, 0.6), 0.0)
    assert winding_number(c, 100 + 100j) == 0
    assert winding_number(c, 0.5) == 1
    assert winding_number(boundary_for((0.9, 0.6), -0.89), 0.9) <= 0


def test_marginal_band():
    c = boundary_for((0.9, 0.6), 0.0)
    with pytest.raises(MarginalProximity):
        winding_number(c, 1.0)
    with pytest.raises(MarginalProximity):
        winding_number(c, c.points[1000])
    assert classify_point((0.8, 0.2), 0.6, 1.0) is Stability.MARGINAL


@pytest.mark.parametrize("b,expected", [(0.5 + 0.5j, Stability.STABLE),
                                        (1 - 0.9j, Stability.UNSTABLE)])
def test_classify_examples(b, expected):
    assert classify_point((0.9, 0.6), 0.0, b) is expected


def test_classify_singular():
    with pytest.raises(SingularParameterError):
        classify_point((0.9, 0.6), -1.0, 0.5)


def test_real_interval_examples():
    iv = real_interval((0.8, 0.2), 0.6)
    assert iv.b_lo == pytest.approx(-1.43032, abs=5e-6) and iv.b_hi == 1
    assert real_interval((0.7, 0.3), 0.0).b_lo == pytest.approx(1 - 2 ** 0.7, abs=1e-15)
    iv = real_interval((0.7, 0.3), -(2 ** 0.4))
    assert iv.b_lo == 1.0 and iv.degenerate


@given(orders_st, st.floats(0, 1))
def test_real_axis_consistency(orders, u):
    al, be = orders
    a_min = -(2 ** (al - be))
    a = a_min + 0.05 + u * 2.0
    iv = real_interval(orders, a)
    assert classify_point(orders, a, iv.b_hi + 0.05) is Stability.UNSTABLE
    assert classify_point(orders, a, iv.b_lo - 0.05) is Stability.UNSTABLE


@given(orders_st, st.floats(0, 3))
def test_real_interval_midpoint_stable_above_a1(orders, a):
    # below a1 = 0 the segment can cross enclosed unstable sub-regions
    iv = real_interval(orders, a)
    assert classify_point(orders, a, 0.5 * (iv.b_lo + iv.b_hi)) is Stability.STABLE


def test_real_interval_midpoint_can_be_unstable_below_a1():
    iv = real_interval((0.9, 0.6), -1.0 + 1e-9)
    assert classify_point((0.9, 0.6), -1.0 + 1e-9, 0.5 * (iv.b_lo + iv.b_hi)) is Stability.UNSTABLE


@given(st.complex_numbers(max_magnitude=2.5).map(lambda z: z + 0.7))
def test_conjugate_verdict_symmetry(b):
    for orders, a in (((0.9, 0.6), -1.17), ((0.4, 0.2), -0.9361)):
        assert classify_point(orders, a, b) is classify_point(orders, a, b.conjugate())


@pytest.mark.parametrize("orders,a,b", [((0.9, 0.6), -1.17, 0.8 + 0.2j),
                                        ((0.4, 0.2), -0.9361, 0.7559 + 0.0002775j),
                                        ((0.4, 0.2), -1.0874, 0.8667 + 0.04332j)])
def test_winding_integrality(orders, a, b):
    total = accumulated_argument(boundary_for(orders, a), b)
    w = total / (2 * math.pi)
    assert abs(w - round(w)) < 1e-6


def test_refined_and_coarse_agree_away_from_curve():
    fine = boundary_for((0.9, 0.6), -1.17)
    coarse = sample_boundary((0.9, 0.6), -1.17, M=256, refine_near_cusps=False)
    for b in (0.8 + 0.2j, 0.95, 1.5 + 0.5j, 0.3):
        assert winding_number(fine, b) == winding_number(coarse, b)


@pytest.mark.parametrize("orders,a,stable,enclosed", [
    ((0.9, 0.6), 0.0, 1, 0),
    ((0.9, 0.6), -0.89, 1, 1),
    ((0.9, 0.6), -1.0, 0, None),
    ((0.9, 0.6), -1.17, 2, None),
    ((0.9, 0.6), -2.5, 1, None),
    ((0.4, 0.2), -0.9361, 3, None),
    ((0.4, 0.2), -1.07, 2, None),
    ((0.4, 0.2), -1.3, 1, None),
])
def test_component_counts(orders, a, stable, enclosed):
    rep = scan_region(orders, a)
    assert rep.components == stable
    assert count_stable_components(rep) == stable
    if enclosed is not None:
        assert count_enclosed_unstable(rep) == enclosed


@pytest.mark.parametrize("orders,a", [((0.9, 0.6), -1.17), ((0.4, 0.2), -0.9361),
                                      ((0.4, 0.2), -1.07)])
def test_representatives_are_stable(orders, a):
    rep = scan_region(orders, a)
    assert len(rep.representatives) == rep.components
    for z in rep.representatives:
        assert classify_point(orders, a, z) is Stability.STABLE


def test_raster_matches_point_classifier():
    orders, a = (0.4, 0.2), -0.9361
    rep = scan_region(orders, a, grid=(64, 64))
    rng = np.random.default_rng(7)
    curve = boundary_for(orders, a)
    for _ in range(150):
        i, j = rng.integers(0, 64, size=2)
        code = rep.verdicts[i, j]
        if code == "M":
            continue
        w = winding_number(curve, rep.point(i, j))
        assert rep.winding[i, j] == w
        assert code == ("S" if w == 1 else "U")


def test_report_shape_and_window():
    rep = scan_region((0.9, 0.6), 0.0, window=(-1, 1.5, -1, 1), grid=(30, 40))
    assert rep.verdicts.shape == (30, 40)
    assert rep.re_axis[0] == -1 and rep.re_axis[-1] == 1.5
    assert rep.point(0, 0) == complex(-1, -1)
    with pytest.raises(ParameterError):
        scan_region((0.9, 0.6), 0.0, grid=(8, 40))
    with pytest.raises(ParameterError):
        scan_region((0.9, 0.6), 0.0, window=(1, 0, 0, 1))


def test_all_unstable_matrix_has_no_components():
    rep = RegionReport((0.9, 0.6), 0.0, (0, 1, 0, 1), (16, 16), np.full((16, 16), "U"),
                       np.zeros((16, 16), dtype=int))
    assert count_stable_components(rep) == 0
    assert count_enclosed_unstable(rep) == 0


def test_touching_sectors_stay_apart():
    # two stable squares that meet only at one corner, as at a self-intersection
    S = np.full((20, 20), "U")
    S[2:10, 2:10] = "S"
    S[10:18, 10:18] = "S"
    W = np.where(S == "S", 1, 0)
    rep = RegionReport((0.9, 0.6), 0.0, (0, 1, 0, 1), (20, 20), S, W)
    assert count_stable_components(rep) == 2
