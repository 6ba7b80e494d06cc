import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracstab.dynamics import (
    Trajectory,
    Verdict,
    caputo_difference,
    classify_trajectory,
    fractional_sum,
    residual,
    simulate,
)
from fracstab.errors import ParameterError, RangeError, SingularParameterError
from fracstab.params import OrderPair, SystemParams


def params(alpha, beta, a, b, x0=0.1):
    return SystemParams(OrderPair(alpha, beta), a, b, x0)


@st.composite
def valid_params(draw):
    alpha = draw(st.floats(0.05, 1.0))
    beta = draw(st.floats(0.01, 0.99).filter(lambda b: b < alpha))
    a = draw(st.floats(-3, 3).filter(lambda a: abs(a + 1) > 1e-3))
    b = draw(st.complex_numbers(max_magnitude=3))
    return params(alpha, beta, a, b)


def test_first_step():
    traj = simulate(params(0.9, 0.6, 0, 0.5), 1)
    assert traj.values[1] == pytest.approx(0.04, abs=1e-16)
    assert traj.values[0] == 0.1


def test_orders_and_singular_a():
    with pytest.raises(ParameterError):
        OrderPair(0.5, 0.5)
    with pytest.raises(ParameterError):
        OrderPair(1.2, 0.5)
    with pytest.raises(SingularParameterError):
        params(0.9, 0.6, -1.0, 0.5)


def test_stable_table_row_decays():
    traj = simulate(params(0.9, 0.6, 0, 0.5 + 0.5j), 500)
    assert abs(traj.values[500]) < abs(traj.values[5])
    assert classify_trajectory(traj) is Verdict.CONVERGING


def test_unstable_table_row_blows_up():
    traj = simulate(params(0.9, 0.6, -2.5, 0.5 + 0.2j), 500)
    assert np.max(np.abs(traj.values)) > 1e6 * 0.1
    assert classify_trajectory(traj) is Verdict.DIVERGING


def test_classical_limit():
    # alpha = 1, a = 0 is the map x(n) = b x(n-1)
    b = 0.7 - 0.2j
    traj = simulate(params(1.0, 0.5, 0.0, b), 30)
    ref = 0.1 * b ** np.arange(31)
    assert np.allclose(traj.values, ref, rtol=1e-13, atol=0)


@given(valid_params(), st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_linearity(p, c):
    base = simulate(p, 60).values
    scaled = simulate(SystemParams(p.orders, p.a, p.b, p.x0 * c), 60).values
    ok = np.isfinite(base) & (np.abs(base) < 1e200)
    err = np.abs(scaled[ok] - c * base[ok])
    assert np.all(err <= 1e-12 * np.maximum(np.abs(c * base[ok]), 1e-300))


@given(valid_params())
def test_equivalence_oracle(p):
    traj = simulate(p, 100)
    x = traj.values
    if not np.all(np.isfinite(x)):
        return
    scale = max(1.0, float(np.max(np.abs(x))) / abs(p.x0))
    assert residual(traj) < 1e-9 * scale


def test_residual_examples():
    assert residual(Trajectory(params(0.9, 0.6, 0.3, 0.5), np.zeros(20))) == 0.0
    traj = simulate(params(0.9, 0.6, -1.17, 0.8 + 0.2j), 100)
    assert residual(traj) < 1e-9


def test_residual_detects_perturbation():
    traj = simulate(params(0.8, 0.2, 0.6, 0.8), 50)
    bad = traj.values.copy()
    bad[7] += 1e-3
    r = residual(Trajectory(traj.params, bad))
    assert r > 1e-5
    # one unit of x(7) enters several operator terms; the leading one has weight 1
    assert r == pytest.approx(1e-3 * (1 + 0.6), rel=0.5)


def test_fractional_sum_basics():
    x = np.arange(10, dtype=float) ** 2
    assert fractional_sum(np.zeros(8), 0.4, 5) == 0
    assert fractional_sum(x, 1.0, 6) == pytest.approx(x[:6].sum())
    with pytest.raises(RangeError):
        fractional_sum(x, 0.5, 11)
    with pytest.raises(ParameterError):
        fractional_sum(x, 0.0, 3)


def test_fractional_sum_semigroup():
    # applying orders 0.3 and 0.5 in turn equals one sum of order 0.8 on this grid
    rng = np.random.default_rng(1)
    x = rng.normal(size=30)
    once = np.array([fractional_sum(x, 0.3, n) for n in range(1, 31)])
    twice = fractional_sum(once, 0.5, 20)
    direct = fractional_sum(np.concatenate(([0.0], x)), 0.8, 21)
    assert twice == pytest.approx(direct, rel=1e-12)


def test_caputo_difference_basics():
    x = np.sin(np.arange(12.0))
    assert caputo_difference(np.full(10, 3.0), 0.7, 5) == 0
    assert caputo_difference(x, 1.0, 4) == pytest.approx(x[5] - x[4])
    with pytest.raises(RangeError):
        caputo_difference(x, 0.5, 11)


def test_classify_trajectory_policy():
    p = params(0.8, 0.2, 0.6, 0.8)
    assert classify_trajectory(Trajectory(p, np.zeros(200))) is Verdict.CONVERGING
    assert classify_trajectory(simulate(params(0.8, 0.2, 0.6, 2.5), 500)) is Verdict.DIVERGING
    assert classify_trajectory(simulate(params(0.8, 0.2, 0.6, -1.3), 500)) is Verdict.CONVERGING
    flat = Trajectory(p, np.full(200, 0.1))
    assert classify_trajectory(flat) is Verdict.INCONCLUSIVE
    with pytest.raises(ParameterError):
        classify_trajectory(Trajectory(p, np.zeros(50)))


def test_overflow_becomes_inf():
    traj = simulate(params(0.9, 0.6, 0.0, 50.0), 400)
    assert np.isinf(traj.values[-1])
    assert residual(traj) == float("inf")
