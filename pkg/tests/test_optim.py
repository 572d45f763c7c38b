import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pitesg.optim import OptimConfig, OptimizationError, minimize


def rosenbrock(p):
    x, y = p
    return (1 - x) ** 2 + 100 * (y - x * x) ** 2


def test_parabola():
    res = minimize(lambda x: (x[0] - 2.0) ** 2, [0.0])
    assert res.x[0] == pytest.approx(2.0, abs=1e-5)


def test_convex_quadratic():
    res = minimize(lambda x: x[0] ** 2 + x[1] ** 2, [1.0, 1.0])
    np.testing.assert_allclose(res.x, [0, 0], atol=1e-5)
    assert res.fun == pytest.approx(0.0, abs=1e-9)


def test_rosenbrock_with_restarts():
    res = minimize(rosenbrock, [-1.2, 1.0], OptimConfig(restarts=3), bounds=[(-2, 2), (-1, 3)])
    np.testing.assert_allclose(res.x, [1, 1], atol=1e-3)


def test_incumbent_monotone_and_trace_csv(tmp_path):
    res = minimize(rosenbrock, [-1.2, 1.0], OptimConfig(restarts=3, seed=4), bounds=[(-2, 2), (-1, 3)])
    inc = [row[3] for row in res.trace]
    assert all(b <= a for a, b in zip(inc, inc[1:]))
    assert inc[-1] == res.fun
    res.write_trace(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[0] == "restart,iteration,best_value,incumbent"


def test_bit_reproducible():
    a = minimize(rosenbrock, [-1.2, 1.0], OptimConfig(restarts=3, seed=9), bounds=[(-2, 2), (-1, 3)])
    b = minimize(rosenbrock, [-1.2, 1.0], OptimConfig(restarts=3, seed=9), bounds=[(-2, 2), (-1, 3)])
    assert a.x.tobytes() == b.x.tobytes()
    assert a.trace == b.trace


def test_penalty_never_returns_infeasible():
    cfg = OptimConfig(restarts=4)

    def f(x):
        if x[0] < 1.0:  # infeasible region
            return cfg.penalty_value
        return (x[0] - 0.5) ** 2 + x[1] ** 2

    res = minimize(f, [2.0, 1.0], cfg, bounds=[(1.0, 3.0), (-1.0, 1.0)])
    assert res.x[0] >= 1.0
    assert res.x[0] == pytest.approx(1.0, abs=1e-4)


def test_nonfinite_everywhere_raises():
    with pytest.raises(OptimizationError):
        minimize(lambda x: float("nan"), [0.0, 0.0], OptimConfig(restarts=2))


def test_config_validation():
    with pytest.raises(ValueError):
        OptimConfig(tol_f=0)
    with pytest.raises(ValueError):
        OptimConfig(restarts=0)


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.5, 4))
def test_property_quadratic_minimum(a, b, c):
    res = minimize(lambda x: c * (x[0] - a) ** 2 + (x[1] - b) ** 2, [0.0, 0.0], OptimConfig(restarts=2))
    np.testing.assert_allclose(res.x, [a, b], atol=1e-4)
