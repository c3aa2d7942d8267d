import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochpot.exceptions import StochpotError
from stochpot.geometry import Ball
from stochpot.potentials import (RieszSpec, ball_integral_closed, ball_newton_closed,
                                 ball_newton_gradient_closed, capacity_closed_unit_ball,
                                 ray_points, riesz_lq_exponent, riesz_potential,
                                 scaled_density_spec, write_potential_csv)


def newton_spec(resolution=32):
    return RieszSpec(3, 2.0, 1.0, Ball(3, 1.0), resolution)


@pytest.mark.parametrize("a, expected", [
    (0.0, 2 * math.pi),
    (2.0, 4 * math.pi / 6),
    (3.0, 4 * math.pi / 9),
])
def test_ball_integral_closed(a, expected):
    assert ball_integral_closed(1.0, a) == pytest.approx(expected)


@given(st.floats(0.0, 4.0), st.floats(0.2, 3.0))
def test_ball_integral_continuous_and_decreasing(a, R):
    # the integral is continuous through |x| = R and decreases with distance
    v = ball_integral_closed(R, a)
    assert v > 0
    assert ball_integral_closed(R, a + 1e-3) <= v + 1e-9
    left, right = ball_integral_closed(R, R * (1 - 1e-9)), ball_integral_closed(R, R * (1 + 1e-9))
    assert left == pytest.approx(right, rel=1e-6)


@pytest.mark.parametrize("a, expected", [(0.0, 2 * math.pi), (2.0, 2 * math.pi / 3), (0.5, None)])
def test_riesz_quadrature_matches_closed_form(a, expected):
    value = riesz_potential(newton_spec(), np.array([0.0, 0.0, a]))
    closed = ball_integral_closed(1.0, a)
    if expected is not None:
        assert closed == pytest.approx(expected)
    assert value == pytest.approx(closed, rel=1e-2)


def test_exterior_newton_value():
    # C = rho = 1 at |x| = 2 gives 1/6
    assert ball_newton_closed(1.0, 2.0) == pytest.approx(1 / 6)
    spec = newton_spec()
    quad = riesz_potential(spec, np.array([0.0, 2.0, 0.0])) / (4 * math.pi)
    assert quad == pytest.approx(1 / 6, rel=1e-2)


@pytest.mark.parametrize("a_vec", [(0.0, 0.0, 2.0), (1.0, 1.0, 1.5), (0.2, 0.1, 1.3)])
def test_gradient_matches_central_differences(a_vec):
    a_vec = np.array(a_vec)
    g = ball_newton_gradient_closed(1.0, a_vec)
    h = 1e-5
    fd = np.array([(ball_integral_closed(1.0, np.linalg.norm(a_vec + h * e))
                    - ball_integral_closed(1.0, np.linalg.norm(a_vec - h * e))) / (2 * h)
                   for e in np.eye(3)])
    assert np.allclose(g, fd, rtol=1e-6, atol=1e-9)


def test_gradient_magnitude_at_two():
    assert np.linalg.norm(ball_newton_gradient_closed(1.0, (0, 0, 2))) == pytest.approx(math.pi / 3)


@pytest.mark.parametrize("zeta", [0.5, 2.5])
def test_dilated_density_rescales_potential(zeta):
    spec = RieszSpec(3, 2.0, lambda Y: 1.0 + Y[:, 2] ** 2, Ball(3, 1.0), 16)
    x = np.array([0.0, 0.0, 1.7])
    lhs = riesz_potential(scaled_density_spec(spec, zeta), x)
    assert lhs == pytest.approx(zeta ** -2.0 * riesz_potential(spec, zeta * x), rel=1e-9)


def test_unit_ball_capacity_positive():
    assert capacity_closed_unit_ball() > 0


@pytest.mark.parametrize("n, p, a", [(3, 1.2, 2.0), (3, 1.2, 1.5)])
def test_lq_exponent_formula(n, p, a):
    q = riesz_lq_exponent(n, p, a)
    assert 1 / q == pytest.approx(1 / p - a / n)


def test_lq_exponent_rejects_out_of_range():
    with pytest.raises(StochpotError):
        riesz_lq_exponent(3, 2.0, 3.0)


def test_ray_points_and_csv(tmp_path):
    pts = ray_points((0, 0, 0), (0, 0, 2), 3.0, 4)
    assert np.allclose(np.linalg.norm(pts, axis=1)[-1], 3.0)
    path = tmp_path / "ray.csv"
    write_potential_csv(path, pts, np.arange(4.0))
    text = path.read_text()
    assert text.count("\n") == 5
