import math

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from fracmax.geometry import (
    BallSpec,
    PiecewisePolynomial,
    QuadratureConfig,
    abs_gradient_integrand,
    ball_average,
    ball_averages,
    boundary_flux,
    cap_fraction,
    line_average,
    line_flux,
    line_moment_of_derivative,
    line_sphere_average,
    radial_gradient_moment,
    sphere_average,
    weighted_sphere_average,
)
from fracmax.profile import PiecewiseLinearProfile, abs_profile, evaluate

pytestmark = pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")

F = PiecewiseLinearProfile([0.0, 0.8, 1.5, 3.0], [0.6, 1.0, -0.3, 0.0], half_line=True)
FA = abs_profile(F)


def polar_ball_average_2d(G, s, r):
    """Independent oracle: dblquad in polar coordinates about the ball centre."""
    def integrand(rho, phi):
        x = s + rho * math.cos(phi)
        y = rho * math.sin(phi)
        return G(math.hypot(x, y)) * rho

    val = dblquad(integrand, 0, math.pi, 0, r, epsabs=1e-12, epsrel=1e-11)[0]  # kinks cost accuracy, still ~1e-9
    return 2 * val / (math.pi * r * r)


def shell_ball_average_3d(G, s, r):
    """Independent oracle: integrate over spherical shells |y| = rho with the 3-D cap area."""
    def integrand(rho):
        if s == 0:
            frac = 1.0 if rho <= r else 0.0
        else:
            c = (s * s + rho * rho - r * r) / (2 * s * rho)
            frac = 0.5 * (1 - min(1.0, max(-1.0, c)))
        return G(rho) * 4 * math.pi * rho * rho * frac

    lo, hi = max(0.0, s - r), s + r
    pts = [k for k in FA.knots if lo < k < hi]
    val = quad(integrand, lo, hi, points=pts or None, limit=200, epsabs=1e-13)[0]
    return val / (4 * math.pi / 3 * r**3)


class TestBallAverages:
    @pytest.mark.parametrize("s,r", [(0.0, 0.5), (0.3, 0.2), (1.0, 0.7), (0.4, 2.0), (2.5, 1.0)])
    def test_d2_against_dblquad(self, s, r):
        got = ball_average(FA, BallSpec(s, r, 2))
        ref = polar_ball_average_2d(lambda t: float(evaluate(FA, t)), s, r)
        assert got == pytest.approx(ref, rel=1e-8, abs=1e-12)

    @pytest.mark.parametrize("s,r", [(0.0, 0.5), (0.3, 0.2), (1.0, 0.7), (0.4, 2.0), (2.5, 1.0)])
    def test_d3_against_shells(self, s, r):
        got = ball_average(FA, BallSpec(s, r, 3))
        ref = shell_ball_average_3d(lambda t: float(evaluate(FA, t)), s, r)
        assert got == pytest.approx(ref, rel=1e-8, abs=1e-12)

    def test_monte_carlo_d5(self):
        rng = np.random.default_rng(1)
        s, r, d = 1.1, 0.9, 5
        n = 400_000
        g = rng.standard_normal((n, d))
        g /= np.linalg.norm(g, axis=1)[:, None]
        pts = g * (rng.uniform(size=n) ** (1 / d))[:, None] * r
        pts[:, 0] += s
        mc = evaluate(FA, np.linalg.norm(pts, axis=1))
        got = ball_average(FA, BallSpec(s, r, d))
        assert got == pytest.approx(mc.mean(), abs=5 * mc.std() / math.sqrt(n))

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_constant_integrand_exact(self, d):
        C = PiecewisePolynomial(np.array([0.0, 100.0]), np.array([[1.0]]))
        vals = ball_averages(C, [1.0, 1.0, 50.0, 0.3, 0.0], [1e-8, 1.7, 3.0, 0.3, 2.0], d, 24)
        np.testing.assert_allclose(vals, 1.0, rtol=1e-13)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_tiny_balls_converge_to_point_value(self, d):
        t = 2.2
        for r in (1e-9, 1e-7, 1e-5):
            got = ball_average(FA, BallSpec(t, r, d))
            assert got == pytest.approx(float(evaluate(FA, t)), rel=1e-9)

    def test_d1_exact(self):
        p = F.even_extension()
        P = abs_profile(p)
        pts = [k for k in P.knots if 0.2 < k < 1.8]
        ref = quad(lambda t: abs(evaluate(p, t)), 0.2, 1.8, points=pts, epsabs=1e-14)[0] / 1.6
        assert float(line_average(P, 1.0, 0.8)) == pytest.approx(ref, rel=1e-12)
        # a half-line integrand in d = 1 is averaged through its even extension
        assert ball_average(FA, BallSpec(1.0, 0.8, 1)) == pytest.approx(ref, rel=1e-12)


class TestSpheresAndFlux:
    def test_sphere_average_d3_closed_form(self):
        # the sphere |y - z| = r in R^3: average of G(|y|) = (1/(2 s r)) int_{|s-r|}^{s+r} G(rho) rho drho
        s, r = 1.2, 0.5
        ref = quad(lambda rho: float(evaluate(FA, rho)) * rho, s - r, s + r, points=[0.8, 1.5])[0] / (2 * s * r)
        assert sphere_average(FA, BallSpec(s, r, 3)) == pytest.approx(ref, rel=1e-9)

    def test_flux_is_derivative_of_average(self):
        # d/dh avg_B(x + h xhat, r) = avg_B grad|f| . xhat
        for d in (2, 3):
            s, r, h = 1.1, 0.6, 1e-5
            fd = (ball_average(FA, BallSpec(s + h, r, d)) - ball_average(FA, BallSpec(s - h, r, d))) / (2 * h)
            assert boundary_flux(FA, BallSpec(s, r, d)) == pytest.approx(fd, rel=1e-6)

    def test_line_flux(self):
        P = abs_profile(F.even_extension())
        c, r = 0.7, 0.4
        assert float(line_flux(P, c, r)) == pytest.approx((evaluate(P, c + r) - evaluate(P, c - r)) / (2 * r))
        assert float(line_sphere_average(P, c, r)) == pytest.approx(0.5 * (evaluate(P, c + r) + evaluate(P, c - r)))

    def test_line_moment(self):
        P = abs_profile(F.even_extension())
        c, r = 0.5, 0.9
        slope = lambda y: (evaluate(P, y + 1e-9) - evaluate(P, y - 1e-9)) / 2e-9
        ref = quad(lambda y: slope(y) * (0.3 + 2.0 * (y - c)), c - r, c + r, points=[-0.8, 0.8, 1.5], limit=200)[0] / (2 * r)
        assert line_moment_of_derivative(P, c, r, 0.3, 2.0) == pytest.approx(ref, rel=1e-6)


class TestIdentities:
    @pytest.mark.parametrize("d", [2, 3, 5])
    @pytest.mark.parametrize("s,r", [(0.9, 0.4), (0.3, 1.5), (2.0, 1.2)])
    def test_center_and_boundary_point_identities(self, d, s, r):
        ball = BallSpec(s, r, d)
        avg, sph = ball_average(FA, ball), sphere_average(FA, ball)
        lhs = radial_gradient_moment(FA, ball, "center-minus-y")
        assert lhs == pytest.approx(d * (avg - sph), abs=1e-9)
        out = radial_gradient_moment(FA, ball, "outer-point-minus-y")
        assert out == pytest.approx(d * (avg - sph) + weighted_sphere_average(FA, ball), abs=1e-9)
        inn = radial_gradient_moment(FA, ball, "inner-point-minus-y")
        assert inn == pytest.approx(d * (avg - sph) + weighted_sphere_average(FA, ball, inward=True), abs=1e-9)

    def test_tent_case_d1(self):
        from fracmax.corpus import tent

        P = abs_profile(tent())
        lhs = line_moment_of_derivative(P, 0.0, 0.5, 0.0, -1.0)
        rhs = float(line_average(P, 0.0, 0.5) - line_sphere_average(P, 0.0, 0.5))
        assert lhs == pytest.approx(0.25, abs=1e-15) and rhs == pytest.approx(0.25, abs=1e-15)

    def test_constant_gives_zero(self):
        C = PiecewiseLinearProfile([0.0, 50.0, 51.0], [1.0, 1.0, 0.0], half_line=True)
        ball = BallSpec(3.0, 2.0, 3)
        assert radial_gradient_moment(C, ball, "center-minus-y") == pytest.approx(0.0, abs=1e-14)
        assert ball_average(C, ball) - sphere_average(C, ball) == pytest.approx(0.0, abs=1e-14)


class TestCapFraction:
    def test_d3_closed_form(self):
        ball = BallSpec(1.0, 0.5, 3)
        rho = np.array([0.6, 1.0, 1.4])
        c = (1 + rho**2 - 0.25) / (2 * rho)
        np.testing.assert_allclose(cap_fraction(rho, ball), 0.5 * (1 - c), rtol=1e-13)

    def test_limits(self):
        ball = BallSpec(1.0, 2.0, 2)
        assert cap_fraction(0.5, ball) == 1.0
        assert cap_fraction(3.5, ball) == 0.0
        with pytest.raises(ValueError):
            cap_fraction(-1.0, ball)

    def test_monte_carlo_d5(self):
        rng = np.random.default_rng(3)
        ball, rho = BallSpec(1.0, 0.8, 5), 1.2
        g = rng.standard_normal((200_000, 5))
        g *= rho / np.linalg.norm(g, axis=1)[:, None]
        inside = np.linalg.norm(g - np.array([1.0, 0, 0, 0, 0]), axis=1) <= 0.8
        assert cap_fraction(rho, ball) == pytest.approx(inside.mean(), abs=0.004)


def test_ball_spec_validation():
    with pytest.raises(ValueError):
        BallSpec(-1.0, 1.0, 2)
    with pytest.raises(ValueError):
        BallSpec(1.0, 0.0, 2)


def test_quadrature_config():
    q = QuadratureConfig().refined(2)
    assert q.radial_nodes == 48
    with pytest.raises(ValueError):
        QuadratureConfig(radial_nodes=1)


def test_abs_gradient_integrand():
    g = abs_gradient_integrand(F)
    np.testing.assert_allclose(g(np.array([0.4, 1.0])), [0.5, -1.0 / 0.7 * 1.3 * np.sign(evaluate(F, 1.0))], rtol=1e-12)
