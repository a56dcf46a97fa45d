import math

import numpy as np
import pytest
from scipy.optimize import minimize, minimize_scalar

from fracmax.corpus import named_function, random_profile, tent, twobump
from fracmax.geometry import PiecewisePolynomial, ball_averages
from fracmax.maximal import (
    Beta,
    SolverConfig,
    centered_value,
    centered_values,
    golden_maximize,
    mI_value,
    noncentered_value,
    truncated_value,
)
from fracmax.profile import PiecewiseLinearProfile, RadialFunction, abs_profile, l1_norm

TENT_VALUE = (2.0 / 3.0) ** 1.5


def brute_centered_line(p, t, beta, n=20001):
    """Dense log grid of r plus a bounded scalar refinement around the top grid points."""
    P = abs_profile(p)

    def phi(r):
        return r**beta * (P.antiderivative(t + r) - P.antiderivative(t - r)) / (2 * r)

    span = max(abs(P.knots[0] - t), abs(P.knots[-1] - t))
    rs = np.geomspace(1e-6, 4 * span, n)
    v = phi(rs)
    best = v.max()
    for i in np.argsort(-v)[:5]:
        lo, hi = rs[max(i - 1, 0)], rs[min(i + 1, n - 1)]
        res = minimize_scalar(lambda r: -phi(r), bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
        best = max(best, -res.fun)
    return float(best)


def brute_centered_radial(F, d, t, beta, n=3000):
    G = PiecewisePolynomial.from_profile(abs_profile(F))
    rs = np.geomspace(1e-4, 4 * (F.knots[-1] + t), n)

    def phi(r):
        r = np.atleast_1d(r)
        return r**beta * ball_averages(G, np.full(r.size, t), r, d, 64)

    v = phi(rs)
    best = v.max()
    i = int(np.argmax(v))
    res = minimize_scalar(lambda r: -phi(r)[0], bounds=(rs[max(i - 1, 0)], rs[min(i + 1, n - 1)]), method="bounded", options={"xatol": 1e-13})
    return float(max(best, -res.fun))


def brute_noncentered_line(p, t, beta):
    P = abs_profile(p)

    def psi(a, b):
        r = 0.5 * (b - a)
        return r**beta * (P.antiderivative(b) - P.antiderivative(a)) / (b - a)

    lo, hi = min(P.knots[0], t) - 1.0, max(P.knots[-1], t) + 1.0
    A = np.linspace(lo, t, 400)
    B = np.linspace(t, hi + 10 * (hi - lo), 1200)
    AA, BB = np.meshgrid(A, B, indexing="ij")
    with np.errstate(invalid="ignore", divide="ignore"):
        V = np.where(BB - AA > 1e-9, psi(AA, BB), 0.0)
    best = float(np.nanmax(V))
    for k in np.argsort(-V.ravel())[:6]:
        i, j = np.unravel_index(k, V.shape)

        def neg(z):
            a, b = min(z[0], t), max(z[1], t)
            return -psi(a, b) if b - a > 1e-12 else 0.0

        res = minimize(neg, [AA[i, j], BB[i, j]], method="Nelder-Mead", options={"xatol": 1e-13, "fatol": 1e-16, "maxiter": 4000})
        best = max(best, -res.fun)
    return best


class TestBeta:
    def test_q(self):
        assert Beta(0.5, 1).q == pytest.approx(2.0)
        assert Beta(0.5, 3).q == pytest.approx(3 / 2.5)

    def test_range(self):
        with pytest.raises(ValueError):
            Beta(0.0, 1)
        with pytest.raises(ValueError):
            Beta(1.0, 1)
        with pytest.raises(ValueError):
            Beta(0.5, 0)
        assert not Beta(1.5, 3).in_theorem_range
        assert Beta(0.9, 3).in_theorem_range


class TestCentered:
    def test_tent_closed_form(self):
        r = centered_value(tent(), 0.0, Beta(0.5, 1))
        assert r.value == pytest.approx(TENT_VALUE, abs=1e-12)
        assert r.radii == pytest.approx((2 / 3,), abs=1e-12)
        assert r.unique_radius and not r.degenerate

    def test_tent_search_method_agrees(self):
        cfg = SolverConfig(line_method="search")
        r = centered_value(tent(), 0.0, Beta(0.5, 1), cfg)
        assert r.value == pytest.approx(TENT_VALUE, abs=1e-12)
        assert r.smallest == pytest.approx(2 / 3, rel=1e-6)

    def test_zero_is_degenerate(self):
        r = centered_value(named_function("zero"), 0.3, Beta(0.5, 1))
        assert r.degenerate and r.value == 0.0 and r.radii == ()
        r2 = centered_value(named_function("zero", 3), 0.3, Beta(0.5, 3))
        assert r2.degenerate

    def test_twobump_tie(self):
        r = centered_value(twobump(), 0.0, Beta(0.5, 1))
        assert len(r.radii) == 2
        assert r.radii[0] < 1.0 < 3.0 < r.radii[1]
        assert not r.unique_radius

    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("beta", [0.1, 0.5, 0.9])
    def test_line_against_brute_force(self, seed, beta):
        rng = np.random.default_rng(seed)
        p = random_profile(rng)
        ts = rng.uniform(-2, 12, 4)
        got = centered_values(p, ts, Beta(beta, 1))
        for t, g in zip(ts, got):
            ref = brute_centered_line(p, t, beta)
            assert g.value >= ref * (1 - 1e-12)
            assert g.value == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("seed", range(4))
    def test_exact_and_search_agree(self, seed):
        rng = np.random.default_rng(100 + seed)
        p = random_profile(rng)
        ts = rng.uniform(-1, 11, 5)
        a = centered_values(p, ts, Beta(0.5, 1))
        b = centered_values(p, ts, Beta(0.5, 1), SolverConfig(line_method="search"))
        for x, y in zip(a, b):
            assert x.value == pytest.approx(y.value, rel=1e-10)
            assert x.smallest == pytest.approx(y.smallest, rel=1e-5)

    @pytest.mark.parametrize("d", [2, 3, 5])
    def test_radial_against_brute_force(self, d):
        rng = np.random.default_rng(d)
        F = random_profile(rng, half_line=True, origin_value=True)
        for t in (0.0, 1.3, 4.0, 9.5):
            got = centered_value(RadialFunction(d, F), t, Beta(0.5, d)).value
            ref = brute_centered_radial(F, d, t, 0.5)
            assert got >= ref * (1 - 1e-9)
            assert got == pytest.approx(ref, rel=1e-7)

    def test_radial_d1_matches_line(self):
        F = tent().restrict_half_line()
        a = centered_value(RadialFunction(1, F), 0.4, Beta(0.5, 1)).value
        b = centered_value(tent(), 0.4, Beta(0.5, 1)).value
        assert a == pytest.approx(b, rel=1e-14)

    def test_far_point_uses_large_ball(self):
        r = centered_value(tent(), 50.0, Beta(0.5, 1))
        assert 49.0 < r.smallest <= 51.0  # the ball has to reach the support
        assert r.value == pytest.approx(brute_centered_line(tent(), 50.0, 0.5), rel=1e-10)

    def test_values_batch_is_pointwise(self):
        ts = np.array([-0.3, 0.1, 0.8])
        batch = centered_values(tent(), ts, Beta(0.25, 1))
        for t, b in zip(ts, batch):
            assert b.value == centered_value(tent(), t, Beta(0.25, 1)).value

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            centered_value(tent(), 0.0, Beta(0.5, 2))
        with pytest.raises(ValueError):
            centered_value(named_function("tent", 2), -1.0, Beta(0.5, 2))


class TestRestricted:
    def test_truncation_monotone_and_limits(self):
        p, b = tent(), Beta(0.5, 1)
        full = centered_value(p, 0.3, b)
        vals = [truncated_value(p, 0.3, b, eps).value for eps in (1e-4, 0.1, 0.7, 2.0, 5.0)]
        assert all(x >= y for x, y in zip(vals, vals[1:]))
        assert vals[0] == pytest.approx(full.value, rel=1e-12)
        r = truncated_value(p, 0.3, b, 2.0)
        assert r.smallest >= 2.0

    def test_truncation_needs_positive_eps(self):
        with pytest.raises(ValueError):
            truncated_value(tent(), 0.0, Beta(0.5, 1), 0.0)

    def test_mI(self):
        f = named_function("plateau", 2)
        b = Beta(0.5, 2)
        r = mI_value(f, 1.6, b)
        assert r.smallest <= 1.6 / 4 * (1 + 1e-12)
        assert r.value <= centered_value(f, 1.6, b).value + 1e-15
        with pytest.raises(ValueError):
            mI_value(f, 0.0, b)


class TestNoncentered:
    @pytest.mark.parametrize("seed", range(3))
    def test_line_against_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        p = random_profile(rng, knot_range=(4, 10))
        for t in rng.uniform(-1, 11, 2):
            got = noncentered_value(p, t, Beta(0.5, 1)).value
            ref = brute_noncentered_line(p, t, 0.5)
            assert got >= ref * (1 - 1e-9)
            assert got == pytest.approx(ref, rel=1e-7)

    def test_tent_origin_equals_centered(self):
        r = noncentered_value(tent(), 0.0, Beta(0.5, 1))
        assert r.value == pytest.approx(TENT_VALUE, rel=1e-10)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_sandwich(self, d):
        f = named_function("plateau", d)
        b = Beta(0.5, d)
        for t in (0.5, 1.5, 2.5, 4.0):
            c = centered_value(f, t, b).value
            n = noncentered_value(f, t, b)
            assert c <= n.value * (1 + 1e-12)
            assert n.value <= 2 ** (d - 0.5) * c * (1 + 1e-12)
            assert not n.cap_hit

    def test_far_point_makes_boundary_contact(self):
        r = noncentered_value(tent(), 3.0, Beta(0.5, 1))
        assert r.boundary_contact
        assert abs(r.s_opt - 3.0) == pytest.approx(r.r_opt, rel=1e-9)

    def test_zero(self):
        r = noncentered_value(named_function("zero"), 0.0, Beta(0.5, 1))
        assert r.degenerate and r.value == 0.0


class TestCovariance:
    @pytest.mark.parametrize("d", [1, 2])
    def test_scaling_and_dilation(self, d):
        base = tent() if d == 1 else tent().restrict_half_line()
        mk = (lambda p: p) if d == 1 else (lambda p: RadialFunction(d, p))
        b = Beta(0.3, d)
        t, lam, a = 0.7, 3.0, 1.9
        r0 = centered_value(mk(base), t, b)
        rs = centered_value(mk(lam * base), t, b)
        ra = centered_value(mk(base.dilate(a)), a * t, b)
        assert rs.value == pytest.approx(lam * r0.value, rel=1e-9)
        assert ra.value == pytest.approx(a**0.3 * r0.value, rel=1e-9)
        assert ra.smallest == pytest.approx(a * r0.smallest, rel=1e-6)

    def test_tail_bound(self):
        p = tent()
        b = Beta(0.5, 1)
        for t in (5.0, 20.0):
            v = centered_value(p, t, b).value
            assert v <= l1_norm(p) / 2.0 * (t - 1) ** (0.5 - 1) + 1e-15


def test_golden_maximize_brackets():
    a = np.array([0.0, 1.0, 2.0])
    b = np.array([2.0, 3.0, 2.5])
    x, v, it = golden_maximize(lambda z: -(z - 1.3) ** 2, a, b, 1e-12, 200)
    np.testing.assert_allclose(x, [1.3, 1.3, 2.0], atol=1e-9)
    assert it < 200


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(line_method="newton")
    with pytest.raises(ValueError):
        SolverConfig(refine_split=1)
    with pytest.raises(ValueError):
        SolverConfig(eps_argmax=0.5)
