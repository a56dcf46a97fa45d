import csv
import io
import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from fracmax.corpus import named_function, random_profile, tent, twobump
from fracmax.derivative import (
    CSV_COLUMNS,
    default_step,
    derivative_field,
    derivative_samples,
    fd_derivative,
    fd_derivatives,
    line_norm_grid,
    luiro_derivative,
    luiro_noncentered,
    radial_norm_grid,
    region_of,
)
from fracmax.maximal import Beta, centered_value, noncentered_value
from fracmax.profile import RadialFunction, evaluate, weak_derivative

B = Beta(0.5, 1)


class TestLuiroFormula:
    def test_tent_origin_is_zero(self):
        assert luiro_derivative(tent(), 0.0, B) == pytest.approx(0.0, abs=1e-15)

    def test_tent_closed_form_near_origin(self):
        # for |t| small the good ball [t - r, t + r] contains the peak: M(t) maximizes
        # r^(1/2) (1 - r/2 - t^2/(2r)), and the envelope derivative is -t r^(-1/2)
        t = 0.1
        r = centered_value(tent(), t, B).smallest
        assert luiro_derivative(tent(), t, B) == pytest.approx(-t * r**-0.5, rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_finite_differences_line(self, seed):
        rng = np.random.default_rng(seed)
        p = random_profile(rng)
        for s in derivative_samples(p, Beta(0.25, 1), np.sort(rng.uniform(-1, 11, 6))):
            if s.clean and abs(s.fd) > 1e-6:
                assert s.luiro == pytest.approx(s.fd, rel=1e-4, abs=1e-9)

    @pytest.mark.parametrize("d", [2, 3])
    def test_matches_finite_differences_radial(self, d):
        f = named_function("plateau", d)
        b = Beta(0.5, d)
        for s in derivative_samples(f, b, np.array([0.4, 1.3, 1.8, 2.5, 4.0])):
            assert s.clean
            assert s.luiro == pytest.approx(s.fd, rel=1e-4, abs=1e-9)

    def test_noncentered_derivative(self):
        f = named_function("tent")
        for t in (1.5, 3.0):
            v = noncentered_value(f, t, B)
            h = 1e-4
            fd = (noncentered_value(f, t + h, B).value - noncentered_value(f, t - h, B).value) / (2 * h)
            assert luiro_noncentered(f, v, B) == pytest.approx(fd, rel=1e-4)

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_noncentered_nonzero_derivative_implies_boundary_contact(self, d):
        f = named_function("plateau", d)
        b = Beta(0.5, d)
        for t in (1.2, 1.7, 2.4, 3.5):
            v = noncentered_value(f, t, b)
            # balls centered at the origin give zero up to the optimizer's error in s_opt
            if abs(luiro_noncentered(f, v, b)) > 1e-6:
                assert v.boundary_contact

    def test_which_argument(self):
        with pytest.raises(ValueError):
            luiro_derivative(tent(), 0.0, B, which="left")
        assert luiro_derivative(named_function("zero"), 0.3, B) == 0.0


class TestFiniteDifferences:
    def test_step(self):
        assert default_step(0.3) == pytest.approx(1e-4)
        assert default_step(-20.0) == pytest.approx(2e-3)

    def test_known_kink_is_flagged(self):
        # at the tie point of two bumps the derivative jumps; Richardson pairs disagree nearby
        p = twobump()
        d1, d2, ok = fd_derivatives(p, [0.0], B)
        assert fd_derivative(p, 0.0, B) == pytest.approx(float(d1[0]))
        r = centered_value(p, 0.0, B)
        assert not r.unique_radius

    def test_radial_needs_room(self):
        with pytest.raises(ValueError):
            fd_derivatives(named_function("tent", 2), [1e-6], Beta(0.5, 2), h=[1e-4])
        with pytest.raises(ValueError):
            fd_derivatives(tent(), [0.0], B, h=[0.0])


class TestRegions:
    def test_labels(self):
        assert region_of(4.0, 0.5, 1.0) == "Omega1"
        assert region_of(4.0, 2.0, 1.0) == "Omega2plus"
        assert region_of(4.0, 2.0, -1.0) == "Omega2minus"

    def test_small_radius_points_are_omega1(self):
        f = named_function("sawtooth")
        for s in derivative_samples(f, Beta(0.1, 1), np.array([3.0, 5.0]), with_fd=False):
            if s.good_radius <= abs(s.t) / 4:
                assert s.region == "Omega1"


class TestField:
    def test_csv_columns_and_rows(self):
        fld = derivative_field(tent(), B, np.linspace(0, 2, 400))
        rows = list(csv.reader(io.StringIO(fld.to_csv())))
        assert tuple(rows[0]) == CSV_COLUMNS
        assert len(rows) == 401

    def test_tent_norm_converges(self):
        a = derivative_field(tent(), B, line_norm_grid(tent(), 400), with_fd=False).lq_norm
        b = derivative_field(tent(), B, line_norm_grid(tent(), 1600), with_fd=False).lq_norm
        ratio = b / weak_derivative(tent()).l1_norm()
        assert a == pytest.approx(b, rel=0.01)
        assert ratio == pytest.approx(0.1528, abs=5e-4)
        assert ratio <= 67.882

    def test_component_choice(self):
        g = np.linspace(-2, 2, 41)
        f1 = derivative_field(tent(), B, g, component="fd")
        f2 = derivative_field(tent(), B, g)
        assert f1.lq_norm == pytest.approx(f2.lq_norm, rel=1e-3)
        with pytest.raises(ValueError):
            derivative_field(tent(), B, g, component="bad")

    def test_radial_grid(self):
        g = radial_norm_grid(tent().restrict_half_line(), 50)
        assert np.all(np.diff(g) > 0) and g[0] > 0


# ---------------------------------------------------------------------------
# direction of the gradient in d = 2, by a Cartesian brute force


def _disk_average(F, x, r, nr=24, na=2048):
    # polar quadrature about x on a fixed axis-aligned angular grid; the radial
    # rule is split where each ray crosses a kink circle |y| = k of F
    u, w = np.polynomial.legendre.leggauss(nr)
    th = (np.arange(na) + 0.5) * (2 * math.pi / na)
    c = x[0] * np.cos(th) + x[1] * np.sin(th)
    cuts = [np.zeros(na), np.full(na, r)]
    for k in np.asarray(F.knots)[1:]:
        disc = c * c - (x @ x - k * k)
        root = np.sqrt(np.maximum(disc, 0.0))
        for z in (-c - root, -c + root):
            cuts.append(np.where(disc > 0, np.clip(z, 0.0, r), 0.0))
    cuts = np.sort(np.array(cuts), axis=0)
    total = np.zeros(na)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        half = 0.5 * (hi - lo)
        rho = lo[:, None] + half[:, None] * (u[None, :] + 1)
        X = x[0] + rho * np.cos(th)[:, None]
        Y = x[1] + rho * np.sin(th)[:, None]
        total += half * np.sum(evaluate(F, np.hypot(X, Y)) * rho * w[None, :], axis=1)
    return float(total.sum() * (2 * math.pi / na) / (math.pi * r * r))


def _brute_M(F, x, beta, r0):
    res = minimize_scalar(lambda r: -(r**beta) * _disk_average(F, x, r), bounds=(0.7 * r0, 1.4 * r0), method="bounded", options={"xatol": 1e-10})
    return -res.fun


def test_gradient_is_radial_in_2d():
    F = named_function("plateau").restrict_half_line()
    rf = RadialFunction(2, F)
    b = Beta(0.5, 2)
    rng = np.random.default_rng(7)
    h = 1e-3
    worst = 0.0
    for _ in range(20):
        rho = rng.uniform(1.1, 2.6)
        th = rng.uniform(0.1, math.pi / 2 - 0.1) + rng.integers(0, 4) * math.pi / 2
        x = rho * np.array([math.cos(th), math.sin(th)])
        r0 = centered_value(rf, rho, b).smallest
        g = np.array([(_brute_M(F, x + h * e, 0.5, r0) - _brute_M(F, x - h * e, 0.5, r0)) / (2 * h) for e in np.eye(2)])
        xhat = x / rho
        cross = g[0] * xhat[1] - g[1] * xhat[0]
        angle = abs(math.atan2(cross, float(g @ xhat)))
        angle = min(angle, math.pi - angle)
        worst = max(worst, angle)
    print("max angle", worst)
    assert worst <= 1e-3
