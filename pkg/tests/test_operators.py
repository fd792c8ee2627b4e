import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CIGAR, flat_u_grid
from ricci2d.grid import CylindricalGrid, GridHeader, ScalarField, SolitonParams, soliton_grid
from ricci2d.operators import (
    cart_derivatives,
    d_s,
    d_ss,
    laplacian_cyl,
    potential,
    scalar_curvature,
)
from ricci2d.oracle import FieldCalculus, fd_derivative, soliton_field

HDR = GridHeader(41, 48, -1.0, 1.0)


def field_of(func, hdr=HDR, role="generic"):
    S, TH = hdr.mesh()
    return ScalarField(hdr, func(S, TH), role)


def test_laplacian_of_linear_is_zero():
    lap = laplacian_cyl(field_of(lambda S, T: 3.0 * S - 1.0)).values
    np.testing.assert_allclose(lap, 0.0, atol=1e-10)


def test_laplacian_of_quadratic_is_two():
    lap = laplacian_cyl(field_of(lambda S, T: S * S)).values
    # exact for quadratics, including the one-sided boundary stencil
    np.testing.assert_allclose(lap, 2.0, rtol=1e-10)


def test_laplacian_of_sin_theta_is_second_order():
    errs = []
    for nt in (32, 64):
        hdr = GridHeader(9, nt, 0.0, 1.0)
        f = field_of(lambda S, T: np.sin(T), hdr)
        errs.append(np.max(np.abs(laplacian_cyl(f).values + np.sin(hdr.mesh()[1]))))
    assert errs[0] < 2 * (2 * np.pi / 32) ** 2 / 12
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.02)


@pytest.mark.parametrize("order_fn, exact", [
    (d_s, np.cos),
    (d_ss, lambda s: -np.sin(s)),
])
def test_one_sided_boundary_stencils_are_second_order(order_fn, exact):
    errs = []
    for n in (21, 41):
        s = np.linspace(0.0, 1.0, n)[:, None] * np.ones((1, 8))
        out = order_fn(np.sin(s), 1.0 / (n - 1))
        errs.append(max(abs(out[0, 0] - exact(0.0)), abs(out[-1, 0] - exact(1.0))))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_flat_metric_has_zero_curvature():
    R = scalar_curvature(flat_u_grid(HDR)).values
    np.testing.assert_allclose(R, 0.0, atol=1e-9)


def test_cigar_curvature_at_unit_radius():
    # oracle: R = -Delta log u / u from Richardson differences of the closed form
    calc = FieldCalculus(soliton_field(CIGAR))
    expected = float(calc.curvature(np.array(1.0), np.array(0.0)))
    assert expected == pytest.approx(1.0, abs=1e-8)
    errs = []
    for ns in (81, 161):
        g = soliton_grid(CIGAR, GridHeader(ns, 16, -2.0, 2.0))
        errs.append(abs(scalar_curvature(g).values[(ns - 1) // 2, 0] - expected))
    assert errs[0] < 1e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_cigar_curvature_far_out():
    g = soliton_grid(CIGAR, GridHeader(81, 16, 6.0, 10.0))
    assert scalar_curvature(g).values[-1].max() <= 1e-8


@settings(max_examples=25, deadline=None)
@given(beta=st.floats(0.1, 10), delta=st.floats(0.1, 10), t=st.floats(-1, 1))
def test_soliton_curvature_positive(beta, delta, t):
    g = soliton_grid(SolitonParams(beta, delta), GridHeader(65, 8, -2.0, 6.0), t)
    assert np.all(scalar_curvature(g).values > 0.0)


def test_potential_examples():
    np.testing.assert_allclose(potential(flat_u_grid(HDR)).values, 0.0, atol=1e-14)
    g = soliton_grid(CIGAR, HDR)
    assert potential(g).values[20, 5] == pytest.approx(0.0, abs=1e-15)
    assert potential(g).role == "f"


def test_potential_laplacian_equals_R_u():
    # closed form on the cigar: R u = 4a / (r^2 + a)^2 with a = 1
    res = []
    for ns in (81, 161):
        hdr = GridHeader(ns, 16, -2.0, 4.0)
        g = soliton_grid(CIGAR, hdr)
        S, _ = hdr.mesh()
        r2 = np.exp(2 * S)
        lap_x = np.exp(-2 * S) * laplacian_cyl(potential(g)).values
        res.append(np.max(np.abs(lap_x - 4.0 / (r2 + 1.0) ** 2)[1:-1]))
    assert res[0] < 1e-2
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.1)


def test_hessian_of_half_r_squared_is_identity():
    errs = []
    for ns, nt in ((41, 48), (81, 96)):
        hdr = GridHeader(ns, nt, -1.0, 1.0)
        grad, hess = cart_derivatives(field_of(lambda S, T: 0.5 * np.exp(2 * S), hdr))
        X, _ = hdr.plane_points()
        H = hess.values[1:-1]
        errs.append(max(np.max(np.abs(H[..., 0] - 1.0)), np.max(np.abs(H[..., 1])),
                        np.max(np.abs(H[..., 2] - 1.0)),
                        np.max(np.abs(grad.values[1:-1, :, 0] - X[1:-1]))))
    assert errs[0] < 5e-3
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_radial_field_has_no_angular_gradient():
    grad, _ = cart_derivatives(field_of(lambda S, T: np.log1p(np.exp(2 * S))))
    S, TH = HDR.mesh()
    angular = -np.sin(TH) * grad.values[..., 0] + np.cos(TH) * grad.values[..., 1]
    np.testing.assert_allclose(angular, 0.0, atol=1e-12)


def test_gradient_of_log_one_plus_r2_at_unit_point():
    func = lambda x, y, t: np.log(x * x + y * y + 1.0)  # noqa: E731
    expected = fd_derivative(func, (1.0, 0.0), 0.0, (1, 0))
    assert expected == pytest.approx(1.0, abs=1e-9)
    grad, _ = cart_derivatives(field_of(lambda S, T: np.log1p(np.exp(2 * S))))
    assert grad.values[20, 0, 0] == pytest.approx(expected, abs=2e-3)


def test_cart_derivatives_match_oracle_at_random_nodes():
    # fine patch so that the O(h^2) stencil error is below 1e-6
    hdr = GridHeader(201, 6284, -0.1, 0.1)
    func = lambda x, y, t: np.log(x * x + y * y + 1.0) + 0.3 * x * y  # noqa: E731
    X, Y = hdr.plane_points()
    grad, hess = cart_derivatives(ScalarField(hdr, func(X, Y, 0.0)))
    rng = np.random.default_rng(7)
    for i, j in zip(rng.integers(2, hdr.ns - 2, 10), rng.integers(0, hdr.ntheta, 10)):
        pt = (X[i, j], Y[i, j])
        want = [fd_derivative(func, pt, 0.0, o, rel_step=1e-2, min_step=1e-2)
                for o in ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))]
        got = [grad.values[i, j, 0], grad.values[i, j, 1], *hess.values[i, j]]
        np.testing.assert_allclose(got, want, atol=1e-6)
