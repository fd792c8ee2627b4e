"""Grid-free reference computations used to validate the diagnostics.

Nothing here touches the cylinder stencils: derivatives come from
Richardson-extrapolated central differences of closed-form fields in the plane
and integrals from dense Gauss-Legendre / trapezoid quadrature in polar
coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ToleranceNotMet
from .grid import SolitonParams

# base step for the identity oracle; large enough that round-off in second
# differences stays near 1e-10 while the h^6 truncation term is negligible
IDENTITY_STEP = 1e-2


@dataclass(frozen=True)
class ClosedFormField:
    """Positive conformal factor ``u(x, y, t)`` given by a formula."""

    name: str
    func: Callable

    def __call__(self, x, y, t=0.0):
        return self.func(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64), t)


def soliton_field(p: SolitonParams) -> ClosedFormField:
    def u(x, y, t):
        return 2.0 / (p.beta * ((x - p.x0[0]) ** 2 + (y - p.x0[1]) ** 2 + p.scale(t)))
    return ClosedFormField(f"soliton(beta={p.beta}, delta={p.delta})", u)


def flat_field(c: float = 1.0) -> ClosedFormField:
    return ClosedFormField(f"flat({c})", lambda x, y, t: np.full(np.broadcast(x, y).shape, float(c)))


def gaussian_field() -> ClosedFormField:
    return ClosedFormField("gaussian", lambda x, y, t: np.exp(-(x * x + y * y)))


def perturbed_soliton_field(p: SolitonParams, amp: float) -> ClosedFormField:
    """Cigar times ``1 + amp exp(-s^2) sin(theta)`` with ``s = log r``."""
    base = soliton_field(p)

    def u(x, y, t):
        r2 = x * x + y * y
        with np.errstate(divide="ignore", invalid="ignore"):
            s = 0.5 * np.log(r2)
            bump = np.where(r2 > 0.0, np.exp(-s * s) * y / np.sqrt(r2), 0.0)
        return base.func(x, y, t) * (1.0 + amp * bump)
    return ClosedFormField(f"perturbed-soliton(amp={amp})", u)


# --- Richardson finite differences --------------------------------------------

def _central(func, x, y, t, order, hx, hy):
    i, j = order
    if (i, j) == (0, 0):
        return func(x, y, t)
    if (i, j) == (1, 0):
        return (func(x + hx, y, t) - func(x - hx, y, t)) / (2.0 * hx)
    if (i, j) == (0, 1):
        return (func(x, y + hy, t) - func(x, y - hy, t)) / (2.0 * hy)
    if (i, j) == (2, 0):
        return (func(x + hx, y, t) - 2.0 * func(x, y, t) + func(x - hx, y, t)) / (hx * hx)
    if (i, j) == (0, 2):
        return (func(x, y + hy, t) - 2.0 * func(x, y, t) + func(x, y - hy, t)) / (hy * hy)
    if (i, j) == (1, 1):
        return (func(x + hx, y + hy, t) - func(x + hx, y - hy, t)
                - func(x - hx, y + hy, t) + func(x - hx, y - hy, t)) / (4.0 * hx * hy)
    raise ValueError(f"multi-index {order} not supported (total order must be <= 2)")


def _richardson(estimate: Callable[[float], np.ndarray], levels: int = 3):
    # central differences have even error expansions: factor 4, then 16
    T = [estimate(2.0 ** -k) for k in range(levels)]
    prev = T[-1]
    m = 1
    while len(T) > 1:
        fac = 4.0 ** m
        prev = T[-1]
        T = [(fac * T[k + 1] - T[k]) / (fac - 1.0) for k in range(len(T) - 1)]
        m += 1
    return T[0], np.abs(T[0] - prev)


def fd_derivative(func, point, t=0.0, order=(1, 0), rel_step=1e-4, min_step=1e-4,
                  full_output=False):
    """Derivative ``d^{i+j} func / dx^i dy^j`` at ``point`` by Richardson extrapolation.

    The base step per axis is ``max(min_step, rel_step * |coordinate|)``;
    central differences at ``h, h/2, h/4`` are combined into an order-6 value.
    ``point`` may hold arrays (evaluated elementwise).  With ``full_output``
    the error estimate (difference of the last two tableau levels) is also
    returned.
    """
    x, y = (np.asarray(c, dtype=np.float64) for c in point)
    hx = np.maximum(min_step, rel_step * np.abs(x))
    hy = np.maximum(min_step, rel_step * np.abs(y))
    if tuple(order) == (0, 0):
        val = func(x, y, t)
        return (val, np.zeros_like(val)) if full_output else val
    val, err = _richardson(lambda q: _central(func, x, y, t, tuple(order), q * hx, q * hy))
    return (val, err) if full_output else val


def fd_time_derivative(func, point, t=0.0, rel_step=1e-4, min_step=1e-4, full_output=False):
    x, y = (np.asarray(c, dtype=np.float64) for c in point)
    h = max(min_step, rel_step * abs(t))
    val, err = _richardson(lambda q: (func(x, y, t + q * h) - func(x, y, t - q * h)) / (2.0 * q * h))
    return (val, err) if full_output else val


# --- dense quadrature ------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _gauss_radial(a: float, b: float, panels: int):
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    r = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
    w = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
    return r, w


def _converge(rule, atol, rtol, max_level):
    prev = rule(0)
    for level in range(1, max_level + 1):
        cur = rule(level)
        err = abs(cur - prev)
        if err <= max(atol, rtol * abs(cur)):
            return cur, err
        prev = cur
    raise ToleranceNotMet(f"no convergence after {max_level} refinements (last change {err:.3g})")


def disk_quadrature(integrand, rho: float, r_min: float = 0.0, atol=1e-10, rtol=1e-12,
                    max_level=7, panels=2, ntheta=32):
    """``int F dx`` over the disk ``|x| < rho`` (or annulus ``r_min < |x| < rho``).

    Composite 16-point Gauss-Legendre in r, trapezoid in theta; both are
    doubled until two successive values agree.  Returns ``(value, error)``.
    """
    if not rho > 0.0 or not 0.0 <= r_min < rho:
        raise ValueError(f"need 0 <= r_min < rho, got r_min={r_min}, rho={rho}")

    def rule(level):
        r, wr = _gauss_radial(r_min, rho, panels * 2 ** level)
        n = ntheta * 2 ** level
        th = np.arange(n) * (2.0 * np.pi / n)
        R, TH = np.meshgrid(r, th, indexing="ij")
        vals = integrand(R * np.cos(TH), R * np.sin(TH))
        return float(np.sum((vals.sum(axis=1) * (2.0 * np.pi / n)) * r * wr))

    return _converge(rule, atol, rtol, max_level)


def circle_quadrature(integrand, rho: float, measure: str = "arc", atol=1e-12, rtol=1e-13,
                      max_level=10, ntheta=32):
    """``int F dsigma`` (``measure='arc'``) or ``int F dtheta`` over the circle ``|x| = rho``."""
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    jac = rho if measure == "arc" else 1.0

    def rule(level):
        n = ntheta * 2 ** level
        th = np.arange(n) * (2.0 * np.pi / n)
        return float(jac * np.sum(integrand(rho * np.cos(th), rho * np.sin(th))) * 2.0 * np.pi / n)

    return _converge(rule, atol, rtol, max_level)


def dense_quadrature(integrand, rho: float, region: str = "disk", **kw):
    if region == "disk":
        return disk_quadrature(integrand, rho, **kw)
    if region == "circle":
        return circle_quadrature(integrand, rho, **kw)
    raise ValueError(f"region must be 'disk' or 'circle', got {region!r}")


# --- geometric quantities of a closed-form field -----------------------------------

class FieldCalculus:
    """Pointwise ``f = -log u``, its derivatives and ``R`` for a closed-form field."""

    def __init__(self, field: ClosedFormField, t: float = 0.0, step: float = IDENTITY_STEP):
        self.field = field
        self.t = t
        self.step = step
        self._logu = lambda x, y, tt: -np.log(field(x, y, tt))

    def _d(self, x, y, order):
        return fd_derivative(self._logu, (x, y), self.t, order, rel_step=self.step,
                             min_step=self.step)

    def at(self, x, y) -> dict[str, np.ndarray]:
        u = self.field(x, y, self.t)
        fx, fy = self._d(x, y, (1, 0)), self._d(x, y, (0, 1))
        fxx, fxy, fyy = self._d(x, y, (2, 0)), self._d(x, y, (1, 1)), self._d(x, y, (0, 2))
        lap = fxx + fyy
        return {"u": u, "fx": fx, "fy": fy, "fxx": fxx, "fxy": fxy, "fyy": fyy,
                "R": lap / u, "Df2": fx * fx + fy * fy}

    def curvature(self, x, y):
        return self.at(x, y)["R"]


def _M_sq(q):
    half = 0.5 * (q["Df2"] + q["R"] * q["u"])
    m11 = q["fxx"] + q["fx"] ** 2 - half
    m12 = q["fxy"] + q["fx"] * q["fy"]
    m22 = q["fyy"] + q["fy"] ** 2 - half
    return m11 * m11 + 2.0 * m12 * m12 + m22 * m22


def identity_terms(field: ClosedFormField, rho: float, t: float = 0.0, r_min: float = 0.0,
                   tol: float = 1e-9) -> dict[str, float]:
    """Volume and flux terms of the ``B - C = 2 int |M|^2 / u + J`` identity.

    Volume integrals run over ``r_min < |x| < rho``; ``J`` is the outer flux
    ``int [2 R df/dn - d/dn(|Df|^2 / u)] dsigma`` minus the same flux on the
    inner circle (absent when ``r_min = 0``).
    """
    calc = FieldCalculus(field, t)

    def vol(key):
        def F(x, y):
            q = calc.at(x, y)
            if key == "B":
                return q["R"] ** 2 * q["u"]
            if key == "C":
                return q["R"] * q["Df2"]
            if key == "MM":
                return 2.0 * _M_sq(q) / q["u"]
            raise KeyError(key)
        return disk_quadrature(F, rho, r_min=r_min, atol=tol, rtol=tol)[0]

    def flux(radius):
        def F(x, y):
            q = calc.at(x, y)
            r = np.hypot(x, y)
            nx, ny = x / r, y / r
            fn = q["fx"] * nx + q["fy"] * ny
            hess_df_n = (q["fxx"] * q["fx"] + q["fxy"] * q["fy"]) * nx \
                + (q["fxy"] * q["fx"] + q["fyy"] * q["fy"]) * ny
            dn_Q = (2.0 * hess_df_n + q["Df2"] * fn) / q["u"]
            return 2.0 * q["R"] * fn - dn_Q
        return circle_quadrature(F, radius, atol=tol, rtol=tol)[0]

    terms = {k: vol(k) for k in ("B", "C", "MM")}
    terms["J"] = flux(rho) - (flux(r_min) if r_min > 0.0 else 0.0)
    terms["res2"] = terms["B"] - terms["C"] - terms["MM"] - terms["J"]
    return terms


def identity_oracle(field: ClosedFormField, rho: float, t: float = 0.0, tol: float = 1e-9) -> float:
    """Residual ``(B - C) - 2 int |M|^2/u - J`` over the full ball, grid-free."""
    return identity_terms(field, rho, t, tol=tol)["res2"]
