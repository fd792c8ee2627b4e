"""Geometric diagnostics of a conformal metric ``u (dx^2 + dy^2)`` sampled on the cylinder.

Plane integrals are rewritten in cylinder variables before quadrature, using
``dx = e^{2s} ds dtheta`` and ``|DF|^2 = e^{-2s} (F_s^2 + F_theta^2)``.  Ball
boundaries are grid rows, so every boundary flux is a single-row theta sum.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFit, RadiusOutOfGrid, TimeOrder
from .grid import (
    CylindricalGrid,
    GridHeader,
    ScalarField,
    SolitonParams,
    SymTensorField,
    VectorField,
    check_same_grid,
)
from .operators import (
    cart_derivatives,
    curvature_values,
    cyl_derivatives,
    d_s,
    d_theta,
    lap_cyl,
    potential,
    scalar_curvature,
)

# rows skipped at each s-end when a quantity differentiates R (itself a second derivative)
DEFAULT_MARGIN = 2
# pairs where g2 came from the integrator: the rows next to a pinned boundary
# carry an O(h^2) kink whose second difference pollutes R_t on rows 0..2
PAIR_MARGIN = 3


def _theta_sum(a: np.ndarray, header: GridHeader) -> np.ndarray:
    # trapezoid on a periodic grid is the plain sum
    return a.sum(axis=-1) * header.h_theta


def _s_trapezoid(rows: np.ndarray, h: float) -> float:
    if rows.size < 2:
        return 0.0
    return float(h * (rows.sum() - 0.5 * (rows[0] + rows[-1])))


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den > 0.0)
    return out


def _pair(g1: CylindricalGrid, g2: CylindricalGrid) -> float:
    check_same_grid(g1.header, g2.header)
    dt = g2.t - g1.t
    if not dt > 0.0:
        raise TimeOrder(f"need t2 > t1, got t1={g1.t}, t2={g2.t}")
    return dt


def _grad_R_sq_cyl(header: GridHeader, R: np.ndarray) -> np.ndarray:
    return d_s(R, header.h_s) ** 2 + d_theta(R, header.h_theta) ** 2


def harnack_residual(g1: CylindricalGrid, g2: CylindricalGrid) -> ScalarField:
    """Division-free Harnack residual ``R_t R u - |DR|^2``.

    ``R_t`` is the forward difference of the pair; the spatial factors are
    averaged over the two snapshots so the residual is centered at the time
    midpoint.
    """
    dt = _pair(g1, g2)
    hdr = g1.header
    S, _ = hdr.mesh()
    e2 = np.exp(-2.0 * S)
    R1 = curvature_values(hdr, g1.values)
    R2 = curvature_values(hdr, g2.values)
    Rt = (R2 - R1) / dt
    Ru = 0.5 * (R1 * g1.values + R2 * g2.values) * e2
    DR2 = 0.5 * (_grad_R_sq_cyl(hdr, R1) + _grad_R_sq_cyl(hdr, R2)) * e2
    return ScalarField(hdr.at_time(0.5 * (g1.t + g2.t)), Rt * Ru - DR2)


def evolution_residual(g1: CylindricalGrid, g2: CylindricalGrid) -> ScalarField:
    """Residual of ``R_t = Delta_g R + R^2`` with ``Delta_g R = Delta_c R / v``."""
    dt = _pair(g1, g2)
    hdr = g1.header
    R1 = curvature_values(hdr, g1.values)
    R2 = curvature_values(hdr, g2.values)
    rhs1 = lap_cyl(R1, hdr) / g1.values + R1 * R1
    rhs2 = lap_cyl(R2, hdr) / g2.values + R2 * R2
    res = (R2 - R1) / dt - 0.5 * (rhs1 + rhs2)
    return ScalarField(hdr.at_time(0.5 * (g1.t + g2.t)), res)


def soliton_defect_X(g: CylindricalGrid) -> VectorField:
    """``X = DR + R Df``; vanishes identically on gradient solitons."""
    R = scalar_curvature(g)
    f = potential(g)
    dR, _ = cart_derivatives(R)
    df, _ = cart_derivatives(f)
    return VectorField(g.header, dR.values + R.values[..., None] * df.values)


def soliton_defect_M(g: CylindricalGrid) -> SymTensorField:
    """Trace-free tensor ``D_ij f + D_i f D_j f - (|Df|^2 + R u) I / 2``.

    Frobenius norms per node are available through ``.frobenius()``.
    """
    R = scalar_curvature(g).values
    df, hf = cart_derivatives(potential(g))
    fx, fy = df.values[..., 0], df.values[..., 1]
    half = 0.5 * (fx * fx + fy * fy + R * g.u)
    hxx, hxy, hyy = np.moveaxis(hf.values, -1, 0)
    M = np.stack([hxx + fx * fx - half, hxy + fx * fy, hyy + fy * fy - half], axis=-1)
    return SymTensorField(g.header, M)


def width_profile(g: CylindricalGrid) -> np.ndarray:
    """Metric length of each circle ``r = e^s``: ``L(s) = int sqrt(v) dtheta``."""
    return _theta_sum(np.sqrt(g.values), g.header)


def width_radial(g: CylindricalGrid) -> float:
    """Width of the level sets of ``F = |x|``: the largest circle length on the grid."""
    return float(width_profile(g).max())


@dataclass(frozen=True)
class AngularProfiles:
    V: np.ndarray
    Vminus: np.ndarray
    logv_plus: np.ndarray
    Rbar: np.ndarray


def angular_profiles(g: CylindricalGrid) -> AngularProfiles:
    """Per-row theta integrals of ``log v``, ``(log v)^-``, ``(log v)^+`` and the circle mean of R.

    ``Rbar`` is the average of R over the circle, i.e. the theta integral divided by 2 pi.
    """
    w = g.log_v
    R = scalar_curvature(g).values
    return AngularProfiles(
        V=_theta_sum(w, g.header),
        Vminus=_theta_sum(np.maximum(-w, 0.0), g.header),
        logv_plus=_theta_sum(np.maximum(w, 0.0), g.header),
        Rbar=_theta_sum(R, g.header) / (2.0 * np.pi),
    )


@dataclass(frozen=True)
class DecaySummary:
    v_min: float
    v_max: float
    s_vs: float
    s2_vss: float
    v_theta: float
    s_vths: float
    R_s: float

    def derivative_sups(self) -> tuple[float, ...]:
        return (self.s_vs, self.s2_vss, self.v_theta, self.s_vths, self.R_s)


def decay_and_derivative_sups(g: CylindricalGrid, s0: float = 1.0) -> DecaySummary:
    """Bounds of ``v`` and weighted derivative sups over the rows ``s >= s0``.

    On the cylinder ``|x| R_r = R_s``, so the curvature entry is ``sup |R_s|``.
    """
    if s0 < 1.0 or s0 > g.s_max:
        raise ValueError(f"s0 must lie in [1, s_max], got {s0}")
    hdr = g.header
    S, _ = hdr.mesh()
    v = g.values
    d = cyl_derivatives(v, hdr)
    R = curvature_values(hdr, v)
    keep = hdr.s >= s0 - 1e-12 * max(1.0, abs(s0))
    Sk = S[keep]

    def sup(a):
        return float(np.max(np.abs(a[keep])))

    return DecaySummary(
        v_min=float(v[keep].min()),
        v_max=float(v[keep].max()),
        s_vs=float(np.max(np.abs(Sk * d["s"][keep]))),
        s2_vss=float(np.max(np.abs(Sk * Sk * d["ss"][keep]))),
        v_theta=sup(d["th"]),
        s_vths=float(np.max(np.abs(Sk * d["sth"][keep]))),
        R_s=sup(d_s(R, hdr.h_s)),
    )


# --- finite-ball integral identities ----------------------------------------

BALL_COLUMNS = (
    "rho", "s_rho", "A", "B", "C", "XX", "MM",
    "I_rho", "J_rho", "I_inner", "J_inner", "harnack", "res1", "res2",
)


@dataclass(frozen=True)
class BallRow:
    rho: float
    s_rho: float
    A: float
    B: float
    C: float
    XX: float
    MM: float
    I_rho: float
    J_rho: float
    I_inner: float
    J_inner: float
    harnack: float
    res1: float
    res2: float

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in BALL_COLUMNS)


def _identity_integrands(g: CylindricalGrid) -> dict[str, np.ndarray]:
    """Cylinder-native densities (per ``ds dtheta``) and per-row fluxes."""
    hdr = g.header
    v = g.values
    w = np.log(v)
    dw = cyl_derivatives(w, hdr)
    fs, fth = 2.0 - dw["s"], -dw["th"]
    fss, fthth, fsth = -dw["ss"], -dw["thth"], -dw["sth"]
    R = -(dw["ss"] + dw["thth"]) / v
    Rs, Rth = d_s(R, hdr.h_s), d_theta(R, hdr.h_theta)
    Df2 = fs * fs + fth * fth

    # |M|^2 e^{4s}: M rotated into the polar frame and rescaled by e^{2s}
    half = 0.5 * (Df2 + R * v)
    m11 = fss - fs + fs * fs - half
    m12 = fsth - fth + fs * fth
    m22 = fs + fthth + fth * fth - half
    M2 = m11 * m11 + 2.0 * m12 * m12 + m22 * m22

    # d/ds [ ((2 - w_s)^2 + w_th^2) / v ]
    Q = Df2 / v
    Qs = 2.0 * (fs * fss + fth * fsth) / v - Q * dw["s"]

    ring = lambda a: _theta_sum(a, hdr)  # noqa: E731
    return {
        "A": _safe_div(Rs * Rs + Rth * Rth, R),
        "B": R * R * v,
        "C": R * Df2,
        "XX": _safe_div((Rs + R * fs) ** 2 + (Rth + R * fth) ** 2, R),
        "MM": 2.0 * M2 / v,
        "I": ring(Rs + 2.0 * R * fs),
        "J": ring(2.0 * R * fs - Qs),
    }


def _ball_row_index(hdr: GridHeader, rho: float, inner_row: int) -> int:
    if not rho > 0.0:
        raise RadiusOutOfGrid(f"radius must be positive, got {rho}")
    s = float(np.log(rho))
    k = hdr.row_of(s)
    if abs(s - (hdr.s_min + k * hdr.h_s)) > 0.5 * hdr.h_s + 1e-12 or k <= inner_row \
            or k > hdr.ns - 1 - DEFAULT_MARGIN:
        raise RadiusOutOfGrid(
            f"rho={rho} (s={s:.6g}) is not inside usable rows "
            f"[{hdr.s_min + (inner_row + 1) * hdr.h_s:.6g}, "
            f"{hdr.s_max - DEFAULT_MARGIN * hdr.h_s:.6g}]")
    return k


def ball_identities(g1: CylindricalGrid, g2: CylindricalGrid, rho_list,
                    inner_row: int = DEFAULT_MARGIN) -> list[BallRow]:
    """Integration-by-parts bookkeeping on the annuli ``s[inner_row] <= s <= log rho``.

    Each radius is snapped to its nearest grid row (``s_rho`` records the row
    actually used).  Volume integrals run over the annulus between the inner
    row and that circle, so the identities carry flux terms on both circles:

        res1 = XX - (-(B - C) + I_rho - I_inner)      (= 0 on solitons)
        res2 = (B - C) - MM - (J_rho - J_inner)       (= 0 for any smooth field)

    with ``I = int (R_s + 2 R f_s) dtheta`` and
    ``J = int (2 R f_s - d/ds[((2 - (log v)_s)^2 + (log v)_theta^2) / v]) dtheta``.
    ``harnack`` is ``int (R_t u - |DR|^2 / R) dx`` from the snapshot pair.
    """
    dt = _pair(g1, g2)
    hdr = g1.header
    dens = _identity_integrands(g1)
    R1 = curvature_values(hdr, g1.values)
    R2 = curvature_values(hdr, g2.values)
    Rt = (R2 - R1) / dt
    harn = 0.5 * (Rt * (g1.values + g2.values)) - 0.5 * (
        _safe_div(_grad_R_sq_cyl(hdr, R1), R1) + _safe_div(_grad_R_sq_cyl(hdr, R2), R2))
    rings = {key: _theta_sum(dens[key], hdr) for key in ("A", "B", "C", "XX", "MM")}
    rings["harnack"] = _theta_sum(harn, hdr)

    rows = []
    for rho in rho_list:
        k = _ball_row_index(hdr, float(rho), inner_row)
        vol = {key: _s_trapezoid(r[inner_row:k + 1], hdr.h_s) for key, r in rings.items()}
        I_o, J_o = float(dens["I"][k]), float(dens["J"][k])
        I_i, J_i = float(dens["I"][inner_row]), float(dens["J"][inner_row])
        bc = vol["B"] - vol["C"]
        rows.append(BallRow(
            rho=float(rho), s_rho=hdr.s_min + k * hdr.h_s,
            A=vol["A"], B=vol["B"], C=vol["C"], XX=vol["XX"], MM=vol["MM"],
            I_rho=I_o, J_rho=J_o, I_inner=I_i, J_inner=J_i, harnack=vol["harnack"],
            res1=vol["XX"] - (-bc + I_o - I_i),
            res2=bc - vol["MM"] - (J_o - J_i),
        ))
    return rows


def area_growth(g: CylindricalGrid, rho_list) -> list[float]:
    """Metric area ``int u dx = int int v ds dtheta`` from ``s_min`` up to ``log rho``.

    The last partial cell uses linear interpolation of the row integrals, so
    ``rho`` need not sit on a grid row.
    """
    hdr = g.header
    ring = _theta_sum(g.values, hdr)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * hdr.h_s * (ring[1:] + ring[:-1]))])
    out = []
    for rho in rho_list:
        s = np.log(rho) if rho > 0 else -np.inf
        if not hdr.s_min <= s <= hdr.s_max:
            raise RadiusOutOfGrid(f"rho={rho} outside [e^{hdr.s_min:g}, e^{hdr.s_max:g}]")
        x = (s - hdr.s_min) / hdr.h_s
        i = min(int(np.floor(x)), hdr.ns - 2)
        frac = (x - i) * hdr.h_s
        r_end = ring[i] + (ring[i + 1] - ring[i]) * (x - i)
        out.append(float(cum[i] + 0.5 * frac * (ring[i] + r_end)))
    return out


# --- soliton fit ------------------------------------------------------------

@dataclass(frozen=True)
class SolitonFit:
    params: SolitonParams
    residual: float
    t: float


def soliton_fit(g: CylindricalGrid) -> SolitonFit:
    """Least-squares fit of ``1/u`` to ``(beta/2)|x - x0|^2 + (beta/2) delta e^{2 beta t}``.

    The quadratic is linear in ``(|x|^2, x, y, 1)``; rows are weighted by the
    data so the residual is relative.  Only nodes with ``s >= 0`` are used.
    """
    hdr = g.header
    S, TH = hdr.mesh()
    keep = S >= 0.0
    if keep.sum() < 4:
        raise DegenerateFit("fewer than four nodes with s >= 0")
    r = np.exp(S[keep])
    x, y = r * np.cos(TH[keep]), r * np.sin(TH[keep])
    target = np.exp(2.0 * S[keep]) / g.values[keep]
    A = np.column_stack([r * r, x, y, np.ones_like(r)]) / target[:, None]
    b = np.ones_like(target)
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    c2, cx, cy, c0 = coef
    scale = float(target.max())
    if not c2 > 1e-12 * scale / float((r * r).max()):
        raise DegenerateFit(f"leading coefficient {c2:.3g} is not positive")
    beta = 2.0 * c2
    x0 = (-cx / beta, -cy / beta)
    a = 2.0 * c0 / beta - (x0[0] ** 2 + x0[1] ** 2)
    if not a > 1e-10 * scale / beta:
        raise DegenerateFit(f"fitted scale a = {a:.3g} is not positive")
    delta = a * np.exp(-2.0 * beta * g.t)
    if not (np.isfinite(delta) and delta > 0.0):
        raise DegenerateFit("fitted delta is not a positive finite number")
    residual = float(np.linalg.norm(A @ coef - b) / np.sqrt(b.size))
    return SolitonFit(SolitonParams(float(beta), float(delta), x0), residual, g.t)


# --- combined report --------------------------------------------------------

@dataclass
class DiagnosticsReport:
    t: float
    r_max_curvature: float
    width_radial: float
    V_profile: np.ndarray
    Vminus_profile: np.ndarray
    logv_plus_integral: np.ndarray
    Rbar_profile: np.ndarray
    decay_constants: tuple[float, float]
    derivative_decay: tuple[float, ...]
    defect_norms: tuple[float, float]
    harnack_min: float
    ball_table: list[BallRow] = field(default_factory=list)

    def scalars(self) -> list[tuple[str, float]]:
        names = ("s_vs", "s2_vss", "v_theta", "s_vths", "R_s")
        rows = [
            ("t", self.t),
            ("r_max_curvature", self.r_max_curvature),
            ("width_radial", self.width_radial),
            ("sup_logv_plus_integral", float(np.max(self.logv_plus_integral))),
            ("decay_c_est", self.decay_constants[0]),
            ("decay_C_est", self.decay_constants[1]),
        ]
        rows += [(f"derivative_sup_{n}", v) for n, v in zip(names, self.derivative_decay)]
        rows += [("defect_X_sup", self.defect_norms[0]), ("defect_M_sup", self.defect_norms[1]),
                 ("harnack_min", self.harnack_min)]
        return rows


def diagnose(g1: CylindricalGrid, g2: CylindricalGrid, s0: float = 1.0, rho_list=(),
             margin: int = DEFAULT_MARGIN) -> DiagnosticsReport:
    """Run every diagnostic on ``g1`` (``g2`` supplies the time derivative)."""
    prof = angular_profiles(g1)
    dec = decay_and_derivative_sups(g1, s0)
    return DiagnosticsReport(
        t=g1.t,
        r_max_curvature=float(scalar_curvature(g1).values.max()),
        width_radial=width_radial(g1),
        V_profile=prof.V,
        Vminus_profile=prof.Vminus,
        logv_plus_integral=prof.logv_plus,
        Rbar_profile=prof.Rbar,
        decay_constants=(dec.v_min, dec.v_max),
        derivative_decay=dec.derivative_sups(),
        defect_norms=(soliton_defect_X(g1).sup_norm(margin), soliton_defect_M(g1).sup_norm(margin)),
        harnack_min=float(np.min(harnack_residual(g1, g2).values[PAIR_MARGIN:-PAIR_MARGIN])),
        ball_table=ball_identities(g1, g2, rho_list) if len(rho_list) else [],
    )
