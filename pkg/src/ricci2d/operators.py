"""Finite-difference operators on the periodic-in-theta cylinder grid.

All stencils are second order: central in the interior, one-sided at the two
s-boundary rows, exactly periodic in theta.  Arrays are indexed ``[i_s, j_theta]``.
"""
from __future__ import annotations

import numpy as np

from .grid import CylindricalGrid, GridHeader, ScalarField, SymTensorField, VectorField


def d_s(a: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(a)
    out[1:-1] = (a[2:] - a[:-2]) / (2.0 * h)
    out[0] = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * h)
    out[-1] = (3.0 * a[-1] - 4.0 * a[-2] + a[-3]) / (2.0 * h)
    return out


def d_ss(a: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(a)
    out[1:-1] = (a[2:] + a[:-2] - 2.0 * a[1:-1]) / (h * h)
    out[0] = (2.0 * a[0] - 5.0 * a[1] + 4.0 * a[2] - a[3]) / (h * h)
    out[-1] = (2.0 * a[-1] - 5.0 * a[-2] + 4.0 * a[-3] - a[-4]) / (h * h)
    return out


def d_theta(a: np.ndarray, h: float) -> np.ndarray:
    return (np.roll(a, -1, axis=1) - np.roll(a, 1, axis=1)) / (2.0 * h)


def d_thetatheta(a: np.ndarray, h: float) -> np.ndarray:
    return (np.roll(a, -1, axis=1) + np.roll(a, 1, axis=1) - 2.0 * a) / (h * h)


def lap_cyl(a: np.ndarray, header: GridHeader) -> np.ndarray:
    return d_ss(a, header.h_s) + d_thetatheta(a, header.h_theta)


def cyl_derivatives(a: np.ndarray, header: GridHeader) -> dict[str, np.ndarray]:
    """All first and second cylinder derivatives of ``a``."""
    hs, ht = header.h_s, header.h_theta
    a_s = d_s(a, hs)
    return {
        "s": a_s,
        "th": d_theta(a, ht),
        "ss": d_ss(a, hs),
        "thth": d_thetatheta(a, ht),
        "sth": d_theta(a_s, ht),
    }


def laplacian_cyl(f: ScalarField) -> ScalarField:
    return ScalarField(f.header, lap_cyl(f.values, f.header), "generic")


def curvature_values(header: GridHeader, v: np.ndarray) -> np.ndarray:
    # Delta_x log u = e^{-2s} Delta_c log v and u = v e^{-2s}, so R = -Delta_c(log v) / v
    return -lap_cyl(np.log(v), header) / v


def scalar_curvature(g: CylindricalGrid) -> ScalarField:
    return ScalarField(g.header, curvature_values(g.header, g.values), "R")


def potential(g: CylindricalGrid) -> ScalarField:
    """``f = -log u = 2 s - log v``."""
    S, _ = g.header.mesh()
    return ScalarField(g.header, 2.0 * S - np.log(g.values), "f")


def polar_to_cartesian(header: GridHeader, d: dict[str, np.ndarray]):
    """Cartesian gradient and Hessian from cylinder derivatives.

    With ``r = e^s`` the orthonormal polar-frame components are

        grad  = e^{-s}  (f_s, f_th)
        hess  = e^{-2s} [[f_ss - f_s,   f_sth - f_th],
                         [f_sth - f_th, f_s + f_thth]]

    which are then rotated by the angle ``theta``.
    """
    S, TH = header.mesh()
    c, sn = np.cos(TH), np.sin(TH)
    e1, e2 = np.exp(-S), np.exp(-2.0 * S)
    gr, gt = e1 * d["s"], e1 * d["th"]
    hrr = e2 * (d["ss"] - d["s"])
    hrt = e2 * (d["sth"] - d["th"])
    htt = e2 * (d["s"] + d["thth"])
    gx = c * gr - sn * gt
    gy = sn * gr + c * gt
    hxx = c * c * hrr - 2.0 * c * sn * hrt + sn * sn * htt
    hxy = c * sn * (hrr - htt) + (c * c - sn * sn) * hrt
    hyy = sn * sn * hrr + 2.0 * c * sn * hrt + c * c * htt
    return np.stack([gx, gy], axis=-1), np.stack([hxx, hxy, hyy], axis=-1)


def cart_derivatives(f: ScalarField) -> tuple[VectorField, SymTensorField]:
    grad, hess = polar_to_cartesian(f.header, cyl_derivatives(f.values, f.header))
    return VectorField(f.header, grad), SymTensorField(f.header, hess)
