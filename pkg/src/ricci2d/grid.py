"""Cylinder grid, field containers and the exact cigar soliton family.

The plane point ``x = (r cos(theta), r sin(theta))`` is mapped to the cylinder
coordinate ``s = log r``.  The stored unknown is ``v = r**2 * u``; the conformal
factor ``u`` of the metric ``u (dx^2 + dy^2)`` is recovered as ``v * exp(-2 s)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, NonPositiveValue

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GridHeader:
    ns: int
    ntheta: int
    s_min: float
    s_max: float
    t: float = 0.0

    def __post_init__(self):
        if int(self.ns) < 8 or int(self.ntheta) < 8:
            raise ValueError(f"grid needs ns, ntheta >= 8, got {self.ns}x{self.ntheta}")
        if not self.s_max > self.s_min:
            raise ValueError(f"s_max ({self.s_max}) must exceed s_min ({self.s_min})")
        object.__setattr__(self, "ns", int(self.ns))
        object.__setattr__(self, "ntheta", int(self.ntheta))
        object.__setattr__(self, "s_min", float(self.s_min))
        object.__setattr__(self, "s_max", float(self.s_max))
        object.__setattr__(self, "t", float(self.t))

    @property
    def h_s(self) -> float:
        return (self.s_max - self.s_min) / (self.ns - 1)

    @property
    def h_theta(self) -> float:
        return TWO_PI / self.ntheta

    @property
    def s(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.ns)

    @property
    def theta(self) -> np.ndarray:
        return np.arange(self.ntheta) * self.h_theta

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(S, THETA)`` arrays of shape ``(ns, ntheta)``."""
        return np.meshgrid(self.s, self.theta, indexing="ij")

    def plane_points(self) -> tuple[np.ndarray, np.ndarray]:
        S, TH = self.mesh()
        r = np.exp(S)
        return r * np.cos(TH), r * np.sin(TH)

    def at_time(self, t: float) -> "GridHeader":
        return GridHeader(self.ns, self.ntheta, self.s_min, self.s_max, t)

    def same_space(self, other: "GridHeader") -> bool:
        return (self.ns, self.ntheta, self.s_min, self.s_max) == (
            other.ns, other.ntheta, other.s_min, other.s_max)

    def row_of(self, s: float) -> int:
        """Index of the grid row nearest to ``s`` (not clipped)."""
        return int(np.rint((s - self.s_min) / self.h_s))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CylindricalGrid:
    """Snapshot of ``v(s, theta)`` on the truncated cylinder at time ``t``."""

    header: GridHeader
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.header.ns, self.header.ntheta):
            raise ValueError(
                f"values shape {vals.shape} does not match header "
                f"({self.header.ns}, {self.header.ntheta})")
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
            bad = np.argwhere(~(vals > 0.0) | ~np.isfinite(vals))[0]
            raise NonPositiveValue(f"v not strictly positive at node {tuple(int(i) for i in bad)}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_array(cls, values, s_min: float, s_max: float, t: float = 0.0) -> "CylindricalGrid":
        values = np.asarray(values, dtype=np.float64)
        ns, ntheta = values.shape
        return cls(GridHeader(ns, ntheta, s_min, s_max, t), values)

    @classmethod
    def from_u(cls, header: GridHeader, u) -> "CylindricalGrid":
        """Build a snapshot from conformal-factor samples ``u`` on the header's nodes."""
        S, _ = header.mesh()
        return cls(header, np.asarray(u, dtype=np.float64) * np.exp(2.0 * S))

    # convenience views
    ns = property(lambda self: self.header.ns)
    ntheta = property(lambda self: self.header.ntheta)
    s_min = property(lambda self: self.header.s_min)
    s_max = property(lambda self: self.header.s_max)
    t = property(lambda self: self.header.t)
    h_s = property(lambda self: self.header.h_s)
    h_theta = property(lambda self: self.header.h_theta)

    @property
    def u(self) -> np.ndarray:
        S, _ = self.header.mesh()
        return self.values * np.exp(-2.0 * S)

    @property
    def log_v(self) -> np.ndarray:
        return np.log(self.values)

    def with_values(self, values, t: float | None = None) -> "CylindricalGrid":
        hdr = self.header if t is None else self.header.at_time(t)
        return CylindricalGrid(hdr, values)

    def __eq__(self, other):
        if not isinstance(other, CylindricalGrid):
            return NotImplemented
        return self.header == other.header and np.array_equal(self.values, other.values)

    def interpolate(self, s, theta) -> np.ndarray:
        """Bilinear interpolation of ``v`` at off-grid cylinder points."""
        return bilinear(self.header, self.values, s, theta)


def bilinear(header: GridHeader, values: np.ndarray, s, theta) -> np.ndarray:
    s = np.asarray(s, dtype=np.float64)
    theta = np.mod(np.asarray(theta, dtype=np.float64), TWO_PI)
    if np.any(s < header.s_min) or np.any(s > header.s_max):
        raise ValueError("interpolation point outside [s_min, s_max]")
    fs = (s - header.s_min) / header.h_s
    i0 = np.clip(np.floor(fs).astype(int), 0, header.ns - 2)
    ws = fs - i0
    ft = theta / header.h_theta
    j0 = np.floor(ft).astype(int) % header.ntheta
    wt = ft - np.floor(ft)
    j1 = (j0 + 1) % header.ntheta
    return ((1 - ws) * (1 - wt) * values[i0, j0] + (1 - ws) * wt * values[i0, j1]
            + ws * (1 - wt) * values[i0 + 1, j0] + ws * wt * values[i0 + 1, j1])


@dataclass(frozen=True, eq=False)
class ScalarField:
    header: GridHeader
    values: np.ndarray = field(repr=False)
    role: str = "generic"

    def __post_init__(self):
        if self.role not in ("R", "f", "log_v", "generic"):
            raise ValueError(f"unknown scalar field role {self.role!r}")
        vals = _frozen(self.values)
        if vals.shape != (self.header.ns, self.header.ntheta):
            raise ValueError("field shape does not match header")
        object.__setattr__(self, "values", vals)

    def sup_norm(self, margin: int = 0) -> float:
        return float(np.max(np.abs(interior(self.values, margin))))


@dataclass(frozen=True, eq=False)
class VectorField:
    """Cartesian components ``values[..., 0] = x``, ``values[..., 1] = y``."""

    header: GridHeader
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.header.ns, self.header.ntheta, 2):
            raise ValueError("vector field must have shape (ns, ntheta, 2)")
        object.__setattr__(self, "values", vals)

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.values[..., 0], self.values[..., 1])

    def sup_norm(self, margin: int = 0) -> float:
        return float(np.max(interior(self.magnitude(), margin)))


@dataclass(frozen=True, eq=False)
class SymTensorField:
    """Symmetric 2x2 matrix per node stored as ``(xx, xy, yy)``."""

    header: GridHeader
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.header.ns, self.header.ntheta, 3):
            raise ValueError("tensor field must have shape (ns, ntheta, 3)")
        object.__setattr__(self, "values", vals)

    def frobenius(self) -> np.ndarray:
        xx, xy, yy = np.moveaxis(self.values, -1, 0)
        return np.sqrt(xx * xx + 2.0 * xy * xy + yy * yy)

    def matrix(self, i: int, j: int) -> np.ndarray:
        xx, xy, yy = np.moveaxis(self.values, -1, 0)
        return np.array([[xx, xy], [xy, yy]])[:, :, i, j]

    def sup_norm(self, margin: int = 0) -> float:
        return float(np.max(interior(self.frobenius(), margin)))


def interior(a: np.ndarray, margin: int) -> np.ndarray:
    """Drop ``margin`` rows at both s-ends (theta is periodic, nothing to drop)."""
    if margin <= 0:
        return a
    return a[margin:-margin]


def check_same_grid(*headers: GridHeader) -> None:
    first = headers[0]
    for h in headers[1:]:
        if not first.same_space(h):
            raise GridMismatch(f"grid headers differ: {first} vs {h}")


# --- exact soliton family ---------------------------------------------------

@dataclass(frozen=True)
class SolitonParams:
    beta: float
    delta: float
    x0: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.beta > 0.0 and self.delta > 0.0):
            raise ValueError(f"soliton needs beta > 0 and delta > 0, got {self.beta}, {self.delta}")
        object.__setattr__(self, "x0", (float(self.x0[0]), float(self.x0[1])))

    def scale(self, t: float) -> float:
        """``a(t) = delta * exp(2 beta t)``."""
        return self.delta * np.exp(2.0 * self.beta * t)


def soliton_eval(p: SolitonParams, x, t: float):
    """Conformal factor ``2 / (beta (|x - x0|^2 + delta e^{2 beta t}))``."""
    x = np.asarray(x, dtype=np.float64)
    d2 = (x[..., 0] - p.x0[0]) ** 2 + (x[..., 1] - p.x0[1]) ** 2
    return 2.0 / (p.beta * (d2 + p.scale(t)))


def soliton_v(p: SolitonParams, s, t: float):
    """Centered soliton in cylinder form, ``v(s) = 2 e^{2s} / (beta (e^{2s} + a))``.

    Written as ``2 / (beta (1 + a e^{-2s}))`` so it neither overflows for large
    ``s`` nor loses the tiny values for very negative ``s``.
    """
    s = np.asarray(s, dtype=np.float64)
    return 2.0 / (p.beta * (1.0 + p.scale(t) * np.exp(-2.0 * s)))


def soliton_grid(p: SolitonParams, header: GridHeader, t: float | None = None) -> CylindricalGrid:
    if p.x0 != (0.0, 0.0):
        raise ValueError("soliton grids on the cylinder require x0 at the origin")
    if t is None:
        t = header.t
    S, _ = header.mesh()
    return CylindricalGrid(header.at_time(t), soliton_v(p, S, t))


def soliton_curvature(p: SolitonParams, r2, t: float):
    """Closed-form ``R = 2 beta a / (r^2 + a)`` for squared radius ``r2`` about x0."""
    a = p.scale(t)
    return 2.0 * p.beta * a / (np.asarray(r2) + a)


def soliton_u_t(p: SolitonParams, r2, t: float):
    """Closed-form time derivative ``u_t = -4 a / (r^2 + a)^2``."""
    a = p.scale(t)
    return -4.0 * a / (np.asarray(r2) + a) ** 2
