"""Explicit time integration of ``v_t = Delta_c log v`` on the truncated cylinder."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NonPositiveValue
from .grid import CylindricalGrid, SolitonParams, soliton_v
from .operators import lap_cyl

log = logging.getLogger(__name__)

BOUNDARY_MODES = ("soliton_dirichlet", "asymptotic_neumann")


@dataclass(frozen=True)
class FlowConfig:
    cfl_sigma: float = 0.9
    t_end: float = 0.1
    snapshot_every: int = 100
    boundary_mode: str = "asymptotic_neumann"
    # exact trajectory pinned to the boundary rows in soliton_dirichlet mode
    soliton: SolitonParams | None = None

    def __post_init__(self):
        if not 0.0 < self.cfl_sigma <= 1.0:
            raise ValueError(f"cfl_sigma must lie in (0, 1], got {self.cfl_sigma}")
        if int(self.snapshot_every) < 1:
            raise ValueError("snapshot_every must be a positive integer")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ValueError(f"boundary_mode must be one of {BOUNDARY_MODES}")
        if self.boundary_mode == "soliton_dirichlet" and self.soliton is None:
            raise ValueError("soliton_dirichlet needs the soliton parameters")


@dataclass
class Trajectory:
    snapshots: list[CylindricalGrid] = field(default_factory=list)

    def append(self, g: CylindricalGrid) -> None:
        if self.snapshots:
            if not self.snapshots[0].header.same_space(g.header):
                raise ValueError("all snapshots must share one grid")
            if not g.t > self.snapshots[-1].t:
                raise ValueError("snapshot times must increase strictly")
        self.snapshots.append(g)

    def __len__(self):
        return len(self.snapshots)

    def __getitem__(self, i):
        return self.snapshots[i]

    def __iter__(self):
        return iter(self.snapshots)

    @property
    def times(self) -> np.ndarray:
        return np.array([g.t for g in self.snapshots])


def stable_dt(g: CylindricalGrid, sigma: float = 1.0) -> float:
    """``sigma * v_min * min(h_s, h_theta)^2 / 4``; the linearised diffusivity is ``1/v``."""
    h = min(g.h_s, g.h_theta)
    return sigma * float(g.values.min()) * h * h / 4.0


def _rhs(header, v: np.ndarray) -> np.ndarray:
    if not np.all(v > 0.0):
        raise NonPositiveValue("intermediate stage lost positivity; reduce dt")
    return lap_cyl(np.log(v), header)


def _apply_boundary(header, v: np.ndarray, t: float, cfg: FlowConfig) -> None:
    if cfg.boundary_mode == "soliton_dirichlet":
        v[0] = soliton_v(cfg.soliton, header.s_min, t)
        v[-1] = soliton_v(cfg.soliton, header.s_max, t)
        return
    # (log v)_s = 2 at s_min and 0 at s_max, one-sided second-order differences
    if not (np.all(v[1:3] > 0.0) and np.all(v[-3:-1] > 0.0)):
        raise NonPositiveValue("row next to the boundary is not positive")
    w1, w2 = np.log(v[1]), np.log(v[2])
    v[0] = np.exp((4.0 * w1 - w2 - 4.0 * header.h_s) / 3.0)
    wn2, wn3 = np.log(v[-2]), np.log(v[-3])
    v[-1] = np.exp((4.0 * wn2 - wn3) / 3.0)


def step(g: CylindricalGrid, dt: float, cfg: FlowConfig) -> CylindricalGrid:
    """One explicit midpoint (RK2) step; boundary rows are set from ``cfg.boundary_mode``."""
    hdr = g.header
    v0 = g.values
    with np.errstate(invalid="ignore", divide="ignore"):
        half = v0.copy()
        half[1:-1] += 0.5 * dt * _rhs(hdr, v0)[1:-1]
        _apply_boundary(hdr, half, g.t + 0.5 * dt, cfg)
        new = v0.copy()
        new[1:-1] += dt * _rhs(hdr, half)[1:-1]
        _apply_boundary(hdr, new, g.t + dt, cfg)
    if not np.all(new > 0.0):
        bad = np.argwhere(~(new > 0.0))[0]
        raise NonPositiveValue(
            f"node {tuple(int(i) for i in bad)} not positive after step dt={dt:.3g}; reduce dt")
    return CylindricalGrid(hdr.at_time(g.t + dt), new)


def evolve(g: CylindricalGrid, cfg: FlowConfig) -> Trajectory:
    """Integrate to ``cfg.t_end`` with ``stable_dt`` steps; the last step is clipped.

    The returned trajectory holds the initial snapshot, every
    ``snapshot_every``-th accepted step and the final state at ``t_end``.
    """
    if not cfg.t_end > g.t:
        raise ValueError(f"t_end={cfg.t_end} must exceed the start time {g.t}")
    traj = Trajectory([g])
    cur = g
    n = 0
    while cur.t < cfg.t_end:
        dt = stable_dt(cur, cfg.cfl_sigma)
        last = cfg.t_end - cur.t <= dt * (1.0 + 1e-9)
        if last:
            dt = cfg.t_end - cur.t
        cur = step(cur, dt, cfg)
        n += 1
        if last:
            cur = cur.with_values(cur.values, t=cfg.t_end)
            traj.append(cur)
            break
        if n % cfg.snapshot_every == 0:
            traj.append(cur)
    log.debug("evolve: %d steps to t=%g", n, cur.t)
    return traj
