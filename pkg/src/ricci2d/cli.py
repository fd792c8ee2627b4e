"""Command-line entry point: ``ricci2d <command> --config PATH [--out DIR]``.

Exit status is 0 on success, 1 on invalid input and 2 when the integrator
loses positivity.  Failures print one ``error=<Kind> msg=<text>`` line on stderr.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import diagnostics as dg
from .errors import (
    ConfigError,
    NonPositiveValue,
    RadiusOutOfGrid,
    Ricci2DError,
    SnapshotError,
    TimeOrder,
)
from .flow import FlowConfig, evolve, stable_dt, step
from .grid import CylindricalGrid, GridHeader, SolitonParams, soliton_grid, soliton_v
from .io import RunConfig, load_config, read_snapshot, write_csv, write_snapshot

COMMANDS = ("soliton", "simulate", "diagnose", "identities", "convergence")


def initial_grid(cfg: RunConfig) -> CylindricalGrid:
    if cfg.initial == "file":
        try:
            return read_snapshot(cfg.path)
        except NonPositiveValue as exc:
            raise SnapshotError(str(exc)) from None
        except OSError as exc:
            raise ConfigError(f"cannot read snapshot {cfg.path}: {exc.strerror}") from None
    p = SolitonParams(cfg.beta, cfg.delta)
    g = soliton_grid(p, cfg.header(), cfg.t0)
    if cfg.initial == "perturbed-soliton":
        S, TH = g.header.mesh()
        g = g.with_values(g.values * (1.0 + cfg.amp * np.exp(-S * S) * np.sin(TH)))
    return g


def flow_config(cfg: RunConfig, t_end: float | None = None) -> FlowConfig:
    return FlowConfig(cfg.sigma, cfg.t_end if t_end is None else t_end, cfg.snapshot_every,
                      cfg.boundary_mode, SolitonParams(cfg.beta, cfg.delta))


def _next_snapshot(g: CylindricalGrid, cfg: RunConfig) -> CylindricalGrid:
    return step(g, stable_dt(g, cfg.sigma), flow_config(cfg, t_end=np.inf))


def cmd_soliton(cfg: RunConfig, out: Path) -> list[Path]:
    g = soliton_grid(SolitonParams(cfg.beta, cfg.delta), cfg.header(), cfg.t0)
    return [write_snapshot(g, out / "soliton.rf2d")]


def cmd_simulate(cfg: RunConfig, out: Path) -> list[Path]:
    g = initial_grid(cfg)
    if not cfg.t_end > g.t:
        raise TimeOrder(f"t_end={cfg.t_end} must exceed initial time {g.t}")
    traj = evolve(g, flow_config(cfg))
    files = []
    rows = []
    for i, snap in enumerate(traj):
        name = f"snap_{i:05d}.rf2d"
        files.append(write_snapshot(snap, out / name))
        rows.append((i, snap.t, name))
    files.append(write_csv(out / "trajectory.csv", ("index", "t", "file"), rows))
    return files


def cmd_diagnose(cfg: RunConfig, out: Path) -> list[Path]:
    g1 = initial_grid(cfg)
    g2 = _next_snapshot(g1, cfg)
    rep = dg.diagnose(g1, g2, s0=cfg.s0, rho_list=cfg.rho_list)
    files = [write_csv(out / "report.csv", ("quantity", "value"), rep.scalars())]
    s = g1.header.s
    files.append(write_csv(
        out / "profiles.csv", ("s", "V", "Vminus", "logv_plus", "Rbar", "length"),
        zip(s, rep.V_profile, rep.Vminus_profile, rep.logv_plus_integral, rep.Rbar_profile,
            dg.width_profile(g1))))
    if rep.ball_table:
        files.append(write_csv(out / "ball_table.csv", dg.BALL_COLUMNS,
                               (r.as_tuple() for r in rep.ball_table)))
    return files


def cmd_identities(cfg: RunConfig, out: Path) -> list[Path]:
    if not cfg.rho_list:
        raise RadiusOutOfGrid("rho_list is empty")
    g1 = initial_grid(cfg)
    rows = dg.ball_identities(g1, _next_snapshot(g1, cfg), cfg.rho_list)
    return [write_csv(out / "identities.csv", dg.BALL_COLUMNS, (r.as_tuple() for r in rows))]


def refine(header: GridHeader, level: int) -> GridHeader:
    k = 2 ** level
    return GridHeader((header.ns - 1) * k + 1, header.ntheta * k, header.s_min, header.s_max, header.t)


def convergence_study(p: SolitonParams, header: GridHeader, t_end: float, sigma: float = 0.9,
                      levels: int = 3):
    """Evolve the exact soliton at ``h, h/2, ...`` with pinned boundaries.

    Returns one row per level: ``(level, ns, ntheta, h_s, error, ratio, self_ratio)``
    where ``error`` is the sup distance to the exact soliton at ``t_end``,
    ``ratio`` the error ratio to the previous level and ``self_ratio`` the
    ratio of successive level differences (sampled on the coarsest nodes).
    """
    fc = FlowConfig(sigma, t_end, 10 ** 9, "soliton_dirichlet", p)
    finals, errors, rows = [], [], []
    for lev in range(levels):
        hdr = refine(header, lev)
        g = soliton_grid(p, hdr, header.t)
        final = evolve(g, fc)[-1]
        S, _ = hdr.mesh()
        errors.append(float(np.max(np.abs(final.values - soliton_v(p, S, t_end)))))
        k = 2 ** lev
        finals.append(final.values[::k, ::k])
        ratio = errors[-2] / errors[-1] if lev else float("nan")
        if lev >= 2:
            self_ratio = float(np.max(np.abs(finals[-3] - finals[-2]))
                               / np.max(np.abs(finals[-2] - finals[-1])))
        else:
            self_ratio = float("nan")
        rows.append((lev, hdr.ns, hdr.ntheta, hdr.h_s, errors[-1], ratio, self_ratio))
    return rows


def cmd_convergence(cfg: RunConfig, out: Path) -> list[Path]:
    if cfg.initial != "soliton":
        raise ConfigError("convergence needs initial=soliton (exact reference)")
    rows = convergence_study(SolitonParams(cfg.beta, cfg.delta), cfg.header(), cfg.t_end, cfg.sigma)
    for r in rows[1:]:
        print(f"level {r[0]}: error={r[4]!r} ratio={r[5]!r}")
    return [write_csv(out / "convergence.csv",
                      ("level", "ns", "ntheta", "h_s", "error", "ratio", "self_ratio"), rows)]


HANDLERS = {
    "soliton": cmd_soliton,
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
    "identities": cmd_identities,
    "convergence": cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ricci2d", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="key=value run configuration")
    ap.add_argument("--out", help="output directory (overrides the config's 'output')")
    return ap


def _fail(kind: str, msg: str, code: int) -> int:
    print(f"error={kind} msg={' '.join(str(msg).split())}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors are validation failures; exit 2 is reserved for numerics
        return 1 if exc.code else 0
    try:
        cfg = load_config(args.config)
        out = Path(args.out or cfg.output)
        for path in HANDLERS[args.command](cfg, out):
            print(path)
    except NonPositiveValue as exc:
        return _fail(type(exc).__name__, exc, 2)
    except (Ricci2DError, ValueError) as exc:
        return _fail(type(exc).__name__, exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
