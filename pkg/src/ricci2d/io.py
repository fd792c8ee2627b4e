"""Binary snapshots, key=value run configs and deterministic CSV output."""
from __future__ import annotations

import csv
import io
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadMagic, BadVersion, ConfigError, NonPositiveValue, TruncatedPayload
from .flow import BOUNDARY_MODES
from .grid import CylindricalGrid, GridHeader

MAGIC = b"RF2D"
VERSION = 1
# magic, version u32, ns u64, ntheta u64, s_min, s_max, t
_HEADER = struct.Struct("<4sIQQddd")


def _atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def snapshot_bytes(g: CylindricalGrid) -> bytes:
    head = _HEADER.pack(MAGIC, VERSION, g.ns, g.ntheta, g.s_min, g.s_max, g.t)
    return head + np.ascontiguousarray(g.values, dtype="<f8").tobytes()


def write_snapshot(g: CylindricalGrid, path) -> Path:
    path = Path(path)
    _atomic_write(path, snapshot_bytes(g))
    return path


def parse_snapshot(data: bytes) -> CylindricalGrid:
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, found {bytes(data[:4])!r}")
    if len(data) < _HEADER.size:
        raise TruncatedPayload(f"header needs {_HEADER.size} bytes, file has {len(data)}")
    _, version, ns, ntheta, s_min, s_max, t = _HEADER.unpack_from(data)
    if version != VERSION:
        raise BadVersion(f"unsupported format version {version}")
    want = 8 * ns * ntheta
    have = len(data) - _HEADER.size
    if have != want:
        raise TruncatedPayload(f"payload has {have} bytes, expected {want}")
    values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(ns, ntheta)
    if not np.all(values > 0.0):
        raise NonPositiveValue("snapshot contains non-positive values")
    return CylindricalGrid(GridHeader(ns, ntheta, s_min, s_max, t), values.astype(np.float64))


def read_snapshot(path) -> CylindricalGrid:
    return parse_snapshot(Path(path).read_bytes())


# --- CSV ----------------------------------------------------------------------

def fmt(x) -> str:
    """Shortest round-trip decimal for floats, plain str otherwise."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    _atomic_write(path, csv_text(header, rows).encode())
    return path


# --- run configuration ----------------------------------------------------------

INITIAL_KINDS = ("soliton", "file", "perturbed-soliton")

_DEFAULTS = {
    "initial": "soliton",
    "beta": "1.0",
    "delta": "1.0",
    "t0": "0.0",
    "amp": "0.1",
    "sigma": "0.9",
    "t_end": "0.1",
    "snapshot_every": "100",
    "boundary_mode": "soliton_dirichlet",
    "s0": "1.0",
    "rho_list": "",
    "output": "out",
}


@dataclass(frozen=True)
class RunConfig:
    ns: int
    ntheta: int
    s_min: float
    s_max: float
    initial: str
    beta: float
    delta: float
    t0: float
    amp: float
    path: str | None
    sigma: float
    t_end: float
    snapshot_every: int
    boundary_mode: str
    s0: float
    rho_list: tuple[float, ...]
    output: str

    def header(self) -> GridHeader:
        return GridHeader(self.ns, self.ntheta, self.s_min, self.s_max, self.t0)


def parse_config_text(text: str, base_dir: Path | None = None) -> RunConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, val = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        raw[key] = val
    vals = {**_DEFAULTS, **raw}

    def num(key, kind=float):
        if key not in vals or vals[key] == "":
            raise ConfigError(f"missing required key {key!r}")
        try:
            return kind(vals[key])
        except ValueError:
            raise ConfigError(f"key {key!r}: cannot parse {vals[key]!r} as {kind.__name__}") from None

    initial = vals["initial"]
    if initial not in INITIAL_KINDS:
        raise ConfigError(f"initial must be one of {INITIAL_KINDS}, got {initial!r}")
    path = vals.get("path")
    if initial == "file":
        if not path:
            raise ConfigError("initial=file needs a 'path' key")
        if base_dir is not None and not Path(path).is_absolute():
            path = str(base_dir / path)
        grid = {"ns": 8, "ntheta": 8, "s_min": 0.0, "s_max": 1.0}
        for k, kind in (("ns", int), ("ntheta", int), ("s_min", float), ("s_max", float)):
            if k in vals:
                grid[k] = num(k, kind)
    else:
        grid = {"ns": num("ns", int), "ntheta": num("ntheta", int),
                "s_min": num("s_min"), "s_max": num("s_max")}
        if grid["ns"] < 8 or grid["ntheta"] < 8:
            raise ConfigError("ns and ntheta must be at least 8")
        if not grid["s_max"] > grid["s_min"]:
            raise ConfigError("s_max must exceed s_min")

    cfg = RunConfig(
        **grid, initial=initial,
        beta=num("beta"), delta=num("delta"), t0=num("t0"), amp=num("amp"), path=path,
        sigma=num("sigma"), t_end=num("t_end"), snapshot_every=num("snapshot_every", int),
        boundary_mode=vals["boundary_mode"], s0=num("s0"),
        rho_list=_parse_list(vals["rho_list"]), output=vals["output"],
    )
    _validate(cfg)
    return cfg


def _parse_list(text: str) -> tuple[float, ...]:
    items = [p for p in text.replace(";", ",").split(",") if p.strip()]
    try:
        return tuple(float(p) for p in items)
    except ValueError:
        raise ConfigError(f"rho_list: cannot parse {text!r}") from None


def _validate(cfg: RunConfig) -> None:
    if not 0.0 < cfg.sigma <= 1.0:
        raise ConfigError(f"sigma must lie in (0, 1], got {cfg.sigma}")
    if cfg.beta <= 0.0 or cfg.delta <= 0.0:
        raise ConfigError("beta and delta must be positive")
    if cfg.snapshot_every < 1:
        raise ConfigError("snapshot_every must be >= 1")
    if cfg.boundary_mode not in BOUNDARY_MODES:
        raise ConfigError(f"boundary_mode must be one of {BOUNDARY_MODES}")
    if cfg.s0 < 1.0:
        raise ConfigError("s0 must be >= 1")
    if any(r <= 0.0 for r in cfg.rho_list):
        raise ConfigError("rho_list entries must be positive")
    if cfg.initial != "file" and cfg.t_end <= cfg.t0:
        raise ConfigError("t_end must exceed t0")
    if cfg.initial == "perturbed-soliton" and not -1.0 < cfg.amp < 1.0:
        raise ConfigError("amp must lie in (-1, 1) to keep the field positive")


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, base_dir=path.parent)
