import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CIGAR
from ricci2d.errors import (
    BadMagic,
    BadVersion,
    ConfigError,
    NonPositiveValue,
    SnapshotError,
    TruncatedPayload,
)
from ricci2d.grid import CylindricalGrid, GridHeader, soliton_grid
from ricci2d.io import (
    csv_text,
    fmt,
    load_config,
    parse_config_text,
    parse_snapshot,
    read_snapshot,
    snapshot_bytes,
    write_csv,
    write_snapshot,
)

BASE = "ns = 41\nntheta = 16\ns_min = -1\ns_max = 2\n"


@pytest.fixture
def snap():
    return soliton_grid(CIGAR, GridHeader(17, 8, -1.0, 2.0), t=0.25)


def test_round_trip_is_bitwise(tmp_path, snap):
    path = write_snapshot(snap, tmp_path / "a.rf2d")
    back = read_snapshot(path)
    assert back == snap
    assert back.values.tobytes() == snap.values.tobytes()
    assert back.header == snap.header
    assert path.stat().st_size == 48 + 8 * 17 * 8


@settings(max_examples=30, deadline=None)
@given(st.integers(8, 14), st.integers(8, 14), st.floats(-5, 5), st.floats(-1e3, 1e3),
       st.integers(0, 2 ** 32 - 1))
def test_round_trip_random_grids(ns, nt, s_min, t, seed):
    hdr = GridHeader(ns, nt, s_min, s_min + 1.5, t)
    vals = np.random.default_rng(seed).uniform(1e-300, 1e300, (ns, nt))
    g = CylindricalGrid(hdr, vals)
    assert parse_snapshot(snapshot_bytes(g)) == g


def test_header_layout(snap):
    data = snapshot_bytes(snap)
    magic, version, ns, nt, smin, smax, t = struct.unpack_from("<4sIQQddd", data)
    assert (magic, version, ns, nt, smin, smax, t) == (b"RF2D", 1, 17, 8, -1.0, 2.0, 0.25)


def test_bad_magic(snap):
    with pytest.raises(BadMagic):
        parse_snapshot(b"XXXX" + snapshot_bytes(snap)[4:])


def test_bad_version(snap):
    data = bytearray(snapshot_bytes(snap))
    data[4:8] = struct.pack("<I", 2)
    with pytest.raises(BadVersion):
        parse_snapshot(bytes(data))


@pytest.mark.parametrize("cut", [8, 1, 100000])
def test_truncated(snap, cut):
    data = snapshot_bytes(snap)
    with pytest.raises(TruncatedPayload):
        parse_snapshot(data[:-cut] if cut < len(data) else data[:20])


def test_non_positive_payload(snap):
    data = bytearray(snapshot_bytes(snap))
    data[48:56] = struct.pack("<d", -1.0)
    with pytest.raises(NonPositiveValue):
        parse_snapshot(bytes(data))


def test_errors_share_a_base():
    for exc in (BadMagic, BadVersion, TruncatedPayload):
        assert issubclass(exc, SnapshotError)


# --- CSV -------------------------------------------------------------------------

@pytest.mark.parametrize("x, text", [(0.1, "0.1"), (np.float64(1 / 3), "0.3333333333333333"),
                                     (3, "3"), (np.int64(7), "7"), ("a", "a"),
                                     (float("nan"), "nan")])
def test_fmt(x, text):
    assert fmt(x) == text


def test_csv_is_deterministic(tmp_path):
    rows = [(i, np.sqrt(i + 0.5)) for i in range(5)]
    a = write_csv(tmp_path / "a.csv", ("i", "x"), rows).read_bytes()
    b = write_csv(tmp_path / "b.csv", ("i", "x"), rows).read_bytes()
    assert a == b
    assert csv_text(("i", "x"), rows[:1]) == "i,x\n0,0.7071067811865476\n"
    assert not list(tmp_path.glob(".*tmp"))


# --- config ----------------------------------------------------------------------

def test_config_defaults_and_comments():
    cfg = parse_config_text(BASE + "# comment\nbeta = 2  # trailing\nrho_list = 1.5, 2.5\n")
    assert (cfg.ns, cfg.ntheta, cfg.s_min, cfg.s_max) == (41, 16, -1.0, 2.0)
    assert cfg.beta == 2.0 and cfg.delta == 1.0
    assert cfg.rho_list == (1.5, 2.5)
    assert cfg.boundary_mode == "soliton_dirichlet"
    assert cfg.header() == GridHeader(41, 16, -1.0, 2.0, 0.0)


def test_config_file_path_is_relative_to_config(tmp_path):
    (tmp_path / "run.cfg").write_text("initial = file\npath = snap.rf2d\n")
    cfg = load_config(tmp_path / "run.cfg")
    assert cfg.path == str(tmp_path / "snap.rf2d")


@pytest.mark.parametrize("extra", [
    "sigma = 1.5", "sigma = 0", "beta = -1", "snapshot_every = 0", "boundary_mode = open",
    "s0 = 0.5", "rho_list = 1, -2", "rho_list = a, b", "t_end = 0", "initial = sphere",
    "initial = perturbed-soliton\namp = 1.5", "initial = file", "beta = abc", "garbage line",
    "= 3",
])
def test_config_errors(extra):
    with pytest.raises(ConfigError):
        parse_config_text(BASE + extra + "\n")


@pytest.mark.parametrize("text", ["ntheta = 16\ns_min = 0\ns_max = 1\n",
                                  "ns = 4\nntheta = 16\ns_min = 0\ns_max = 1\n",
                                  "ns = 41\nntheta = 16\ns_min = 1\ns_max = 1\n"])
def test_config_grid_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")
