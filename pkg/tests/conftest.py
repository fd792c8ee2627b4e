import sys

import numpy as np
import pytest

from ricci2d.grid import CylindricalGrid, GridHeader, SolitonParams, soliton_grid

CIGAR = SolitonParams(1.0, 1.0)


def header_for(h, s_min=-2.0, s_max=6.0, t=0.0):
    """Grid with s-spacing close to ``h`` and theta spacing close to ``h``."""
    ns = int(round((s_max - s_min) / h)) + 1
    ntheta = max(8, int(round(2 * np.pi / h)))
    return GridHeader(ns, ntheta, s_min, s_max, t)


def flat_u_grid(header):
    """u == 1 on the plane, i.e. v = e^{2s}."""
    S, _ = header.mesh()
    return CylindricalGrid(header, np.exp(2.0 * S))


def gaussian_grid(header):
    S, _ = header.mesh()
    return CylindricalGrid(header, np.exp(2.0 * S - np.exp(2.0 * S)))


@pytest.fixture
def cigar():
    return CIGAR


@pytest.fixture
def cigar_grid():
    return soliton_grid(CIGAR, GridHeader(161, 64, -2.0, 6.0))


def pytest_terminal_summary(terminalreporter):
    # echo the per-criterion lines collected by test_acceptance.py
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
