"""Conformal Ricci flow on the plane, cigar solitons and their diagnostics."""
from .errors import (
    BadMagic,
    BadVersion,
    ConfigError,
    DegenerateFit,
    NonPositiveValue,
    RadiusOutOfGrid,
    Ricci2DError,
    TimeOrder,
    ToleranceNotMet,
    TruncatedPayload,
)
from .grid import (
    CylindricalGrid,
    GridHeader,
    ScalarField,
    SolitonParams,
    SymTensorField,
    VectorField,
    soliton_eval,
    soliton_grid,
)
from .operators import cart_derivatives, laplacian_cyl, potential, scalar_curvature
from .flow import FlowConfig, Trajectory, evolve, stable_dt, step

__version__ = "0.1.0"
