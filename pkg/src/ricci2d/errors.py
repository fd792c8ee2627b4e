"""Exception types raised across the package."""


class Ricci2DError(Exception):
    """Base class for all package errors."""


class NonPositiveValue(Ricci2DError):
    """A conformal factor value is zero, negative or not finite."""


class TimeOrder(Ricci2DError):
    """Snapshot pair is not strictly increasing in time."""


class RadiusOutOfGrid(Ricci2DError):
    """Requested ball radius does not fall inside the usable grid rows."""


class DegenerateFit(Ricci2DError):
    """Soliton least-squares fit has no admissible solution."""


class ToleranceNotMet(Ricci2DError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class GridMismatch(Ricci2DError):
    """Two fields do not live on the same grid."""


class SnapshotError(Ricci2DError):
    """Base class for snapshot file format problems."""


class BadMagic(SnapshotError):
    pass


class BadVersion(SnapshotError):
    pass


class TruncatedPayload(SnapshotError):
    pass


class ConfigError(Ricci2DError):
    """Run configuration is missing keys or holds out-of-range values."""
