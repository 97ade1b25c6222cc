"""Exception types shared across the package."""


class CutLocusError(RuntimeError):
    """Principal-branch matrix logarithm is undefined (eigenvalue at -1)."""


class UnsupportedGeometryError(NotImplementedError):
    """The requested operation has no closed form on this geometry."""


class MonitorError(RuntimeError):
    """A runtime descent monitor detected a violated inequality."""


class StepsizeUnderflowError(RuntimeError):
    """Backtracking shrank past its budget without sufficient decrease."""
