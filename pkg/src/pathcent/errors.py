"""Exception types shared across the package."""


class DataError(Exception):
    """Invalid or unusable input data (bad files, empty datasets, bad arguments)."""


class UnsupportedMeasureError(DataError):
    """A centrality measure was requested for a model that cannot provide it."""


class NumericError(Exception):
    """A numerical computation failed (singular system, non-absorbing chain)."""
