"""Exception types shared across the package."""


class CayleyTilesError(Exception):
    """Base class for all errors raised by this package."""


class SpecError(CayleyTilesError):
    """Invalid specification, malformed input data, or violated precondition."""


class ResourceCapError(CayleyTilesError):
    """A configured resource cap (ball size, search radius, node budget) was hit.

    This is a hard stop, never a silent truncation: callers must either raise
    the cap or accept an inconclusive verdict.
    """
