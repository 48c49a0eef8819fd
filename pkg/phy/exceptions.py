"""
Physical layer errors

Every failure raised by the phy services derives from PhyError, which is a
ValueError so callers that only care about bad input can catch that.
"""


class PhyError(ValueError):
    """Base class for physical layer failures."""


class PulseConfigError(PhyError):
    """Invalid pulse or grid parameters (beta, T, span, oversampling)."""


class FrameError(PhyError):
    """Malformed symbol frame or preamble parameters."""


class GridMismatchError(PhyError):
    """Two dense signals or a signal and a filter disagree on the grid step."""


class SupportError(PhyError):
    """A reconstruction instant falls outside the available samples."""


class WindowError(PhyError):
    """A correlation window cannot be formed from the available samples."""


class CovarianceError(PhyError):
    """A covariance matrix failed its Cholesky factorization."""


class GraphError(PhyError):
    """The requested factor graph cannot be built."""


class CodeError(PhyError):
    """Channel code construction or decoding input is invalid."""
