"""Exception types shared across the toolkit.

Every raisable condition gets its own class so callers can discriminate
without string matching. All inherit from :class:`IrsceError`.
"""


class IrsceError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(IrsceError):
    """Configuration document is malformed or violates an invariant."""


class ZeroDistance(IrsceError):
    """A link distance is zero or negative (co-located nodes)."""


class InvalidCoefficient(IrsceError):
    """Correlation coefficient outside [0, 1)."""


class NotHermitian(IrsceError):
    """Matrix expected Hermitian deviates beyond tolerance."""


class NotPSD(IrsceError):
    """Matrix has an eigenvalue below the negative tolerance floor."""


class InvalidSize(IrsceError):
    """A size parameter (matrix dimension, count) is out of range."""


class DimensionMismatch(IrsceError):
    """Array arguments disagree on a shared dimension."""


class RankDeficient(IrsceError):
    """Effective training Gram matrix is singular beyond tolerance."""


class SingularFilter(IrsceError):
    """MMSE filter matrix is not invertible (prior + noise both degenerate)."""


class InsufficientSubphases(IrsceError):
    """Sub-phase count below the protocol's minimum."""


class ZeroColumn(IrsceError):
    """A reference column has zero norm, so projection is undefined."""


class UnsupportedKind(IrsceError):
    """Requested (channel, estimator) pair has no closed form."""


class EmptyInput(IrsceError):
    """An aggregate was requested over zero samples."""


class ZeroNmse(IrsceError):
    """Figure of merit is undefined at NMSE = 0."""
