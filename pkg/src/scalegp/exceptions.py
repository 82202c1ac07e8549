"""Exception types shared across the package."""


class FactorizationError(ArithmeticError):
    """Cholesky factorization of a kernel matrix failed.

    Raised when the Gram matrix is not positive definite to machine
    precision, or when a posterior variance comes out negative beyond
    round-off tolerance. The noiseless model is never patched with jitter;
    the failure is surfaced instead.
    """


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class DegenerateScoreError(ArithmeticError):
    """Standard score of the form nonzero/0.

    The 0/0 = 1 convention covers a vanishing error inside a vanishing
    credible width. A width below the degeneracy threshold with an error
    above it has no defined score and is reported as an error.
    """


class KernelMismatchError(ValueError):
    """An operation required two kernels to be identical and they were not.

    RKHS norms and cubature embeddings are tied to one specific kernel;
    mixing kernels silently would produce numbers with no meaning.
    """


class InsufficientDataError(ValueError):
    """Too few records in the slope-fitting window (fewer than 5)."""


class NonPositiveValuesError(ValueError):
    """Log-log slope fitting applied to a column with values <= 0."""


class ConfigError(ValueError):
    """Invalid CLI usage or configuration file contents."""
