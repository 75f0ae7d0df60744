"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical failures (integration breakdown, ambiguous ranks, no usable
singular-value gap) with 3.  Negative analysis verdicts are ordinary
return values, never exceptions.
"""


class HdichoError(Exception):
    """Base class for all toolkit errors."""


class GrowthDomainError(HdichoError, ValueError):
    """A time point lies outside the interval J = (a0, +inf)."""


class GroupOverflowError(HdichoError, OverflowError):
    """A group operation left the representable floating range.

    Raised instead of saturating because partition endpoints feed
    directly into analysis grids, where silent clamping corrupts results.
    """


class IntegrationError(HdichoError, RuntimeError):
    """Adaptive integration failed; carries the failing subinterval."""

    def __init__(self, message, t_from=None, t_to=None):
        super().__init__(message)
        self.t_from = t_from
        self.t_to = t_to


class EstimationError(HdichoError, ValueError):
    """Constant fitting found no decay (fitted exponent <= 0)."""


class RankAmbiguityError(HdichoError, ValueError):
    """A singular value sits too close to the rank threshold to call."""


class SubspaceSplitError(HdichoError, ValueError):
    """No usable gap in the singular spectrum; subspace split inconclusive."""


class InconclusiveError(HdichoError, RuntimeError):
    """An analysis could certify neither the positive nor the negative verdict.

    Carries any partial results so the run report stays informative.
    """

    def __init__(self, message, results=None):
        super().__init__(message)
        self.results = results


class GfsViolationError(HdichoError, ValueError):
    """The coefficient fails the generalized Floquet identity.

    The monodromy matrix is only meaningful for systems satisfying it,
    so the measured residual is carried along for diagnostics.
    """

    def __init__(self, residual, threshold):
        super().__init__(
            f"generalized Floquet identity violated: residual {residual:.3e} "
            f"exceeds threshold {threshold:.3e}"
        )
        self.residual = residual
        self.threshold = threshold


class SpectrumError(HdichoError, ValueError):
    """Multiplier configuration does not match the requested operation."""


class ConfigError(HdichoError, ValueError):
    """Configuration rejected; carries the full list of validation errors."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
