"""Error taxonomy shared by all modules."""


class WaveMomentError(Exception):
    """Base class for all errors raised by this package."""


class NonConvergence(WaveMomentError):
    """Eigenvalue computation failed or produced residuals above tolerance."""


class DimensionTooLarge(WaveMomentError):
    """Dense eigensolver called on a matrix larger than the supported size."""


class SingularSystem(WaveMomentError):
    """Linear solve hit a pivot below tolerance (resonant or under-determined Gram)."""


class RepeatedEigenvalues(WaveMomentError):
    """Coupling matrix has eigenvalues closer than the separation tolerance."""


class CollisionInBlock(WaveMomentError):
    """Two frequencies inside one fixed-k block coincide within tolerance."""


class BetaZero(WaveMomentError):
    """A control coefficient beta_l vanishes; the moment problem is degenerate."""


class ModeOutOfRange(WaveMomentError):
    """Target prescribes a sine mode above the truncation order."""


class GridTooCoarse(WaveMomentError):
    """Sample spacing too large for the fastest mode of the frequency grid."""


class ConditioningExceeded(WaveMomentError):
    """Gram condition estimate above the configured cap."""


class DegenerateEigenvector(WaveMomentError):
    """Eigenvector structure contradicts the rank condition (N = 2 rescaling)."""


class BadInput(WaveMomentError):
    """Configuration or argument validation failed; carries all messages."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
