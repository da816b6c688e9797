"""Exception hierarchy shared by the package."""


class FiniteGapError(Exception):
    """Base class for all errors raised by finitegap."""


class SpectrumError(FiniteGapError, ValueError):
    """Invalid or degenerate main spectrum."""


class HomologyError(FiniteGapError):
    """Homology basis construction failed."""


class QuadratureError(FiniteGapError):
    """Adaptive quadrature did not converge."""


class PeriodError(FiniteGapError):
    """Period data failed a consistency check (singular A, non-real frequencies)."""


class ThetaError(FiniteGapError, ValueError):
    """Invalid period matrix for the theta series."""


class SynthesisError(FiniteGapError):
    """Waveform evaluation or periodization failed."""


class ChannelError(FiniteGapError):
    """Split-step propagation failed."""


class ErasureError(FiniteGapError):
    """Too few spectral points were recovered to demap a symbol."""
