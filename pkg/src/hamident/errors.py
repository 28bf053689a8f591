"""Exception types shared across the toolkit.

Plain ``ValueError`` is used for caller mistakes (bad shapes, lengths,
out-of-range arguments).  The classes below mark data-dependent failures
that a caller may want to catch and handle separately, and they drive the
CLI exit codes (config errors exit 2, numerical failures exit 3).
"""


class ConfigError(Exception):
    """Invalid or inconsistent experiment configuration."""


class NumericsError(RuntimeError):
    """Data-dependent numerical failure."""


class FactorizationError(NumericsError):
    """PSD cannot be spectrally factorized (negative values or roots on the
    imaginary axis, where the stable/anti-stable split is ambiguous)."""


class AliasingError(NumericsError):
    """Sampling too coarse for the fastest mode involved, or a lifted
    generator carries an untrustworthy imaginary residue."""


class BranchCutError(NumericsError):
    """Principal matrix logarithm undefined: an eigenvalue sits on the
    closed negative real axis."""


class RankDeficiencyError(NumericsError):
    """Requested realization order exceeds the numerical rank of the data."""


class NoSolutionError(NumericsError):
    """No start of the multistart solver produced a usable local minimum."""
