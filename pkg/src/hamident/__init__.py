"""Hamiltonian identification for finite-level quantum systems whose
time-trace measurements are disturbed by classical colored noise."""

from .errors import (
    AliasingError,
    BranchCutError,
    ConfigError,
    FactorizationError,
    NoSolutionError,
    NumericsError,
    RankDeficiencyError,
)
from .estimators import EraEstimator, HamiltonianIdentifier
from .liealg import (
    BasisSet,
    HamiltonianCoeffs,
    expand_hamiltonian,
    gell_mann_basis,
    pauli_product_basis,
    structure_constants,
)
from .noisemodel import (
    NoiseRealization,
    NoiseTransfer,
    RationalPsd,
    canonical_realization,
    noise_expectation,
    psd_value,
    sample_colored_noise,
    spectral_factorize,
    welch_psd,
)
from .statespace import (
    AugmentedModel,
    DiscreteModel,
    StateSpaceModel,
    Trajectory,
    augment,
    build_generator,
    build_reduced_model,
    discretize,
    filtration,
    read_trajectory_csv,
    simulate,
    write_trajectory_csv,
)
from .sysid import EraResult, HankelPair, build_hankel, continuous_lift, era, select_order
from .tfmatch import (
    HamiltonianTerm,
    IdentificationResult,
    ParameterSpec,
    TransferCoeffs,
    format_report,
    identify,
    residual,
    solve,
    transfer_coeffs,
)

__version__ = "0.1.0"
