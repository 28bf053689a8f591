"""Coherence-vector state-space models: filtration, augmentation with a
noise block, discretization, and sampled simulation.

The quantum model tracks the expectation values of the accessible basis
elements.  For a Hamiltonian expanded as H = sum_m a_m X_m, the reduced
generator is A[j, l] = i * sum_m a_m C[m, mu_j, mu_l] on the filtration-
closed index set {mu_j}; it is real and antisymmetric, so coherence norm
is preserved and the sampled propagator is orthogonal.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import block_diag, expm

from .errors import NumericsError
from .liealg import HamiltonianCoeffs

__all__ = [
    "StateSpaceModel",
    "AugmentedModel",
    "DiscreteModel",
    "Trajectory",
    "build_generator",
    "filtration",
    "build_reduced_model",
    "augment",
    "discretize",
    "simulate",
    "write_trajectory_csv",
    "read_trajectory_csv",
]


@dataclass
class StateSpaceModel:
    """Continuous-time initial-state-response model (A, C, x0).

    ``labels`` optionally records the basis index behind each state
    component (quantum models only).
    """

    A: np.ndarray
    C: np.ndarray
    x0: np.ndarray
    labels: list[int] | None = None

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        self.x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        K = self.A.shape[0]
        if self.A.shape != (K, K):
            raise ValueError(f"A must be square, got {self.A.shape}")
        if self.C.shape[1] != K or self.x0.shape != (K,):
            raise ValueError(
                f"inconsistent dimensions: A {self.A.shape}, C {self.C.shape}, "
                f"x0 {self.x0.shape}"
            )
        for arr in (self.A, self.C, self.x0):
            if arr.size and not np.all(np.isfinite(arr)):
                raise ValueError("model matrices must be finite")

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]


@dataclass
class AugmentedModel:
    """Block-diagonal join of a quantum model and a noise-expectation model."""

    model: StateSpaceModel
    quantum_dim: int
    noise_dim: int


@dataclass
class DiscreteModel:
    """Sampled model: Ad = exp(A * dt) with C, x0 carried over."""

    Ad: np.ndarray
    C: np.ndarray
    x0: np.ndarray
    dt: float


@dataclass
class Trajectory:
    """Uniformly sampled multi-channel output record."""

    dt: float
    samples: np.ndarray
    channel_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=float))
        if self.samples.ndim != 2:
            raise ValueError("samples must be a (T, L) array")
        if self.dt <= 0:
            raise ValueError(f"sample interval must be positive, got {self.dt}")
        if self.samples.shape[0] < 2:
            raise ValueError("a trajectory needs at least 2 samples")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("trajectory values must be finite")
        if not self.channel_names:
            self.channel_names = [f"y{i + 1}" for i in range(self.samples.shape[1])]
        if len(self.channel_names) != self.samples.shape[1]:
            raise ValueError("one channel name per column required")

    @property
    def n_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def n_channels(self) -> int:
        return self.samples.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_samples)


def build_generator(coeffs: HamiltonianCoeffs, indices) -> np.ndarray:
    """Reduced coherence-vector generator on the given basis indices.

    Returns the real K x K matrix A[j, l] = i * sum_m a_m C[m, mu_j, mu_l].
    The sign convention is the one that maps the two-qubit exchange
    Hamiltonian onto its standard 4x4 rotation generator.

    Raises
    ------
    NumericsError
        If the imaginary residue of any entry exceeds 1e-9 (relative),
        which indicates a broken basis or normalization.
    """
    basis = coeffs.basis
    if basis.structure is None:
        raise ValueError("basis has no structure constants")
    idx = [int(i) for i in indices]
    if not idx:
        raise ValueError("index set must be non-empty")
    if min(idx) < 0 or max(idx) >= basis.size:
        raise ValueError("basis index out of range")
    sub = basis.structure[np.ix_(range(basis.size), idx, idx)]
    Ac = 1j * np.tensordot(coeffs.a, sub, axes=1)
    scale = max(1.0, float(np.abs(Ac.real).max()))
    if np.abs(Ac.imag).max() > 1e-9 * scale:
        raise NumericsError(
            "inconsistent structure constants: generator has a large "
            "imaginary residue"
        )
    return np.ascontiguousarray(Ac.real)


def filtration(observable_indices, coeffs: HamiltonianCoeffs, *, bracket_all: bool = False) -> list[int]:
    """Accessible basis-index set generated by the observables under H.

    Starting from the observable indices, repeatedly adds every index l with
    tr(X_l [X_g, X_h]) != 0 for g in the current set and h ranging over the
    basis directions present in the Hamiltonian (all directions when
    ``bracket_all`` is set), until the set saturates.  Returns ascending
    indices.
    """
    obs = sorted({int(i) for i in observable_indices})
    if not obs:
        raise ValueError("at least one observable index required")
    basis = coeffs.basis
    if min(obs) < 0 or max(obs) >= basis.size:
        raise ValueError("observable index out of range")
    C = basis.structure
    cut = 1e-10 * max(1.0, float(np.abs(C).max()))
    connected = np.abs(C) > cut
    if bracket_all:
        against = list(range(basis.size))
    else:
        against = coeffs.support()
    current = set(obs)
    while True:
        if not against:
            break
        rows = sorted(current)
        reach = connected[np.ix_(rows, against)].any(axis=(0, 1))
        nxt = current | {int(i) for i in np.nonzero(reach)[0]}
        if nxt == current:
            break
        current = nxt
    return sorted(current)


def build_reduced_model(
    coeffs: HamiltonianCoeffs,
    observables,
    x0_full,
    *,
    bracket_all: bool = False,
) -> StateSpaceModel:
    """Assemble the reduced model (A, C, x0) visible from the observables.

    Parameters
    ----------
    coeffs : HamiltonianCoeffs
        Hamiltonian expansion.
    observables : sequence
        Expansion-coefficient vectors (length M) or ``HamiltonianCoeffs``,
        one per output channel.
    x0_full : array_like, length M
        Initial expectation value of every basis element; only accessible
        components enter the model.
    """
    rows = []
    for o in observables:
        vec = o.a if isinstance(o, HamiltonianCoeffs) else np.asarray(o, dtype=float)
        if vec.shape != (coeffs.basis.size,):
            raise ValueError("observable expansion length does not match basis")
        rows.append(vec)
    obs = np.array(rows)
    seed_cut = 1e-14 * max(1.0, float(np.abs(obs).max()))
    seeds = sorted({int(i) for i in np.nonzero(np.abs(obs) > seed_cut)[1]})
    accessible = filtration(seeds, coeffs, bracket_all=bracket_all)
    outside = np.abs(np.delete(obs, accessible, axis=1)).max(initial=0.0)
    if outside > seed_cut:
        raise NumericsError(
            "internal inconsistency: observable support escaped the "
            "filtration-closed set"
        )
    A = build_generator(coeffs, accessible)
    Cmat = obs[:, accessible]
    x0 = np.asarray(x0_full, dtype=float).reshape(-1)
    if x0.shape != (coeffs.basis.size,):
        raise ValueError("x0_full must assign an expectation to every basis element")
    return StateSpaceModel(A, Cmat, x0[accessible], labels=list(accessible))


def augment(quantum: StateSpaceModel, noise: StateSpaceModel) -> AugmentedModel:
    """Join a quantum model and a SISO noise-expectation model.

    The joint generator is block-diagonal; every output row becomes
    [C_i | G], sharing the single noise output row G across channels.
    A zero-dimensional noise model leaves the quantum model unchanged.
    """
    n = noise.dim if noise.A.size else 0
    if n and noise.C.shape != (1, n):
        raise ValueError("noise model must have a single output row G of width n")
    if n == 0:
        joint = StateSpaceModel(
            quantum.A.copy(), quantum.C.copy(), quantum.x0.copy(), labels=quantum.labels
        )
        return AugmentedModel(joint, quantum.dim, 0)
    A = block_diag(quantum.A, noise.A)
    G = np.tile(noise.C, (quantum.n_outputs, 1))
    C = np.hstack([quantum.C, G])
    x0 = np.concatenate([quantum.x0, noise.x0])
    return AugmentedModel(StateSpaceModel(A, C, x0), quantum.dim, n)


def discretize(model, dt: float) -> DiscreteModel:
    """Sample a continuous model with interval ``dt`` (Ad = exp(A * dt))."""
    if dt <= 0:
        raise ValueError(f"sample interval must be positive, got {dt}")
    if isinstance(model, AugmentedModel):
        model = model.model
    Ad = expm(model.A * dt) if model.dim else np.zeros((0, 0))
    return DiscreteModel(Ad, model.C.copy(), model.x0.copy(), float(dt))


def simulate(
    dmodel: DiscreteModel,
    steps: int,
    shot_sigma: float = 0.0,
    seed=None,
    channel_names: list[str] | None = None,
) -> Trajectory:
    """Initial-state response y(k) = C Ad^k x0 for k = 0 .. steps-1.

    The state is propagated iteratively (never via explicit matrix
    powers).  With ``shot_sigma > 0`` an i.i.d. Gaussian perturbation of
    that standard deviation is added to every sample to emulate
    finite-ensemble averaging; the draw is deterministic per seed.
    """
    if steps < 2:
        raise ValueError("at least 2 samples required")
    if shot_sigma < 0:
        raise ValueError("shot_sigma must be non-negative")
    L = dmodel.C.shape[0]
    y = np.empty((steps, L))
    x = dmodel.x0.copy()
    for k in range(steps):
        y[k] = dmodel.C @ x
        x = dmodel.Ad @ x
    if shot_sigma > 0:
        rng = np.random.default_rng(seed)
        y = y + rng.normal(0.0, shot_sigma, size=y.shape)
    return Trajectory(dmodel.dt, y, list(channel_names) if channel_names else [])


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write ``t,y1,...,yL`` rows at full double precision."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + list(traj.channel_names))
        for k in range(traj.n_samples):
            w.writerow(
                [f"{k * traj.dt:.17g}"] + [f"{v:.17g}" for v in traj.samples[k]]
            )


def read_trajectory_csv(path) -> Trajectory:
    """Read a trajectory written by :func:`write_trajectory_csv`."""
    path = Path(path)
    with path.open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if not header or header[0] != "t" or len(header) < 2:
            raise ValueError(f"{path}: expected header 't,y1,...'")
        rows = [[float(v) for v in row] for row in r if row]
    if len(rows) < 2:
        raise ValueError(f"{path}: a trajectory needs at least 2 samples")
    data = np.array(rows)
    t = data[:, 0]
    dts = np.diff(t)
    dt = dts[0]
    if dt <= 0 or np.abs(dts - dt).max() > 1e-9 * max(dt, 1.0):
        raise ValueError(f"{path}: time column is not uniformly sampled")
    return Trajectory(dt, data[:, 1:], header[1:])
