"""Orthogonal Hermitian bases of su(N), structure constants, and operator
expansions.

Conventions
-----------
Basis elements are Hermitian and traceless, pairwise orthogonal under the
Hilbert-Schmidt inner product with a single normalization constant per
basis, ``tr(X_j X_k) = c * delta_jk``.  Structure constants are defined by
``[X_j, X_k] = sum_l C[j, k, l] X_l``; for a Hermitian basis they are
purely imaginary and fully antisymmetric under any index swap.

Two constructions are provided:

* :func:`gell_mann_basis` -- generalized Gell-Mann matrices for any N >= 2,
  normalized to ``c = 2`` (for N = 2 these are exactly the Pauli matrices
  in x, y, z order).
* :func:`pauli_product_basis` -- tensor products of Pauli matrices for
  q-qubit systems (``c = 2**q``), enumerated lexicographically over the
  letters I < X < Y < Z with the all-identity string omitted.  For two
  qubits the order is IX, IY, IZ, XI, XX, XY, XZ, YI, ..., ZZ; the
  unnormalized products keep single-qubit expectation values such as
  <sigma_x^1> as direct coherence-vector components.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np

__all__ = [
    "BasisSet",
    "HamiltonianCoeffs",
    "gell_mann_basis",
    "pauli_product_basis",
    "structure_constants",
    "expand_hamiltonian",
]

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


@dataclass
class BasisSet:
    """Ordered orthogonal Hermitian traceless basis of su(N).

    Attributes
    ----------
    dim : int
        Hilbert-space dimension N.
    elements : ndarray, shape (M, N, N)
        The M = N**2 - 1 basis matrices.
    labels : list of str
        Human-readable name per element (Pauli strings or Gell-Mann family
        tags); positional index is the canonical identifier.
    hs_norm : float
        The constant c in tr(X_j X_k) = c * delta_jk.
    structure : ndarray, shape (M, M, M), complex
        Structure-constant tensor C[j, k, l].
    """

    dim: int
    elements: np.ndarray
    labels: list[str]
    hs_norm: float
    structure: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.elements.shape[0]

    def index_of(self, label: str) -> int:
        """Positional index of a labelled element."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no basis element labelled {label!r}") from None


@dataclass
class HamiltonianCoeffs:
    """Expansion coefficients of a Hermitian operator on a :class:`BasisSet`."""

    a: np.ndarray
    basis: BasisSet

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        if self.a.shape != (self.basis.size,):
            raise ValueError(
                f"coefficient vector has length {self.a.size}, "
                f"basis has {self.basis.size} elements"
            )
        if not np.all(np.isfinite(self.a)):
            raise ValueError("coefficients must be finite")

    def support(self, tol: float = 0.0) -> list[int]:
        """Indices of coefficients with magnitude above ``tol``."""
        cut = max(tol, 1e-14 * max(1.0, float(np.abs(self.a).max(initial=0.0))))
        return [int(i) for i in np.nonzero(np.abs(self.a) > cut)[0]]

    def matrix(self) -> np.ndarray:
        """Reconstruct sum_m a_m X_m."""
        return np.tensordot(self.a, self.basis.elements, axes=1)


def gell_mann_basis(N: int) -> BasisSet:
    """Build the generalized Gell-Mann basis of su(N).

    Elements are grouped as symmetric pairs, antisymmetric pairs, then
    diagonal matrices, each family in lexicographic order of its index
    pair, and normalized so that tr(X_j X_k) = 2 delta_jk.  Structure
    constants are computed on construction.

    Parameters
    ----------
    N : int
        Hilbert-space dimension, N >= 2.
    """
    if int(N) != N or N < 2:
        raise ValueError(f"basis dimension must be an integer >= 2, got {N}")
    N = int(N)
    mats, labels = [], []
    for j in range(N):
        for k in range(j + 1, N):
            S = np.zeros((N, N), dtype=complex)
            S[j, k] = S[k, j] = 1.0
            mats.append(S)
            labels.append(f"s{j + 1}{k + 1}")
    for j in range(N):
        for k in range(j + 1, N):
            A = np.zeros((N, N), dtype=complex)
            A[j, k] = -1.0j
            A[k, j] = 1.0j
            mats.append(A)
            labels.append(f"a{j + 1}{k + 1}")
    for l in range(1, N):
        d = np.zeros(N, dtype=complex)
        d[:l] = 1.0
        d[l] = -l
        mats.append(np.sqrt(2.0 / (l * (l + 1))) * np.diag(d))
        labels.append(f"d{l}")
    basis = BasisSet(dim=N, elements=np.array(mats), labels=labels, hs_norm=2.0)
    structure_constants(basis)
    return basis


def pauli_product_basis(qubits: int) -> BasisSet:
    """Build the q-qubit Pauli-product basis (4**q - 1 elements, c = 2**q)."""
    if int(qubits) != qubits or qubits < 1:
        raise ValueError(f"qubit count must be an integer >= 1, got {qubits}")
    qubits = int(qubits)
    mats, labels = [], []
    for combo in product("IXYZ", repeat=qubits):
        if all(c == "I" for c in combo):
            continue
        M = PAULI[combo[0]]
        for c in combo[1:]:
            M = np.kron(M, PAULI[c])
        mats.append(M)
        labels.append("".join(combo))
    basis = BasisSet(
        dim=2**qubits,
        elements=np.array(mats),
        labels=labels,
        hs_norm=float(2**qubits),
    )
    structure_constants(basis)
    return basis


def structure_constants(basis: BasisSet) -> np.ndarray:
    """Compute C[j, k, l] = tr(X_l [X_j, X_k]) / tr(X_l^2) and store it.

    Raises
    ------
    ValueError
        If the elements are not orthogonal with a common Hilbert-Schmidt
        norm (the projection formula is invalid then).
    """
    X = basis.elements
    c = basis.hs_norm
    gram = np.einsum("jab,kba->jk", X, X)
    if not np.allclose(gram, c * np.eye(basis.size), atol=1e-10 * c):
        raise ValueError(
            "ill-conditioned basis: elements are not orthogonal with "
            f"tr(X_j X_k) = {c} * delta_jk"
        )
    prod = np.einsum("jab,kbc->jkac", X, X)
    comm = prod - prod.transpose(1, 0, 2, 3)
    C = np.einsum("jkab,lba->jkl", comm, X) / c
    basis.structure = C
    return C


def expand_hamiltonian(H: np.ndarray, basis: BasisSet) -> HamiltonianCoeffs:
    """Project a Hermitian operator onto the basis, a_m = tr(X_m H) / c.

    A nonzero trace component does not couple to the dynamics; it is
    discarded with a warning.  Non-Hermitian input raises ``ValueError``.
    """
    H = np.asarray(H, dtype=complex)
    N = basis.dim
    if H.shape != (N, N):
        raise ValueError(f"operator shape {H.shape} does not match basis dimension {N}")
    scale = max(1.0, float(np.abs(H).max()))
    if np.abs(H - H.conj().T).max() > 1e-12 * scale:
        raise ValueError("invalid operator: input is not Hermitian")
    tr = np.trace(H)
    if abs(tr) > 1e-12 * scale:
        warnings.warn(
            f"discarding trace component tr(H)/N = {tr / N:.3g} "
            "(does not affect the dynamics)",
            stacklevel=2,
        )
        H = H - (tr / N) * np.eye(N)
    a = np.einsum("mab,ba->m", basis.elements, H) / basis.hs_norm
    return HamiltonianCoeffs(a=a.real, basis=basis)
