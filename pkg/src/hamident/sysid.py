"""Eigensystem Realization Algorithm on sampled output data.

From a uniformly sampled initial-state response the block Hankel matrices
H(0) and H(1) are formed with consecutive spacing, a truncated SVD of
H(0) yields a minimal discrete realization (Ad, C, x0), and the principal
matrix logarithm lifts it to continuous time.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import logm

from .errors import AliasingError, BranchCutError, NumericsError, RankDeficiencyError
from .statespace import Trajectory

__all__ = [
    "HankelPair",
    "EraResult",
    "build_hankel",
    "select_order",
    "era",
    "continuous_lift",
]


@dataclass
class HankelPair:
    """Block Hankel matrices H(0) and H(1) built from one trajectory."""

    H0: np.ndarray
    H1: np.ndarray
    r: int
    s: int
    n_channels: int
    dt: float


@dataclass
class EraResult:
    """Realization identified from data.

    ``A_hat`` is filled by :func:`continuous_lift`; ``residual`` is the
    worst-case reconstruction error max_k ||C Ad^k x0 - y(k)|| over the
    samples that entered the Hankel matrices.
    """

    singular_values: np.ndarray
    order: int
    Ad_hat: np.ndarray
    C_hat: np.ndarray
    x0_hat: np.ndarray
    dt: float
    residual: float
    A_hat: np.ndarray | None = None


def build_hankel(traj: Trajectory, r: int, s: int) -> HankelPair:
    """Assemble H(k), block (i, j) = y(k + i + j), for k = 0 and 1.

    Consecutive spacing uses the data densely; a record of at least
    r + s samples is required.
    """
    if r < 1 or s < 1:
        raise ValueError("r and s must be positive")
    T = traj.n_samples
    if T < r + s:
        raise ValueError(
            f"trajectory too short for Hankel blocks: need r + s = {r + s} "
            f"samples, got {T}"
        )
    y = traj.samples
    L = traj.n_channels
    H0 = np.empty((r * L, s))
    H1 = np.empty((r * L, s))
    for i in range(r):
        H0[i * L:(i + 1) * L] = y[i:i + s].T
        H1[i * L:(i + 1) * L] = y[i + 1:i + 1 + s].T
    return HankelPair(H0, H1, r, s, L, traj.dt)


def select_order(singular_values, gap_ratio: float = 1e-6, matrix_shape=None) -> int:
    """Model order from the first spectral gap of the Hankel SVD.

    Returns the smallest cut position i with sigma_{i+1}/sigma_i below
    ``gap_ratio``.  When no gap exists, falls back to the numerical rank
    (singular values above eps * sigma_1 * max(matrix dimensions)) and
    warns that the spectrum has no clear gap.
    """
    sv = np.asarray(singular_values, dtype=float)
    if sv.size == 0 or sv[0] <= 0:
        raise NumericsError("degenerate data: all singular values vanish")
    if np.any(np.diff(sv) > 0):
        raise ValueError("singular values must be sorted descending")
    for i in range(sv.size - 1):
        if sv[i + 1] < gap_ratio * sv[i]:
            return i + 1
    big = max(matrix_shape) if matrix_shape else sv.size
    cut = np.finfo(float).eps * sv[0] * big
    order = int(np.count_nonzero(sv > cut))
    warnings.warn(
        "no clear singular-value gap; falling back to numerical rank "
        f"{order}",
        stacklevel=2,
    )
    return order


def _samples_from_hankel(pair: HankelPair) -> np.ndarray:
    """Recover y(0 .. r+s-2) from the entries of H(0)."""
    L, r, s = pair.n_channels, pair.r, pair.s
    y = np.empty((r + s - 1, L))
    y[:s] = pair.H0[:L].T
    for k in range(s, r + s - 1):
        i = k - s + 1
        y[k] = pair.H0[i * L:(i + 1) * L, s - 1]
    return y


def era(pair: HankelPair, order: int) -> EraResult:
    """Truncated-SVD realization of the given order.

    H(0) = P diag(D) Q^T; with the leading ``order`` triples,
    Ad = D^-1/2 P1^T H(1) Q1 D^-1/2, C = first L rows of P1 D^1/2 and
    x0 = D^1/2 Q1^T e1.
    """
    H0, H1 = pair.H0, pair.H1
    P, sv, Qt = np.linalg.svd(H0, full_matrices=False)
    if order < 0 or order > min(H0.shape):
        raise ValueError(f"order must lie in [0, {min(H0.shape)}], got {order}")
    rank_cut = np.finfo(float).eps * sv[0] * max(H0.shape) if sv[0] > 0 else 0.0
    num_rank = int(np.count_nonzero(sv > rank_cut))
    if order > num_rank:
        raise RankDeficiencyError(
            f"order {order} exceeds the numerical rank {num_rank} of H(0)"
        )
    y = _samples_from_hankel(pair)
    L = pair.n_channels
    if order == 0:
        return EraResult(
            singular_values=sv,
            order=0,
            Ad_hat=np.zeros((0, 0)),
            C_hat=np.zeros((L, 0)),
            x0_hat=np.zeros(0),
            dt=pair.dt,
            residual=float(np.linalg.norm(y, axis=1).max()),
        )
    P1 = P[:, :order]
    D = sv[:order]
    Q1 = Qt[:order].T
    dinv = 1.0 / np.sqrt(D)
    dpos = np.sqrt(D)
    Ad = (dinv[:, None] * (P1.T @ H1 @ Q1)) * dinv[None, :]
    C = P1[:L] * dpos[None, :]
    x0 = dpos * Q1[0]
    resid = 0.0
    x = x0.copy()
    for k in range(y.shape[0]):
        resid = max(resid, float(np.linalg.norm(C @ x - y[k])))
        x = Ad @ x
    return EraResult(
        singular_values=sv,
        order=order,
        Ad_hat=Ad,
        C_hat=C,
        x0_hat=x0,
        dt=pair.dt,
        residual=resid,
    )


def continuous_lift(result: EraResult) -> EraResult:
    """Lift Ad to A = log(Ad)/dt with the principal matrix logarithm.

    Uses an eigendecomposition (complex-conjugate pairs cancel on
    realification) with a Schur-based fallback when the eigenbasis is
    poorly conditioned.  Valid only below the aliasing bound
    dt * |Im eig(A)| < pi, which the principal branch enforces; faster
    true dynamics fold back silently and cannot be detected from data.

    Raises
    ------
    BranchCutError
        If an eigenvalue of Ad lies on the closed negative real axis.
    AliasingError
        If the realified logarithm keeps a large imaginary residue.
    """
    Ad = result.Ad_hat
    if result.order == 0:
        return replace(result, A_hat=np.zeros((0, 0)))
    w, V = np.linalg.eig(Ad)
    scale = np.abs(w).max()
    for lam in w:
        on_axis = abs(lam.imag) <= 1e-12 * scale and lam.real <= 1e-12 * scale
        if on_axis or abs(lam) <= 1e-300:
            raise BranchCutError(
                f"eigenvalue {lam:.6g} of Ad lies on the closed negative real "
                "axis; the principal logarithm is ambiguous"
            )
    if np.linalg.cond(V) > 1e8:
        L = logm(Ad)
    else:
        L = (V * np.log(w)) @ np.linalg.inv(V)
    L = np.asarray(L, dtype=complex)
    if np.abs(L.imag).max() > 1e-8 * max(1.0, np.abs(L.real).max()):
        raise AliasingError(
            "matrix logarithm kept a large imaginary residue; the sampled "
            "data looks aliased or inconsistent"
        )
    return replace(result, A_hat=L.real / result.dt)
