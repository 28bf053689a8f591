"""Colored measurement noise: rational PSDs, spectral factorization into a
causal shaping filter, controllable-canonical realization, expectation
propagation, and Welch-based validation.

A rational PSD is stored as two real coefficient vectors in the variable
u = omega**2 (highest power first), so a spectrum such as

    S(omega) = (1e12 * omega**2 + 4e26) / (omega**4 - 3.999e13 * omega**2 + 4e26)

reads ``num=[1e12, 4e26], den=[1, -3.999e13, 4e26]``.  Factorization
substitutes u = -s**2 and splits the root pairs between Gamma(s) and
Gamma(-s).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal as sps
from scipy.linalg import expm

from .errors import AliasingError, FactorizationError
from .statespace import StateSpaceModel, Trajectory, discretize, simulate

__all__ = [
    "RationalPsd",
    "NoiseTransfer",
    "NoiseRealization",
    "psd_value",
    "spectral_factorize",
    "canonical_realization",
    "empty_noise",
    "noise_expectation",
    "sample_colored_noise",
    "welch_psd",
]


@dataclass
class RationalPsd:
    """Strictly proper rational PSD, coefficients in u = omega**2."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        self.num = np.trim_zeros(np.asarray(self.num, dtype=float), "f")
        self.den = np.trim_zeros(np.asarray(self.den, dtype=float), "f")
        if self.num.size == 0 or self.den.size == 0:
            raise ValueError("PSD numerator and denominator must be nonzero")
        if self.num.size >= self.den.size:
            raise ValueError("PSD must be strictly proper (deg num < deg den)")
        uroots = np.roots(self.den) if self.den.size > 1 else np.array([])
        for u in uroots:
            if abs(u.imag) <= 1e-9 * abs(u) and u.real >= -1e-9 * abs(u):
                raise ValueError(
                    "PSD denominator vanishes at a real frequency "
                    f"(omega^2 = {u.real:.6g})"
                )
        omega = _probe_grid(self.num, self.den)
        S = psd_value(self, omega)
        if S.min() < -1e-9 * max(1.0, S.max()):
            raise ValueError("PSD is negative on the real frequency axis")


@dataclass
class NoiseTransfer:
    """Strictly proper stable SISO shaping filter.

    ``beta`` holds (beta_1 ... beta_n), the numerator coefficients from
    s**(n-1) downward; ``alpha`` holds (alpha_1 ... alpha_n) of the monic
    denominator s**n + alpha_1 s**(n-1) + ... + alpha_n.
    """

    beta: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        self.beta = np.asarray(self.beta, dtype=float).reshape(-1)
        self.alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        if self.alpha.size == 0 or self.beta.size != self.alpha.size:
            raise ValueError("beta and alpha must both have length n >= 1")
        poles = np.roots(np.concatenate([[1.0], self.alpha]))
        if poles.size and poles.real.max() >= 0:
            raise ValueError("denominator is not Hurwitz (unstable shaping filter)")

    @property
    def order(self) -> int:
        return self.alpha.size

    def frequency_response(self, omega) -> np.ndarray:
        s = 1j * np.asarray(omega, dtype=float)
        num = np.polyval(self.beta, s)
        den = np.polyval(np.concatenate([[1.0], self.alpha]), s)
        return num / den


@dataclass
class NoiseRealization:
    """Controllable-canonical (or user-supplied) realization of the noise."""

    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    xi0: np.ndarray

    def __post_init__(self):
        self.E = np.atleast_2d(np.asarray(self.E, dtype=float))
        self.F = np.asarray(self.F, dtype=float).reshape(-1)
        self.G = np.asarray(self.G, dtype=float).reshape(-1)
        self.xi0 = np.asarray(self.xi0, dtype=float).reshape(-1)
        n = self.E.shape[0]
        if self.E.shape != (n, n):
            raise ValueError("E must be square")
        if self.F.shape != (n,) or self.G.shape != (n,) or self.xi0.shape != (n,):
            raise ValueError("F, G, xi0 must all have length n")

    @property
    def order(self) -> int:
        return self.E.shape[0]

    def as_state_space(self) -> StateSpaceModel:
        """Expectation dynamics (E, G, xi0) as a plain state-space model."""
        return StateSpaceModel(self.E, self.G.reshape(1, -1), self.xi0)


def psd_value(psd: RationalPsd, omega) -> np.ndarray:
    """Evaluate S(omega) on real frequencies."""
    u = np.asarray(omega, dtype=float) ** 2
    return np.polyval(psd.num, u) / np.polyval(psd.den, u)


def _probe_grid(num, den) -> np.ndarray:
    """Frequency grid spanning the characteristic scales of the roots."""
    scales = [1.0]
    for coeffs in (num, den):
        if coeffs.size > 1:
            r = np.roots(coeffs)
            scales.extend(np.sqrt(np.abs(r)[np.abs(r) > 0]))
    top = 10.0 * max(scales)
    return np.concatenate([[0.0], np.geomspace(top * 1e-6, top, 512)])


def _even_to_s(coeffs: np.ndarray) -> np.ndarray:
    """Coefficients in u = omega**2 -> coefficients in s via u = -s**2."""
    q = coeffs.size - 1
    out = np.zeros(2 * q + 1)
    for i, c in enumerate(coeffs):
        out[2 * i] = c * (-1.0) ** (q - i)
    return out


def _poly_of_minus_s(coeffs: np.ndarray) -> np.ndarray:
    """p(s) -> p(-s) on highest-first coefficient vectors."""
    deg = coeffs.size - 1
    return coeffs * (-1.0) ** (deg - np.arange(coeffs.size))


def _split_pairs(roots: np.ndarray, keep: str) -> np.ndarray:
    """Select one root from each +/- pair of an even polynomial's spectrum.

    ``keep`` is "lhp" or "rhp".  Roots on the imaginary axis make the
    split ambiguous and raise :class:`FactorizationError`.
    """
    if roots.size == 0:
        return roots
    scale = np.abs(roots).max()
    off_axis = np.abs(roots.real) > 1e-9 * max(scale, 1e-300)
    if not off_axis.all():
        raise FactorizationError(
            "degenerate PSD: root on the imaginary axis, the stable/"
            "anti-stable factor split is not unique"
        )
    chosen = roots[roots.real < 0] if keep == "lhp" else roots[roots.real > 0]
    if 2 * chosen.size != roots.size:
        raise FactorizationError(
            "factorization failed: roots do not pair across the imaginary axis"
        )
    return chosen


def spectral_factorize(
    psd: RationalPsd, zero_selection: str = "minimum_phase"
) -> NoiseTransfer:
    """Factor S(omega) = Gamma(s) Gamma(-s)|_{s=i omega} with stable Gamma.

    The denominator always takes the left-half-plane poles.  Zeros come in
    +/- pairs; ``zero_selection`` picks the left-half-plane member of each
    pair ("minimum_phase") or the right-half-plane member ("maximum_phase",
    for shaping filters specified with right-half-plane zeros).
    The gain is fixed positive on the leading numerator coefficient.
    """
    if zero_selection not in ("minimum_phase", "maximum_phase"):
        raise ValueError(f"unknown zero_selection {zero_selection!r}")
    num_s = _even_to_s(psd.num)
    den_s = _even_to_s(psd.den)
    qd = psd.den.size - 1
    qn = psd.num.size - 1

    poles = _split_pairs(np.roots(den_s), "lhp")
    zeros = _split_pairs(
        np.roots(num_s) if qn > 0 else np.array([]),
        "lhp" if zero_selection == "minimum_phase" else "rhp",
    )

    p = np.atleast_1d(np.real(np.poly(poles)))
    z = np.atleast_1d(np.real(np.poly(zeros)))
    d0 = den_s[0] / ((-1.0) ** qd)
    g2 = (num_s[0] / ((-1.0) ** qn)) / d0
    if g2 <= 0:
        raise FactorizationError("factorization failed: non-positive gain")
    g = np.sqrt(g2)

    n = qd
    beta = np.zeros(n)
    beta[n - (qn + 1):] = g * z
    tf = NoiseTransfer(beta=beta, alpha=p[1:])

    # coefficient-wise check that Gamma(s)Gamma(-s) reproduces S
    num_rec = g2 * d0 * np.convolve(z, _poly_of_minus_s(z))
    den_rec = d0 * np.convolve(p, _poly_of_minus_s(p))
    for rec, ref in ((num_rec, num_s), (den_rec, den_s)):
        if np.abs(rec - ref).max() > 1e-6 * max(1.0, np.abs(ref).max()):
            raise FactorizationError(
                "factorization failed the reconstruction check"
            )
    return tf


def canonical_realization(tf: NoiseTransfer, xi0=None) -> NoiseRealization:
    """Controllable canonical form of a strictly proper transfer function.

    E is the companion matrix with last row (-alpha_n ... -alpha_1),
    F = (0, ..., 0, 1) and G = (beta_n, ..., beta_1).  ``xi0`` defaults to
    the unit vector (1, 0, ..., 0).
    """
    n = tf.order
    E = np.eye(n, k=1)
    E[-1, :] = -tf.alpha[::-1]
    F = np.zeros(n)
    F[-1] = 1.0
    G = tf.beta[::-1].copy()
    if xi0 is None:
        xi0 = np.zeros(n)
        xi0[0] = 1.0
    return NoiseRealization(E=E, F=F, G=G, xi0=xi0)


def empty_noise() -> StateSpaceModel:
    """Zero-dimensional noise block (degenerate augmentation)."""
    return StateSpaceModel(np.zeros((0, 0)), np.zeros((1, 0)), np.zeros(0))


def noise_expectation(real: NoiseRealization, dt: float, steps: int) -> Trajectory:
    """Expectation trace vbar(k) = G exp(E dt)^k xi0 (input-free)."""
    dmodel = discretize(real.as_state_space(), dt)
    return simulate(dmodel, steps, channel_names=["vbar"])


def sample_colored_noise(
    real: NoiseRealization, dt: float, steps: int, seed=None
) -> Trajectory:
    """Drive the sampled realization with unit-intensity white noise.

    The white input is N(0, 1/dt) per sample (continuous-time intensity
    one), so the output's PSD estimates track |Gamma(i omega)|**2.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    wmax = float(np.abs(np.linalg.eigvals(real.E).imag).max(initial=0.0))
    if dt * wmax >= np.pi:
        raise AliasingError(
            f"dt * max|Im eig(E)| = {dt * wmax:.3g} >= pi: sample faster"
        )
    n = real.order
    blk = np.zeros((n + 1, n + 1))
    blk[:n, :n] = real.E * dt
    blk[:n, n] = real.F * dt
    Phi = expm(blk)
    Ed, Fd = Phi[:n, :n], Phi[:n, n]
    rng = np.random.default_rng(seed)
    eta = rng.standard_normal(steps) / np.sqrt(dt)
    v = np.empty(steps)
    xi = real.xi0.copy()
    for k in range(steps):
        v[k] = real.G @ xi
        xi = Ed @ xi + Fd * eta[k]
    return Trajectory(dt, v.reshape(-1, 1), ["v"])


def welch_psd(traj: Trajectory, segment_len: int, overlap_frac: float = 0.5):
    """Welch PSD estimate of a single-channel record.

    Returns ``(omega, S)`` where S is the two-sided spectral density in
    angular frequency, the convention under which a shaping filter's
    output satisfies S(omega) ~= |Gamma(i omega)|**2 and discrete white
    noise of variance sigma**2 sits at level sigma**2 * dt.
    """
    if traj.n_channels != 1:
        raise ValueError("welch_psd expects a single-channel trajectory")
    if not 0 <= overlap_frac < 1:
        raise ValueError("overlap_frac must lie in [0, 1)")
    if segment_len > traj.n_samples:
        raise ValueError(
            f"segment_len {segment_len} exceeds record length {traj.n_samples}"
        )
    f, P = sps.welch(
        traj.samples[:, 0],
        fs=1.0 / traj.dt,
        window="hann",
        nperseg=segment_len,
        noverlap=int(overlap_frac * segment_len),
        return_onesided=False,
    )
    keep = f >= 0
    order = np.argsort(f[keep])
    return 2.0 * np.pi * f[keep][order], P[keep][order]
