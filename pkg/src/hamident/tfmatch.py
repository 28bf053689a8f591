"""Transfer-function coefficient matching between the parameterized
augmented model and a data-derived realization.

Both sides of the identification are rational functions
C (sI - A)^-1 x0 = Q(s) / P(s) with P monic.  Coefficients are computed
with the Faddeev-LeVerrier recursion, which walks the adjugate expansion
adj(sI - A) = sum_k M_k s^(n-k) alongside the characteristic polynomial,
so numerator and denominator come out of a single pass.  Equating the
coefficient vectors against a target yields the polynomial system in the
unknown Hamiltonian and noise parameters; a weighted multistart
least-squares search solves it and groups the minima into sign-symmetry
equivalence classes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.stats import qmc

from .errors import NoSolutionError, NumericsError
from .liealg import BasisSet, HamiltonianCoeffs, expand_hamiltonian
from .statespace import AugmentedModel, StateSpaceModel, Trajectory, augment, build_generator, filtration
from .sysid import EraResult, build_hankel, continuous_lift, era, select_order

__all__ = [
    "TransferCoeffs",
    "HamiltonianTerm",
    "ParameterSpec",
    "Solution",
    "EquivalenceClass",
    "IdentificationResult",
    "transfer_coeffs",
    "residual",
    "solve",
    "identify",
    "format_report",
]


@dataclass
class TransferCoeffs:
    """Monic-denominator transfer coefficients of an initial-state response.

    ``den`` has n+1 entries (descending powers, den[0] = 1); ``num`` has
    one n-entry row per output channel.
    """

    den: np.ndarray
    num: np.ndarray


def transfer_coeffs(A, C, x0) -> TransferCoeffs:
    """Coefficients of C (sI - A)^-1 x0 via the Faddeev-LeVerrier recursion."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    n = A.shape[0]
    if A.shape != (n, n) or C.shape[1] != n or x0.shape != (n,):
        raise ValueError("incompatible (A, C, x0) shapes")
    L = C.shape[0]
    den = np.empty(n + 1)
    den[0] = 1.0
    num = np.empty((L, n))
    if n == 0:
        return TransferCoeffs(den, num)
    M = np.eye(n)
    num[:, 0] = C @ x0
    for k in range(1, n + 1):
        AM = A @ M
        den[k] = -np.trace(AM) / k
        if k < n:
            M = AM + den[k] * np.eye(n)
            num[:, k] = C @ (M @ x0)
    return TransferCoeffs(den, num)


@dataclass
class HamiltonianTerm:
    """One structural term of the Hamiltonian, H += value * operator.

    ``value=None`` marks the coefficient as unknown (to be identified).
    """

    name: str
    operator: np.ndarray
    value: float | None = None


class ParameterSpec:
    """Map between a parameter vector and an augmented model.

    The quantum part is H(theta) = sum(known) + sum_p theta_p * operator_p
    reduced onto the filtration-closed accessible set seeded by the
    observables.  The noise part, when ``noise_order`` = n > 0, has the
    output row fixed to all ones (gauge choice) and either a companion
    matrix with n unknown denominator coefficients (``noise_param =
    "companion"``, the default, which carries no similarity gauge
    freedom) or a full n x n unknown matrix (``noise_param = "full"``);
    the internal initial state xi0 (n unknowns) is always identified.

    ``noise_order=None`` defers the noise dimension to the data (the
    singular-value gap); :meth:`resolved` pins it.

    Parameters
    ----------
    basis : BasisSet
    terms : sequence of HamiltonianTerm
    observables : sequence
        Hermitian matrices, expansion vectors, or HamiltonianCoeffs.
    x0_full : array_like, length M
        Known initial expectations of every basis element.
    bounds : dict
        Per-unknown search intervals: one ``(lo, hi)`` pair per unknown
        Hamiltonian name, plus templates under the keys ``"alpha"``
        (companion coefficients), ``"e"`` (full-matrix entries) and
        ``"xi0"``; each template is a single pair applied to every
        component or a list of per-component pairs.
    """

    def __init__(
        self,
        basis: BasisSet,
        terms,
        observables,
        x0_full,
        bounds: dict,
        noise_order: int | None = None,
        noise_param: str = "companion",
        bracket_all: bool = False,
    ):
        if noise_param not in ("companion", "full"):
            raise ValueError(f"unknown noise_param {noise_param!r}")
        if noise_order is not None and (int(noise_order) != noise_order or noise_order < 0):
            raise ValueError("noise_order must be a non-negative integer or None")
        self.basis = basis
        self.terms = list(terms)
        self.bounds = dict(bounds)
        self.noise_order = None if noise_order is None else int(noise_order)
        self.noise_param = noise_param
        self.bracket_all = bracket_all
        self._observables_raw = list(observables)
        self._x0_full = np.asarray(x0_full, dtype=float).reshape(-1)
        if self._x0_full.shape != (basis.size,):
            raise ValueError("x0_full must assign an expectation per basis element")

        expansions = [expand_hamiltonian(t.operator, basis) for t in self.terms]
        self._expansions = expansions
        obs_rows = [self._observable_vector(o) for o in observables]
        if not obs_rows:
            raise ValueError("at least one observable required")
        union = np.zeros(basis.size)
        for e in expansions:
            union += np.abs(e.a)
        generic = HamiltonianCoeffs(union, basis)
        obs_arr = np.array(obs_rows)
        seeds = sorted(
            {int(i) for i in np.nonzero(np.abs(obs_arr) > 1e-14 * max(1.0, np.abs(obs_arr).max()))[1]}
        )
        self.accessible = filtration(seeds, generic, bracket_all=bracket_all)
        K = len(self.accessible)
        self._C_rows = obs_arr[:, self.accessible]
        self._x0_acc = self._x0_full[self.accessible]
        self._term_generators = [
            build_generator(e, self.accessible) for e in expansions
        ]
        self._A_fixed = np.zeros((K, K))
        self._A_unknown = []
        self.ham_names = []
        for t, Ap in zip(self.terms, self._term_generators):
            if t.value is None:
                self.ham_names.append(t.name)
                self._A_unknown.append(Ap)
            else:
                self._A_fixed += float(t.value) * Ap

    def _observable_vector(self, obs) -> np.ndarray:
        if isinstance(obs, HamiltonianCoeffs):
            return obs.a
        arr = np.asarray(obs)
        if arr.ndim == 1:
            if arr.shape != (self.basis.size,):
                raise ValueError("observable expansion length does not match basis")
            return arr.astype(float)
        return expand_hamiltonian(arr, self.basis).a

    def hamiltonian_coeffs(self, values: dict | None = None) -> HamiltonianCoeffs:
        """Expansion of H with all term values supplied.

        Unknown terms take their value from ``values`` by name.  Summing
        per-term expansions keeps coefficients exact for templates with
        disjoint basis support.
        """
        values = values or {}
        a = np.zeros(self.basis.size)
        for t, e in zip(self.terms, self._expansions):
            v = t.value if t.value is not None else values.get(t.name)
            if v is None:
                raise ValueError(f"term {t.name!r} has no value")
            a = a + float(v) * e.a
        return HamiltonianCoeffs(a, self.basis)

    @property
    def quantum_dim(self) -> int:
        return len(self.accessible)

    @property
    def n_observables(self) -> int:
        return self._C_rows.shape[0]

    def resolved(self, noise_order: int) -> "ParameterSpec":
        """Copy of this spec with the noise dimension pinned."""
        return ParameterSpec(
            self.basis,
            self.terms,
            self._observables_raw,
            self._x0_full,
            self.bounds,
            noise_order=noise_order,
            noise_param=self.noise_param,
            bracket_all=self.bracket_all,
        )

    def _require_resolved(self):
        if self.noise_order is None:
            raise ValueError(
                "noise order is unresolved; call resolved(n) or let identify() "
                "determine it from the singular-value gap"
            )

    @property
    def names(self) -> list[str]:
        """Ordered unknown-parameter names."""
        self._require_resolved()
        n = self.noise_order
        out = list(self.ham_names)
        if n:
            if self.noise_param == "companion":
                out += [f"alpha{i + 1}" for i in range(n)]
            else:
                out += [f"e{i + 1}{j + 1}" for i in range(n) for j in range(n)]
            out += [f"xi0{i + 1}" for i in range(n)]
        return out

    @property
    def bounds_array(self) -> np.ndarray:
        """(d, 2) array of finite search bounds, one row per unknown."""
        self._require_resolved()
        n = self.noise_order
        rows = []
        for name in self.ham_names:
            if name not in self.bounds:
                raise ValueError(f"no bounds given for unknown parameter {name!r}")
            rows.append(self.bounds[name])
        if n:
            key = "alpha" if self.noise_param == "companion" else "e"
            count = n if self.noise_param == "companion" else n * n
            rows += _expand_bound_template(self.bounds, key, count)
            rows += _expand_bound_template(self.bounds, "xi0", n)
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or not np.all(np.isfinite(arr)):
            raise ValueError("bounds must be finite (lo, hi) pairs")
        if np.any(arr[:, 0] >= arr[:, 1]):
            raise ValueError("each bound must satisfy lo < hi")
        return arr

    def build(self, params) -> AugmentedModel:
        """Deterministically assemble the augmented model for a parameter vector."""
        self._require_resolved()
        params = np.asarray(params, dtype=float).reshape(-1)
        names = self.names
        if params.shape != (len(names),):
            raise ValueError(f"expected {len(names)} parameters, got {params.size}")
        p = len(self.ham_names)
        Aq = self._A_fixed.copy()
        for theta, Ap in zip(params[:p], self._A_unknown):
            Aq += theta * Ap
        quantum = StateSpaceModel(Aq, self._C_rows, self._x0_acc, labels=list(self.accessible))
        n = self.noise_order
        if n == 0:
            noise = StateSpaceModel(np.zeros((0, 0)), np.zeros((1, 0)), np.zeros(0))
        elif self.noise_param == "companion":
            alpha = params[p:p + n]
            E = np.eye(n, k=1)
            E[-1, :] = -alpha[::-1]
            noise = StateSpaceModel(E, np.ones((1, n)), params[p + n:])
        else:
            E = params[p:p + n * n].reshape(n, n)
            noise = StateSpaceModel(E, np.ones((1, n)), params[p + n * n:])
        return augment(quantum, noise)


def _expand_bound_template(bounds: dict, key: str, count: int) -> list:
    if key not in bounds:
        raise ValueError(f"no bounds template {key!r} for the noise unknowns")
    tpl = bounds[key]
    arr = np.asarray(tpl, dtype=float)
    if arr.shape == (2,):
        return [tuple(arr)] * count
    if arr.shape == (count, 2):
        return [tuple(row) for row in arr]
    raise ValueError(
        f"bounds template {key!r} must be one (lo, hi) pair or {count} pairs"
    )


def residual(params, spec: ParameterSpec, target: TransferCoeffs) -> np.ndarray:
    """Weighted coefficient mismatch between spec(params) and the target.

    Entries are the differences of all monic-normalized denominator and
    numerator coefficients, scaled by 1 / max(1, |target coefficient|)
    so that equations spanning orders of magnitude carry comparable
    weight.
    """
    model = spec.build(params)
    tc = transfer_coeffs(model.model.A, model.model.C, model.model.x0)
    if tc.den.size != target.den.size or tc.num.shape != target.num.shape:
        raise ValueError(
            f"model transfer dimension {tc.den.size - 1} does not match "
            f"target {target.den.size - 1}"
        )
    tvec = np.concatenate([target.den[1:], target.num.ravel()])
    mvec = np.concatenate([tc.den[1:], tc.num.ravel()])
    return (mvec - tvec) / np.maximum(1.0, np.abs(tvec))


@dataclass
class Solution:
    """One local minimum of the coefficient-matching residual."""

    params: np.ndarray
    residual: float
    condition: float
    n_starts: int = 1


@dataclass
class EquivalenceClass:
    """Solutions identical up to detected sign symmetries."""

    canonical: np.ndarray
    members: list[int]


@dataclass
class IdentificationResult:
    """Outcome of the parameter search, best solution first."""

    names: list[str]
    solutions: list[Solution]
    best: int
    residual_tol: float
    symmetric_flips: list[int] = field(default_factory=list)
    equivalence_classes: list[EquivalenceClass] = field(default_factory=list)
    era: EraResult | None = None
    target: TransferCoeffs | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def best_solution(self) -> Solution:
        return self.solutions[self.best]

    @property
    def converged(self) -> bool:
        return self.best_solution.residual < self.residual_tol

    def params_dict(self, index: int | None = None) -> dict:
        sol = self.solutions[self.best if index is None else index]
        return dict(zip(self.names, (float(v) for v in sol.params)))


def _cluster(cands, tol):
    """Greedy clustering of (rnorm, x) candidates sorted by residual."""
    reps = []
    for rnorm, x in cands:
        for rep in reps:
            if np.abs(x - rep["x"]).max() <= tol * (1.0 + np.abs(rep["x"]).max()):
                rep["count"] += 1
                break
        else:
            reps.append({"x": x, "rnorm": rnorm, "count": 1})
    return reps


def solve(
    spec: ParameterSpec,
    target: TransferCoeffs,
    starts: int = 100,
    seed: int = 0,
    residual_tol: float = 1e-6,
    cluster_tol: float = 1e-6,
) -> IdentificationResult:
    """Multistart bounded least squares on the coefficient equations.

    Quasi-random (Latin hypercube) starting points fill the bounds box;
    each start descends with a trust-region least-squares step, converged
    points are clustered, cluster representatives are re-polished at
    tight tolerance, and sign symmetries of the residual are detected at
    the best solution to group clusters into equivalence classes (the
    representative with non-negative flipped coordinates is canonical).
    Deterministic for fixed (spec, target, starts, seed).
    """
    if starts < 1:
        raise ValueError("at least one start required")
    self_names = spec.names
    barr = spec.bounds_array
    lo, hi = barr[:, 0], barr[:, 1]
    d = len(self_names)

    def fun(x):
        return residual(x, spec, target)

    sampler = qmc.LatinHypercube(d=d, seed=seed)
    X0 = qmc.scale(sampler.random(starts), lo, hi)
    cands = []
    for x0 in X0:
        try:
            res = least_squares(fun, x0, bounds=(lo, hi), method="trf", x_scale="jac")
        except (ValueError, np.linalg.LinAlgError):
            continue
        rnorm = float(np.abs(res.fun).max())
        if np.isfinite(rnorm):
            cands.append((rnorm, res.x))
    if not cands:
        raise NoSolutionError("no start converged to a usable local minimum")
    cands.sort(key=lambda c: (c[0], tuple(c[1])))
    reps = _cluster(cands, cluster_tol)

    polished = []
    for rep in reps:
        try:
            res = least_squares(
                fun, rep["x"], bounds=(lo, hi), method="trf", x_scale="jac",
                xtol=1e-15, ftol=1e-15, gtol=1e-15,
            )
            x, jac = res.x, res.jac
        except (ValueError, np.linalg.LinAlgError):
            x, jac = rep["x"], None
        rnorm = float(np.abs(fun(x)).max())
        if jac is not None and np.all(np.isfinite(jac)):
            sv = np.linalg.svd(jac, compute_uv=False)
            cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
        else:
            cond = np.inf
        polished.append((rnorm, x, cond, rep["count"]))
    polished.sort(key=lambda c: (c[0], tuple(c[1])))
    merged = []
    for rnorm, x, cond, count in polished:
        for m in merged:
            if np.abs(x - m.params).max() <= cluster_tol * (1.0 + np.abs(m.params).max()):
                m.n_starts += count
                break
        else:
            merged.append(Solution(params=x, residual=rnorm, condition=cond, n_starts=count))

    hits = [s for s in merged if s.residual < residual_tol]
    solutions = hits if hits else merged[: min(len(merged), 10)]
    best_rnorm = solutions[0].residual
    xbest = solutions[0].params

    flips = []
    for i in range(d):
        if abs(xbest[i]) <= 1e-6 * (1.0 + np.abs(xbest).max()):
            continue
        flipped = xbest.copy()
        flipped[i] = -flipped[i]
        try:
            r_flip = float(np.abs(fun(flipped)).max())
        except (ValueError, NumericsError):
            continue
        if r_flip <= max(1.5 * best_rnorm, residual_tol):
            flips.append(i)

    def canonical(x):
        c = x.copy()
        for i in flips:
            c[i] = abs(c[i])
        return c

    classes: list[EquivalenceClass] = []
    for idx, sol in enumerate(solutions):
        cx = canonical(sol.params)
        for cls in classes:
            if np.abs(cx - cls.canonical).max() <= 1e-4 * (1.0 + np.abs(cls.canonical).max()):
                cls.members.append(idx)
                break
        else:
            classes.append(EquivalenceClass(canonical=cx, members=[idx]))

    return IdentificationResult(
        names=self_names,
        solutions=solutions,
        best=0,
        residual_tol=residual_tol,
        symmetric_flips=flips,
        equivalence_classes=classes,
    )


def identify(
    traj: Trajectory,
    spec: ParameterSpec,
    r: int = 20,
    s: int = 100,
    gap_ratio: float = 1e-6,
    starts: int = 100,
    seed: int = 0,
    order: int | None = None,
    residual_tol: float = 1e-6,
) -> IdentificationResult:
    """End-to-end identification: Hankel -> ERA -> log lift -> transfer
    matching -> multistart solve.

    With an unresolved spec the realization order comes from the
    singular-value gap and the noise dimension is its excess over the
    quantum dimension.  A spec with a pinned ``noise_order`` forces the
    matching truncation order K + n regardless of the gap (the detected
    order is recorded in the notes when it disagrees).
    """
    pair = build_hankel(traj, r, s)
    sv = np.linalg.svd(pair.H0, compute_uv=False)
    notes: list[str] = []
    with warnings.catch_warnings(record=True) as wlist:
        warnings.simplefilter("always")
        try:
            detected = select_order(sv, gap_ratio, pair.H0.shape)
        except NumericsError:
            detected = None
    notes += [str(w.message) for w in wlist]

    if spec.noise_order is None:
        if order is None:
            if detected is None:
                raise NumericsError("degenerate data: cannot detect a model order")
            order = detected
        n_noise = order - spec.quantum_dim
        if n_noise < 0:
            raise NumericsError(
                f"detected order {order} is below the quantum dimension "
                f"K = {spec.quantum_dim}"
            )
        rspec = spec.resolved(n_noise)
    else:
        rspec = spec
        expected = spec.quantum_dim + spec.noise_order
        if order is None:
            order = expected
        elif order != expected:
            raise ValueError(
                f"order {order} conflicts with spec dimension K + n = {expected}"
            )
    if detected is not None and detected != order:
        notes.append(
            f"singular-value gap suggests order {detected}; matching at "
            f"order {order} as configured"
        )

    eres = continuous_lift(era(pair, order))
    target = transfer_coeffs(eres.A_hat, eres.C_hat, eres.x0_hat)
    result = solve(
        rspec, target, starts=starts, seed=seed, residual_tol=residual_tol
    )
    result.era = eres
    result.target = target
    result.notes = notes + result.notes
    return result


def format_report(result: IdentificationResult) -> str:
    """Render an identification result as deterministic structured text."""
    lines = []
    lines.append("hamident identification report")
    lines.append(f"parameters: {' '.join(result.names)}")
    if result.era is not None:
        lines.append(f"model_order: {result.era.order}")
        lines.append(f"era_reconstruction_residual: {result.era.residual:.17g}")
        lines.append("singular_values:")
        for i, s in enumerate(result.era.singular_values):
            lines.append(f"  {i + 1} {s:.17g}")
    for note in result.notes:
        lines.append(f"note: {note}")
    lines.append(f"residual_tol: {result.residual_tol:.17g}")
    lines.append(f"converged: {result.converged}")
    lines.append("solutions (best first):")
    for i, sol in enumerate(result.solutions):
        tag = " (best)" if i == result.best else ""
        lines.append(
            f"  solution {i + 1}{tag}: residual {sol.residual:.17g} "
            f"condition {sol.condition:.6g} starts {sol.n_starts}"
        )
        for name, v in zip(result.names, sol.params):
            lines.append(f"    {name} = {v:.17g}")
    if result.symmetric_flips:
        flipped = ", ".join(result.names[i] for i in result.symmetric_flips)
        lines.append(f"sign symmetries detected in: {flipped}")
    lines.append("equivalence classes (canonical representative):")
    for i, cls in enumerate(result.equivalence_classes):
        members = " ".join(str(m + 1) for m in cls.members)
        rep = " ".join(f"{v:.17g}" for v in cls.canonical)
        lines.append(f"  class {i + 1}: solutions [{members}] canonical {rep}")
    return "\n".join(lines) + "\n"
