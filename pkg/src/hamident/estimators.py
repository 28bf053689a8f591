"""Scikit-learn style estimators wrapping the identification pipeline.

Both classes follow the usual contract: all constructor arguments are
hyper-parameters stored verbatim (so ``get_params`` / ``set_params`` /
``clone`` compose with the wider ecosystem), ``fit`` consumes a sampled
output record and learned quantities live in trailing-underscore
attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .statespace import Trajectory
from .sysid import build_hankel, continuous_lift, era, select_order
from .tfmatch import ParameterSpec, identify
from .validation import check_output_record, check_positive

__all__ = ["EraEstimator", "HamiltonianIdentifier"]


class EraEstimator(BaseEstimator):
    """Minimal discrete/continuous LTI realization of a sampled response.

    Parameters
    ----------
    dt : float
        Sample interval of the records passed to :meth:`fit`.
    r, s : int
        Hankel block row and column counts.
    order : int or None
        Realization order; ``None`` selects it from the singular-value
        gap with ``gap_ratio``.
    gap_ratio : float
        Spectral-gap threshold for automatic order selection.

    Attributes
    ----------
    singular_values_ : ndarray
        Hankel singular spectrum.
    order_ : int
        Realized order.
    Ad_, C_, x0_ : ndarray
        Discrete realization.
    A_ : ndarray
        Continuous generator log(Ad)/dt.
    residual_ : float
        Worst-case reconstruction error on the training samples.
    """

    def __init__(self, dt: float = 1.0, r: int = 20, s: int = 100,
                 order: int | None = None, gap_ratio: float = 1e-6):
        self.dt = dt
        self.r = r
        self.s = s
        self.order = order
        self.gap_ratio = gap_ratio

    def fit(self, X, y=None):
        Y = check_output_record(X)
        check_positive("dt", self.dt)
        traj = Trajectory(self.dt, Y)
        pair = build_hankel(traj, self.r, self.s)
        if self.order is None:
            sv = np.linalg.svd(pair.H0, compute_uv=False)
            order = select_order(sv, self.gap_ratio, pair.H0.shape)
        else:
            order = self.order
        res = continuous_lift(era(pair, order))
        self.result_ = res
        self.singular_values_ = res.singular_values
        self.order_ = res.order
        self.Ad_ = res.Ad_hat
        self.C_ = res.C_hat
        self.x0_ = res.x0_hat
        self.A_ = res.A_hat
        self.residual_ = res.residual
        self.n_features_in_ = Y.shape[1]
        return self

    def predict(self, n_steps: int) -> np.ndarray:
        """Reconstructed outputs C Ad^k x0 for k = 0 .. n_steps-1."""
        if not hasattr(self, "Ad_"):
            raise AttributeError("estimator is not fitted yet")
        y = np.empty((int(n_steps), self.C_.shape[0]))
        x = self.x0_.copy()
        for k in range(int(n_steps)):
            y[k] = self.C_ @ x
            x = self.Ad_ @ x
        return y


class HamiltonianIdentifier(BaseEstimator):
    """Recover Hamiltonian (and noise) parameters from a polluted record.

    Parameters
    ----------
    spec : ParameterSpec
        Structural description of the unknowns; a spec with
        ``noise_order=None`` lets the data choose the noise dimension.
    dt : float
        Sample interval of the records passed to :meth:`fit`.
    r, s, gap_ratio, starts, seed, order, residual_tol
        Passed through to :func:`hamident.tfmatch.identify`.

    Attributes
    ----------
    result_ : IdentificationResult
    params_ : dict
        Best-solution parameter values by name.
    order_ : int
        Realization order used for matching.
    singular_values_ : ndarray
    """

    def __init__(self, spec: ParameterSpec | None = None, dt: float = 1.0,
                 r: int = 20, s: int = 100, gap_ratio: float = 1e-6,
                 starts: int = 100, seed: int = 0, order: int | None = None,
                 residual_tol: float = 1e-6):
        self.spec = spec
        self.dt = dt
        self.r = r
        self.s = s
        self.gap_ratio = gap_ratio
        self.starts = starts
        self.seed = seed
        self.order = order
        self.residual_tol = residual_tol

    def fit(self, X, y=None):
        if self.spec is None:
            raise ValueError("a ParameterSpec is required to identify parameters")
        Y = check_output_record(X)
        check_positive("dt", self.dt)
        traj = Trajectory(self.dt, Y)
        result = identify(
            traj,
            self.spec,
            r=self.r,
            s=self.s,
            gap_ratio=self.gap_ratio,
            starts=self.starts,
            seed=self.seed,
            order=self.order,
            residual_tol=self.residual_tol,
        )
        self.result_ = result
        self.params_ = result.params_dict()
        self.order_ = result.era.order
        self.singular_values_ = result.era.singular_values
        self.n_features_in_ = Y.shape[1]
        return self

    def predict(self, n_steps: int) -> np.ndarray:
        """Outputs of the best identified model over ``n_steps`` samples."""
        if not hasattr(self, "result_"):
            raise AttributeError("estimator is not fitted yet")
        from .statespace import discretize, simulate

        spec = self.spec
        if spec.noise_order is None:
            spec = spec.resolved(self.order_ - spec.quantum_dim)
        model = spec.build(self.result_.best_solution.params)
        dmodel = discretize(model, self.dt)
        return simulate(dmodel, int(n_steps)).samples
