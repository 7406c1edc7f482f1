"""Kalman filter: standard and square-root variants.

Both variants share one output contract. Missing observations are handled by
dropping the missing rows of ``y_t``, ``Z_t`` and ``H`` at that period; a fully
missing period is the ``Z_t = 0`` case, i.e. a pure prediction step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

import numpy as np

from . import _kernels
from .exceptions import SingularInnovationError
from .model import NoiseCovariances, StateSpaceModel

LOG_2PI = _kernels.LOG_2PI


@dataclass(frozen=True)
class FilterConfig:
    """Filter settings.

    ``steady_state_tolerance`` decides when the steady state is reported.
    Covariances are only frozen once successive predictive covariances agree
    to ``freeze_tolerance`` relative to their size, so freezing never moves
    results by more than rounding. ``initial_state`` / ``initial_covariance``
    replace the default diffuse prior ``a_1 = 0, P_1 = diffuse_scale * I``.
    """

    variant: str = "standard"
    diffuse_scale: float = 1e6
    steady_state_tolerance: float = 1e-5
    freeze_tolerance: float = 1e-12
    initial_state: Optional[np.ndarray] = None
    initial_covariance: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.diffuse_scale > 0:
            raise ValueError("diffuse_scale must be positive")
        if not self.steady_state_tolerance > 0:
            raise ValueError("steady_state_tolerance must be positive")
        if self.freeze_tolerance < 0:
            raise ValueError("freeze_tolerance must be non-negative")

    def prior(self, m):
        a1 = np.zeros(m) if self.initial_state is None else np.asarray(self.initial_state, float).reshape(m)
        if self.initial_covariance is None:
            P1 = self.diffuse_scale * np.eye(m)
        else:
            P1 = np.asarray(self.initial_covariance, float).reshape(m, m)
        return a1.copy(), P1.copy()


@dataclass(eq=False)
class FilterOutput:
    """Per-period filter quantities (row ``t-1`` holds period ``t``).

    ``a``/``P`` have ``n + 1`` rows: the last is the one-step-ahead
    prediction beyond the sample. ``v`` is NaN where the observation is
    missing. ``F`` is the full ``p x p`` covariance of ``y_t - Z_t a_t``.
    ``gain`` and ``Finv`` are zero-padded on missing rows/columns so the
    smoother can use them without re-deriving the missing pattern.
    """

    a: np.ndarray
    P: np.ndarray
    att: np.ndarray
    Ptt: np.ndarray
    v: np.ndarray
    F: np.ndarray
    gain: np.ndarray
    Finv: np.ndarray
    missing: np.ndarray
    loglik: float
    steady_state: bool
    steady_state_period: Optional[int]
    variant: str = "standard"
    n_observed: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.att.shape[0]


class FilterFunction(Protocol):
    def __call__(self, model: StateSpaceModel, cov: NoiseCovariances,
                 config: Optional[FilterConfig] = None) -> FilterOutput: ...


def detect_steady_state(P_sequence, tolerance: float) -> Optional[int]:
    """First (1-based) index ``t`` with ``max|P_t+1 - P_t| < tolerance``."""
    P = np.asarray(P_sequence, dtype=float)
    if P.shape[0] == 0:
        raise ValueError("empty covariance sequence")
    if P.shape[0] == 1:
        return None
    diffs = np.abs(np.diff(P, axis=0)).reshape(P.shape[0] - 1, -1).max(axis=1)
    hits = np.flatnonzero(diffs < tolerance)
    return int(hits[0]) + 1 if hits.size else None


def psd_factor(M, tol=1e-14):
    """Square factor ``L`` with ``L @ L.T == M`` for symmetric PSD ``M``.

    Cholesky when ``M`` is positive definite, otherwise an eigenvalue-based
    factor with negative rounding noise clipped to zero.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return M.copy()
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        w, U = np.linalg.eigh(0.5 * (M + M.T))
        w = np.where(w > tol * max(1.0, abs(w).max()), w, 0.0)
        return U * np.sqrt(w)


def _alloc(n, p, m):
    return dict(
        a=np.empty((n + 1, m)), P=np.empty((n + 1, m, m)),
        att=np.empty((n, m)), Ptt=np.empty((n, m, m)),
        v=np.full((n, p), np.nan), F=np.empty((n, p, p)),
        gain=np.zeros((n, m, p)), Finv=np.zeros((n, p, p)),
    )


def _finish(model, out, loglik, n_obs, config, variant):
    ss = detect_steady_state(out["P"], config.steady_state_tolerance)
    return FilterOutput(missing=model.missing, loglik=float(loglik), steady_state=ss is not None,
                        steady_state_period=ss, variant=variant, n_observed=int(n_obs), **out)


def _sym(M):
    return 0.5 * (M + M.T)


def _prepare(model, cov, config):
    cov.check(model)
    config = config or FilterConfig()
    a1, P1 = config.prior(model.m)
    Zs = np.ascontiguousarray(model.Z if model.time_varying else model.Z[None])
    y = np.ascontiguousarray(np.nan_to_num(model.y))
    can_freeze = (not model.time_varying) and config.freeze_tolerance > 0
    return config, a1, P1, Zs, y, can_freeze


def _run(kernel, model, config, variant, *args):
    out = _alloc(model.n, model.p, model.m)
    loglik, n_obs, failed = kernel(*args, out["a"], out["P"], out["att"], out["Ptt"], out["v"],
                                   out["F"], out["gain"], out["Finv"])
    if failed > 0:
        raise SingularInnovationError(int(failed))
    out["v"][model.missing] = np.nan
    return _finish(model, out, loglik, n_obs, config, variant)


def run_filter(model: StateSpaceModel, cov: NoiseCovariances,
               config: Optional[FilterConfig] = None) -> FilterOutput:
    """Standard covariance-form Kalman filter.

    Per observed period: ``v = y - Z a``, ``F = Z P Z' + H``,
    ``K = P Z' F^-1``, ``a_t|t = a + K v``, ``P_t|t = P - K Z P``, then
    ``a_t+1 = T a_t|t`` and ``P_t+1 = T P_t|t T' + R Q R'``.
    """
    config, a1, P1, Zs, y, can_freeze = _prepare(model, cov, config)
    RQR = _sym(model.R @ cov.Q @ model.R.T)
    return _run(_kernels.standard_filter, model, config, "standard",
                y, model.missing, Zs, model.T, RQR, cov.H, a1, _sym(P1), can_freeze,
                config.freeze_tolerance)


def run_sqrt_filter(model: StateSpaceModel, cov: NoiseCovariances,
                    config: Optional[FilterConfig] = None) -> FilterOutput:
    """Square-root Kalman filter.

    Propagates factors of ``P_t`` through orthogonal triangularization of
    the pre-arrays

        [[Z S_P, S_H], [S_P, 0]]  ->  [[S_F, 0], [G, S_Ptt]]
        [T S_Ptt, R S_Q]          ->  [S_P+1, 0]

    so every reported covariance is ``S @ S.T`` and hence PSD.
    """
    config, a1, P1, Zs, y, can_freeze = _prepare(model, cov, config)
    SRQ = np.ascontiguousarray(model.R @ psd_factor(cov.Q))
    SH = np.ascontiguousarray(psd_factor(cov.H))
    S1 = np.ascontiguousarray(psd_factor(P1))
    return _run(_kernels.sqrt_filter, model, config, "sqrt",
                y, model.missing, Zs, model.T, SRQ, SH, a1, S1, can_freeze,
                config.freeze_tolerance)


FILTERS: dict[str, Callable] = {
    "standard": run_filter,
    "kalman": run_filter,
    "sqrt": run_sqrt_filter,
    "square-root": run_sqrt_filter,
}


def get_filter(variant) -> FilterFunction:
    """Resolve a variant name, or pass through any callable with the filter signature."""
    if callable(variant):
        return variant
    try:
        return FILTERS[variant]
    except KeyError:
        raise ValueError(f"unknown filter variant {variant!r}; choose from {sorted(FILTERS)}") from None


def filter_model(model: StateSpaceModel, cov: NoiseCovariances,
                 config: Optional[FilterConfig] = None) -> FilterOutput:
    """Run the filter variant named in ``config``."""
    config = config or FilterConfig()
    return get_filter(config.variant)(model, cov, config)


def canonical_variant(variant) -> str:
    if callable(variant):
        return getattr(variant, "__name__", "custom")
    fn = get_filter(variant)
    return "sqrt" if fn is run_sqrt_filter else "standard"
