"""Forecasting and Monte Carlo scenario simulation from a fitted model."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ForecastError, StateSpaceError
from .kalman import filter_model, psd_factor


@dataclass(eq=False)
class ForecastOutput:
    """Point forecasts ``mean`` (N x p) and predictive covariances ``cov`` (N x p x p)."""

    mean: np.ndarray
    cov: np.ndarray
    state_mean: np.ndarray
    state_cov: np.ndarray

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diagonal(self.cov, axis1=1, axis2=2), 0.0, None))

    @property
    def dist(self) -> list:
        """``(mean, covariance)`` of the Gaussian predictive law at each horizon."""
        return list(zip(self.mean, self.cov))


@dataclass(eq=False)
class ScenarioSet:
    """Simulated paths, shape ``(N, S, p)``."""

    scenarios: np.ndarray

    @property
    def shape(self):
        return self.scenarios.shape

    def matrix(self) -> np.ndarray:
        """``N x S`` matrix for a univariate series."""
        if self.scenarios.shape[2] != 1:
            raise StateSpaceError("matrix() needs a univariate series; use .scenarios")
        return self.scenarios[:, :, 0]


def _check_horizon(model, N):
    if int(N) != N or N < 1:
        raise ForecastError(f"horizon must be a positive integer, got {N}")
    have = model.future_periods
    if have < N:
        raise ForecastError(
            f"forecasting {N} periods needs future regressor rows: {have} available, "
            f"{N - have} missing")


def forecast(fitted, N: int) -> ForecastOutput:
    """Minimum-MSE forecasts: refilter with ``N`` missing periods appended."""
    model = fitted.model
    _check_horizon(model, N)
    ext = model.extended(N)
    fo = filter_model(ext, fitted.covariance, fitted.filter_config)
    n = model.n
    Zf = ext.z_sequence()[n:]
    a = fo.a[n:n + N]
    P = fo.P[n:n + N]
    mean = np.einsum("hpm,hm->hp", Zf, a)
    return ForecastOutput(mean, fo.F[n:n + N].copy(), a.copy(), P.copy())


def _factor_checked(name, M):
    M = np.asarray(M, float)
    scale = max(1.0, np.abs(M).max()) if M.size else 1.0
    if not np.isfinite(M).all() or (M.size and np.linalg.eigvalsh(0.5 * (M + M.T)).min() < -1e-8 * scale):
        raise StateSpaceError(f"{name} is not a valid covariance matrix; cannot sample")
    return psd_factor(M)


def simulate(fitted, N: int, S: int, rng_seed: int = 0) -> ScenarioSet:
    """Sample ``S`` future paths of ``y`` over ``N`` periods.

    The starting state is drawn from the one-step-ahead predictive
    distribution ``N(a_n+1, P_n+1)``; state and observation noises use the
    fitted ``Q`` and ``H``. Scenario ``s`` uses its own generator seeded
    with ``(rng_seed, s)``.
    """
    model = fitted.model
    _check_horizon(model, N)
    if int(S) != S or S < 1:
        raise ForecastError(f"scenario count must be a positive integer, got {S}")
    n, p, m, r = model.dims
    a0 = fitted.filter.a[n]
    LP = _factor_checked("P_n+1", fitted.filter.P[n])
    LH = _factor_checked("H", fitted.covariance.H)
    RLQ = model.R @ _factor_checked("Q", fitted.covariance.Q)
    Zf = model.z_sequence(N)[n:]
    T = model.T

    width = m + N * (r + p)
    draws = np.empty((S, width))
    for s in range(S):
        draws[s] = np.random.default_rng([rng_seed, s]).standard_normal(width)
    alpha = a0 + draws[:, :m] @ LP.T
    noise = draws[:, m:].reshape(S, N, r + p)

    out = np.empty((N, S, p))
    for h in range(N):
        eta = noise[:, h, :r]
        eps = noise[:, h, r:]
        out[h] = alpha @ Zf[h].T + eps @ LH.T
        alpha = alpha @ T.T + eta @ RLQ.T
    return ScenarioSet(out)


def scenario_quantiles(scenarios, probs) -> np.ndarray:
    """Empirical quantiles per horizon and variable, shape ``(N, p, len(probs))``."""
    arr = scenarios.scenarios if isinstance(scenarios, ScenarioSet) else np.asarray(scenarios, float)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    probs = np.atleast_1d(np.asarray(probs, dtype=float))
    if probs.size == 0:
        raise ValueError("at least one probability is required")
    if ((probs <= 0) | (probs >= 1)).any():
        raise ValueError("probabilities must lie strictly between 0 and 1")
    q = np.quantile(arr, probs, axis=1, method="linear")
    return np.moveaxis(q, 0, -1)
