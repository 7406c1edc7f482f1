"""Predefined models: local level, linear trend and basic structural.

Every builder extends to ``p > 1`` variables by repeating the univariate
block once per variable (block-diagonal ``Z``, ``T`` and ``R``). Variables
interact only through the full noise covariances ``H`` and ``Q``.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import block_diag

from .exceptions import DimensionError, StateSpaceError
from .model import StateSpaceModel, as_observations

LOCAL_LEVEL = "local_level"
LINEAR_TREND = "linear_trend"
STRUCTURAL = "structural"


def _block_components(univariate, m_block, p):
    # shift each univariate state index by the block offset of variable j
    return {name: [[i + j * m_block for i in idx] for j in range(p)]
            for name, idx in univariate.items()}


def local_level(y) -> StateSpaceModel:
    y = as_observations(y)
    p = y.shape[1]
    eye = np.eye(p)
    return StateSpaceModel(y, eye, eye, eye, kind=LOCAL_LEVEL,
                           components=_block_components({"level": [0]}, 1, p))


def linear_trend(y) -> StateSpaceModel:
    y = as_observations(y)
    p = y.shape[1]
    eye = np.eye(p)
    Z = np.kron(eye, [[1.0, 0.0]])
    T = np.kron(eye, [[1.0, 1.0], [0.0, 1.0]])
    R = np.kron(eye, np.eye(2))
    comps = _block_components({"level": [0], "slope": [1]}, 2, p)
    return StateSpaceModel(y, Z, T, R, kind=LINEAR_TREND, components=comps)


def seasonal_block(s: int):
    """Trend-slope-dummy-seasonal transition and selection blocks.

    State is ``(level, slope, g_t, g_t-1, ..., g_t-s+2)`` and the seasonal
    row enforces ``g_t+1 = -(g_t + ... + g_t-s+2) + w_t``.
    """
    m = s + 1
    T = np.zeros((m, m))
    T[0, 0] = T[0, 1] = T[1, 1] = 1.0
    T[2, 2:] = -1.0
    for i in range(3, m):
        T[i, i - 1] = 1.0
    R = np.zeros((m, 3))
    R[0, 0] = R[1, 1] = R[2, 2] = 1.0
    z = np.zeros(m)
    z[0] = z[2] = 1.0
    return z, T, R


def structural(y, s: int, X=None) -> StateSpaceModel:
    """Basic structural model with period ``s``, optionally with regressors ``X``.

    With ``k`` regressors the first ``k`` states of each variable block are
    the static coefficients, and ``Z_t`` carries ``X_t`` in those columns.
    ``X`` may be longer than ``y``; the extra rows are kept for forecasting.
    """
    y = as_observations(y)
    n, p = y.shape
    s = int(s)
    if s < 2:
        raise StateSpaceError(f"seasonal period must be >= 2, got s = {s}")

    z, T1, R1 = seasonal_block(s)
    k = 0
    if X is not None:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2:
            raise DimensionError("exogenous matrix X must be 2-dimensional")
        if X.shape[0] < n:
            raise DimensionError(f"X has {X.shape[0]} rows, needs at least n = {n}")
        if not np.isfinite(X).all():
            raise StateSpaceError("exogenous matrix X has non-finite entries")
        k = X.shape[1]
        T1 = block_diag(np.eye(k), T1)
        R1 = np.vstack([np.zeros((k, 3)), R1])

    mb = s + 1 + k
    uni = {"level": [k], "slope": [k + 1], "seasonal": [k + 2]}
    if k:
        uni["regression"] = list(range(k))
    comps = _block_components(uni, mb, p)
    T = block_diag(*[T1] * p)
    R = block_diag(*[R1] * p)

    if k == 0:
        Z = block_diag(*[z[None, :]] * p)
        return StateSpaceModel(y, Z, T, R, kind=STRUCTURAL, components=comps, seasonality=s)

    n_total = X.shape[0]
    Zall = np.zeros((n_total, p, p * mb))
    for j in range(p):
        off = j * mb
        Zall[:, j, off:off + k] = X
        Zall[:, j, off + k:off + mb] = z
    Z_future = Zall[n:] if n_total > n else None
    return StateSpaceModel(y, Zall[:n], T, R, kind=STRUCTURAL, components=comps,
                           Z_future=Z_future, X=X, seasonality=s)


def vehicle_tracking_matrices(rho: float, delta: float = 1.0, dims: int = 2):
    """Damped constant-velocity system: state ``(x, v)`` per axis, position observed."""
    eye = np.eye(dims)
    T = np.kron(eye, [[1.0, (1.0 - rho * delta / 2.0) * delta], [0.0, 1.0 - rho * delta]])
    R = np.kron(eye, [[0.5 * delta ** 2], [delta]])
    Z = np.kron(eye, [[1.0, 0.0]])
    return Z, T, R
