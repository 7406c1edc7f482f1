"""Linear Gaussian state-space model representation.

    y_t       = Z_t alpha_t + eps_t,     eps_t ~ N(0, H)
    alpha_t+1 = T alpha_t + R eta_t,     eta_t ~ N(0, Q)

Observations are an ``n x p`` array with NaN marking missing entries. Only
``Z`` may vary in time; ``T``, ``R``, ``H`` and ``Q`` are constant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import DimensionError, StateSpaceError

USER_DEFINED = "user"


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def as_observations(y) -> np.ndarray:
    """Coerce ``y`` to an ``n x p`` float array (a vector becomes one column)."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2:
        raise DimensionError(f"observations must be a vector or an n x p matrix, got ndim={y.ndim}")
    n, p = y.shape
    if p < 1:
        raise DimensionError("observations need at least one variable (p >= 1)")
    if n < 2:
        raise DimensionError(f"observations need at least two periods, got n = {n}")
    if np.isinf(y).any():
        raise StateSpaceError("observations contain infinite values; use NaN for missing entries")
    return y


def _as_matrix(name, a):
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        # a bare vector is read as a single row, e.g. Z = [1, 0]
        a = a[None, :]
    if a.ndim != 2:
        raise DimensionError(f"{name} must be a 2-dimensional matrix, got ndim={a.ndim}")
    if not np.isfinite(a).all():
        raise StateSpaceError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Observations plus system matrices ``Z_t``, ``T`` and ``R``.

    ``Z`` is either a constant ``p x m`` matrix or an ``n x p x m`` array of
    per-period matrices. ``Z_future`` optionally holds observation matrices
    for periods after ``n`` (needed to forecast models with regressors).
    ``kind`` and ``components`` are filled in by the predefined builders;
    ``components`` maps a component name to one state-index list per
    observed variable.
    """

    y: np.ndarray
    Z: np.ndarray
    T: np.ndarray
    R: np.ndarray
    kind: str = USER_DEFINED
    components: dict = field(default_factory=dict)
    Z_future: Optional[np.ndarray] = None
    X: Optional[np.ndarray] = None
    seasonality: Optional[int] = None

    def __post_init__(self):
        y = as_observations(self.y)
        n, p = y.shape
        T = _as_matrix("T", self.T)
        R = _as_matrix("R", self.R)
        Z = np.asarray(self.Z, dtype=float)
        if Z.ndim < 3:
            Z = _as_matrix("Z", Z)
        elif Z.ndim == 3:
            if not np.isfinite(Z).all():
                raise StateSpaceError("Z has non-finite entries")
            if Z.shape[0] != n:
                raise DimensionError(f"Z sequence length {Z.shape[0]} ≠ n = {n}")
        else:
            raise DimensionError(f"Z must be 2- or 3-dimensional, got ndim={Z.ndim}")

        m = T.shape[0]
        if T.shape != (m, m):
            raise DimensionError(f"T must be square, got shape {T.shape}")
        if Z.shape[-2] != p:
            raise DimensionError(f"Z has {Z.shape[-2]} rows but y has p = {p} columns")
        if Z.shape[-1] != m:
            raise DimensionError(f"Z has {Z.shape[-1]} columns but T is {m} x {m}")
        if R.shape[0] != m:
            raise DimensionError(f"R has {R.shape[0]} rows but T is {m} x {m}")
        if R.shape[1] > m:
            raise DimensionError(f"R has r = {R.shape[1]} columns, more than m = {m}")

        Zf = self.Z_future
        if Zf is not None:
            Zf = np.asarray(Zf, dtype=float)
            if Zf.ndim == 2:
                Zf = Zf[None]
            if Zf.ndim != 3 or Zf.shape[1:] != (p, m):
                raise DimensionError(f"Z_future must be k x {p} x {m}, got shape {Zf.shape}")
            if not np.isfinite(Zf).all():
                raise StateSpaceError("Z_future has non-finite entries")
            Zf = _frozen(Zf)

        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "Z", _frozen(Z))
        object.__setattr__(self, "T", _frozen(T))
        object.__setattr__(self, "R", _frozen(R))
        object.__setattr__(self, "Z_future", Zf)
        if self.X is not None:
            object.__setattr__(self, "X", _frozen(self.X))
        object.__setattr__(self, "components", dict(self.components))
        mask = np.isnan(self.y)
        mask.setflags(write=False)
        object.__setattr__(self, "missing", mask)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.y.shape[1]

    @property
    def m(self) -> int:
        return self.T.shape[0]

    @property
    def r(self) -> int:
        return self.R.shape[1]

    @property
    def dims(self) -> tuple:
        return (self.n, self.p, self.m, self.r)

    @property
    def time_varying(self) -> bool:
        return self.Z.ndim == 3

    @property
    def future_periods(self) -> int:
        """Number of periods past ``n`` for which ``Z`` is known (unbounded if constant)."""
        if not self.time_varying:
            return np.iinfo(np.int64).max
        return 0 if self.Z_future is None else self.Z_future.shape[0]

    def z_at(self, t: int) -> np.ndarray:
        """Observation matrix for period ``t`` (1-based, ``1 <= t <= n``)."""
        if not 1 <= t <= self.n:
            raise IndexError(f"period t = {t} outside 1..{self.n}")
        return self.Z[t - 1] if self.time_varying else self.Z

    def z_sequence(self, horizon: int = 0) -> np.ndarray:
        """``(n + horizon) x p x m`` stack of observation matrices."""
        total = self.n + horizon
        if not self.time_varying:
            return np.broadcast_to(self.Z, (total, self.p, self.m))
        if horizon == 0:
            return self.Z
        have = self.future_periods
        if have < horizon:
            raise DimensionError(
                f"observation matrices known for {have} future periods, {horizon} requested "
                f"({horizon - have} missing)"
            )
        return np.concatenate([self.Z, self.Z_future[:horizon]], axis=0)

    def with_observations(self, y) -> "StateSpaceModel":
        """Same system on new observations of identical length."""
        return StateSpaceModel(y, self.Z, self.T, self.R, self.kind, self.components,
                               self.Z_future, self.X, self.seasonality)

    def extended(self, horizon: int) -> "StateSpaceModel":
        """Copy with ``horizon`` all-missing periods appended."""
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        Z = self.z_sequence(horizon) if self.time_varying else self.Z
        rest = None
        if self.time_varying and self.Z_future is not None:
            rest = self.Z_future[horizon:]
            rest = rest if len(rest) else None
        y = np.vstack([self.y, np.full((horizon, self.p), np.nan)])
        return StateSpaceModel(y, Z, self.T, self.R, self.kind, self.components,
                               rest, self.X, self.seasonality)


def new_state_space_model(y, Z, T, R, Z_future=None) -> StateSpaceModel:
    """Build and validate a user-defined model.

    ``Z`` may be a constant ``p x m`` matrix or an ``n x p x m`` array.
    """
    return StateSpaceModel(y, Z, T, R, Z_future=Z_future)


def z_at(model: StateSpaceModel, t: int) -> np.ndarray:
    return model.z_at(t)


def _check_covariance(name, M, dim):
    M = _as_matrix(name, M)
    if M.shape != (dim, dim):
        raise DimensionError(f"{name} must be {dim} x {dim}, got {M.shape}")
    scale = max(1.0, np.abs(M).max())
    if np.abs(M - M.T).max() > 1e-12 * scale:
        raise StateSpaceError(f"{name} is not symmetric")
    if np.linalg.eigvalsh(M).min() < -1e-10 * scale:
        raise StateSpaceError(f"{name} is not positive semidefinite")
    return _frozen(M)


@dataclass(frozen=True, eq=False)
class NoiseCovariances:
    """Observation noise covariance ``H`` (p x p) and state noise covariance ``Q`` (r x r)."""

    H: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        H = _as_matrix("H", self.H)
        Q = _as_matrix("Q", self.Q)
        object.__setattr__(self, "H", _check_covariance("H", H, H.shape[0]))
        object.__setattr__(self, "Q", _check_covariance("Q", Q, Q.shape[0]))

    def check(self, model: StateSpaceModel) -> "NoiseCovariances":
        if self.H.shape[0] != model.p:
            raise DimensionError(f"H is {self.H.shape[0]} x {self.H.shape[0]} but model has p = {model.p}")
        if self.Q.shape[0] != model.r:
            raise DimensionError(f"Q is {self.Q.shape[0]} x {self.Q.shape[0]} but model has r = {model.r}")
        return self
