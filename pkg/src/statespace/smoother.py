"""Fixed-interval state smoother (backward pass over filter output)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .exceptions import DimensionError, StateSpaceError
from .kalman import FilterOutput
from .model import StateSpaceModel


@dataclass(eq=False)
class SmootherOutput:
    """Smoothed means ``alpha`` (n x m) and covariances ``V`` (n x m x m)."""

    alpha: np.ndarray
    V: np.ndarray


def _gain_solve(Pn, B):
    """``Pn^+ B`` by Cholesky, falling back to an eigenvalue pseudo-inverse."""
    try:
        return cho_solve(cho_factor(Pn, lower=True), B)
    except LinAlgError:
        w, U = np.linalg.eigh(Pn)
        keep = w > 1e-13 * max(w.max(), 0.0)
        winv = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
        return U @ (winv[:, None] * (U.T @ B))


def run_smoother(model: StateSpaceModel, cov, filter_output: FilterOutput) -> SmootherOutput:
    """Backward pass for ``E[alpha_t | Y_n]`` and ``V[alpha_t | Y_n]``.

    Uses the Rauch-Tung-Striebel form with smoother gain
    ``J_t = P_t|t T' P_t+1^-1`` and the covariance written as a sum of PSD terms

        V_t = (I - J T) P_t|t (I - J T)' + J R Q R' J' + J V_t+1 J'

    which equals the ``r_t``/``N_t`` recursion in exact arithmetic but does
    not lose accuracy in proportion to the square of the diffuse prior
    variance. Missing periods need no special case: there ``P_t|t = P_t``.
    """
    fo = filter_output
    n, m = model.n, model.m
    if fo.att.shape != (n, m) or fo.a.shape != (n + 1, m) or fo.v.shape != (n, model.p):
        raise DimensionError(
            f"filter output shapes {fo.att.shape}/{fo.a.shape} do not match model (n={n}, m={m})")
    cov.check(model)

    T = model.T
    RQR = model.R @ cov.Q @ model.R.T
    eye = np.eye(m)
    alpha = np.empty((n, m))
    V = np.empty((n, m, m))
    alpha[-1] = fo.att[-1]
    V[-1] = fo.Ptt[-1]
    for t in range(n - 2, -1, -1):
        Ptt = fo.Ptt[t]
        J = _gain_solve(fo.P[t + 1], T @ Ptt).T
        alpha[t] = fo.att[t] + J @ (alpha[t + 1] - fo.a[t + 1])
        IJ = eye - J @ T
        Vt = IJ @ Ptt @ IJ.T + J @ RQR @ J.T + J @ V[t + 1] @ J.T
        V[t] = 0.5 * (Vt + Vt.T)
    return SmootherOutput(alpha, V)


def _component_indices(model, component):
    if component not in model.components:
        available = ", ".join(sorted(model.components)) or "none"
        raise StateSpaceError(
            f"component {component!r} not present in a {model.kind} model (available: {available})")
    return model.components[component]


def smoothed_components(fitted, component: str):
    """Smoothed mean and variance of a named component, each ``n x p``.

    For ``regression`` the series is the fitted regression effect
    ``theta' X_t`` per variable, with variance ``X_t' V_theta X_t``.
    """
    model = fitted.model
    sm = fitted.smoother
    idx = _component_indices(model, component)
    n, p = model.n, model.p
    mean = np.empty((n, p))
    var = np.empty((n, p))
    if component == "regression":
        X = model.X[:n]
        for j, ix in enumerate(idx):
            theta = sm.alpha[:, ix]
            mean[:, j] = np.einsum("tk,tk->t", X, theta)
            Vt = sm.V[:, ix][:, :, ix]
            var[:, j] = np.einsum("tk,tkl,tl->t", X, Vt, X)
        return mean, var
    for j, ix in enumerate(idx):
        i = ix[0]
        mean[:, j] = sm.alpha[:, i]
        var[:, j] = sm.V[:, i, i]
    return mean, var
