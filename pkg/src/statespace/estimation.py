"""Maximum likelihood estimation of the noise covariances ``H`` and ``Q``.

The free parameters are the lower-triangular factors of ``H`` and ``Q`` with
log-transformed diagonals, so every real vector maps to a valid pair of
covariance matrices and the optimizer can run unconstrained.
"""
from __future__ import annotations

import math
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Protocol

import numpy as np
from scipy.optimize import minimize

from . import __version__
from .exceptions import EstimationError, SingularInnovationError
from .kalman import FilterConfig, FilterOutput, canonical_variant, filter_model
from .model import NoiseCovariances, StateSpaceModel
from .smoother import SmootherOutput, run_smoother

DEGENERATE_VARIANCE = 1e-8
# relative-decrease stop; small so the gradient tolerance decides convergence
FTOL = 1e-13


# -- parametrization -----------------------------------------------------------


def n_params(p: int, r: int) -> int:
    return p * (p + 1) // 2 + r * (r + 1) // 2


def _tril_to_vec(L):
    k = L.shape[0]
    rows, cols = np.tril_indices(k)
    vec = L[rows, cols].copy()
    diag = rows == cols
    vec[diag] = np.log(vec[diag])
    return vec


def _vec_to_cov(vec, k):
    rows, cols = np.tril_indices(k)
    L = np.zeros((k, k))
    diag = rows == cols
    vals = np.array(vec, dtype=float)
    vals[diag] = np.exp(vals[diag])
    L[rows, cols] = vals
    M = L @ L.T
    return 0.5 * (M + M.T)


def decode(psi, p: int, r: int) -> NoiseCovariances:
    """Map an unconstrained vector to ``(H, Q)``."""
    psi = np.asarray(psi, dtype=float)
    nh = p * (p + 1) // 2
    if psi.shape != (n_params(p, r),):
        raise ValueError(f"parameter vector must have length {n_params(p, r)}, got {psi.shape}")
    return NoiseCovariances(_vec_to_cov(psi[:nh], p), _vec_to_cov(psi[nh:], r))


def _factor(M):
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        # semidefinite: nudge onto the interior so the log-diagonal is finite
        k = M.shape[0]
        jitter = max(np.finfo(float).eps * np.trace(M), 1e-300)
        while True:
            try:
                return np.linalg.cholesky(M + jitter * np.eye(k))
            except np.linalg.LinAlgError:
                jitter *= 10.0


def encode(cov: NoiseCovariances) -> np.ndarray:
    """Inverse of :func:`decode`.

    Exact up to rounding for positive definite ``H`` and ``Q``; singular
    matrices are encoded after adding a tiny multiple of the identity.
    """
    return np.concatenate([_tril_to_vec(_factor(M)) for M in (cov.H, cov.Q)])


def degenerate_start(p: int, r: int, variance: float = DEGENERATE_VARIANCE) -> np.ndarray:
    """Parameters whose decoded covariances are ``variance * I``."""
    eye = NoiseCovariances(variance * np.eye(p), variance * np.eye(r))
    return encode(eye)


# -- likelihood ----------------------------------------------------------------


def log_likelihood(model: StateSpaceModel, cov: NoiseCovariances,
                   config: Optional[FilterConfig] = None) -> float:
    """Gaussian log-likelihood from the prediction-error decomposition.

    Sums ``-(k_t log 2 pi + log|F_t| + v_t' F_t^-1 v_t) / 2`` over periods
    with ``k_t`` observed values; fully missing periods contribute nothing.
    Returns ``-inf`` when an innovation covariance is singular.
    """
    try:
        return filter_model(model, cov, config).loglik
    except SingularInnovationError:
        return -math.inf


def loglik_from_innovations(v, F) -> float:
    """Log-likelihood contribution of given innovations ``v`` (n x p) and covariances ``F``."""
    v = np.atleast_2d(np.asarray(v, float))
    F = np.asarray(F, float).reshape(v.shape[0], v.shape[1], v.shape[1])
    total = 0.0
    for vt, Ft in zip(v, F):
        obs = ~np.isnan(vt)
        if not obs.any():
            continue
        Fo = Ft[np.ix_(obs, obs)]
        _, logdet = np.linalg.slogdet(Fo)
        total -= 0.5 * (obs.sum() * math.log(2 * math.pi) + logdet + vt[obs] @ np.linalg.solve(Fo, vt[obs]))
    return total


def fd_gradient(f: Callable, x, rel_step: float = 1e-6):
    """Central differences with step ``rel_step * (1 + |x_i|)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (xp[i] - xm[i])
    return g


# -- optimizer -----------------------------------------------------------------


@dataclass(frozen=True)
class OptimizerConfig:
    n_seeds: int = 3
    rng_seed: int = 0
    seed_box: float = 5.0
    gtol: float = 1e-6
    max_iter: int = 10_000
    verbosity: int = 0

    def __post_init__(self):
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")
        if not self.seed_box > 0:
            raise ValueError("seed_box must be positive")
        if not self.gtol > 0:
            raise ValueError("gtol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.verbosity not in (0, 1, 2):
            raise ValueError("verbosity must be 0, 1 or 2")


@dataclass
class SeedResult:
    seed: int
    initial_loglik: float
    loglik: float
    psi: np.ndarray
    n_iter: int
    elapsed: float
    message: str = ""

    @property
    def finite(self):
        return math.isfinite(self.loglik)


class Optimizer(Protocol):
    """Anything that maximizes a black-box log-likelihood over R^k."""

    name: str

    def maximize(self, loglik: Callable[[np.ndarray], float], dim: int,
                 start_hint: Optional[np.ndarray] = None, reporter=None) -> list[SeedResult]: ...


class Reporter:
    """Progress output gated by verbosity (0 silent, 1 summary, 2 plus iteration log)."""

    RULE = "-" * 62
    BANNER = "=" * 62

    def __init__(self, verbosity=0, stream=None):
        self.verbosity = verbosity
        self.stream = stream

    def _out(self, text, level=1):
        if self.verbosity >= level:
            print(text, file=self.stream or sys.stdout)

    def start(self, n_seeds):
        self._out(self.BANNER)
        self._out(f"statespace v{__version__}".center(62))
        self._out(self.RULE)
        self._out("Estimating noise covariances by maximum likelihood.".center(62))
        self._out(f"Optimizing from {n_seeds} random starts plus seed 0.".center(62))
        self._out(self.RULE)
        self._out("Seed 0 starts near zero noise (degenerate fits).".center(62))
        self._out(self.RULE)
        self._out(TABLE_HEADER)

    def iteration(self, seed, it, loglik):
        self._out(f"   seed {seed:>3}  iter {it:>5}  log-likelihood {loglik:.6f}", level=2)

    def seed_done(self, res: SeedResult):
        self._out(format_trace_row(res.seed, res.loglik, res.elapsed))

    def finish(self, loglik):
        self._out(self.RULE)
        self._out("Estimation finished.".center(62))
        self._out(f"Log-likelihood: {loglik:.4f}".center(62))
        self._out(self.BANNER)


TABLE_HEADER = "||    seed    |     log-likelihood      |      time (s)     ||"


def format_trace_row(seed, loglik, elapsed):
    return f"||{seed:>8}    |{loglik:>19.4f}      |{elapsed:>14.2f}     ||"


def format_trace(trace) -> str:
    """Render per-seed results as the seed / log-likelihood / time table."""
    rows = [TABLE_HEADER] + [format_trace_row(r.seed, r.loglik, r.elapsed) for r in trace]
    return "\n".join(rows)


class RandomSeedsLBFGS:
    """L-BFGS from a degenerate start (seed 0) and ``n_seeds`` uniform random starts.

    Each seed draws from its own generator seeded with ``(rng_seed, seed)``,
    so results do not depend on the order seeds are run in.
    """

    name = "RandomSeedsLBFGS"

    def __init__(self, config: Optional[OptimizerConfig] = None):
        self.config = config or OptimizerConfig()

    def starts(self, dim, degenerate):
        cfg = self.config
        out = [np.asarray(degenerate, float)]
        for seed in range(1, cfg.n_seeds + 1):
            rng = np.random.default_rng([cfg.rng_seed, seed])
            out.append(rng.uniform(-cfg.seed_box, cfg.seed_box, size=dim))
        return out

    def maximize(self, loglik, dim, start_hint=None, reporter=None):
        reporter = reporter or Reporter(0)
        degenerate = np.full(dim, math.log(DEGENERATE_VARIANCE) / 2) if start_hint is None else start_hint
        t0 = time.perf_counter()
        results = []
        for seed, x0 in enumerate(self.starts(dim, degenerate)):
            res = self._run_seed(loglik, x0, seed, reporter)
            res.elapsed = time.perf_counter() - t0
            reporter.seed_done(res)
            results.append(res)
        return results

    def _run_seed(self, loglik, x0, seed, reporter):
        best = {"x": np.array(x0, float), "f": -math.inf}

        def value(x):
            ll = loglik(x)
            if ll > best["f"]:
                best["x"], best["f"] = np.array(x, float), ll
            return ll

        def objective(x):
            ll = value(x)
            if not math.isfinite(ll):
                # keeps the line search in the finite region
                return 1e300, np.zeros_like(x)
            grad = fd_gradient(lambda z: -_finite_or(loglik(z)), x)
            return -ll, grad

        initial = value(x0)
        it = [0]

        def callback(xk):
            it[0] += 1
            if reporter.verbosity >= 2:
                reporter.iteration(seed, it[0], best["f"])

        message = ""
        if math.isfinite(initial):
            try:
                opt = minimize(objective, x0, jac=True, method="L-BFGS-B", callback=callback,
                               options={"gtol": self.config.gtol, "ftol": FTOL,
                                        "maxiter": self.config.max_iter})
                message = str(opt.message)
            except (FloatingPointError, ValueError, np.linalg.LinAlgError) as exc:
                message = f"optimizer stopped: {exc}"
        else:
            message = "non-finite log-likelihood at the starting point"
        return SeedResult(seed, initial, best["f"], best["x"], it[0], 0.0, message)


def _finite_or(x, fallback=-1e300):
    return x if math.isfinite(x) else fallback


# -- estimation ----------------------------------------------------------------


class Estimate(NamedTuple):
    cov: NoiseCovariances
    loglik: float
    trace: list


def estimate(model: StateSpaceModel, config: Optional[OptimizerConfig] = None,
             filter_config: Optional[FilterConfig] = None, optimizer: Optional[Optimizer] = None,
             stream=None) -> Estimate:
    """Maximize the log-likelihood over ``(H, Q)`` and return the best seed."""
    config = config or OptimizerConfig()
    filter_config = filter_config or FilterConfig()
    optimizer = optimizer or RandomSeedsLBFGS(config)
    p, r = model.p, model.r
    reporter = Reporter(config.verbosity, stream)

    def loglik(psi):
        try:
            # line searches can probe huge steps; overflowing covariances just score -inf
            with np.errstate(over="ignore", invalid="ignore"):
                cov = decode(psi, p, r)
        except Exception:
            return -math.inf
        return log_likelihood(model, cov, filter_config)

    reporter.start(config.n_seeds)
    trace = optimizer.maximize(loglik, n_params(p, r), degenerate_start(p, r), reporter)
    finite = [res for res in trace if res.finite]
    if not finite:
        diag = [f"seed {res.seed}: {res.message}" for res in trace]
        raise EstimationError("no seed produced a finite log-likelihood; " + "; ".join(diag), diag)
    best = max(finite, key=lambda res: res.loglik)
    reporter.finish(best.loglik)
    return Estimate(decode(best.psi, p, r), best.loglik, trace)


@dataclass(eq=False)
class FittedStateSpace:
    """Model, filter and smoother output, and the estimated covariances."""

    model: StateSpaceModel
    filter: FilterOutput
    smoother: SmootherOutput
    covariance: NoiseCovariances
    filter_type: str
    optimization_method: str
    filter_config: FilterConfig = field(default_factory=FilterConfig)
    trace: list = field(default_factory=list)

    @property
    def loglik(self) -> float:
        return self.filter.loglik


def evaluate(model: StateSpaceModel, cov: NoiseCovariances, filter_config: Optional[FilterConfig] = None,
             optimization_method: str = "fixed", trace=None) -> FittedStateSpace:
    """Filter and smooth at given covariances (no estimation)."""
    filter_config = filter_config or FilterConfig()
    fo = filter_model(model, cov, filter_config)
    sm = run_smoother(model, cov, fo)
    return FittedStateSpace(model, fo, sm, cov, canonical_variant(filter_config.variant),
                            optimization_method, filter_config, list(trace or []))


def fit(model: StateSpaceModel, filter_config: Optional[FilterConfig] = None,
        optimizer_config: Optional[OptimizerConfig] = None, optimizer: Optional[Optimizer] = None,
        stream=None) -> FittedStateSpace:
    """Estimate ``H`` and ``Q``, then filter and smooth at the optimum."""
    filter_config = filter_config or FilterConfig()
    optimizer_config = optimizer_config or OptimizerConfig()
    optimizer = optimizer or RandomSeedsLBFGS(optimizer_config)
    est = estimate(model, optimizer_config, filter_config, optimizer, stream)
    return evaluate(model, est.cov, filter_config, optimizer.name, est.trace)
