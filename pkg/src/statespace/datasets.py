"""Bundled and synthetic example data."""
from __future__ import annotations

import numpy as np

from .builders import structural, vehicle_tracking_matrices

# Monthly international airline passengers (thousands), Jan 1949 - Dec 1960.
_AIRLINE = """
112 118 132 129 121 135 148 148 136 119 104 118
115 126 141 135 125 149 170 170 158 133 114 140
145 150 178 163 172 178 199 199 184 162 146 166
171 180 193 181 183 218 230 242 209 191 172 194
196 196 236 235 229 243 264 272 237 211 180 201
204 188 235 227 234 264 302 293 259 229 203 229
242 233 267 269 270 315 364 347 312 274 237 278
284 277 317 313 318 374 413 405 355 306 271 306
315 301 356 348 355 422 465 467 404 347 305 336
340 318 362 348 363 435 491 505 404 359 310 337
360 342 406 396 420 472 548 559 463 407 362 405
417 391 419 461 472 535 622 606 508 461 390 432
"""


def monthly_labels(start_year: int, count: int) -> list[str]:
    return [f"{start_year + i // 12:04d}-{i % 12 + 1:02d}" for i in range(count)]


def airline_passengers():
    """``(labels, passengers)`` for the 144-month airline series."""
    values = np.array(_AIRLINE.split(), dtype=float)
    return monthly_labels(1949, values.size), values


def linear_trend_gap(rng_seed: int = 0, n: int = 77, gap=(10, 20)):
    """Trend ``1, 1.25, ..., 20`` plus N(0, 0.25) noise with periods ``gap`` (1-based, inclusive) removed."""
    rng = np.random.default_rng(rng_seed)
    truth = 1.0 + 0.25 * np.arange(n)
    y = truth + 0.5 * rng.standard_normal(n)
    y[gap[0] - 1:gap[1]] = np.nan
    return y, truth


def vehicle_tracking(rng_seed: int = 0, n: int = 400, rho: float = 0.1, delta: float = 1.0,
                     q: float = 0.5, h: float = 2.0):
    """Noisy 2-D position measurements of a damped vehicle driven by random forces.

    Returns ``(y, states, (Z, T, R))`` with ``states`` holding
    ``(x1, v1, x2, v2)`` for each period.
    """
    Z, T, R = vehicle_tracking_matrices(rho, delta, 2)
    rng = np.random.default_rng(rng_seed)
    p, m, r = Z.shape[0], T.shape[0], R.shape[1]
    LQ = np.sqrt(q) * np.eye(r)
    LH = np.sqrt(h) * np.eye(p)
    alpha = np.zeros((n + 1, m))
    y = np.empty((n, p))
    for t in range(n):
        y[t] = Z @ alpha[t] + LH @ rng.standard_normal(p)
        alpha[t + 1] = T @ alpha[t] + R @ (LQ @ rng.standard_normal(r))
    return y, alpha[:n], (Z, T, R)


CONSUMPTION_TRUTH = dict(
    sigma2_eps=1.0,
    Q=np.diag([0.04, 0.0004, 0.04]),
    level=100.0,
    slope=0.2,
    theta=2.5,
    seasonal=np.array([3.0, 1.5, -0.5, -2.0, -3.5, -4.0, -3.0, -1.0, 0.5, 2.5, 3.0, 3.5]),
)


def temperature_series(rng, count: int):
    t = np.arange(count)
    return 24.0 + 4.0 * np.cos(2 * np.pi * t / 12) + 0.8 * rng.standard_normal(count)


def consumption(rng_seed: int = 0, n: int = 120, horizon: int = 24):
    """Synthetic monthly consumption driven by trend, period-12 seasonality and temperature.

    Generated from a structural model with one regressor. Returns ``(y, X,
    state, truth)`` where ``X`` has ``n + horizon`` rows and ``state`` is
    the true state vector at period ``n + 1``.
    """
    rng = np.random.default_rng(rng_seed)
    X = temperature_series(rng, n + horizon)[:, None]
    model = structural(np.zeros(n), 12, X)
    truth = CONSUMPTION_TRUTH
    seas = truth["seasonal"] - truth["seasonal"].mean()
    # state: (theta, level, slope, g_t, g_t-1, ..., g_t-10)
    alpha = np.concatenate([[truth["theta"], truth["level"], truth["slope"]], seas[:11][::-1]])
    LQ = np.linalg.cholesky(truth["Q"])
    sd = np.sqrt(truth["sigma2_eps"])
    Zs = model.z_sequence()
    y = np.empty(n)
    for t in range(n):
        y[t] = Zs[t, 0] @ alpha + sd * rng.standard_normal()
        alpha = model.T @ alpha + model.R @ (LQ @ rng.standard_normal(3))
    return y, X, alpha, truth
