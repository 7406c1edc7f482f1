"""Command-line front end.

    statespace fit DATA.csv --model structural --s 12 --out results/
    statespace forecast results/model.json --N 24 --out forecast.csv
    statespace simulate results/model.json --N 24 --S 1000 --quantiles 0.05,0.95 --out sim.csv
    statespace components results/model.json --out components.csv
    statespace generate consumption --rng-seed 1 --out data/
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import datasets
from .builders import LINEAR_TREND, LOCAL_LEVEL, STRUCTURAL
from .estimation import OptimizerConfig, fit
from .exceptions import StateSpaceError
from .io import (CsvSeries, artifact_document, build_model, load_artifact, load_csv, load_matrices,
                 save_artifact, save_matrices, write_csv)
from .kalman import FilterConfig
from .model import USER_DEFINED
from .prediction import forecast, scenario_quantiles, simulate
from .smoother import smoothed_components

COMMANDS = ("fit", "forecast", "simulate", "components", "generate")
MODELS = (LOCAL_LEVEL, LINEAR_TREND, STRUCTURAL, USER_DEFINED)
EXAMPLES = ("linear_trend_gap", "vehicle_tracking", "consumption")
COMPONENT_ORDER = ("regression", "level", "slope", "seasonal")


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    exog: Optional[str] = None
    matrices: Optional[str] = None
    model: str = LOCAL_LEVEL
    s: Optional[int] = None
    filter: str = "standard"
    seeds: int = 3
    rng_seed: int = 0
    N: Optional[int] = None
    S: Optional[int] = None
    quantiles: list = field(default_factory=lambda: [0.05, 0.95])
    verbosity: int = 1
    out: Optional[str] = None
    log: bool = False
    example: Optional[str] = None
    n: Optional[int] = None
    rho: float = 0.1
    delta: float = 1.0

    def validate(self):
        if self.command not in COMMANDS:
            raise StateSpaceError(f"unknown command {self.command!r}")
        if self.out is None:
            raise StateSpaceError(f"{self.command} requires --out")
        if self.verbosity not in (0, 1, 2):
            raise StateSpaceError("--verbosity must be 0, 1 or 2")
        if self.command == "generate":
            if self.example not in EXAMPLES:
                raise StateSpaceError(f"unknown example {self.example!r}; choose from {', '.join(EXAMPLES)}")
            return self
        if self.input is None:
            raise StateSpaceError(f"{self.command} requires an input file")
        if self.command == "fit":
            if self.model not in MODELS:
                raise StateSpaceError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
            if self.model == STRUCTURAL and (self.s is None or self.s < 2):
                raise StateSpaceError("structural model requires --s >= 2")
            if self.model == USER_DEFINED and self.matrices is None:
                raise StateSpaceError("user model requires --matrices")
            if self.exog and self.model != STRUCTURAL:
                raise StateSpaceError("--exog is only supported with --model structural")
            if self.seeds < 1:
                raise StateSpaceError("--seeds must be >= 1")
            if self.filter not in ("standard", "sqrt"):
                raise StateSpaceError("--filter must be 'standard' or 'sqrt'")
        if self.command in ("forecast", "simulate") and (self.N is None or self.N < 1):
            raise StateSpaceError(f"{self.command} requires --N >= 1")
        if self.command == "simulate":
            if self.S is None or self.S < 1:
                raise StateSpaceError("simulate requires --S >= 1")
            if not self.quantiles or any(not 0 < q < 1 for q in self.quantiles):
                raise StateSpaceError("--quantiles must be probabilities strictly between 0 and 1")
        return self


def _say(cfg, text):
    if cfg.verbosity >= 1:
        print(text)


def _prefixed(names, base):
    return [base] if len(names) == 1 else [f"{nm}_{base}" for nm in names]


def components_table(fitted, series: CsvSeries):
    model = fitted.model
    header, cols = [], []
    names = series.names
    if model.components:
        for comp in COMPONENT_ORDER:
            if comp not in model.components:
                continue
            mean, var = smoothed_components(fitted, comp)
            for j in range(model.p):
                header += [_prefixed(names, comp)[j], _prefixed(names, comp + "_var")[j]]
                cols += [mean[:, j], var[:, j]]
    else:
        sm = fitted.smoother
        for i in range(model.m):
            header += [f"state{i + 1}", f"state{i + 1}_var"]
            cols += [sm.alpha[:, i], sm.V[:, i, i]]
    return header, cols


def _write_components(path, fitted, series):
    header, cols = components_table(fitted, series)
    write_csv(path, header, cols, series.labels, series.label_name or "t")


def _fit(cfg: RunConfig):
    series = load_csv(cfg.input)
    y = series.values
    if cfg.log:
        if np.nanmin(y) <= 0:
            raise StateSpaceError("--log needs strictly positive observations")
        y = np.log(y)
    X = None
    if cfg.exog:
        X = load_csv(cfg.exog).values
        if np.isnan(X).any():
            raise StateSpaceError(f"{cfg.exog}: exogenous values may not be missing")
    matrices = load_matrices(cfg.matrices) if cfg.matrices else None
    model = build_model(cfg.model, y, cfg.s, X, matrices)
    fc = FilterConfig(variant=cfg.filter)
    oc = OptimizerConfig(n_seeds=cfg.seeds, rng_seed=cfg.rng_seed, verbosity=cfg.verbosity)
    fitted = fit(model, fc, oc)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    series = CsvSeries(y, series.names, series.labels, series.label_name)
    echo = {k: v for k, v in asdict(cfg).items() if k in (
        "command", "input", "exog", "matrices", "model", "s", "filter", "seeds", "rng_seed", "log")}
    save_artifact(out / "model.json", artifact_document(fitted, series, echo))
    _write_components(out / "components.csv", fitted, series)
    _say(cfg, f"wrote {out / 'model.json'} and {out / 'components.csv'}")


def _forecast(cfg: RunConfig):
    fitted, series, _ = load_artifact(cfg.input)
    fc = forecast(fitted, cfg.N)
    header, cols = [], []
    for j in range(fitted.model.p):
        header += [_prefixed(series.names, "mean")[j], _prefixed(series.names, "std")[j]]
        cols += [fc.mean[:, j], fc.std[:, j]]
    write_csv(cfg.out, header, cols, label_name="h")
    _say(cfg, f"wrote {cfg.N}-period forecast to {cfg.out}")


def quantile_name(q):
    pct = q * 100
    return f"q{int(round(pct)):02d}" if abs(pct - round(pct)) < 1e-9 else f"q{pct:g}"


def _simulate(cfg: RunConfig):
    fitted, series, _ = load_artifact(cfg.input)
    sim = simulate(fitted, cfg.N, cfg.S, cfg.rng_seed)
    quant = scenario_quantiles(sim, cfg.quantiles)
    header, cols = [], []
    width = len(str(cfg.S))
    for j in range(fitted.model.p):
        header.append(_prefixed(series.names, "mean")[j])
        cols.append(sim.scenarios[:, :, j].mean(axis=1))
        for k, q in enumerate(cfg.quantiles):
            header.append(_prefixed(series.names, quantile_name(q))[j])
            cols.append(quant[:, j, k])
    for j in range(fitted.model.p):
        for s in range(cfg.S):
            header.append(_prefixed(series.names, f"s{s + 1:0{width}d}")[j])
            cols.append(sim.scenarios[:, s, j])
    write_csv(cfg.out, header, cols, label_name="h")
    _say(cfg, f"wrote {cfg.S} scenarios over {cfg.N} periods to {cfg.out}")


def _components(cfg: RunConfig):
    fitted, series, _ = load_artifact(cfg.input)
    _write_components(cfg.out, fitted, series)
    _say(cfg, f"wrote smoothed components to {cfg.out}")


def generate_example(name, rng_seed, out, n=None, horizon=24, rho=0.1, delta=1.0):
    """Write one of the synthetic example datasets into directory ``out``; returns the paths."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    if name == "linear_trend_gap":
        y, _ = datasets.linear_trend_gap(rng_seed, n or 77)
        path = out / "linear_trend_gap.csv"
        write_csv(path, ["y"], [y])
        return [path]
    if name == "vehicle_tracking":
        y, states, (Z, T, R) = datasets.vehicle_tracking(rng_seed, n or 400, rho, delta)
        paths = [out / "vehicle_tracking.csv", out / "vehicle_tracking_states.csv",
                 out / "vehicle_tracking_matrices.json"]
        write_csv(paths[0], ["y1", "y2"], [y[:, 0], y[:, 1]])
        write_csv(paths[1], ["x1", "v1", "x2", "v2"], list(states.T))
        save_matrices(paths[2], Z, T, R)
        return paths
    if name == "consumption":
        n = n or 120
        y, X, _, _ = datasets.consumption(rng_seed, n, horizon)
        labels = datasets.monthly_labels(2000, n + horizon)
        paths = [out / "consumption.csv", out / "temperature.csv"]
        write_csv(paths[0], ["consumption"], [y], labels[:n], "date")
        write_csv(paths[1], ["temperature"], [X[:, 0]], labels, "date")
        return paths
    raise StateSpaceError(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}")


def _generate(cfg: RunConfig):
    paths = generate_example(cfg.example, cfg.rng_seed, cfg.out, cfg.n, cfg.N or 24, cfg.rho, cfg.delta)
    _say(cfg, "wrote " + ", ".join(str(p) for p in paths))


HANDLERS = {"fit": _fit, "forecast": _forecast, "simulate": _simulate,
            "components": _components, "generate": _generate}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        config.validate()
        HANDLERS[config.command](config)
    except (StateSpaceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _probabilities(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid quantile list {text!r}") from None


def build_parser():
    parser = argparse.ArgumentParser(prog="statespace", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", required=True, help="output file (or directory for fit/generate)")
        p.add_argument("--verbosity", type=int, default=1, choices=(0, 1, 2))
        p.add_argument("--rng-seed", dest="rng_seed", type=int, default=0)

    p = sub.add_parser("fit", help="estimate a model and write the artifact plus smoothed components")
    p.add_argument("input", help="observations CSV")
    p.add_argument("--model", default=LOCAL_LEVEL, choices=MODELS)
    p.add_argument("--s", type=int, help="seasonal period (structural model)")
    p.add_argument("--exog", help="CSV of exogenous regressors, may extend past the sample")
    p.add_argument("--matrices", help="JSON file with Z, T, R for --model user")
    p.add_argument("--filter", default="standard", choices=("standard", "sqrt"))
    p.add_argument("--seeds", type=int, default=3, help="number of random optimizer starts")
    p.add_argument("--log", action="store_true", help="fit the elementwise log of the data")
    common(p)

    p = sub.add_parser("forecast", help="point forecasts and predictive standard deviations")
    p.add_argument("input", help="model artifact written by fit")
    p.add_argument("--N", type=int, required=True, help="forecast horizon")
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo scenarios with quantile bands")
    p.add_argument("input", help="model artifact written by fit")
    p.add_argument("--N", type=int, required=True, help="horizon")
    p.add_argument("--S", type=int, required=True, help="number of scenarios")
    p.add_argument("--quantiles", type=_probabilities, default=[0.05, 0.95])
    common(p)

    p = sub.add_parser("components", help="smoothed state table from an artifact")
    p.add_argument("input", help="model artifact written by fit")
    common(p)

    p = sub.add_parser("generate", help="write a synthetic example dataset")
    p.add_argument("example", choices=EXAMPLES)
    p.add_argument("--n", type=int, help="sample length")
    p.add_argument("--N", type=int, help="regressor rows beyond the sample (consumption)")
    p.add_argument("--rho", type=float, default=0.1, help="speed damping (vehicle_tracking)")
    p.add_argument("--delta", type=float, default=1.0, help="time step (vehicle_tracking)")
    common(p)
    return parser


def parse_args(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    if ns["command"] == "generate":
        ns["example"] = ns.pop("example")
    return RunConfig(**ns)


def main(argv=None):
    sys.exit(run(parse_args(argv)))


if __name__ == "__main__":
    main()
