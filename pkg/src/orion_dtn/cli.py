"""Command-line entry points: ``simulate`` runs an experiment grid, ``fit`` fits a duration series."""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .arma import (
    ArmaOnlineState,
    ArmaParams,
    DegenerateSeriesError,
    InsufficientDataError,
    StationarityReport,
    acf,
    online_update,
    pacf,
    stationarity_check,
)
from .experiment import CellError, load_config, run_matrix, summarize, write_results_csv
from .simcore.config import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class InputError(ValueError):
    """Unreadable or malformed input file."""


@dataclass
class FitReport:
    n: int
    params: ArmaParams
    stationarity: Optional[StationarityReport]
    acf: Optional[np.ndarray]
    pacf: Optional[np.ndarray]

    def render(self) -> str:
        p = self.params
        lines = [
            f"n       {self.n}",
            f"mu      {p.mu:.6f}",
            f"phi1    {p.phi1:.6f}",
            f"phi2    {p.phi2:.6f}",
            f"theta1  {p.theta1:.6f}",
            f"sigma2  {p.sigma2:.6f}",
        ]
        if self.stationarity is None:
            lines.append("stationarity: not enough data")
        else:
            s = self.stationarity
            lines.append(
                f"stationarity: mean_stable={s.mean_stable} autocov_stable={s.autocov_stable} passed={s.passed}"
            )
        if self.acf is not None:
            lines.append("acf     " + " ".join(f"{x:+.3f}" for x in self.acf[1:]))
        if self.pacf is not None:
            lines.append("pacf    " + " ".join(f"{x:+.3f}" for x in self.pacf))
        return "\n".join(lines)


def read_column(csv_path: str, column: str) -> List[float]:
    try:
        with open(csv_path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or column not in reader.fieldnames:
                raise InputError(f"column {column!r} not found in {csv_path}")
            values = []
            for line_no, row in enumerate(reader, start=2):
                raw = (row.get(column) or "").strip()
                try:
                    values.append(float(raw))
                except ValueError:
                    raise InputError(f"{csv_path}:{line_no}: {column}={raw!r} is not a number") from None
    except OSError as exc:
        raise InputError(f"cannot read {csv_path}: {exc.strerror}") from None
    return values


def fit_series(csv_path: str, column: str, max_lag: int = 5) -> FitReport:
    """Fit ARMA(2,1) to one CSV column by streaming it through the online estimator."""
    values = read_column(csv_path, column)
    y = np.asarray(values, dtype=float)
    if len(y) < 2 or float(np.var(y)) == 0.0:
        raise DegenerateSeriesError(f"column {column!r} has zero variance")
    state = ArmaOnlineState()
    for v in values:
        online_update(state, v)
    try:
        report = stationarity_check(y)
    except InsufficientDataError:
        report = None
    lag = min(max_lag, len(y) - 2)
    rho = acf(y, lag) if lag >= 1 else None
    alpha = pacf(rho, lag) if rho is not None else None
    return FitReport(len(y), state.params, report, rho, alpha)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orion-dtn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run an experiment grid and write a results CSV")
    sim.add_argument("--config", help="key = value configuration file (defaults apply when omitted)")
    sim.add_argument("--out", required=True, help="results CSV path")
    sim.add_argument("--events", help="per-packet event log CSV (suffixed per cell when several)")
    sim.add_argument("--seed", help="override seeds (e.g. 3 or 1..10)")
    sim.add_argument("--protocol", help="override protocols (comma separated)")
    sim.add_argument("--nodes", help="override node counts")
    sim.add_argument("--speeds", help="override speeds in m/s")
    sim.add_argument("--duration", help="override duration in seconds")
    sim.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    sim.add_argument("--quiet", action="store_true", help="do not print the comparison summary")

    fit = sub.add_parser("fit", help="fit ARMA(2,1) to a CSV column")
    fit.add_argument("--input", required=True)
    fit.add_argument("--column", required=True)
    return parser


def _simulate(args) -> int:
    overrides = {
        key: value
        for key, value in (
            ("seeds", args.seed),
            ("protocols", args.protocol),
            ("nodes", args.nodes),
            ("speeds", args.speeds),
            ("duration", args.duration),
        )
        if value is not None
    }
    try:
        matrix = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows = run_matrix(matrix, workers=max(1, args.workers), events_path=args.events)
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_results_csv(rows, fh)
    except (CellError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if not args.quiet:
        print(summarize(rows))
    return EXIT_OK


def _fit(args) -> int:
    try:
        report = fit_series(args.input, args.column)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(report.render())
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        return _simulate(args)
    return _fit(args)


if __name__ == "__main__":
    sys.exit(main())
