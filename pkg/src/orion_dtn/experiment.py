"""Experiment grid: configuration parsing, batch execution, CSV and summary output.

Configuration is a flat ``key = value`` file; ``#`` starts a comment and
lists are comma separated. Integer lists also accept ``a..b`` ranges::

    protocols = orion, prophet, epidemic
    nodes = 30, 70
    speeds = 5, 10, 15, 20
    seeds = 1..10
    duration = 600
"""
from __future__ import annotations

import csv
import itertools
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import IO, Callable, Dict, List, Optional, Sequence, Tuple

from .protocols.prophet import ProphetParams
from .simcore.config import ConfigError, Protocol, ScenarioConfig
from .simcore.engine import Simulation
from .simcore.metrics import MetricsReport, write_event_log

RESULT_HEADER = (
    "protocol",
    "nodes",
    "speed_mps",
    "seed",
    "sent",
    "delivered",
    "psr",
    "avg_hop_count",
    "first_arrival_s",
    "avg_e2e_delay_s",
)


class ConfigParseError(ConfigError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class CellError(RuntimeError):
    """A scenario failed; the message names the matrix cell."""


@dataclass
class ExperimentMatrix:
    protocols: List[Protocol] = field(default_factory=lambda: [Protocol.ORION, Protocol.PROPHET])
    node_counts: List[int] = field(default_factory=lambda: [30, 50, 70])
    speeds: List[float] = field(default_factory=lambda: [5.0, 10.0, 15.0, 20.0])
    seeds: List[int] = field(default_factory=lambda: list(range(1, 11)))
    base: ScenarioConfig = field(default_factory=ScenarioConfig)

    def cells(self) -> List[ScenarioConfig]:
        """One scenario per (protocol, nodes, speed, seed), in output order."""
        keys = sorted(
            itertools.product(
                sorted({p.value for p in self.protocols}),
                sorted(set(self.node_counts)),
                sorted(set(self.speeds)),
                sorted(set(self.seeds)),
            )
        )
        return [
            replace(self.base, protocol=Protocol(p), node_count=n, speed=v, seed=s)
            for p, n, v, s in keys
        ]

    def validate(self) -> "ExperimentMatrix":
        for name, values in (
            ("protocols", self.protocols),
            ("nodes", self.node_counts),
            ("speeds", self.speeds),
            ("seeds", self.seeds),
        ):
            if not values:
                raise ConfigError(f"{name}: list must not be empty")
        for cfg in self.cells():
            try:
                cfg.validate()
            except ConfigError as exc:
                raise ConfigError(f"invalid scenario ({_cell_name(cfg)}): {exc}") from None
        return self


# --- parsing ----------------------------------------------------------------


def _float(key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite number, got {raw!r}")
    return value


def _int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _items(key: str, raw: str) -> List[str]:
    items = [x.strip() for x in raw.split(",")]
    if not items or any(not x for x in items):
        raise ConfigError(f"{key}: malformed list {raw!r}")
    return items


def _int_list(key: str, raw: str) -> List[int]:
    out: List[int] = []
    for item in _items(key, raw):
        if ".." in item:
            lo, _, hi = item.partition("..")
            a, b = _int(key, lo.strip()), _int(key, hi.strip())
            if b < a:
                raise ConfigError(f"{key}: empty range {item!r}")
            out.extend(range(a, b + 1))
        else:
            out.append(_int(key, item))
    return out


def _float_list(key: str, raw: str) -> List[float]:
    return [_float(key, x) for x in _items(key, raw)]


def _protocol_list(key: str, raw: str) -> List[Protocol]:
    out = []
    for item in _items(key, raw):
        try:
            out.append(Protocol(item.lower()))
        except ValueError:
            choices = ", ".join(p.value for p in Protocol)
            raise ConfigError(f"{key}: unknown protocol {item!r} (choose from {choices})") from None
    return out


_SCALARS: Dict[str, Tuple[str, Callable[[str, str], object]]] = {
    "duration": ("duration", _float),
    "area_width": ("area_width", _float),
    "area_height": ("area_height", _float),
    "radio_range": ("radio_range", _float),
    "delta_t": ("delta_t", _float),
    "traffic_period": ("traffic_period", _float),
    "regular_fraction": ("regular_fraction", _float),
    "fixed_count": ("fixed_count", _int),
    "ttl_hops": ("ttl_hops", _int),
    "orion_weight_speed": ("orion_weight_speed", _float),
    "orion_confidence_k": ("orion_confidence_k", _float),
}
_PROPHET = {
    "prophet_l_encounter": "l_encounter",
    "prophet_gamma": "gamma",
    "prophet_beta": "beta",
    "prophet_time_unit": "time_unit",
}
_LISTS = {
    "protocols": ("protocols", _protocol_list),
    "nodes": ("node_counts", _int_list),
    "speeds": ("speeds", _float_list),
    "seeds": ("seeds", _int_list),
}
KNOWN_KEYS = tuple(sorted({"area", *_SCALARS, *_PROPHET, *_LISTS}))


def parse_config(text: str, overrides: Optional[Dict[str, str]] = None) -> ExperimentMatrix:
    """Parse configuration text; ``overrides`` are applied after the file's own keys."""
    raw: Dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigParseError(line_no, f"expected 'key = value', got {body!r}")
        key, _, value = body.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not key:
            raise ConfigParseError(line_no, "missing key")
        if key not in KNOWN_KEYS:
            raise ConfigParseError(line_no, f"unknown key {key!r}")
        if key in raw:
            raise ConfigParseError(line_no, f"duplicate key {key!r}")
        if not value:
            raise ConfigParseError(line_no, f"{key}: missing value")
        raw[key] = value
    for key, value in (overrides or {}).items():
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}")
        raw[key] = value

    matrix = ExperimentMatrix()
    base_kwargs: Dict[str, object] = {}
    prophet_kwargs: Dict[str, float] = {}
    for key, value in raw.items():
        if key in _LISTS:
            attr, conv = _LISTS[key]
            setattr(matrix, attr, conv(key, value))
        elif key in _SCALARS:
            attr, conv = _SCALARS[key]
            base_kwargs[attr] = conv(key, value)
        elif key in _PROPHET:
            prophet_kwargs[_PROPHET[key]] = _float(key, value)
        elif key == "area":
            w, sep, h = value.lower().partition("x")
            if not sep:
                raise ConfigError(f"area: expected WIDTHxHEIGHT, got {value!r}")
            base_kwargs["area_width"] = _float(key, w.strip())
            base_kwargs["area_height"] = _float(key, h.strip())
    if prophet_kwargs:
        try:
            base_kwargs["prophet"] = ProphetParams(**prophet_kwargs)
        except ValueError as exc:
            raise ConfigError(f"prophet parameters: {exc}") from None
    matrix.base = ScenarioConfig(**base_kwargs)
    return matrix.validate()


def load_config(path: Optional[str], overrides: Optional[Dict[str, str]] = None) -> ExperimentMatrix:
    text = ""
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    return parse_config(text, overrides)


# --- execution --------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    protocol: str
    nodes: int
    speed: float
    seed: int
    metrics: MetricsReport

    @property
    def key(self) -> Tuple[str, int, float, int]:
        return (self.protocol, self.nodes, self.speed, self.seed)


def _cell_name(cfg: ScenarioConfig) -> str:
    return f"protocol={Protocol(cfg.protocol).value} nodes={cfg.node_count} speed={cfg.speed:g} seed={cfg.seed}"


def _run_cell(cfg: ScenarioConfig, events_path: Optional[str] = None) -> ResultRow:
    try:
        result = Simulation(cfg).run()
    except Exception as exc:
        raise CellError(f"{_cell_name(cfg)}: {exc}") from exc
    if events_path is not None:
        with open(events_path, "w", encoding="utf-8", newline="") as fh:
            write_event_log(result.events, fh)
    return ResultRow(Protocol(cfg.protocol).value, cfg.node_count, cfg.speed, cfg.seed, result.metrics)


def _events_path(template: str, cfg: ScenarioConfig, single: bool) -> str:
    if single:
        return template
    stem, dot, ext = template.rpartition(".")
    if not dot:
        stem, ext = template, "csv"
    suffix = f"{Protocol(cfg.protocol).value}_n{cfg.node_count}_v{cfg.speed:g}_s{cfg.seed}"
    return f"{stem}_{suffix}.{ext}"


def run_matrix(
    matrix: ExperimentMatrix, workers: int = 1, events_path: Optional[str] = None
) -> List[ResultRow]:
    """Run every cell; rows come back sorted by (protocol, nodes, speed, seed)."""
    cells = matrix.cells()
    paths = [
        _events_path(events_path, c, len(cells) == 1) if events_path else None for c in cells
    ]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, cells, paths))
    else:
        rows = [_run_cell(c, p) for c, p in zip(cells, paths)]
    return sorted(rows, key=lambda r: r.key)


# --- output -----------------------------------------------------------------


def _num(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".10g")


def write_results_csv(rows: Sequence[ResultRow], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(RESULT_HEADER)
    for r in rows:
        m = r.metrics
        writer.writerow(
            (
                r.protocol,
                r.nodes,
                _num(r.speed),
                r.seed,
                m.sent,
                m.delivered,
                _num(m.psr),
                _num(m.avg_hop_count),
                _num(m.first_packet_arrival),
                _num(m.avg_e2e_delay),
            )
        )


METRICS = (
    ("hop_count", "avg_hop_count", False),
    ("psr", "psr", True),
    ("first_arrival_s", "first_packet_arrival", False),
    ("e2e_delay_s", "avg_e2e_delay", False),
)
"""(label, MetricsReport attribute, higher_is_better)"""


@dataclass(frozen=True)
class CellStats:
    mean: Optional[float]
    std: Optional[float]
    n: int


def _stats(values: Sequence[Optional[float]]) -> CellStats:
    xs = [v for v in values if v is not None]
    if not xs:
        return CellStats(None, None, 0)
    std = statistics.pstdev(xs) if len(xs) > 1 else 0.0
    return CellStats(statistics.fmean(xs), std, len(xs))


def aggregate(rows: Sequence[ResultRow]) -> Dict[Tuple[int, float, str], Dict[str, CellStats]]:
    """Per (nodes, speed, protocol): mean/std across seeds of each metric."""
    groups: Dict[Tuple[int, float, str], List[MetricsReport]] = {}
    for r in rows:
        groups.setdefault((r.nodes, r.speed, r.protocol), []).append(r.metrics)
    return {
        key: {label: _stats([getattr(m, attr) for m in ms]) for label, attr, _ in METRICS}
        for key, ms in sorted(groups.items())
    }


@dataclass(frozen=True)
class TrendCell:
    """ORION vs PRoPHET orderings in one (nodes, speed) cell, on seed means."""

    nodes: int
    speed: float
    fewer_hops: bool
    higher_psr: bool
    earlier_first_arrival: bool
    lower_delay: bool

    @property
    def all_hold(self) -> bool:
        return self.fewer_hops and self.higher_psr and self.earlier_first_arrival and self.lower_delay


def _less(a: Optional[float], b: Optional[float]) -> bool:
    if a is None:
        return False
    return b is None or a < b


def trend_cells(rows: Sequence[ResultRow]) -> List[TrendCell]:
    agg = aggregate(rows)
    cells = sorted({(n, v) for n, v, _ in agg})
    out = []
    for n, v in cells:
        o = agg.get((n, v, Protocol.ORION.value))
        p = agg.get((n, v, Protocol.PROPHET.value))
        if o is None or p is None:
            continue
        out.append(
            TrendCell(
                n,
                v,
                fewer_hops=_less(o["hop_count"].mean, p["hop_count"].mean),
                higher_psr=_less(p["psr"].mean, o["psr"].mean),
                earlier_first_arrival=_less(o["first_arrival_s"].mean, p["first_arrival_s"].mean),
                lower_delay=_less(o["e2e_delay_s"].mean, p["e2e_delay_s"].mean),
            )
        )
    return out


def _cellfmt(s: CellStats) -> str:
    if s.mean is None:
        return "NA"
    return f"{s.mean:.3f} +/- {s.std:.3f}"


def summarize(rows: Sequence[ResultRow]) -> str:
    """Side-by-side protocol comparison per (nodes, speed) with winners marked."""
    agg = aggregate(rows)
    protocols = sorted({p for _, _, p in agg})
    trends = {(t.nodes, t.speed): t for t in trend_cells(rows)}
    lines: List[str] = []
    width = 22
    for n, v in sorted({(n, v) for n, v, _ in agg}):
        seeds = max(agg[(n, v, p)]["psr"].n for p in protocols if (n, v, p) in agg)
        lines.append(f"== nodes={n} speed={v:g} m/s ({seeds} seeds) ==")
        lines.append(f"{'metric':<16}" + "".join(f"{p:>{width}}" for p in protocols) + "   best")
        for label, _, higher in METRICS:
            stats = {p: agg[(n, v, p)][label] for p in protocols if (n, v, p) in agg}
            means = {p: s.mean for p, s in stats.items() if s.mean is not None}
            best = "-"
            if means:
                top = (max if higher else min)(means.values())
                winners = [p for p, m in means.items() if m == top]
                best = winners[0] if len(winners) == 1 else "tie"
            cells = "".join(f"{_cellfmt(stats[p]) if p in stats else '-':>{width}}" for p in protocols)
            lines.append(f"{label:<16}{cells}   {best}")
        t = trends.get((n, v))
        if t is not None:
            checks = [
                ("hops", t.fewer_hops),
                ("psr", t.higher_psr),
                ("fpa", t.earlier_first_arrival),
                ("eed", t.lower_delay),
            ]
            failed = [name for name, ok in checks if not ok]
            status = "ok" if not failed else "FLAG: ORION does not beat PRoPHET on " + ", ".join(failed)
            lines.append(f"orion vs prophet: {status}")
        lines.append("")
    return "\n".join(lines)

