"""Experiment configuration files (TOML).

A config names exactly one experiment ``kind`` and an explicit ``seed``; the
remaining tables hold the scenario. Unknown keys are rejected so typos fail
loudly. See the README for the full schema.
"""

from __future__ import annotations

import hashlib
import math
import os
import re
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ConfigError, FairwayError
from .grid.network import GridSpec
from .grid.signals import SignalPlan
from .grid.sim import DemandSpec
from .routing import DEFAULT_ROUTE_A, DEFAULT_ROUTE_B, DEFAULT_DEMAND, PricingScenario, RouteSpec, VotDistribution

KINDS = ("grid-sweep", "grid-run", "wardrop", "price-sweep", "analyze")
TOP_KEYS = {"kind", "seed", "out", "metrics", "threads"}
SECTIONS = {
    "grid-sweep": {"grid", "demand", "sweep"},
    "grid-run": {"grid", "demand", "signal"},
    "wardrop": {"pricing", "wardrop"},
    "price-sweep": {"pricing", "prices"},
    "analyze": {"analyze"},
}
_LINE_RE = re.compile(r"line (\d+)")


@dataclass(frozen=True)
class SweepSpec:
    green_straight_s: tuple[int, ...] = tuple(range(1, 41))
    green_turn_s: tuple[int, ...] = tuple(range(1, 41))
    yellow_s: int = 3
    population: str = "all"


@dataclass(frozen=True)
class AnalyzeSpec:
    inputs: tuple[Path, ...]
    efficiency: tuple[str, ...] = ("throughput",)
    fairness: tuple[str, ...] | None = None
    alpha: tuple[float, ...] = (0.0, 0.05, 0.1, 0.2)
    linkage: str = "average"


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    seed: int
    out: Path
    source: Path
    digest: str
    metrics: tuple[str, ...] | None = None
    threads: int | None = None
    grid: GridSpec | None = None
    demand: DemandSpec | None = None
    plan: SignalPlan | None = None
    sweep: SweepSpec | None = None
    pricing: PricingScenario | None = None
    prices: tuple[float, ...] = ()
    fairness_resource: str = "delay"
    dump_allocations: bool = False
    analyze: AnalyzeSpec | None = None


class _Doc:
    """Parsed TOML plus the raw text, for locating keys by line."""

    def __init__(self, text: str, data: dict):
        self.lines = text.splitlines()
        self.data = data

    def line_of(self, dotted: str) -> int | None:
        *section, key = dotted.split(".")
        want = ".".join(section)
        current = ""
        header = None
        key_re = re.compile(rf"^\s*{re.escape(key)}\s*=")
        for no, raw in enumerate(self.lines, 1):
            s = raw.strip()
            m = re.match(r"^\[\s*([^\]]+?)\s*\]", s)
            if m:
                current = m.group(1)
                if current == dotted:
                    header = no
                continue
            if current == want and key_re.match(raw):
                return no
        return header

    def error(self, dotted: str, message: str) -> ConfigError:
        return ConfigError(message, dotted, self.line_of(dotted))


def _table(doc: _Doc, name: str, allowed: set[str]) -> dict:
    raw = doc.data.get(name, {})
    if not isinstance(raw, dict):
        raise doc.error(name, "must be a table")
    extra = sorted(set(raw) - allowed)
    if extra:
        raise doc.error(f"{name}.{extra[0]}", f"unknown key; allowed: {sorted(allowed)}")
    return raw


def _number(doc: _Doc, dotted: str, value: Any, integer: bool = False) -> float | int:
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    if isinstance(value, bool) or not ok:
        raise doc.error(dotted, f"must be {'an integer' if integer else 'a number'}, got {value!r}")
    if not integer and not math.isfinite(value):
        raise doc.error(dotted, f"must be finite, got {value!r}")
    return value


def _build(doc: _Doc, dotted: str, factory, kwargs: dict):
    try:
        return factory(**kwargs)
    except FairwayError as exc:
        # point at the field named in the message when there is one
        msg = str(exc)
        named = [k for k in kwargs if msg.startswith(f"{k} ")]
        raise doc.error(f"{dotted}.{named[0]}" if named else dotted, msg) from None


def _int_list(doc: _Doc, dotted: str, value: Any) -> tuple[int, ...]:
    """An explicit list of integers or an inclusive ``{start, stop, step}`` range."""
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "step"}
        if extra or not {"start", "stop"} <= set(value):
            raise doc.error(dotted, "range table needs start, stop and optional step")
        start = _number(doc, dotted, value["start"], integer=True)
        stop = _number(doc, dotted, value["stop"], integer=True)
        step = _number(doc, dotted, value.get("step", 1), integer=True)
        if step < 1 or stop < start:
            raise doc.error(dotted, "range needs step >= 1 and stop >= start")
        return tuple(range(start, stop + 1, step))
    if isinstance(value, list) and value:
        return tuple(_number(doc, dotted, v, integer=True) for v in value)
    raise doc.error(dotted, "must be a non-empty list of integers or a {start, stop, step} table")


def _grid(doc: _Doc) -> GridSpec:
    names = {f.name for f in fields(GridSpec)}
    raw = _table(doc, "grid", names)
    kwargs = {k: _number(doc, f"grid.{k}", v, integer=k in ("rows", "cols", "lanes_per_direction", "entrance_count"))
              for k, v in raw.items()}
    return _build(doc, "grid", GridSpec, kwargs)


def _demand(doc: _Doc, seed: int) -> DemandSpec:
    allowed = {"flow_per_entrance_veh_per_h", "warmup_s", "horizon_s", "dt_s"}
    raw = _table(doc, "demand", allowed)
    if "flow_per_entrance_veh_per_h" not in raw:
        raise doc.error("demand.flow_per_entrance_veh_per_h", "is required")
    kwargs = {k: float(_number(doc, f"demand.{k}", v)) for k, v in raw.items()}
    return _build(doc, "demand", DemandSpec, dict(kwargs, seed=seed))


def _plan(doc: _Doc, section: str, green_straight, green_turn, yellow) -> None:
    for key, values in (("green_straight_s", green_straight), ("green_turn_s", green_turn)):
        for v in values:
            try:
                SignalPlan(v if key == "green_straight_s" else 1, v if key == "green_turn_s" else 1, yellow)
            except FairwayError as exc:
                raise doc.error(f"{section}.{key}", str(exc)) from None


def _signal(doc: _Doc) -> SignalPlan:
    raw = _table(doc, "signal", {"green_straight_s", "green_turn_s", "yellow_s"})
    for key in ("green_straight_s", "green_turn_s"):
        if key not in raw:
            raise doc.error(f"signal.{key}", "is required")
    vals = {k: _number(doc, f"signal.{k}", v, integer=True) for k, v in raw.items()}
    yellow = vals.get("yellow_s", 3)
    _plan(doc, "signal", [vals["green_straight_s"]], [vals["green_turn_s"]], yellow)
    return SignalPlan(vals["green_straight_s"], vals["green_turn_s"], yellow)


def _sweep(doc: _Doc) -> SweepSpec:
    raw = _table(doc, "sweep", {"green_straight_s", "green_turn_s", "yellow_s", "population"})
    gs = _int_list(doc, "sweep.green_straight_s", raw["green_straight_s"]) if "green_straight_s" in raw \
        else SweepSpec.green_straight_s
    gt = _int_list(doc, "sweep.green_turn_s", raw["green_turn_s"]) if "green_turn_s" in raw else SweepSpec.green_turn_s
    yellow = _number(doc, "sweep.yellow_s", raw.get("yellow_s", 3), integer=True)
    if yellow < 0:
        raise doc.error("sweep.yellow_s", f"yellow_s must be an integer >= 0, got {yellow}")
    _plan(doc, "sweep", gs, gt, yellow)
    population = raw.get("population", "all")
    if population not in ("all", "completed"):
        raise doc.error("sweep.population", f"must be 'all' or 'completed', got {population!r}")
    return SweepSpec(gs, gt, yellow, population)


def _route(doc: _Doc, name: str, default: RouteSpec) -> RouteSpec:
    dotted = f"pricing.route_{name.lower()}"
    raw = doc.data.get("pricing", {}).get(f"route_{name.lower()}", {})
    allowed = {"free_flow_time_min", "capacity_veh_per_h", "bpr_alpha", "bpr_beta"}
    if not isinstance(raw, dict):
        raise doc.error(dotted, "must be a table")
    extra = sorted(set(raw) - allowed)
    if extra:
        raise doc.error(f"{dotted}.{extra[0]}", f"unknown key; allowed: {sorted(allowed)}")
    kwargs = {
        "name": name,
        "free_flow_time_min": default.free_flow_time_min,
        "capacity_veh_per_h": default.capacity_veh_per_h,
        "bpr_alpha": default.bpr_alpha,
        "bpr_beta": default.bpr_beta,
    }
    kwargs.update({k: float(_number(doc, f"{dotted}.{k}", v)) for k, v in raw.items()})
    return _build(doc, dotted, RouteSpec, kwargs)


def _vot(doc: _Doc, seed: int) -> VotDistribution:
    raw = doc.data.get("pricing", {}).get("vot", {})
    if not isinstance(raw, dict):
        raise doc.error("pricing.vot", "must be a table")
    allowed = {"kind", "mean", "sigma", "lo", "hi", "value", "sample_count"}
    extra = sorted(set(raw) - allowed)
    if extra:
        raise doc.error(f"pricing.vot.{extra[0]}", f"unknown key; allowed: {sorted(allowed)}")
    kind = raw.get("kind", "lognormal")
    count = _number(doc, "pricing.vot.sample_count", raw.get("sample_count", 10_000), integer=True)
    num = {k: float(_number(doc, f"pricing.vot.{k}", raw[k])) for k in ("mean", "sigma", "lo", "hi", "value") if k in raw}
    if kind == "lognormal":
        mean, sigma = num.get("mean", 30.0), num.get("sigma", 0.5)
        if mean <= 0:
            raise doc.error("pricing.vot.mean", f"must be > 0, got {mean}")
        params = (math.log(mean) - sigma * sigma / 2.0, sigma)
    elif kind == "uniform":
        if "lo" not in num or "hi" not in num:
            raise doc.error("pricing.vot", "uniform VOT needs lo and hi")
        params = (num["lo"], num["hi"])
    elif kind == "point":
        if "value" not in num:
            raise doc.error("pricing.vot.value", "is required for a point VOT")
        params = (num["value"],)
    else:
        raise doc.error("pricing.vot.kind", f"must be lognormal, uniform or point, got {kind!r}")
    return _build(doc, "pricing.vot", VotDistribution, {"kind": kind, "params": params, "sample_count": count,
                                                        "seed": seed})


def _pricing(doc: _Doc, seed: int) -> PricingScenario:
    raw = _table(doc, "pricing", {"demand_veh_per_h", "price_eur", "route_a", "route_b", "vot"})
    demand = float(_number(doc, "pricing.demand_veh_per_h", raw.get("demand_veh_per_h", DEFAULT_DEMAND)))
    price = float(_number(doc, "pricing.price_eur", raw.get("price_eur", 0.0)))
    if not demand > 0:
        raise doc.error("pricing.demand_veh_per_h", f"must be > 0, got {demand}")
    if price < 0:
        raise doc.error("pricing.price_eur", f"must be >= 0, got {price}")
    return PricingScenario(
        route_a=_route(doc, "A", DEFAULT_ROUTE_A),
        route_b=_route(doc, "B", DEFAULT_ROUTE_B),
        demand_veh_per_h=demand,
        vot_population=_vot(doc, seed),
        price_eur=price,
    )


def price_grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    """Inclusive, evenly spaced prices; rounded so that 0.1-style steps stay exact in CSV."""
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 10) for i in range(n))


def _prices(doc: _Doc) -> tuple[float, ...]:
    raw = _table(doc, "prices", {"start", "stop", "step", "values", "dump_allocations"})
    raw = {k: v for k, v in raw.items() if k != "dump_allocations"}
    if "values" in raw:
        if set(raw) != {"values"}:
            raise doc.error("prices.values", "give either values or start/stop/step")
        if not isinstance(raw["values"], list) or not raw["values"]:
            raise doc.error("prices.values", "must be a non-empty list")
        vals = tuple(float(_number(doc, "prices.values", v)) for v in raw["values"])
    else:
        start = float(_number(doc, "prices.start", raw.get("start", 0.0)))
        stop = float(_number(doc, "prices.stop", raw.get("stop", 6.0)))
        step = float(_number(doc, "prices.step", raw.get("step", 0.25)))
        if step <= 0 or stop < start:
            raise doc.error("prices.step", "need step > 0 and stop >= start")
        vals = price_grid(start, stop, step)
    if any(v < 0 for v in vals) or list(vals) != sorted(vals):
        raise doc.error("prices", "prices must be >= 0 and ascending")
    return vals


def _wardrop(doc: _Doc) -> tuple[str, bool]:
    raw = _table(doc, "wardrop", {"fairness_resource", "dump_allocations"})
    resource = raw.get("fairness_resource", "delay")
    if resource not in ("delay", "total_cost"):
        raise doc.error("wardrop.fairness_resource", f"must be 'delay' or 'total_cost', got {resource!r}")
    dump = raw.get("dump_allocations", False)
    if not isinstance(dump, bool):
        raise doc.error("wardrop.dump_allocations", "must be true or false")
    return resource, dump


def _analyze(doc: _Doc, base: Path) -> AnalyzeSpec:
    raw = _table(doc, "analyze", {"inputs", "efficiency", "fairness", "alpha", "linkage"})

    def names(key: str, default):
        if key not in raw:
            return default
        v = raw[key]
        if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
            raise doc.error(f"analyze.{key}", "must be a list of strings")
        return tuple(v)

    inputs = names("inputs", ())
    if not inputs:
        raise doc.error("analyze.inputs", "needs at least one CSV path")
    alpha = tuple(float(_number(doc, "analyze.alpha", a)) for a in raw.get("alpha", [0.0, 0.05, 0.1, 0.2]))
    if any(not 0.0 <= a <= 1.0 for a in alpha):
        raise doc.error("analyze.alpha", "values must lie in [0, 1]")
    linkage = raw.get("linkage", "average")
    if linkage not in ("average", "single", "complete"):
        raise doc.error("analyze.linkage", f"must be average, single or complete, got {linkage!r}")
    return AnalyzeSpec(
        inputs=tuple(Path(os.path.normpath(base / p)) for p in inputs),
        efficiency=names("efficiency", ("throughput",)),
        fairness=names("fairness", None),
        alpha=alpha,
        linkage=linkage,
    )


def grid_metric_names() -> set[str]:
    from .metrics import Allocation, fairness_profile

    return {"throughput", "mean_delay", "total_delay"} | set(fairness_profile(Allocation([1.0, 2.0])))


def price_metric_names() -> set[str]:
    from .routing import split_at, split_columns

    return set(split_columns(split_at(PricingScenario(vot_population=VotDistribution("point", (10.0,), 4)), 0.5), 1.0))


def load_config(path: str | Path, kind: str | None = None) -> ExperimentConfig:
    """Parse and validate an experiment config.

    ``kind`` may be omitted from the file when the caller supplies it.

    Raises:
        ConfigError: unreadable file, TOML syntax error or invalid field; the
            message names the field and line where possible.
    """
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    text = blob.decode("utf-8", errors="replace")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = _LINE_RE.search(str(exc))
        raise ConfigError(f"invalid TOML: {exc}", None, int(m.group(1)) if m else None) from None
    doc = _Doc(text, data)

    expected = kind
    kind = data.get("kind", expected)
    if kind not in KINDS:
        raise doc.error("kind", f"must be one of {list(KINDS)}, got {kind!r}")
    if expected is not None and kind != expected:
        raise doc.error("kind", f"config is for {kind!r} but the {expected!r} command was run")
    extra = sorted(set(data) - TOP_KEYS - SECTIONS[kind])
    if extra:
        raise doc.error(extra[0], f"not valid for kind {kind!r}")
    if "seed" not in data:
        raise doc.error("seed", "is required (no implicit seeding)")
    seed = _number(doc, "seed", data["seed"], integer=True)
    if seed < 0:
        raise doc.error("seed", f"must be >= 0, got {seed}")
    out = data.get("out", "results")
    if not isinstance(out, str):
        raise doc.error("out", "must be a string path")
    metrics = data.get("metrics")
    if metrics is not None and (not isinstance(metrics, list) or not all(isinstance(m, str) for m in metrics)):
        raise doc.error("metrics", "must be a list of metric names")
    threads = data.get("threads")
    if threads is not None and (_number(doc, "threads", threads, integer=True) < 1):
        raise doc.error("threads", "must be >= 1")

    base = path.parent
    cfg: dict[str, Any] = dict(
        kind=kind,
        seed=seed,
        out=Path(os.path.normpath(base / out)),
        source=path,
        digest=hashlib.sha256(blob).hexdigest()[:16],
        metrics=tuple(metrics) if metrics is not None else None,
        threads=threads,
    )
    if kind in ("grid-sweep", "grid-run"):
        cfg["grid"] = _grid(doc)
        cfg["demand"] = _demand(doc, seed)
        if kind == "grid-sweep":
            cfg["sweep"] = _sweep(doc)
        else:
            cfg["plan"] = _signal(doc)
        known = grid_metric_names()
    elif kind in ("wardrop", "price-sweep"):
        cfg["pricing"] = _pricing(doc, seed)
        if kind == "price-sweep":
            cfg["prices"] = _prices(doc)
            dump = data.get("prices", {}).get("dump_allocations", False)
            if not isinstance(dump, bool):
                raise doc.error("prices.dump_allocations", "must be true or false")
            cfg["dump_allocations"] = dump
        else:
            cfg["fairness_resource"], cfg["dump_allocations"] = _wardrop(doc)
        known = price_metric_names()
    else:
        cfg["analyze"] = _analyze(doc, base)
        known = None
    if known is not None and cfg["metrics"] is not None:
        unknown = sorted(set(cfg["metrics"]) - known)
        if unknown:
            raise doc.error("metrics", f"unknown metric(s) {unknown}; known: {sorted(known)}")
    return ExperimentConfig(**cfg)
