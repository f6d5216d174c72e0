"""Command-line front end: ``fairway <command> --config PATH``.

Commands: grid-sweep, grid-run, wardrop, price-sweep, analyze. Exit codes
are 0 on success, 1 for configuration or input errors and 2 for runtime
failures such as a solver that does not converge.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import MetricMatrix, alpha_efficient_mask, cluster_metrics, convexity_ratio, goal_conflict, has_variance
from .config import KINDS, ExperimentConfig, load_config
from .errors import ConfigError, DegenerateMetric, FairwayError, UnknownMetric
from .grid.network import build_network
from .grid.sim import result_metrics, run, sweep
from .io import SchemaError, atomic_write_text, read_matrix, write_csv, write_matrix
from .metrics import Ideology
from .routing import (
    equilibrium_split,
    fairness_optimal_split,
    price_sweep,
    split_columns,
    system_optimal_split,
)

log = logging.getLogger("fairway")


class Reporter:
    """Prints one summary line per written file."""

    def __init__(self, stream=None):
        self.stream = stream or sys.stdout
        self.written: list[Path] = []

    def wrote(self, path: Path, detail: str) -> None:
        self.written.append(path)
        print(f"wrote {path} ({detail})", file=self.stream)


def _provenance(cfg: ExperimentConfig, **extra) -> dict:
    prov = {"seed": cfg.seed, "config": cfg.digest, "kind": cfg.kind, "fairway": __version__}
    prov.update(extra)
    return prov


def _selected(cfg: ExperimentConfig, m: MetricMatrix) -> list[str]:
    if cfg.metrics is None:
        return m.metric_names
    missing = sorted(set(cfg.metrics) - set(m.metric_names))
    if missing:
        raise UnknownMetric(f"metrics not produced by this run: {missing}")
    return sorted(cfg.metrics)


def _matrix_out(cfg: ExperimentConfig, rep: Reporter, name: str, m: MetricMatrix) -> None:
    names = _selected(cfg, m)
    path, n = write_matrix(cfg.out / name, m, _provenance(cfg), names)
    rep.wrote(path, f"{n} rows, {len(names) + len(m.key_names)} columns")


def cmd_grid_sweep(cfg: ExperimentConfig, rep: Reporter) -> None:
    net = build_network(cfg.grid)
    sw = cfg.sweep
    m = sweep(
        net,
        cfg.demand,
        sw.green_straight_s,
        sw.green_turn_s,
        yellow_s=sw.yellow_s,
        population=sw.population,
        threads=cfg.threads,
    )
    _matrix_out(cfg, rep, "grid_sweep.csv", m)


def cmd_grid_run(cfg: ExperimentConfig, rep: Reporter) -> None:
    net = build_network(cfg.grid)
    result = run(net, cfg.plan, cfg.demand)
    rec = result.vehicle_records
    header = ["vehicle_id", "route_id", "entry_time_s", "exit_time_s", "free_flow_time_s", "delay_s", "completed"]
    rows = [
        (vid, rid, entry, exit_t, fft, delay, bool(done))
        for (vid, rid, entry, exit_t, fft, delay), done in zip(rec, rec.completed)
    ]
    path, n = write_csv(cfg.out / "grid_run_vehicles.csv", header, rows, _provenance(cfg))
    rep.wrote(path, f"{n} rows, {len(header)} columns")

    row, _ = result_metrics(result)
    row.update(spawned=result.spawned, completed=result.completed, remaining=result.remaining)
    names = [k for k in sorted(row) if cfg.metrics is None or k in cfg.metrics]
    header = ["g_straight", "g_turn"] + names
    values = [cfg.plan.green_straight_s, cfg.plan.green_turn_s] + [row[k] for k in names]
    path, n = write_csv(
        cfg.out / "grid_run_summary.csv", header, [values], _provenance(cfg, keys="g_straight,g_turn")
    )
    rep.wrote(path, f"{n} rows, {len(header)} columns")


def _dump_allocations(cfg: ExperimentConfig, rep: Reporter, name: str, labelled_splits) -> None:
    vot = cfg.pricing.vot_population.values
    header = ["solution", "user", "vot_eur_per_h", "route", "delay_min", "delay_cost_eur", "financial_cost_eur",
              "total_cost_eur"]
    rows = []
    for label, split in labelled_splits:
        n = vot.size
        delays = split.per_user_delays.values
        for i in range(n):
            route = "A" if i >= n - split.n_a else "B"
            rows.append((label, i, float(vot[i]), route, float(delays[i]), float(split.delay_costs[i]),
                         float(split.financial_costs[i]), float(split.per_user_costs.values[i])))
    path, count = write_csv(cfg.out / name, header, rows, _provenance(cfg))
    rep.wrote(path, f"{count} rows, {len(header)} columns")


def cmd_wardrop(cfg: ExperimentConfig, rep: Reporter) -> None:
    s = cfg.pricing
    scale = s.demand_veh_per_h / s.vot_population.sample_count
    solutions = [("equilibrium", equilibrium_split(s)), ("system_optimum", system_optimal_split(s))]
    for ideology in Ideology:
        solutions.append((f"fair_{ideology.value}", fairness_optimal_split(s, ideology, cfg.fairness_resource)))
    rows = {label: split_columns(sp, scale) for label, sp in solutions}
    names = sorted(next(iter(rows.values())))
    if cfg.metrics is not None:
        names = sorted(cfg.metrics)
    header = ["solution"] + names
    body = [[label] + [rows[label][k] for k in names] for label, _ in solutions]
    path, n = write_csv(cfg.out / "wardrop.csv", header, body, _provenance(cfg, price=s.price_eur, keys="solution"))
    rep.wrote(path, f"{n} rows, {len(header)} columns")
    if cfg.dump_allocations:
        _dump_allocations(cfg, rep, "wardrop_allocations.csv", solutions)


def cmd_price_sweep(cfg: ExperimentConfig, rep: Reporter) -> None:
    m = price_sweep(cfg.pricing, cfg.prices, keep_splits=cfg.dump_allocations)
    _matrix_out(cfg, rep, "price_sweep.csv", m)
    if cfg.dump_allocations:
        labelled = [(f"price={k[0]!r}", m.allocations[k]) for k in m.row_keys]
        _dump_allocations(cfg, rep, "price_sweep_allocations.csv", labelled)


def _column_diff(a: MetricMatrix, b: MetricMatrix) -> str:
    only_a = sorted(set(a.metric_names) - set(b.metric_names))
    only_b = sorted(set(b.metric_names) - set(a.metric_names))
    return f"only in first: {only_a}; only in second: {only_b}"


def load_inputs(paths: Sequence[Path]) -> MetricMatrix:
    """Read one or more matrices with the same schema and average them row by row.

    Raises:
        SchemaError: differing columns, row keys or row counts.
    """
    mats = [read_matrix(p) for p in paths]
    first = mats[0]
    for p, m in zip(paths[1:], mats[1:]):
        if m.key_names != first.key_names or m.metric_names != first.metric_names:
            raise SchemaError(f"{p}: schema differs from {paths[0]}: {_column_diff(first, m)}")
        if len(m) != len(first):
            raise SchemaError(f"{p}: {len(m)} rows, {paths[0]} has {len(first)}")
        if m.row_keys != first.row_keys:
            raise SchemaError(f"{p}: row keys differ from {paths[0]}")
    if len(mats) == 1:
        return first
    cols = {n: np.mean([m.column(n) for m in mats], axis=0) for n in first.metric_names}
    return MetricMatrix(first.row_keys, first.key_names, cols, dict(first.provenance))


def _varying(m: MetricMatrix, names: Sequence[str]) -> list[str]:
    keep = []
    for n in names:
        if has_variance(m.column(n)):
            keep.append(n)
        else:
            log.warning("skipping %s: zero variance across the solution space", n)
    return keep


def cmd_analyze(cfg: ExperimentConfig, rep: Reporter) -> None:
    spec = cfg.analyze
    m = load_inputs(spec.inputs)
    available = set(m.metric_names)
    wanted = list(cfg.metrics) if cfg.metrics is not None else m.metric_names
    efficiency = [e for e in spec.efficiency if e in wanted or cfg.metrics is None]
    unknown = sorted((set(wanted) | set(efficiency) | set(spec.fairness or ())) - available)
    if unknown:
        raise SchemaError(f"unknown column(s) {unknown}; input has {sorted(available)}")
    if len(wanted) < 2:
        raise DegenerateMetric(f"need ≥2 metrics, input selection has {len(wanted)}")
    fairness = list(spec.fairness) if spec.fairness is not None else [n for n in wanted if n not in efficiency]
    prov = _provenance(cfg, inputs=len(spec.inputs), source_seed=m.provenance.get("seed", "na"))

    if spec.alpha and efficiency:
        rows = []
        for eff in efficiency:
            for a in spec.alpha:
                mask = alpha_efficient_mask(m, eff, a)
                rows.append((a, eff, int(mask.sum()), mask.size, convexity_ratio(m, eff, a)))
        header = ["alpha", "efficiency_metric", "efficient_rows", "total_rows", "convexity_ratio"]
        path, n = write_csv(cfg.out / "alpha_report.csv", header, rows, prov)
        rep.wrote(path, f"{n} rows, {len(header)} columns")

    eff_ok = _varying(m, efficiency)
    fair_ok = _varying(m, fairness)
    rows = [(f, e, goal_conflict(m, f, e)) for f in fair_ok for e in eff_ok]
    header = ["fairness_metric", "efficiency_metric", "conflict"]
    path, n = write_csv(cfg.out / "goal_conflict.csv", header, rows, prov)
    rep.wrote(path, f"{n} rows, {len(header)} columns")

    names = _varying(m, sorted(set(wanted)))
    tree = cluster_metrics(m, names, spec.linkage)
    path = atomic_write_text(cfg.out / "dendrogram.json", tree.to_json())
    rep.wrote(path, f"{len(tree.merges)} merges, {len(tree.labels)} leaves")
    path = atomic_write_text(cfg.out / "dendrogram.nwk", tree.to_newick())
    rep.wrote(path, f"{len(tree.merges)} merges, {len(tree.labels)} leaves")


COMMANDS = {
    "grid-sweep": cmd_grid_sweep,
    "grid-run": cmd_grid_run,
    "wardrop": cmd_wardrop,
    "price-sweep": cmd_price_sweep,
    "analyze": cmd_analyze,
}


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _name_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairway", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fairway {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in KINDS:
        p = sub.add_parser(name, help=COMMANDS[name].__name__.replace("cmd_", "").replace("_", " "))
        p.add_argument("--config", required=True, type=Path, help="experiment config (TOML)")
        p.add_argument("--out", type=Path, help="output directory (overrides the config)")
        p.add_argument("--threads", type=int, help="worker cap for sweeps (default: available cores)")
        p.add_argument("--alpha", type=_float_list, help="comma-separated alpha values for analyze")
        p.add_argument("--metrics", type=_name_list, help="comma-separated metric columns to keep")
    return parser


def configure_logging() -> None:
    level = os.environ.get("FAIRWAY_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def run_experiment(
    config_path: str | Path,
    command: str | None = None,
    out: Path | None = None,
    threads: int | None = None,
    alpha: Sequence[float] | None = None,
    metrics: Sequence[str] | None = None,
    stream=None,
) -> int:
    """Load a config, run it and write its outputs; returns the exit code."""
    try:
        cfg = load_config(config_path, command)
        if threads is not None and threads < 1:
            raise ConfigError("must be >= 1", "--threads")
        if alpha is not None and any(not 0.0 <= a <= 1.0 for a in alpha):
            raise ConfigError("values must lie in [0, 1]", "--alpha")
        updates = {}
        if out is not None:
            updates["out"] = Path(out)
        if threads is not None:
            updates["threads"] = threads
        if metrics is not None:
            updates["metrics"] = tuple(metrics)
        if alpha is not None and cfg.analyze is not None:
            updates["analyze"] = replace(cfg.analyze, alpha=tuple(alpha))
        cfg = replace(cfg, **updates)
    except ConfigError as exc:
        print(f"fairway: config error: {exc}", file=sys.stderr)
        return 1

    log.info("running %s from %s (seed=%s)", cfg.kind, cfg.source, cfg.seed)
    try:
        COMMANDS[cfg.kind](cfg, Reporter(stream))
    except (SchemaError, UnknownMetric, DegenerateMetric, ConfigError, FileNotFoundError) as exc:
        print(f"fairway: input error: {exc}", file=sys.stderr)
        return 1
    except (FairwayError, OSError, ArithmeticError, RuntimeError) as exc:
        print(f"fairway: runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    return run_experiment(args.config, args.command, args.out, args.threads, args.alpha, args.metrics)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
