"""Seeded mesoscopic simulation of the signalized grid and signal-plan sweeps.

Vehicles spawn at every entrance as a Poisson process, travel each segment at
free-flow speed, queue FIFO at stop lines and discharge at saturation flow
while their straight phase is green. A segment accepts a vehicle only while
it has storage left; vehicles that cannot enter the network wait at a virtual
gate and accumulate delay there.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from ..errors import InvalidSpec
from ..metrics import Allocation, ResourceKind, fairness_profile
from .kernel import get_simulate
from .network import Network
from .signals import SignalPlan

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DemandSpec:
    flow_per_entrance_veh_per_h: float
    seed: int = 0
    warmup_s: float = 600.0
    horizon_s: float = 4200.0
    dt_s: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.flow_per_entrance_veh_per_h) and self.flow_per_entrance_veh_per_h > 0):
            raise InvalidSpec("flow_per_entrance_veh_per_h must be finite and > 0")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise InvalidSpec(f"seed must be an unsigned integer, got {self.seed!r}")
        if not (0 <= self.warmup_s < self.horizon_s) or not math.isfinite(self.horizon_s):
            raise InvalidSpec("need 0 <= warmup_s < horizon_s")
        if not self.dt_s > 0:
            raise InvalidSpec("dt_s must be > 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon_s / self.dt_s)) + 1


@dataclass(frozen=True)
class VehicleRecords:
    """Column-oriented records of the vehicles spawned after warm-up."""

    vehicle_id: np.ndarray
    route_id: np.ndarray
    entry_time_s: np.ndarray
    exit_time_s: np.ndarray  # NaN while still in the network
    free_flow_time_s: np.ndarray
    delay_s: np.ndarray
    completed: np.ndarray

    def __len__(self) -> int:
        return len(self.vehicle_id)

    def __iter__(self) -> Iterator[tuple]:
        for i in range(len(self)):
            ex = float(self.exit_time_s[i])
            yield (
                int(self.vehicle_id[i]),
                int(self.route_id[i]),
                float(self.entry_time_s[i]),
                None if math.isnan(ex) else ex,
                float(self.free_flow_time_s[i]),
                float(self.delay_s[i]),
            )


@dataclass(frozen=True)
class SimulationResult:
    vehicle_records: VehicleRecords
    throughput_veh_per_h: float
    spawned: int
    completed: int
    remaining: int
    seed: int
    flow_per_entrance_veh_per_h: float
    plan: SignalPlan

    def delay_allocation(self, population: str = "all") -> Allocation:
        """Per-vehicle delays in seconds.

        ``population="all"`` covers every measured vehicle, using the delay
        accrued up to the horizon for those still in the network;
        ``"completed"`` keeps only vehicles that left.
        """
        rec = self.vehicle_records
        if population == "all":
            values = rec.delay_s
        elif population == "completed":
            values = rec.delay_s[rec.completed]
        else:
            raise ValueError(f"unknown population {population!r}")
        return Allocation(values, ResourceKind.DELAY)


def spawn_times(flow_veh_per_h: float, horizon_s: float, rng: np.random.Generator) -> np.ndarray:
    rate = flow_veh_per_h / 3600.0
    batch = int(rate * horizon_s * 1.2) + 16
    times = np.cumsum(rng.exponential(1.0 / rate, batch))
    while times[-1] <= horizon_s:
        more = times[-1] + np.cumsum(rng.exponential(1.0 / rate, batch))
        times = np.concatenate([times, more])
    return times[times <= horizon_s]


def run(network: Network, plan: SignalPlan, demand: DemandSpec, backend: str = "auto") -> SimulationResult:
    """Simulate one signal plan; deterministic in ``demand.seed``.

    Arrivals do not depend on the plan, so every plan evaluated with the same
    seed sees the same vehicles.
    """
    spec = network.spec
    arrivals_ss, discharge_ss = np.random.SeedSequence(demand.seed).spawn(2)
    rng = np.random.default_rng(arrivals_ss)
    per_route = [spawn_times(demand.flow_per_entrance_veh_per_h, demand.horizon_s, rng) for _ in network.routes]

    counts = np.array([len(x) for x in per_route], dtype=np.int64)
    route_veh_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    veh_spawn = np.concatenate(per_route) if counts.sum() else np.zeros(0)
    veh_route = np.repeat(np.arange(len(per_route), dtype=np.int64), counts)
    n_veh = len(veh_spawn)

    n_steps = demand.n_steps
    n_seg = len(network.seg_length)
    per_step = spec.saturation_flow_veh_per_s_per_lane * demand.dt_s * spec.lanes_per_direction
    base = int(math.floor(per_step))
    frac = per_step - base
    if frac > 1e-12:
        uniforms = np.random.default_rng(discharge_ss).random((n_steps, n_seg))
    else:
        frac = 0.0
        uniforms = np.zeros((1, 1))

    node_offset = np.array([plan.offset_s(rc) for rc in network.intersections], dtype=float)
    win = [plan.green_window(axis) for axis in (0, 1)]
    route_exit_seg = np.array(
        [first + len(route.stops) for first, route in zip(network.route_first_seg, network.routes)], dtype=np.int64
    )

    wait = np.zeros(n_veh)
    ready = veh_spawn.copy()
    exit_time = np.full(n_veh, np.nan)
    simulate = get_simulate(backend)
    simulate(
        network.seg_length,
        network.seg_capacity,
        network.seg_next,
        network.seg_node,
        network.seg_axis,
        np.ascontiguousarray(network.route_first_seg),
        route_exit_seg,
        route_veh_ptr,
        veh_spawn,
        node_offset,
        np.array([w[0] for w in win]),
        np.array([w[1] for w in win]),
        float(plan.cycle_s),
        float(spec.free_flow_speed_mps),
        float(demand.dt_s),
        n_steps,
        base,
        frac,
        uniforms,
        wait,
        ready,
        exit_time,
    )

    horizon = demand.horizon_s
    measured = veh_spawn >= demand.warmup_s
    done = ~np.isnan(exit_time) & (exit_time <= horizon)
    accrued = wait + np.where(done, 0.0, np.maximum(0.0, horizon - ready))
    fft = np.array([r.free_flow_time_s for r in network.routes])[veh_route]
    ids = np.flatnonzero(measured)
    completed_mask = done[ids]
    records = VehicleRecords(
        vehicle_id=ids,
        route_id=veh_route[ids],
        entry_time_s=veh_spawn[ids],
        exit_time_s=np.where(completed_mask, exit_time[ids], np.nan),
        free_flow_time_s=fft[ids],
        delay_s=accrued[ids],
        completed=completed_mask,
    )
    n_done = int(completed_mask.sum())
    window_h = (horizon - demand.warmup_s) / 3600.0
    return SimulationResult(
        vehicle_records=records,
        throughput_veh_per_h=n_done / window_h,
        spawned=len(ids),
        completed=n_done,
        remaining=len(ids) - n_done,
        seed=int(demand.seed),
        flow_per_entrance_veh_per_h=demand.flow_per_entrance_veh_per_h,
        plan=plan,
    )


def result_metrics(result: SimulationResult, population: str = "all") -> tuple[dict[str, float], Allocation]:
    """Efficiency and fairness columns of one run, plus the allocation they were computed from."""
    alloc = result.delay_allocation(population)
    row = {
        "throughput": result.throughput_veh_per_h,
        "mean_delay": float(np.mean(alloc.values)),
        "total_delay": float(np.sum(alloc.values)),
    }
    row.update(fairness_profile(alloc))
    return row, alloc


@dataclass(frozen=True)
class _SweepTask:
    network: Network
    demand: DemandSpec
    population: str
    backend: str
    yellow_s: int
    keys: tuple[tuple[int, int], ...] = field(default=())


def _run_chunk(task: _SweepTask):
    out = []
    for g_s, g_t in task.keys:
        plan = SignalPlan(g_s, g_t, task.yellow_s)
        row, alloc = result_metrics(run(task.network, plan, task.demand, task.backend), task.population)
        out.append(((g_s, g_t), row, alloc))
    return out


def sweep(
    network: Network,
    demand: DemandSpec,
    green_straight: Iterable[int] = range(1, 41),
    green_turn: Iterable[int] = range(1, 41),
    yellow_s: int = 3,
    population: str = "all",
    threads: int | None = None,
    backend: str = "auto",
    keep_allocations: bool = False,
):
    """Evaluate every (straight, turn) green pair; one MetricMatrix row per pair.

    Each row depends only on (seed, g_straight, g_turn), so the result is
    identical for any worker count.
    """
    from ..analysis import MetricMatrix

    keys = [(int(a), int(b)) for a in green_straight for b in green_turn]
    for g_s, g_t in keys:
        SignalPlan(g_s, g_t, yellow_s)  # validate before spending time
    workers = max(1, min(threads or os.cpu_count() or 1, len(keys)))
    chunks = [tuple(keys[i::workers]) for i in range(workers)]
    tasks = [_SweepTask(network, demand, population, backend, yellow_s, c) for c in chunks if c]

    if len(tasks) == 1:
        results = _run_chunk(tasks[0])
    else:
        with ProcessPoolExecutor(max_workers=len(tasks)) as pool:
            results = [item for part in pool.map(_run_chunk, tasks) for item in part]
    by_key = {key: (row, alloc) for key, row, alloc in results}

    names = sorted(next(iter(by_key.values()))[0])
    columns = {name: np.array([by_key[k][0][name] for k in keys]) for name in names}
    dropped = [n for n, col in columns.items() if not np.all(np.isfinite(col))]
    for name in dropped:
        log.warning("dropping column %s: non-finite values (zero mean delay)", name)
        del columns[name]
    return MetricMatrix(
        row_keys=keys,
        key_names=("g_straight", "g_turn"),
        columns=columns,
        provenance={"seed": demand.seed, "flow_per_entrance_veh_per_h": demand.flow_per_entrance_veh_per_h},
        allocations={k: by_key[k][1] for k in keys} if keep_allocations else None,
    )


def flows_sweep(network: Network, flows: Sequence[float], seeds: Sequence[int], **kwargs):
    """Convenience: one sweep per (flow, seed) pair, keyed by that pair."""
    base = kwargs.pop("demand_kwargs", {})
    return {
        (flow, seed): sweep(network, DemandSpec(flow, seed, **base), **kwargs)
        for flow in flows
        for seed in seeds
    }
