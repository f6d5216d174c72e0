"""Acceptance suite: the twelve top-level criteria at their stated tolerances.

Each ``criterion_N`` returns ``(passed, detail)``. Under pytest every
criterion is one test and a summary line per criterion is printed at the end
of the session; run this file directly to get the same lines without pytest.
"""

from __future__ import annotations

import functools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402

from fairway.analysis import (  # noqa: E402
    MetricMatrix,
    alpha_efficient_set,
    cluster_metrics,
    convexity_ratio,
    goal_conflict,
)
from fairway.errors import DegenerateMean  # noqa: E402
from fairway.grid.network import build_network  # noqa: E402
from fairway.grid.signals import SignalPlan  # noqa: E402
from fairway.grid.sim import DemandSpec, run, sweep  # noqa: E402
from fairway.metrics import (  # noqa: E402
    COEFFICIENT_OF_VARIATION,
    GINI,
    JAIN,
    RANGE,
    STD_DEV,
    THEIL,
    Ideology,
    atkinson,
    dispersion,
    welfare,
)
from fairway.routing import (  # noqa: E402
    PricingScenario,
    RouteSpec,
    VotDistribution,
    equilibrium_split,
    fairness_optimal_split,
    price_sweep,
    system_optimal_split,
)

RESULTS: dict[int, tuple[bool, str]] = {}

GRID_FLOWS = (100.0, 300.0, 500.0)
GRID_SEEDS = (0, 1, 2, 3, 4)
COARSE_GREENS = [int(g) for g in np.linspace(1, 40, 8)]
FAIRNESS_SET = ("std", "cov", "gini", "jain", "atkinson_0.5", "theil", "welfare_egalitarian")
EFFICIENCY_SET = ("welfare_utilitarian", "welfare_harsanyian")


def _rng(seed):
    return np.random.default_rng(seed)


def _random_scenario(rng, price=None, sample_count=2000):
    t0_a = rng.uniform(1.0, 6.0)
    route_a = RouteSpec("A", t0_a, rng.uniform(300, 3000), rng.uniform(0.05, 1.0), rng.uniform(1.0, 8.0))
    route_b = RouteSpec("B", t0_a + rng.uniform(0.1, 5.0), rng.uniform(300, 4000), rng.uniform(0.05, 1.0),
                        rng.uniform(1.0, 8.0))
    vot = VotDistribution.lognormal_with_mean(rng.uniform(5, 60), rng.uniform(0.0, 1.0), sample_count,
                                              int(rng.integers(0, 1000)))
    p = rng.uniform(0.0, 5.0) if price is None else price
    return PricingScenario(route_a, route_b, rng.uniform(100, 6000), vot, p)


# 1 -------------------------------------------------------------------------

def criterion_1():
    start = time.perf_counter()
    rng = _rng(1)
    worst = 0.0
    checks = 0
    for _ in range(1000):
        xs = [float(v) for v in rng.integers(0, 11, int(rng.integers(1, 7)))]
        got = {
            "std": (dispersion(xs, STD_DEV), oracles.std(xs)),
            "range": (dispersion(xs, RANGE), oracles.value_range(xs)),
        }
        if sum(xs) > 0:
            got["gini"] = (dispersion(xs, GINI), oracles.gini(xs))
            got["jain"] = (dispersion(xs, JAIN), oracles.jain(xs))
            got["theil"] = (dispersion(xs, THEIL), oracles.theil(xs))
            got["atkinson_0.5"] = (dispersion(xs, atkinson(0.5)), oracles.atkinson(xs, 0.5))
            got["atkinson_2"] = (dispersion(xs, atkinson(2.0)), oracles.atkinson(xs, 2.0))
        else:
            for metric in (GINI, JAIN, THEIL, atkinson(0.5)):
                try:
                    dispersion(xs, metric)
                    return False, f"zero-mean {xs} accepted by {metric.name}"
                except DegenerateMean:
                    pass
        for a, b in got.values():
            worst = max(worst, abs(a - b))
            checks += 1
    if worst > 1e-12:
        return False, f"max oracle deviation {worst:.2e} > 1e-12"

    violations = 0
    for _ in range(10_000):
        n = int(rng.integers(2, 40))
        xs = rng.uniform(0.0, 100.0, n) * (rng.random(n) < 0.8)
        if xs.sum() <= 0:
            continue
        g, j, t = dispersion(xs, GINI), dispersion(xs, JAIN), dispersion(xs, THEIL)
        a = dispersion(xs, atkinson(0.5))
        ok = (-1e-12 <= g <= 1 - 1 / n + 1e-12 and 1 / n - 1e-12 <= j <= 1 + 1e-12
              and -1e-12 <= t <= math.log(n) + 1e-9 and 0 <= a <= 1)
        # Pigou-Dalton: shift cost from the worst-off to the best-off without reordering them
        i, k = int(np.argmin(xs)), int(np.argmax(xs))
        if xs[k] > xs[i]:
            ys = xs.copy()
            delta = rng.uniform(0.0, 0.5) * (xs[k] - xs[i])
            ys[i] += delta
            ys[k] -= delta
            tol = 1e-9
            ok = ok and all(dispersion(ys, m) <= dispersion(xs, m) + tol
                            for m in (GINI, THEIL, COEFFICIENT_OF_VARIATION, STD_DEV, atkinson(0.5)))
            ok = ok and dispersion(ys, JAIN) >= dispersion(xs, JAIN) - tol
            ok = ok and welfare(ys, Ideology.EGALITARIAN) >= welfare(xs, Ideology.EGALITARIAN) - tol
        violations += not ok
    elapsed = time.perf_counter() - start
    passed = violations == 0 and elapsed < 10.0
    return passed, f"{checks} oracle checks, max dev {worst:.1e}; {violations} property violations; {elapsed:.1f}s"


# 2 -------------------------------------------------------------------------

def criterion_2():
    start = time.perf_counter()
    rng = _rng(2)
    worst_gap, worst_res, interior = 0.0, 0.0, 0
    scenarios = [PricingScenario()] + [_random_scenario(rng, price=0.0 if i % 2 else None) for i in range(499)]
    for s in scenarios:
        eq = equilibrium_split(s)
        worst_res = max(worst_res, eq.residual)
        if s.price_eur == 0.0 and 0.0 < eq.share_a < 1.0:
            interior += 1
            worst_gap = max(worst_gap, abs(eq.time_a_min - eq.time_b_min))
    elapsed = time.perf_counter() - start
    passed = worst_gap <= 0.01 and worst_res <= 1e-6 and elapsed < 30.0 and interior > 0
    return passed, (f"max |tA-tB| {worst_gap:.2e} min over {interior} interior free equilibria; "
                    f"max residual {worst_res:.1e} over {len(scenarios)}; {elapsed:.1f}s")


# 3 -------------------------------------------------------------------------

def criterion_3():
    demands = np.arange(100.0, 3001.0, 10.0)
    gaps = []
    for q in demands:
        s = PricingScenario(demand_veh_per_h=float(q))
        ue = equilibrium_split(s).total_travel_time
        so = system_optimal_split(s).total_travel_time
        gaps.append(ue / so - 1.0)
    gaps = np.array(gaps)
    above = demands[gaps > 0.01]
    if above.size == 0:
        return False, "gap never exceeds 1%"
    onset = float(above.min())
    below_ok = bool(np.all(gaps[demands < onset] <= 0.01))
    passed = 600.0 < onset <= 900.0 and below_ok
    return passed, f"gap > 1% first at {onset:.0f} veh/h (max gap {gaps.max():.1%} at {demands[gaps.argmax()]:.0f})"


# 4 -------------------------------------------------------------------------

def criterion_4():
    s = PricingScenario()
    target = system_optimal_split(s).share_a
    best = None
    for p in np.round(np.arange(1.0, 6.0 + 1e-9, 0.01), 2):
        diff = abs(equilibrium_split(s.with_price(float(p))).share_a - target)
        if best is None or diff < best[1]:
            best = (float(p), diff)
    passed = best[1] <= 0.02
    return passed, f"system-optimal share {target:.4f}; closest equilibrium at p*={best[0]:.2f} EUR, diff {best[1]:.4f}"


# 5 -------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def default_price_matrix() -> MetricMatrix:
    prices = [round(0.25 * i, 10) for i in range(25)]
    return price_sweep(PricingScenario(), prices)


def criterion_5():
    m = default_price_matrix()
    prices = np.array([k[0] for k in m.row_keys])
    cost = m.column("total_cost")
    k = int(np.argmin(cost))
    tol = 1e-9 * cost.max()
    falls = cost[1] < cost[0] and bool(np.all(np.diff(cost[: k + 1]) <= tol))
    rises = k < len(cost) - 1 and bool(np.all(np.diff(cost[k:]) >= -tol))
    passed = falls and rises and 0.5 < prices[k] < 4.0
    return passed, f"total cost {cost[0]:.0f} at p=0, minimum {cost[k]:.0f} at p={prices[k]:.2f}, {cost[-1]:.0f} at p=6"


# 6 -------------------------------------------------------------------------

def criterion_6():
    shares = {}
    for q in (800.0, 1200.0, 1600.0):
        shares[q] = fairness_optimal_split(PricingScenario(demand_veh_per_h=q), Ideology.EGALITARIAN).share_a
    passed = all(v in (0.0, 1.0) for v in shares.values())
    return passed, "egalitarian share_a " + ", ".join(f"{q:.0f}->{v}" for q, v in shares.items())


# 7 -------------------------------------------------------------------------

def criterion_7():
    rng = _rng(7)
    worst = 0.0
    for _ in range(100):
        s = _random_scenario(rng, price=0.0, sample_count=10_000)
        fair = fairness_optimal_split(s, Ideology.UTILITARIAN).share_a
        worst = max(worst, abs(fair - system_optimal_split(s).share_a))
    return worst <= 1e-3, f"max |utilitarian - system optimum| share {worst:.2e} over 100 scenarios"


# 8 -------------------------------------------------------------------------

def _fingerprint(res):
    rec = res.vehicle_records
    return b"".join(np.ascontiguousarray(a).tobytes() for a in (
        rec.vehicle_id, rec.route_id, rec.entry_time_s, rec.exit_time_s, rec.delay_s, rec.completed,
    )) + repr((res.throughput_veh_per_h, res.spawned, res.completed, res.remaining)).encode()


def criterion_8():
    start = time.perf_counter()
    net = build_network()
    rng = _rng(8)
    problems = []
    for _ in range(50):
        plan = SignalPlan(int(rng.integers(1, 41)), int(rng.integers(1, 41)))
        demand = DemandSpec(float(rng.uniform(20.0, 900.0)), seed=int(rng.integers(0, 2**32)))
        a, b = run(net, plan, demand), run(net, plan, demand)
        if a.spawned != a.completed + a.remaining:
            problems.append(f"conservation {plan}")
        if np.any(a.vehicle_records.delay_s < 0):
            problems.append(f"negative delay {plan}")
        if _fingerprint(a) != _fingerprint(b):
            problems.append(f"nondeterministic {plan}")
    elapsed = time.perf_counter() - start
    passed = not problems and elapsed < 120.0
    return passed, f"50 triples, {len(problems)} problems {problems[:3]}; {elapsed:.1f}s"


# 9-11 (grid) ---------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def grid_sweeps() -> dict[float, list[MetricMatrix]]:
    net = build_network()
    return {
        flow: [sweep(net, DemandSpec(flow, seed=s), COARSE_GREENS, COARSE_GREENS) for s in GRID_SEEDS]
        for flow in GRID_FLOWS
    }


def seed_average(mats: list[MetricMatrix]) -> MetricMatrix:
    names = sorted(set.intersection(*(set(m.metric_names) for m in mats)))
    cols = {n: np.mean([m.column(n) for m in mats], axis=0) for n in names}
    return MetricMatrix(mats[0].row_keys, mats[0].key_names, cols)


def criterion_9():
    start = time.perf_counter()
    sweeps = grid_sweeps()
    ratios = {f: float(np.mean([convexity_ratio(m, "throughput", 0.1) for m in mats])) for f, mats in sweeps.items()}
    seq = [ratios[f] for f in GRID_FLOWS]
    passed = all(b <= a for a, b in zip(seq, seq[1:]))
    elapsed = time.perf_counter() - start
    detail = ", ".join(f"{f:.0f}->{r:.3f}" for f, r in ratios.items())
    return passed, f"convexity at alpha=0.1 ({len(GRID_SEEDS)} seeds, 8x8 plans): {detail}; {elapsed:.1f}s"


def criterion_10():
    m = seed_average(grid_sweeps()[max(GRID_FLOWS)])
    conflicts = {i.value: goal_conflict(m, f"welfare_{i.value}", "throughput") for i in Ideology}
    smallest = min(conflicts, key=conflicts.get)
    passed = smallest == "egalitarian" and conflicts["egalitarian"] < 0
    detail = ", ".join(f"{k} {v:+.3f}" for k, v in conflicts.items())
    return passed, f"conflict with throughput at {max(GRID_FLOWS):.0f} veh/h: {detail}"


def ideology_split(m: MetricMatrix, fairness, efficiency, names) -> tuple[bool, float]:
    tree = cluster_metrics(m, names)
    cluster = tree.smallest_cluster_containing(fairness)
    height = next(mg.distance for c, mg in zip(tree.clusters(), tree.merges) if c == cluster)
    return not (cluster & set(efficiency)), height


def criterion_11():
    parts = []
    ok = True
    for flow in GRID_FLOWS:
        m = seed_average(grid_sweeps()[flow])
        good, h = ideology_split(m, FAIRNESS_SET, EFFICIENCY_SET + ("throughput",), m.metric_names)
        ok &= good
        parts.append(f"grid {flow:.0f}: {'separate' if good else 'mixed'} (h={h:.3f})")

    pm = default_price_matrix()
    names = [n for n in pm.metric_names if n.startswith("delay_")] + ["total_travel_time", "total_cost"]
    good, h = ideology_split(
        pm,
        [f"delay_{n}" for n in FAIRNESS_SET],
        [f"delay_{n}" for n in EFFICIENCY_SET] + ["total_travel_time"],
        names,
    )
    ok &= good
    parts.append(f"pricing (delay metrics): {'separate' if good else 'mixed'} (h={h:.3f})")
    return ok, "; ".join(parts)


# 12 ------------------------------------------------------------------------

def criterion_12():
    def mat(**cols):
        n = len(next(iter(cols.values())))
        return MetricMatrix([(i,) for i in range(n)], ("row",), {k: np.asarray(v, float) for k, v in cols.items()})

    failures = []
    m = mat(eff=[10, 9, 5])
    if alpha_efficient_set(m, "eff", 0.2) != [(0,), (1,)]:
        failures.append("alpha set [10,9,5]")
    if abs(convexity_ratio(m, "eff", 0.2) - 2 / 3) > 1e-9:
        failures.append("convexity 2/3")
    if alpha_efficient_set(m, "eff", 0.0) != [(0,)] or convexity_ratio(m, "eff", 1.0) != 1.0:
        failures.append("alpha extremes")
    if convexity_ratio(mat(eff=[2, 2, 2]), "eff", 0.3) != 1.0:
        failures.append("constant efficiency")

    g = mat(a=[1, 2, 3], b=[2, 4, 7], c=[-1, -2, -3])
    if abs(goal_conflict(g, "a", "b") - 15 / math.sqrt(228)) > 1e-9:
        failures.append("pearson 0.9934")
    if abs(goal_conflict(g, "a", "a") - 1) > 1e-9 or abs(goal_conflict(g, "a", "c") + 1) > 1e-9:
        failures.append("self / anti-aligned")

    t = np.arange(12, dtype=float) - 5.5
    q = np.array([1, -1] * 6, dtype=float)
    tree = cluster_metrics(mat(p1=t, p2=t + 0.5 * q, q1=q, q2=q + 0.05 * t))
    first_two = set(tree.clusters()[:2])
    d_sorted = sorted([1 - abs(oracles.pearson(t, t + 0.5 * q)), 1 - abs(oracles.pearson(q, q + 0.05 * t))])
    if first_two != {frozenset({"p1", "p2"}), frozenset({"q1", "q2"})}:
        failures.append("pair merge order")
    if any(abs(mg.distance - d) > 1e-9 for mg, d in zip(tree.merges, d_sorted)):
        failures.append("pair merge heights")

    dup = cluster_metrics(mat(x=[1, 3, 2, 5], y=[1, 3, 2, 5], z=[4, 4, 1, 2]))
    if dup.clusters()[0] != {"x", "y"} or dup.merges[0].distance != 0.0:
        failures.append("duplicate column")
    noise = _rng(12).normal(size=20)
    base = _rng(13).normal(size=20)
    neg = cluster_metrics(mat(x=base, negx=-base, noise=noise))
    if neg.clusters()[0] != {"x", "negx"}:
        failures.append("x / -x")
    return not failures, "all hand-computed analysis examples match" if not failures else f"failed: {failures}"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 13)}
TITLES = {
    1: "metric oracle suite",
    2: "Wardrop fixed point",
    3: "efficiency gap onset",
    4: "pricing reaches system optimum",
    5: "cost U-turn",
    6: "Egalitarian boundary optimum",
    7: "Utilitarian equals system optimum",
    8: "grid conservation and determinism",
    9: "convexity shrinks with load",
    10: "Egalitarian conflict sign",
    11: "dendrogram ideology clusters",
    12: "analysis unit oracles",
}


def evaluate(number: int) -> tuple[bool, str]:
    passed, detail = CRITERIA[number]()
    RESULTS[number] = (bool(passed), detail)
    return bool(passed), detail


def summary_line(number: int) -> str:
    passed, detail = RESULTS[number]
    return f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {TITLES[number]}: {detail}"


@pytest.mark.slow
@pytest.mark.parametrize("number", list(CRITERIA))
def test_criterion(number):
    passed, detail = evaluate(number)
    print(summary_line(number))
    assert passed, detail


if __name__ == "__main__":
    failed = 0
    for n in CRITERIA:
        evaluate(n)
        print(summary_line(n), flush=True)
        failed += not RESULTS[n][0]
    sys.exit(1 if failed else 0)
