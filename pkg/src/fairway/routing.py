"""Two-route static road pricing: equilibria, optima and cost distributions.

Route A is short with a single-lane bottleneck, route B longer but wider. A
toll on A shifts users with low value of time (VOT) to B. Travel times follow
BPR volume-delay curves in minutes; VOTs are in euros per hour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import InvalidFlow, InvalidSpec, InvalidValue, NoConvergence
from .metrics import Allocation, Ideology, ResourceKind, fairness_profile, welfare
from .search import bisect_decreasing, golden_section_min

EQUILIBRIUM_TOL = 1e-6
MAX_BISECTION_STEPS = 200
SCAN_STEP = 1e-3
GOLDEN_TOL = 1e-6
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class RouteSpec:
    name: str
    free_flow_time_min: float
    capacity_veh_per_h: float
    bpr_alpha: float = 0.15
    bpr_beta: float = 4.0

    def __post_init__(self):
        vals = (self.free_flow_time_min, self.capacity_veh_per_h, self.bpr_alpha, self.bpr_beta)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidSpec(f"route {self.name}: parameters must be finite")
        if self.free_flow_time_min <= 0 or self.capacity_veh_per_h <= 0:
            raise InvalidSpec(f"route {self.name}: free-flow time and capacity must be > 0")
        if self.bpr_alpha < 0 or self.bpr_beta < 1:
            raise InvalidSpec(f"route {self.name}: need bpr_alpha >= 0 and bpr_beta >= 1")


DEFAULT_ROUTE_A = RouteSpec("A", 3.0, 950.0, 0.15, 8.0)
DEFAULT_ROUTE_B = RouteSpec("B", 4.0, 1900.0, 1.0, 1.0)
DEFAULT_DEMAND = 2500.0


def travel_time(route: RouteSpec, flow_veh_per_h: float) -> float:
    """BPR travel time in minutes: ``t0 * (1 + alpha * (q / c) ** beta)``."""
    if not flow_veh_per_h >= 0:
        raise InvalidFlow(f"flow must be >= 0, got {flow_veh_per_h}")
    ratio = flow_veh_per_h / route.capacity_veh_per_h
    return route.free_flow_time_min * (1.0 + route.bpr_alpha * ratio**route.bpr_beta)


@dataclass(frozen=True)
class VotDistribution:
    """Value-of-time population in euros per hour, discretised into ``sample_count`` users.

    ``params`` is ``(mu, sigma)`` of log-VOT for lognormal, ``(lo, hi)`` for
    uniform and ``(v,)`` for a point mass.
    """

    kind: str = "lognormal"
    params: tuple[float, ...] = (math.log(30.0) - 0.125, 0.5)
    sample_count: int = 10_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        expected = {"lognormal": 2, "uniform": 2, "point": 1}
        if self.kind not in expected:
            raise InvalidSpec(f"unknown VOT distribution {self.kind!r}")
        if len(self.params) != expected[self.kind]:
            raise InvalidSpec(f"{self.kind} VOT needs {expected[self.kind]} parameters")
        if not all(math.isfinite(p) for p in self.params):
            raise InvalidSpec("VOT parameters must be finite")
        if self.kind == "lognormal" and self.params[1] < 0:
            raise InvalidSpec("lognormal sigma must be >= 0")
        if self.kind == "uniform" and not 0 < self.params[0] <= self.params[1]:
            raise InvalidSpec("uniform VOT needs 0 < lo <= hi")
        if self.kind == "point" and self.params[0] <= 0:
            raise InvalidSpec("point VOT must be > 0")
        if isinstance(self.sample_count, bool) or not isinstance(self.sample_count, int) or self.sample_count < 1:
            raise InvalidSpec("sample_count must be an integer >= 1")

    @classmethod
    def lognormal_with_mean(cls, mean: float, sigma: float, sample_count: int = 10_000, seed: int = 0):
        return cls("lognormal", (math.log(mean) - sigma * sigma / 2.0, sigma), sample_count, seed)

    @cached_property
    def values(self) -> np.ndarray:
        """Sorted (ascending) VOT of every sampled user."""
        rng = np.random.default_rng(self.seed)
        n = self.sample_count
        if self.kind == "lognormal":
            v = rng.lognormal(self.params[0], self.params[1], n)
        elif self.kind == "uniform":
            v = rng.uniform(self.params[0], self.params[1], n)
        else:
            v = np.full(n, self.params[0])
        v = np.sort(v)
        v.flags.writeable = False
        return v


DEFAULT_VOT = VotDistribution.lognormal_with_mean(30.0, 0.5)


@dataclass(frozen=True)
class PricingScenario:
    route_a: RouteSpec = DEFAULT_ROUTE_A
    route_b: RouteSpec = DEFAULT_ROUTE_B
    demand_veh_per_h: float = DEFAULT_DEMAND
    vot_population: VotDistribution = field(default=DEFAULT_VOT)
    price_eur: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.demand_veh_per_h) and self.demand_veh_per_h > 0):
            raise InvalidSpec("demand must be finite and > 0")
        if not (math.isfinite(self.price_eur) and self.price_eur >= 0):
            raise InvalidSpec("price must be finite and >= 0")

    def with_price(self, price: float) -> "PricingScenario":
        return replace(self, price_eur=float(price))

    def times(self, share_a: float) -> tuple[float, float]:
        q = self.demand_veh_per_h
        return travel_time(self.route_a, share_a * q), travel_time(self.route_b, (1.0 - share_a) * q)

    def total_travel_time(self, share_a: float) -> float:
        """Vehicle-minutes per hour of demand."""
        t_a, t_b = self.times(share_a)
        return self.demand_veh_per_h * (share_a * t_a + (1.0 - share_a) * t_b)

    @property
    def free_flow_minimum(self) -> float:
        return min(self.route_a.free_flow_time_min, self.route_b.free_flow_time_min)


@dataclass(frozen=True)
class SplitResult:
    """A route split with the per-user delay and cost allocations it induces.

    Users are ordered by ascending VOT; the ``n_a`` users with the highest VOT
    take route A. Delays are minutes above the faster route's free-flow time.
    """

    share_a: float
    time_a_min: float
    time_b_min: float
    price_eur: float
    n_a: int
    per_user_delays: Allocation
    per_user_costs: Allocation
    delay_costs: np.ndarray = field(repr=False)
    financial_costs: np.ndarray = field(repr=False)
    total_travel_time: float = 0.0
    residual: float = 0.0

    @property
    def n_users(self) -> int:
        return len(self.per_user_costs)


def _user_allocations(s: PricingScenario, share_a: float, t_a: float, t_b: float):
    vot = s.vot_population.values
    n = vot.size
    n_a = int(round(share_a * n))
    floor = s.free_flow_minimum
    on_a = np.zeros(n, dtype=bool)
    on_a[n - n_a:] = True
    delays = np.where(on_a, t_a - floor, t_b - floor)
    delays = np.maximum(delays, 0.0)
    delay_costs = vot * delays / 60.0
    financial = np.where(on_a, s.price_eur, 0.0)
    return n_a, delays, delay_costs, financial


def split_at(s: PricingScenario, share_a: float, residual: float = 0.0) -> SplitResult:
    """Evaluate a given split: times, allocations and total travel time."""
    if not 0.0 <= share_a <= 1.0:
        raise InvalidValue(f"share_a must lie in [0, 1], got {share_a}")
    t_a, t_b = s.times(share_a)
    n_a, delays, delay_costs, financial = _user_allocations(s, share_a, t_a, t_b)
    return SplitResult(
        share_a=float(share_a),
        time_a_min=t_a,
        time_b_min=t_b,
        price_eur=s.price_eur,
        n_a=n_a,
        per_user_delays=Allocation(delays, ResourceKind.DELAY),
        per_user_costs=Allocation(financial + delay_costs, ResourceKind.MONETARY_COST),
        delay_costs=delay_costs,
        financial_costs=financial,
        total_travel_time=s.total_travel_time(share_a),
        residual=residual,
    )


def implied_share(s: PricingScenario, share_a: float) -> float:
    """Share of users preferring A when the split is ``share_a``.

    A user with VOT ``v`` takes A iff ``v * (t_B - t_A) / 60 > price``; the
    choosers are exactly the users above a VOT cutoff.
    """
    t_a, t_b = s.times(share_a)
    gain = t_b - t_a
    vot = s.vot_population.values
    if gain <= 0:
        return 0.0
    cutoff = 60.0 * s.price_eur / gain
    return float(vot.size - np.searchsorted(vot, cutoff, side="right")) / vot.size


def equilibrium_split(s: PricingScenario, tol: float = EQUILIBRIUM_TOL) -> SplitResult:
    """User equilibrium under the toll, by bisection on the share of route A.

    The implied share is nonincreasing in the split, so the fixed point is
    bracketed by the last point where users still want more of A and the
    first where they do not. The residual is the distance from the returned
    share to the range of implied shares across that bracket, which absorbs
    the indifferent users at the cutoff.

    Raises:
        NoConvergence: the bracket did not shrink below ``tol``.
    """
    g = lambda x: implied_share(s, x) - x  # noqa: E731
    if g(0.0) <= 0:
        return split_at(s, 0.0)
    if g(1.0) >= 0:
        return split_at(s, 1.0)
    lo, hi, _ = bisect_decreasing(g, 0.0, 1.0, tol / 4.0, MAX_BISECTION_STEPS)
    share = 0.5 * (lo + hi)
    residual = max(0.0, implied_share(s, hi) - share, share - implied_share(s, lo))
    if hi - lo > tol / 4.0 or residual > tol:
        raise NoConvergence(f"equilibrium bisection at price {s.price_eur}", residual)
    return split_at(s, share, residual)


def system_optimal_split(s: PricingScenario, tol: float = GOLDEN_TOL) -> SplitResult:
    """Split minimizing total travel time (golden-section search over the share)."""
    share = golden_section_min(s.total_travel_time, 0.0, 1.0, tol)
    return split_at(s, share)


def _resource(split: SplitResult, resource: str) -> Allocation:
    if resource == "delay":
        return split.per_user_delays
    if resource == "total_cost":
        return split.per_user_costs
    raise ValueError(f"resource must be 'delay' or 'total_cost', got {resource!r}")


def fairness_optimal_split(
    s: PricingScenario, ideology: Ideology, resource: str = "delay", step: float = SCAN_STEP
) -> SplitResult:
    """Split maximizing the ideology's welfare of per-user delays or total costs.

    A grid scan locates the best region, a golden-section search refines it,
    and ties resolve to the smaller share of route A.
    """
    n_grid = int(round(1.0 / step))
    grid = np.linspace(0.0, 1.0, n_grid + 1)

    def value(x: float) -> float:
        return welfare(_resource(split_at(s, x), resource), ideology)

    scores = np.array([value(x) for x in grid])
    top = float(np.max(scores))
    tie = TIE_RTOL * max(1.0, abs(top))
    best_i = int(np.flatnonzero(scores >= top - tie)[0])  # smallest share among ties
    best_x, best_v = float(grid[best_i]), float(scores[best_i])

    lo, hi = max(0.0, best_x - step), min(1.0, best_x + step)
    refined = golden_section_min(lambda x: -value(x), lo, hi, GOLDEN_TOL)
    refined_v = value(refined)
    if refined_v > best_v + tie or (refined_v >= best_v - tie and refined < best_x):
        best_x = refined
    return split_at(s, best_x)


def split_columns(split: SplitResult, scale: float) -> dict[str, float]:
    """Aggregate and fairness columns of one split; ``scale`` converts user sums to per-hour totals."""
    delay_cost = float(np.sum(split.delay_costs)) * scale
    financial = float(np.sum(split.financial_costs)) * scale
    row = {
        "share_a": split.share_a,
        "time_a_min": split.time_a_min,
        "time_b_min": split.time_b_min,
        "total_travel_time": split.total_travel_time,
        "total_delay_cost": delay_cost,
        "total_financial_cost": financial,
        "total_cost": delay_cost + financial,
    }
    row.update(fairness_profile(split.per_user_costs, prefix="cost_"))
    row.update(fairness_profile(split.per_user_delays, prefix="delay_"))
    return row


def price_sweep(s: PricingScenario, prices: Sequence[float], keep_splits: bool = False):
    """Equilibrium at each price, one MetricMatrix row per price.

    Monetary totals are euros per hour of demand; ``total_travel_time`` is
    vehicle-minutes per hour.
    """
    from .analysis import MetricMatrix

    prices = [float(p) for p in prices]
    if any(b < a for a, b in zip(prices, prices[1:])):
        raise InvalidValue("prices must be sorted ascending")
    if any(p < 0 or not math.isfinite(p) for p in prices):
        raise InvalidValue("prices must be finite and >= 0")
    scale = s.demand_veh_per_h / s.vot_population.sample_count
    splits = []
    for p in prices:
        try:
            splits.append(equilibrium_split(s.with_price(p)))
        except NoConvergence as exc:
            raise NoConvergence(f"price {p}: {exc}", exc.residual) from exc
    rows = [split_columns(sp, scale) for sp in splits]
    names = sorted(rows[0]) if rows else []
    columns = {n: np.array([r[n] for r in rows]) for n in names}
    matrix = MetricMatrix(
        row_keys=[(p,) for p in prices],
        key_names=("price",),
        columns={n: c for n, c in columns.items() if np.all(np.isfinite(c))},
        provenance={"seed": s.vot_population.seed},
        allocations={(p,): sp for p, sp in zip(prices, splits)} if keep_splits else None,
    )
    return matrix
