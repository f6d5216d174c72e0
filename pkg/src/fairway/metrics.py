"""Distributive-fairness metrics over allocations of negative-utility resources.

Every quantity here takes an :class:`Allocation` of per-actor costs (delays in
seconds or minutes, monetary costs in euros). Welfare functions follow a
"larger is fairer" convention, so costs enter with a negative sign and
``argmax`` works uniformly across ideologies.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DegenerateMean, EmptyAllocation, InvalidValue


class ResourceKind(enum.Enum):
    DELAY = "delay"
    MONETARY_COST = "monetary_cost"


class Ideology(enum.Enum):
    UTILITARIAN = "utilitarian"
    HARSANYIAN = "harsanyian"
    RAWLSIAN = "rawlsian"
    EGALITARIAN = "egalitarian"


@dataclass(frozen=True)
class Allocation:
    """Per-actor resource quantities, all finite and nonnegative."""

    values: np.ndarray
    resource_kind: ResourceKind = ResourceKind.DELAY

    def __post_init__(self):
        object.__setattr__(self, "values", _validated(self.values))

    def __len__(self) -> int:
        return len(self.values)


AllocationLike = Union[Allocation, Sequence[float], np.ndarray]


def _validated(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size == 0:
        raise EmptyAllocation("allocation must contain at least one value")
    if not np.all(np.isfinite(arr)):
        raise InvalidValue("allocation contains a non-finite value")
    if np.any(arr < 0):
        raise InvalidValue("allocation contains a negative value")
    return arr


def _as_array(a: AllocationLike) -> np.ndarray:
    if isinstance(a, Allocation):
        return a.values
    return _validated(a)


def _pstd(x: np.ndarray) -> float:
    # np.std of a constant array can be ~1e-16 instead of 0
    if x[0] == x.min() == x.max():
        return 0.0
    return float(np.std(x))


def welfare(a: AllocationLike, ideology: Ideology) -> float:
    """Welfare of a cost allocation under one ideology; larger is fairer.

    Utilitarian is the negated total, Harsanyian the negated mean, Rawlsian
    the negated worst (largest) cost and Egalitarian the negated population
    standard deviation.
    """
    x = _as_array(a)
    if ideology is Ideology.UTILITARIAN:
        return -float(np.sum(x))
    if ideology is Ideology.HARSANYIAN:
        return -float(np.mean(x))
    if ideology is Ideology.RAWLSIAN:
        return -float(np.max(x))
    if ideology is Ideology.EGALITARIAN:
        return -_pstd(x)
    raise ValueError(f"unknown ideology {ideology!r}")


class DispersionKind(enum.Enum):
    STD_DEV = "std"
    COEFFICIENT_OF_VARIATION = "cov"
    RANGE = "range"
    GINI = "gini"
    JAIN = "jain"
    ATKINSON = "atkinson"
    THEIL = "theil"


@dataclass(frozen=True)
class DispersionMetric:
    kind: DispersionKind
    epsilon: float = field(default=0.5)

    def __post_init__(self):
        if self.kind is DispersionKind.ATKINSON:
            eps = self.epsilon
            if not (math.isfinite(eps) and eps > 0 and eps != 1):
                raise InvalidValue(f"Atkinson epsilon must be finite, > 0 and != 1, got {eps}")

    @property
    def name(self) -> str:
        if self.kind is DispersionKind.ATKINSON:
            return f"atkinson_{self.epsilon:g}"
        return self.kind.value

    @classmethod
    def parse(cls, name: str) -> "DispersionMetric":
        """Parse names like ``gini`` or ``atkinson_0.5``."""
        if name.startswith("atkinson"):
            _, _, eps = name.partition("_")
            return cls(DispersionKind.ATKINSON, float(eps) if eps else 0.5)
        return cls(DispersionKind(name))


STD_DEV = DispersionMetric(DispersionKind.STD_DEV)
COEFFICIENT_OF_VARIATION = DispersionMetric(DispersionKind.COEFFICIENT_OF_VARIATION)
RANGE = DispersionMetric(DispersionKind.RANGE)
GINI = DispersionMetric(DispersionKind.GINI)
JAIN = DispersionMetric(DispersionKind.JAIN)
THEIL = DispersionMetric(DispersionKind.THEIL)


def atkinson(epsilon: float = 0.5) -> DispersionMetric:
    return DispersionMetric(DispersionKind.ATKINSON, epsilon)


DEFAULT_DISPERSIONS = (STD_DEV, COEFFICIENT_OF_VARIATION, RANGE, GINI, JAIN, atkinson(0.5), THEIL)


def dispersion(a: AllocationLike, metric: DispersionMetric) -> float:
    """Concentration or dispersion statistic of an allocation.

    Gini, Jain, Atkinson, Theil and CoV are scale-invariant and need a
    positive mean; StdDev and Range carry the allocation's units.

    Raises:
        DegenerateMean: the metric is relative and the mean is zero.
    """
    x = _as_array(a)
    kind = metric.kind
    if kind is DispersionKind.STD_DEV:
        return _pstd(x)
    if kind is DispersionKind.RANGE:
        return float(np.max(x) - np.min(x))

    mu = float(np.mean(x))
    if mu <= 0:
        raise DegenerateMean(f"{metric.name} needs a positive mean")
    n = x.size

    if kind is DispersionKind.COEFFICIENT_OF_VARIATION:
        return _pstd(x) / mu
    if kind is DispersionKind.GINI:
        # sorted-rank form of the mean absolute difference
        xs = np.sort(x)
        ranks = np.arange(1, n + 1, dtype=float)
        return float(np.sum((2.0 * ranks - n - 1.0) * xs)) / (n * n * mu)
    if kind is DispersionKind.JAIN:
        total = float(np.sum(x))
        return total * total / (n * float(np.sum(x * x)))
    if kind is DispersionKind.ATKINSON:
        eps = metric.epsilon
        if eps > 1 and np.any(x == 0):
            return 1.0
        power = 1.0 - eps
        with np.errstate(over="ignore", divide="ignore"):
            # tiny shares overflow toward the correct limit of 1
            ede = float(np.mean((x / mu) ** power)) ** (1.0 / power)
        return min(1.0, max(0.0, 1.0 - ede))
    if kind is DispersionKind.THEIL:
        r = x / mu
        pos = r > 0
        return max(0.0, float(np.sum(r[pos] * np.log(r[pos]))) / n)
    raise ValueError(f"unknown dispersion metric {metric!r}")


def perceived_delay(delay_seconds: float, exponent: float = 1.0) -> float:
    """Over-proportional weighting of long delays: ``delay ** exponent``."""
    if not math.isfinite(delay_seconds) or delay_seconds < 0:
        raise InvalidValue(f"delay must be finite and >= 0, got {delay_seconds}")
    if not math.isfinite(exponent) or exponent < 1:
        raise InvalidValue(f"exponent must be >= 1, got {exponent}")
    return float(delay_seconds) ** exponent


def fairness_profile(
    a: AllocationLike,
    prefix: str = "",
    dispersions: Sequence[DispersionMetric] = DEFAULT_DISPERSIONS,
) -> dict[str, float]:
    """Every welfare and dispersion value of one allocation, keyed by column name.

    Relative metrics are reported as NaN when the mean is zero; callers that
    need a finite matrix drop those rows or columns.
    """
    x = _as_array(a)
    out: dict[str, float] = {}
    for ideology in Ideology:
        out[f"{prefix}welfare_{ideology.value}"] = welfare(x, ideology)
    for metric in dispersions:
        try:
            out[f"{prefix}{metric.name}"] = dispersion(x, metric)
        except DegenerateMean:
            out[f"{prefix}{metric.name}"] = math.nan
    return out
