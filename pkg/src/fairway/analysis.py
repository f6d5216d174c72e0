"""Fairness/efficiency trade-off analysis over metric matrices.

A :class:`MetricMatrix` holds one row per point of a solution space (signal
plan, price) and one column per efficiency or fairness metric.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import DegenerateEfficiency, DegenerateMetric, UnknownMetric

LINKAGES = ("average", "single", "complete")


@dataclass
class MetricMatrix:
    row_keys: list[tuple]
    key_names: tuple[str, ...]
    columns: dict[str, np.ndarray]
    provenance: dict[str, Any] = field(default_factory=dict)
    allocations: Mapping[tuple, Any] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.row_keys = [tuple(k) if isinstance(k, (tuple, list)) else (k,) for k in self.row_keys]
        n = len(self.row_keys)
        cols = {}
        for name, values in self.columns.items():
            arr = np.asarray(values, dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"column {name!r} has {arr.size} values for {n} rows")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"column {name!r} contains non-finite values")
            cols[name] = arr
        overlap = set(cols) & set(self.key_names)
        if overlap:
            raise ValueError(f"metric names clash with row keys: {sorted(overlap)}")
        self.columns = cols

    def __len__(self) -> int:
        return len(self.row_keys)

    @property
    def metric_names(self) -> list[str]:
        return sorted(self.columns)

    def column(self, name: str) -> np.ndarray:
        try:
            return self.columns[name]
        except KeyError:
            raise UnknownMetric(f"unknown metric {name!r}; have {self.metric_names}") from None

    def select(self, names: Sequence[str]) -> "MetricMatrix":
        return MetricMatrix(
            self.row_keys, self.key_names, {n: self.column(n) for n in names}, dict(self.provenance)
        )


def _efficiency(m: MetricMatrix, efficiency_col: str, alpha: float) -> tuple[np.ndarray, float]:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    eff = m.column(efficiency_col)
    if eff.size == 0:
        raise DegenerateEfficiency("empty metric matrix")
    best = float(np.max(eff))
    if best <= 0:
        raise DegenerateEfficiency(f"maximum of {efficiency_col!r} is {best}, must be > 0")
    return eff, best


def alpha_efficient_mask(m: MetricMatrix, efficiency_col: str, alpha: float) -> np.ndarray:
    eff, best = _efficiency(m, efficiency_col, alpha)
    return eff >= (1.0 - alpha) * best


def alpha_efficient_set(m: MetricMatrix, efficiency_col: str, alpha: float) -> list[tuple]:
    """Row keys whose efficiency is at least ``(1 - alpha)`` of the maximum."""
    mask = alpha_efficient_mask(m, efficiency_col, alpha)
    return [k for k, keep in zip(m.row_keys, mask) if keep]


def convexity_ratio(m: MetricMatrix, efficiency_col: str, alpha: float) -> float:
    """Fraction of the solution space that is alpha-efficient."""
    mask = alpha_efficient_mask(m, efficiency_col, alpha)
    return float(np.count_nonzero(mask)) / mask.size


def _centered(x: np.ndarray) -> tuple[np.ndarray, float, bool]:
    centered = x - x.mean()
    norm = math.sqrt(float(np.dot(centered, centered)))
    scale = max(1.0, float(np.max(np.abs(x))))
    return centered, norm, norm > 1e-12 * scale * math.sqrt(x.size)


def has_variance(x: np.ndarray) -> bool:
    """False for columns that are constant up to rounding."""
    return _centered(np.asarray(x, dtype=float))[2]


def _zscore(x: np.ndarray, name: str) -> np.ndarray:
    centered, norm, ok = _centered(x)
    if not ok:
        raise DegenerateMetric(f"metric {name!r} has zero variance")
    return centered / norm


def goal_conflict(m: MetricMatrix, col_a: str, col_b: str) -> float:
    """Cosine similarity of the two centred, normalised columns (Pearson r).

    Values near -1 mean improving one goal degrades the other.
    """
    za = _zscore(m.column(col_a), col_a)
    zb = _zscore(m.column(col_b), col_b)
    return float(np.clip(np.dot(za, zb), -1.0, 1.0))


def correlation_distance(m: MetricMatrix, names: Sequence[str]) -> np.ndarray:
    """Pairwise ``1 - |r|`` between metric columns."""
    z = np.vstack([_zscore(m.column(n), n) for n in names])
    r = np.clip(z @ z.T, -1.0, 1.0)
    d = 1.0 - np.abs(r)
    np.fill_diagonal(d, 0.0)
    return np.maximum(d, 0.0)


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    distance: float
    new_id: int


@dataclass(frozen=True)
class Dendrogram:
    """Agglomerative merge list; leaves are ``0..n-1``, merge ``k`` creates id ``n+k``."""

    labels: tuple[str, ...]
    merges: tuple[Merge, ...]
    linkage: str = "average"

    def members(self, node: int) -> frozenset[str]:
        n = len(self.labels)
        if node < n:
            return frozenset([self.labels[node]])
        m = self.merges[node - n]
        return self.members(m.left) | self.members(m.right)

    def clusters(self) -> list[frozenset[str]]:
        """Leaf set of every merge, in merge order."""
        return [self.members(m.new_id) for m in self.merges]

    def smallest_cluster_containing(self, names) -> frozenset[str]:
        wanted = set(names)
        missing = wanted - set(self.labels)
        if missing:
            raise UnknownMetric(f"not in dendrogram: {sorted(missing)}")
        if len(wanted) == 1:
            return frozenset(wanted)
        for cluster in self.clusters():
            if wanted <= cluster:
                return cluster
        raise AssertionError("root must contain every leaf")

    def is_monotone(self) -> bool:
        d = [m.distance for m in self.merges]
        return all(b >= a - 1e-12 for a, b in zip(d, d[1:]))

    def to_dict(self) -> dict:
        return {
            "linkage": self.linkage,
            "labels": list(self.labels),
            "merges": [
                {"left": m.left, "right": m.right, "distance": m.distance, "new_id": m.new_id}
                for m in self.merges
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_newick(self) -> str:
        n = len(self.labels)
        heights = {m.new_id: m.distance for m in self.merges}

        def height(node: int) -> float:
            return 0.0 if node < n else heights[node]

        def render(node: int) -> str:
            if node < n:
                return _newick_label(self.labels[node])
            m = self.merges[node - n]
            parts = [f"{render(c)}:{max(0.0, m.distance - height(c)):.6g}" for c in (m.left, m.right)]
            return "(" + ",".join(parts) + ")"

        root = n + len(self.merges) - 1 if self.merges else 0
        return render(root) + ";\n"


def _newick_label(name: str) -> str:
    if any(ch in name for ch in " ():;,[]'"):
        return "'" + name.replace("'", "''") + "'"
    return name


def cluster_metrics(
    m: MetricMatrix, names: Sequence[str] | None = None, linkage: str = "average", tie_tol: float = 1e-12
) -> Dendrogram:
    """Agglomerative clustering of metric columns under ``1 - |Pearson r|``.

    Ties are broken toward the pair whose smallest member names sort first,
    which makes the output independent of column order.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"linkage must be one of {LINKAGES}")
    labels = tuple(sorted(names if names is not None else m.metric_names))
    if len(labels) < 2:
        raise DegenerateMetric(f"need ≥2 metrics to cluster, got {len(labels)}")
    dist = correlation_distance(m, labels)
    n = len(labels)

    # active cluster id -> (leaf indices, sort label)
    active: dict[int, tuple[list[int], str]] = {i: ([i], labels[i]) for i in range(n)}
    cache: dict[tuple[int, int], float] = {}

    def cluster_distance(a: int, b: int) -> float:
        key = (a, b) if a < b else (b, a)
        if key not in cache:
            block = dist[np.ix_(active[a][0], active[b][0])]
            if linkage == "average":
                cache[key] = float(block.mean())
            elif linkage == "single":
                cache[key] = float(block.min())
            else:
                cache[key] = float(block.max())
        return cache[key]

    merges = []
    next_id = n
    while len(active) > 1:
        ids = sorted(active, key=lambda i: active[i][1])
        best = None
        for ii, a in enumerate(ids):
            for b in ids[ii + 1:]:
                d = cluster_distance(a, b)
                tag = (active[a][1], active[b][1])
                if best is None or d < best[0] - tie_tol or (abs(d - best[0]) <= tie_tol and tag < best[1]):
                    best = (d, tag, a, b)
        d, _, a, b = best
        leaves = active.pop(a)[0] + active.pop(b)[0]
        merges.append(Merge(a, b, d, next_id))
        active[next_id] = (leaves, min(labels[i] for i in leaves))
        next_id += 1
    return Dendrogram(labels, tuple(merges), linkage)
