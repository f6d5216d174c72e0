"""Manhattan grid network: intersections, straight-through routes and segments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidSpec

NS, EW = 0, 1


@dataclass(frozen=True)
class GridSpec:
    rows: int = 3
    cols: int = 3
    link_length_m: float = 100.0
    lanes_per_direction: int = 2
    free_flow_speed_mps: float = 13.9
    saturation_flow_veh_per_s_per_lane: float = 0.5
    entrance_count: int | None = None
    stub_length_m: float = 100.0
    jam_spacing_m: float = 7.5

    def __post_init__(self):
        if self.entrance_count is None:
            object.__setattr__(self, "entrance_count", 2 * (self.rows + self.cols))
        self.validate()

    def validate(self) -> None:
        checks = [
            (isinstance(self.rows, int) and self.rows >= 1, "rows", "must be an integer >= 1"),
            (isinstance(self.cols, int) and self.cols >= 1, "cols", "must be an integer >= 1"),
            (self.link_length_m > 0, "link_length_m", "must be > 0"),
            (isinstance(self.lanes_per_direction, int) and self.lanes_per_direction >= 1,
             "lanes_per_direction", "must be an integer >= 1"),
            (self.free_flow_speed_mps > 0, "free_flow_speed_mps", "must be > 0"),
            (self.saturation_flow_veh_per_s_per_lane > 0, "saturation_flow_veh_per_s_per_lane", "must be > 0"),
            (self.stub_length_m >= 0, "stub_length_m", "must be >= 0"),
            (self.jam_spacing_m > 0, "jam_spacing_m", "must be > 0"),
        ]
        for ok, name, msg in checks:
            if not ok:
                raise InvalidSpec(f"{name} {msg}")
        for name in ("link_length_m", "free_flow_speed_mps", "saturation_flow_veh_per_s_per_lane", "stub_length_m"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidSpec(f"{name} must be finite")
        if self.entrance_count != 2 * (self.rows + self.cols):
            raise InvalidSpec(
                f"entrance_count must equal 2*(rows+cols) = {2 * (self.rows + self.cols)}, got {self.entrance_count}"
            )


@dataclass(frozen=True)
class Route:
    """A straight-through route from one boundary entrance to the opposite exit.

    ``stops`` lists the (row, col) intersections in travel order. Segment ``i``
    ends at the stop line of ``stops[i]``; the final segment leads to the exit.
    """

    route_id: int
    name: str
    axis: int
    stops: tuple[tuple[int, int], ...]
    segment_lengths_m: tuple[float, ...]
    free_flow_time_s: float

    @property
    def length_m(self) -> float:
        return float(sum(self.segment_lengths_m))


@dataclass(frozen=True)
class Network:
    spec: GridSpec
    intersections: tuple[tuple[int, int], ...]
    routes: tuple[Route, ...]
    # flattened segment table consumed by the simulation kernels
    seg_length: np.ndarray = field(repr=False)
    seg_capacity: np.ndarray = field(repr=False)
    seg_next: np.ndarray = field(repr=False)
    seg_node: np.ndarray = field(repr=False)
    seg_axis: np.ndarray = field(repr=False)
    route_first_seg: np.ndarray = field(repr=False)

    @property
    def n_entrances(self) -> int:
        return len(self.routes)

    def node_index(self, rc: tuple[int, int]) -> int:
        return rc[0] * self.spec.cols + rc[1]


def straight_routes(spec: GridSpec) -> list[tuple[str, int, list[tuple[int, int]]]]:
    """One route per entrance, crossing the grid to the opposite boundary."""
    R, C = spec.rows, spec.cols
    routes = []
    for r in range(R):
        routes.append((f"EB{r}", EW, [(r, c) for c in range(C)]))
    for r in range(R):
        routes.append((f"WB{r}", EW, [(r, c) for c in reversed(range(C))]))
    for c in range(C):
        routes.append((f"SB{c}", NS, [(r, c) for r in range(R)]))
    for c in range(C):
        routes.append((f"NB{c}", NS, [(r, c) for r in reversed(range(R))]))
    return routes


def build_network(spec: GridSpec | None = None, route_builder=straight_routes) -> Network:
    """Build the directed segment graph for a grid.

    Each route's first segment is the entrance stub plus the boundary link;
    interior segments are one link long; the exit segment is the outgoing
    boundary link plus the exit stub and has unlimited storage.
    """
    spec = spec or GridSpec()
    spec.validate()
    L, stub, v = spec.link_length_m, spec.stub_length_m, spec.free_flow_speed_mps

    def storage(length: float) -> int:
        return max(1, int(math.floor(length * spec.lanes_per_direction / spec.jam_spacing_m)))

    intersections = tuple((r, c) for r in range(spec.rows) for c in range(spec.cols))
    lengths, caps, nxt, node, axis, first = [], [], [], [], [], []
    routes = []
    for rid, (name, ax, stops) in enumerate(route_builder(spec)):
        seg_lens = [stub + L] + [L] * (len(stops) - 1) + [L + stub]
        first.append(len(lengths))
        for i, seg_len in enumerate(seg_lens):
            sid = len(lengths)
            lengths.append(seg_len)
            is_exit = i == len(stops)
            caps.append(np.iinfo(np.int64).max if is_exit else storage(seg_len))
            nxt.append(-1 if is_exit else sid + 1)
            node.append(-1 if is_exit else stops[i][0] * spec.cols + stops[i][1])
            axis.append(ax)
        routes.append(Route(rid, name, ax, tuple(stops), tuple(seg_lens), sum(seg_lens) / v))

    return Network(
        spec=spec,
        intersections=intersections,
        routes=tuple(routes),
        seg_length=np.asarray(lengths, dtype=float),
        seg_capacity=np.asarray(caps, dtype=np.int64),
        seg_next=np.asarray(nxt, dtype=np.int64),
        seg_node=np.asarray(node, dtype=np.int64),
        seg_axis=np.asarray(axis, dtype=np.int64),
        route_first_seg=np.asarray(first, dtype=np.int64),
    )
