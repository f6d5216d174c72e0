"""Tests for grid construction."""

import numpy as np
import pytest

from fairway.errors import InvalidSpec
from fairway.grid.network import EW, NS, GridSpec, build_network


class TestGridSpec:
    def test_defaults(self):
        spec = GridSpec()
        assert (spec.rows, spec.cols, spec.entrance_count) == (3, 3, 12)
        assert spec.free_flow_speed_mps == 13.9

    @pytest.mark.parametrize(
        "kwargs",
        [{"rows": 0}, {"cols": -1}, {"link_length_m": 0.0}, {"free_flow_speed_mps": -1.0},
         {"saturation_flow_veh_per_s_per_lane": 0.0}, {"entrance_count": 11}, {"lanes_per_direction": 0}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidSpec):
            GridSpec(**kwargs)


class TestBuildNetwork:
    def test_default_counts(self):
        net = build_network()
        assert len(net.intersections) == 9
        assert net.n_entrances == 12
        assert len(net.routes) == 12
        assert sum(r.axis == EW for r in net.routes) == 6
        assert sum(r.axis == NS for r in net.routes) == 6

    def test_single_intersection(self):
        net = build_network(GridSpec(rows=1, cols=1))
        assert len(net.intersections) == 1
        assert len(net.routes) == 4

    def test_route_length_and_free_flow_time(self):
        # 400 m between the outer boundary links plus two 100 m stubs
        net = build_network()
        for route in net.routes:
            assert route.length_m == 600.0
            assert route.free_flow_time_s == pytest.approx(600.0 / 13.9, abs=1e-12)
            assert len(route.stops) == 3

    def test_routes_cross_to_opposite_boundary(self):
        net = build_network()
        names = {r.name: r for r in net.routes}
        assert names["EB1"].stops == ((1, 0), (1, 1), (1, 2))
        assert names["WB1"].stops == ((1, 2), (1, 1), (1, 0))
        assert names["SB0"].stops == ((0, 0), (1, 0), (2, 0))
        assert names["NB2"].stops == ((2, 2), (1, 2), (0, 2))

    def test_segment_table(self):
        net = build_network()
        assert net.route_first_seg.tolist() == [4 * i for i in range(12)]
        for route, first in zip(net.routes, net.route_first_seg):
            segs = range(first, first + len(route.stops) + 1)
            assert [net.seg_length[s] for s in segs] == list(route.segment_lengths_m)
            assert [net.seg_next[s] for s in segs] == [s + 1 for s in segs][:-1] + [-1]
            assert all(net.seg_axis[s] == route.axis for s in segs)
            for s, rc in zip(segs, route.stops):
                assert net.seg_node[s] == net.node_index(rc)

    def test_storage_capacity(self):
        net = build_network()
        signalized = net.seg_next >= 0
        expected = np.floor(net.seg_length[signalized] * 2 / 7.5).astype(np.int64)
        assert net.seg_capacity[signalized].tolist() == expected.tolist()
        assert net.seg_capacity[0] == 53  # 200 m entry segment, two lanes
        assert np.all(net.seg_capacity[~signalized] == np.iinfo(np.int64).max)
