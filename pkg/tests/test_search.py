"""Tests for the one-dimensional search routines."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairway.search import bisect_decreasing, golden_section_min


class TestGoldenSection:
    @given(st.floats(0.0, 1.0))
    def test_interior_quadratic(self, x0):
        x = golden_section_min(lambda x: (x - x0) ** 2, 0.0, 1.0, 1e-8)
        assert x == pytest.approx(x0, abs=1e-7)

    def test_boundary_minimum_is_exact(self):
        assert golden_section_min(lambda x: x, 0.0, 1.0) == 0.0
        assert golden_section_min(lambda x: -x, 0.0, 1.0) == 1.0

    def test_constant_prefers_smaller_point(self):
        assert golden_section_min(lambda x: 1.0, 0.2, 0.8) == 0.2

    def test_reversed_bracket(self):
        assert golden_section_min(lambda x: (x - 0.3) ** 2, 1.0, 0.0, 1e-9) == pytest.approx(0.3, abs=1e-8)

    def test_tiny_bracket(self):
        assert golden_section_min(lambda x: -x, 0.5, 0.5 + 1e-9, 1e-6) == 0.5 + 1e-9


class TestBisection:
    def test_finds_root(self):
        lo, hi, steps = bisect_decreasing(lambda x: 0.37 - x, 0.0, 1.0, 1e-10)
        assert lo <= 0.37 <= hi
        assert hi - lo <= 1e-10
        assert steps == math.ceil(math.log2(1e10))

    def test_step_cap(self):
        lo, hi, steps = bisect_decreasing(lambda x: 0.5 - x, 0.0, 1.0, 0.0, max_steps=5)
        assert steps == 5
        assert hi - lo == pytest.approx(1 / 32)

    def test_zero_goes_to_hi(self):
        lo, hi, _ = bisect_decreasing(lambda x: 0.0 if x >= 0.5 else 1.0, 0.0, 1.0, 1e-9)
        assert lo < 0.5 <= hi
