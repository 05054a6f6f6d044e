import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emtopt.patterns import (
    DrivingPattern,
    classify_speed,
    classify_speeds,
    segment_cycle,
    segment_labels,
)


class TestClassify:
    @pytest.mark.parametrize("v,expected", [
        (0.0, DrivingPattern.LOW),
        (20.0, DrivingPattern.LOW),
        (34.99, DrivingPattern.LOW),
        (35.0, DrivingPattern.MEDIUM),
        (59.99, DrivingPattern.MEDIUM),
        (60.0, DrivingPattern.HIGH),
        (72.0, DrivingPattern.HIGH),
        (100.0, DrivingPattern.HIGH),
    ])
    def test_band_edges(self, v, expected):
        assert classify_speed(v) is expected

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            classify_speed(-0.1)
        with pytest.raises(ValueError):
            classify_speeds([10.0, -1.0])

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.0, 150.0), st.floats(0.0, 150.0))
    def test_monotone(self, v1, v2):
        lo, hi = sorted((v1, v2))
        assert classify_speed(lo) <= classify_speed(hi)

    def test_vectorized_agrees_with_scalar(self):
        v = np.linspace(0.0, 120.0, 241)
        vec = classify_speeds(v)
        assert all(vec[i] == classify_speed(x) for i, x in enumerate(v))


class TestSegment:
    def test_constant_cycle(self):
        segs = segment_cycle(np.full(10, 20.0))
        assert len(segs) == 1
        assert (segs[0].start, segs[0].end, segs[0].pattern) == (0, 10, DrivingPattern.LOW)

    def test_three_bands(self):
        segs = segment_cycle(np.array([20.0, 20.0, 50.0, 50.0, 70.0]))
        assert [(s.start, s.end, s.pattern) for s in segs] == [
            (0, 2, DrivingPattern.LOW),
            (2, 4, DrivingPattern.MEDIUM),
            (4, 5, DrivingPattern.HIGH),
        ]

    def test_alternating(self):
        segs = segment_cycle(np.array([30.0, 40.0] * 4))
        assert len(segs) == 8

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            segment_cycle(np.array([]))

    def test_partition_and_round_trip(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            n = int(rng.integers(1, 80))
            v = rng.uniform(0.0, 90.0, n)
            segs = segment_cycle(v)
            assert segs[0].start == 0 and segs[-1].end == n
            for a, b in zip(segs, segs[1:]):
                assert a.end == b.start
                assert a.pattern != b.pattern
            assert np.array_equal(segment_labels(segs, n), classify_speeds(v))

    def test_min_segment_merging(self):
        v = np.array([20.0] * 5 + [40.0] + [20.0] * 5)
        segs = segment_cycle(v, min_segment_length=3)
        assert len(segs) == 1
        assert (segs[0].start, segs[0].end) == (0, 11)
