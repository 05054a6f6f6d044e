"""Driving-pattern classification by vehicle speed.

Operation splits into three speed bands: low below 35 km/h, medium from
35 up to 60 km/h, high at 60 km/h and above. Band edges belong to the
upper band so every nonnegative speed classifies deterministically.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

LOW_MEDIUM_KMH = 35.0
MEDIUM_HIGH_KMH = 60.0


class DrivingPattern(enum.IntEnum):
    """Speed-band operating pattern, ordered low < medium < high."""

    LOW = 0
    MEDIUM = 1
    HIGH = 2

    @property
    def label(self) -> str:
        return self.name.lower()


def classify_speed(v_kmh: float) -> DrivingPattern:
    """Classify a single speed in km/h into its driving pattern."""
    if v_kmh < 0:
        raise ValueError(f"speed must be nonnegative, got {v_kmh}")
    if v_kmh < LOW_MEDIUM_KMH:
        return DrivingPattern.LOW
    if v_kmh < MEDIUM_HIGH_KMH:
        return DrivingPattern.MEDIUM
    return DrivingPattern.HIGH


def classify_speeds(v_kmh) -> np.ndarray:
    """Vectorized classification; returns an int array of pattern values."""
    v = np.asarray(v_kmh, dtype=float)
    if np.any(v < 0):
        raise ValueError("speeds must be nonnegative")
    out = np.zeros(v.shape, dtype=np.int64)
    out[v >= LOW_MEDIUM_KMH] = DrivingPattern.MEDIUM
    out[v >= MEDIUM_HIGH_KMH] = DrivingPattern.HIGH
    return out


@dataclass(frozen=True)
class PatternSegment:
    """Half-open stage range [start, end) sharing one driving pattern."""

    start: int
    end: int
    pattern: DrivingPattern


def segment_cycle(speeds_kmh, min_segment_length: int = 1) -> list[PatternSegment]:
    """Run-length encode per-stage pattern labels of a speed trace.

    Accepts a plain speed array or any object with a ``v_kmh`` attribute.
    With ``min_segment_length`` > 1, runs shorter than the minimum are
    merged into the preceding segment (the first run merges forward),
    which intentionally trades the exact round trip for smoothness.
    """
    v = getattr(speeds_kmh, "v_kmh", speeds_kmh)
    labels = classify_speeds(v)
    if labels.size == 0:
        raise ValueError("cannot segment an empty cycle")

    segments: list[PatternSegment] = []
    start = 0
    for k in range(1, labels.size + 1):
        if k == labels.size or labels[k] != labels[start]:
            segments.append(PatternSegment(start, k, DrivingPattern(int(labels[start]))))
            start = k

    if min_segment_length > 1:
        segments = _merge_short_segments(segments, min_segment_length)
    return segments


def _merge_short_segments(segments, min_len):
    merged: list[PatternSegment] = []
    for seg in segments:
        if merged and (seg.end - seg.start) < min_len:
            prev = merged[-1]
            merged[-1] = PatternSegment(prev.start, seg.end, prev.pattern)
        elif merged and (merged[-1].end - merged[-1].start) < min_len:
            # first run was short: absorb it into this one
            merged[-1] = PatternSegment(merged[-1].start, seg.end, seg.pattern)
        else:
            merged.append(seg)
    # collapse equal neighbours produced by merging
    out: list[PatternSegment] = []
    for seg in merged:
        if out and out[-1].pattern == seg.pattern:
            out[-1] = PatternSegment(out[-1].start, seg.end, seg.pattern)
        else:
            out.append(seg)
    return out


def segment_labels(segments: list[PatternSegment], n: int) -> np.ndarray:
    """Expand segments back to per-stage labels over [0, n)."""
    out = np.empty(n, dtype=np.int64)
    for seg in segments:
        out[seg.start : seg.end] = seg.pattern
    return out
