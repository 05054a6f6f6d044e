"""Analytic hierarchy process: judgment matrices, the sum-method
eigenvector estimate, consistency checking, and the per-pattern weight
triples used by the solver.

The runtime weights default to fixed published triples (one per driving
pattern). A recompute mode derives weights from the bundled judgment
matrices instead; it does not reproduce the fixed triples, which is a
documented discrepancy that the test suite pins in place. Use recompute
mode to inspect, not to silently change solver behavior.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import MatrixValidationError, UnsupportedOrderError
from .objectives import PatternWeights
from .patterns import DrivingPattern

#: Mean random consistency index by matrix order.
RANDOM_INDEX = {
    1: 0.0, 2: 0.0, 3: 0.58, 4: 0.9, 5: 1.12, 6: 1.24, 7: 1.32, 8: 1.41,
    9: 1.45, 10: 1.49, 11: 1.52, 12: 1.54, 13: 1.56, 14: 1.58, 15: 1.59,
}

#: The 1..9 comparison scale (documentation only; entries are not
#: restricted to these values).
COMPARISON_SCALE = {
    1: "equal importance",
    3: "slightly more important",
    5: "obviously more important",
    7: "strongly more important",
    9: "extremely more important",
    2: "between 1 and 3", 4: "between 3 and 5",
    6: "between 5 and 7", 8: "between 7 and 9",
}

RECIPROCITY_TOL = 1e-9


@dataclass(frozen=True)
class JudgmentMatrix:
    """Positive reciprocal pairwise-comparison matrix."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise MatrixValidationError(f"judgment matrix must be square, got shape {m.shape}")
        n = m.shape[0]
        for i in range(n):
            if abs(m[i, i] - 1.0) > RECIPROCITY_TOL:
                raise MatrixValidationError(
                    f"diagonal entry ({i}, {i}) must be 1, got {m[i, i]!r}", i, i
                )
            for j in range(i + 1, n):
                if m[i, j] <= 0 or m[j, i] <= 0:
                    raise MatrixValidationError(
                        f"entries at ({i}, {j}) must be positive", i, j
                    )
                if abs(m[j, i] - 1.0 / m[i, j]) > RECIPROCITY_TOL:
                    raise MatrixValidationError(
                        f"reciprocity violated at ({i}, {j}): "
                        f"{m[i, j]!r} vs {m[j, i]!r}", i, j
                    )

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def validate(entries) -> JudgmentMatrix:
    """Validate raw entries as a judgment matrix."""
    if isinstance(entries, JudgmentMatrix):
        return entries
    return JudgmentMatrix(np.asarray(entries, dtype=float))


@dataclass(frozen=True)
class SumMethodResult:
    weights: np.ndarray
    lambda_max: float


@dataclass(frozen=True)
class ConsistencyReport:
    ci: float
    ri: float
    cr: float
    passed: bool


def sum_method(matrix) -> SumMethodResult:
    """Eigenvector estimate by column normalization and row summation.

    Normalize each column, sum the normalized rows, renormalize the row
    sums to get the weight vector, then estimate the principal
    eigenvalue as the mean of ``(A w)_i / w_i``.
    """
    m = validate(matrix).entries
    col_normed = m / m.sum(axis=0, keepdims=True)
    row_sums = col_normed.sum(axis=1)
    weights = row_sums / row_sums.sum()
    aw = m @ weights
    lambda_max = float(np.mean(aw / weights))
    return SumMethodResult(weights=weights, lambda_max=lambda_max)


def power_iteration(matrix, max_iter: int = 200, tol: float = 1e-12) -> SumMethodResult:
    """Reference principal-eigenpair computation by normalized iteration."""
    m = validate(matrix).entries
    w = np.full(m.shape[0], 1.0 / m.shape[0])
    lam = float(m.shape[0])
    for _ in range(max_iter):
        aw = m @ w
        w_new = aw / aw.sum()
        lam_new = float(np.mean(aw / w))
        if np.max(np.abs(w_new - w)) < tol and abs(lam_new - lam) < tol:
            w, lam = w_new, lam_new
            break
        w, lam = w_new, lam_new
    return SumMethodResult(weights=w, lambda_max=lam)


def consistency(lambda_max: float, n: int) -> ConsistencyReport:
    """Consistency index and ratio against the tabulated random index.

    Orders 1 and 2 are always consistent (their random index is zero, so
    the ratio is defined as 0).
    """
    if n < 1:
        raise ValueError("matrix order must be at least 1")
    if n > max(RANDOM_INDEX):
        raise UnsupportedOrderError(
            f"no random index tabulated for order {n} (max {max(RANDOM_INDEX)})"
        )
    ci = 0.0 if n == 1 else (lambda_max - n) / (n - 1)
    ri = RANDOM_INDEX[n]
    cr = ci / ri if ri > 0 else 0.0
    return ConsistencyReport(ci=ci, ri=ri, cr=cr, passed=(cr < 0.1))


def total_ranking(upper_weights, lower_rankings) -> np.ndarray:
    """Combine one layer's weights with per-element lower-layer rankings.

    ``lower_rankings[j]`` is the weight vector of the bottom elements
    under upper element ``j`` (zeros where unassociated); the result is
    the weighted sum over ``j``, again summing to 1.
    """
    a = np.asarray(upper_weights, dtype=float)
    b = np.asarray(lower_rankings, dtype=float)
    if b.ndim != 2 or b.shape[0] != a.size:
        raise ValueError(
            f"need one lower ranking per upper weight: got {b.shape} for {a.size} weights"
        )
    if abs(a.sum() - 1.0) > 1e-9:
        raise ValueError(f"upper weights sum to {a.sum()!r}, expected 1")
    row_sums = b.sum(axis=1)
    bad = np.flatnonzero(np.abs(row_sums - 1.0) > 1e-9)
    if bad.size:
        raise ValueError(
            f"lower ranking {bad[0]} sums to {row_sums[bad[0]]!r}, expected 1"
        )
    return a @ b


# ---------------------------------------------------------------------------
# per-pattern weights

#: Bundled judgment matrices comparing (economy, power reserve,
#: generation reserve) for each driving pattern.
JUDGMENT_MATRICES = {
    DrivingPattern.LOW: JudgmentMatrix(np.array([
        [1.0, 1.0 / 5.0, 1.0 / 9.0],
        [5.0, 1.0, 1.0 / 7.0],
        [9.0, 7.0, 1.0],
    ])),
    DrivingPattern.MEDIUM: JudgmentMatrix(np.array([
        [1.0, 5.0, 9.0],
        [1.0 / 5.0, 1.0, 3.0],
        [1.0 / 9.0, 1.0 / 3.0, 1.0],
    ])),
    DrivingPattern.HIGH: JudgmentMatrix(np.array([
        [1.0, 1.0 / 9.0, 1.0 / 3.0],
        [9.0, 1.0, 7.0],
        [3.0, 1.0 / 7.0, 1.0],
    ])),
}

#: Fixed weight triples used at runtime, one per driving pattern.
PATTERN_WEIGHT_CONSTANTS = {
    DrivingPattern.LOW: PatternWeights(0.05, 0.29, 0.66),
    DrivingPattern.MEDIUM: PatternWeights(0.67, 0.27, 0.06),
    DrivingPattern.HIGH: PatternWeights(0.15, 0.78, 0.07),
}


def pattern_weights(pattern: DrivingPattern, mode: str = "constants") -> PatternWeights:
    """Objective weights for a driving pattern.

    ``constants`` returns the fixed triple. ``recompute`` runs the sum
    method on the bundled judgment matrix; a failing consistency ratio
    is reported as a warning, not an error.
    """
    pattern = DrivingPattern(pattern)
    if mode == "constants":
        return PATTERN_WEIGHT_CONSTANTS[pattern]
    if mode == "recompute":
        result = sum_method(JUDGMENT_MATRICES[pattern])
        report = consistency(result.lambda_max, 3)
        if not report.passed:
            warnings.warn(
                f"judgment matrix for pattern {pattern.label} fails the "
                f"consistency check (CR={report.cr:.3f})",
                stacklevel=2,
            )
        w = result.weights
        return PatternWeights(float(w[0]), float(w[1]), float(w[2]))
    raise ValueError(f"unknown mode {mode!r}, expected 'constants' or 'recompute'")


def default_weights(mode: str = "constants"):
    """Weight triples for all three patterns keyed by pattern."""
    return {p: pattern_weights(p, mode) for p in DrivingPattern}
