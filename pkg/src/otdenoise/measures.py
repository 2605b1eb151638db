"""Discrete measures, transport plans and cost specification.

An :class:`EmpiricalMeasure` is a weighted point cloud; patches enter
the transport machinery as flattened pixel vectors.  A
:class:`Coupling` is a joint-probability matrix whose marginals are the
two measures, and a :class:`TransportMap` is a deterministic
point-to-point assignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

WEIGHT_TOL = 1e-12
MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Weighted point cloud: ``points`` is (n, d), ``weights`` sums to 1."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        points = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        weights = np.asarray(self.weights, dtype=np.float64).ravel()
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        if points.ndim != 2 or points.shape[1] < 1:
            raise ValueError(f"points must be (n, d) with d >= 1, got {points.shape}")
        if len(weights) != len(points):
            raise ValueError(
                f"{len(points)} points but {len(weights)} weights")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        total = float(weights.sum())
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {total!r}, expected 1 within {WEIGHT_TOL}")
        if not np.all(np.isfinite(points)):
            raise ValueError("points must be finite")

    @classmethod
    def uniform(cls, points) -> "EmpiricalMeasure":
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        n = len(points)
        return cls(points, np.full(n, 1.0 / n))

    @classmethod
    def from_patches(cls, patches) -> "EmpiricalMeasure":
        """Uniform measure on flattened patches."""
        return cls.uniform(np.stack([np.ravel(p) for p in patches]))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def is_uniform(self, tol: float = WEIGHT_TOL) -> bool:
        return bool(np.all(np.abs(self.weights - 1.0 / self.n) <= tol))


@dataclass(frozen=True)
class CostSpec:
    """Euclidean ground cost raised to ``beta`` (beta >= 1)."""

    beta: float = 1.0

    def __post_init__(self):
        if self.beta < 1.0:
            raise ValueError(f"beta must be >= 1, got {self.beta}")


@dataclass(frozen=True)
class Coupling:
    """Joint-probability matrix with the two measures as marginals."""

    plan: np.ndarray
    source: EmpiricalMeasure
    target: EmpiricalMeasure

    def __post_init__(self):
        plan = np.asarray(self.plan, dtype=np.float64)
        object.__setattr__(self, "plan", plan)
        if plan.shape != (self.source.n, self.target.n):
            raise ValueError(
                f"plan shape {plan.shape} != ({self.source.n}, {self.target.n})")
        if np.any(plan < 0):
            raise ValueError("plan entries must be nonnegative")
        row_err = float(np.abs(plan.sum(axis=1) - self.source.weights).max())
        col_err = float(np.abs(plan.sum(axis=0) - self.target.weights).max())
        if row_err > MARGINAL_TOL or col_err > MARGINAL_TOL:
            raise ValueError(
                f"marginal violation (row {row_err:.3e}, col {col_err:.3e}) "
                f"exceeds {MARGINAL_TOL}")

    def marginal_error(self) -> float:
        row_err = np.abs(self.plan.sum(axis=1) - self.source.weights).max()
        col_err = np.abs(self.plan.sum(axis=0) - self.target.weights).max()
        return float(max(row_err, col_err))


@dataclass(frozen=True)
class TransportMap:
    """Target index per source point; a permutation on uniform equal sizes."""

    assignment: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.intp))

    def __post_init__(self):
        assignment = np.asarray(self.assignment, dtype=np.intp).ravel()
        object.__setattr__(self, "assignment", assignment)

    def is_permutation(self) -> bool:
        n = len(self.assignment)
        return bool(np.array_equal(np.sort(self.assignment), np.arange(n)))
