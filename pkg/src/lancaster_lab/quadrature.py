"""Gauss-Legendre quadrature on bounded intervals and rectangles.

Every moment, inner product and conditional expectation in this package
reduces to a weighted sum over a fixed node set, so rules are built once
and reused. Rules are immutable and integration is a pure function, which
makes concurrent use safe without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "QuadratureRule",
    "gauss_legendre_rule",
    "composite_gauss_legendre",
    "integrate",
    "integrate_2d",
]

_NEWTON_TOL = 1e-15
_NEWTON_MAX_STEPS = 100


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Ordered nodes and positive weights for integration over ``interval``."""

    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        a, b = self.interval
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size == 0:
            raise ValueError("nodes and weights must be 1-d arrays of equal nonzero length")
        if np.any(nodes < a) or np.any(nodes > b):
            raise ValueError("all nodes must lie inside the interval")
        if np.any(weights <= 0.0):
            raise ValueError("all weights must be positive")
        if np.any(np.diff(nodes) < 0.0):
            raise ValueError("nodes must be in ascending order")
        # tolerance is relative for very long intervals, absolute otherwise
        if abs(float(np.sum(weights)) - (b - a)) > 1e-12 * max(1.0, abs(b - a)):
            raise ValueError("weights must sum to the interval length")

    def __len__(self) -> int:
        return self.nodes.size


def _legendre_and_derivative(z: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Value and derivative of the degree-n Legendre polynomial on (-1, 1)."""
    p_cur = np.ones_like(z)
    p_prev = np.zeros_like(z)
    for j in range(1, n + 1):
        p_cur, p_prev = ((2 * j - 1) * z * p_cur - (j - 1) * p_prev) / j, p_cur
    deriv = n * (z * p_cur - p_prev) / (z * z - 1.0)
    return p_cur, deriv


def gauss_legendre_rule(n: int, a: float, b: float) -> QuadratureRule:
    """n-point Gauss-Legendre rule on [a, b]; exact through degree 2n - 1.

    Nodes are Legendre roots found by Newton iteration started from the
    Chebyshev angles, so construction is deterministic and dependency-free.
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise ValueError(f"invalid-order: node count must be a positive integer, got {n!r}")
    if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
        raise ValueError(f"invalid-interval: need finite a < b, got [{a!r}, {b!r}]")

    m = (n + 1) // 2
    z = np.cos(np.pi * (np.arange(m) + 0.75) / (n + 0.5))
    for _ in range(_NEWTON_MAX_STEPS):
        value, deriv = _legendre_and_derivative(z, n)
        step = value / deriv
        z = z - step
        if np.all(np.abs(step) <= _NEWTON_TOL):
            break
    if n % 2 == 1:
        z[-1] = 0.0  # the middle root is exactly zero; keeps the rule symmetric
    value, deriv = _legendre_and_derivative(z, n)
    w_half = 2.0 / ((1.0 - z * z) * deriv * deriv)

    ref_nodes = np.concatenate([-z, z[::-1][n % 2 :]])
    ref_weights = np.concatenate([w_half, w_half[::-1][n % 2 :]])
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return QuadratureRule(mid + half * ref_nodes, half * ref_weights, (float(a), float(b)))


def composite_gauss_legendre(breakpoints: Sequence[float], nodes_per_segment: int) -> QuadratureRule:
    """Gauss-Legendre rule applied per segment of a strictly increasing partition.

    Exact for integrands that are polynomial on each segment (degree up to
    2 * nodes_per_segment - 1), which is what piecewise-linear densities need.
    """
    pts = np.asarray(breakpoints, dtype=float)
    if pts.ndim != 1 or pts.size < 2 or not np.all(np.isfinite(pts)) or np.any(np.diff(pts) <= 0):
        raise ValueError("invalid-interval: breakpoints must be finite and strictly increasing")
    parts = [gauss_legendre_rule(nodes_per_segment, lo, hi) for lo, hi in zip(pts[:-1], pts[1:])]
    nodes = np.concatenate([p.nodes for p in parts])
    weights = np.concatenate([p.weights for p in parts])
    return QuadratureRule(nodes, weights, (float(pts[0]), float(pts[-1])))


def _values_on(f: Callable, nodes: np.ndarray) -> np.ndarray:
    """Evaluate f on a node array, accepting both vectorized and scalar-only f."""
    try:
        values = np.asarray(f(nodes), dtype=float)
        if values.shape == nodes.shape:
            return values
    except (TypeError, ValueError, IndexError):
        pass
    return np.asarray([float(f(x)) for x in nodes])


def integrate(f: Callable, rule: QuadratureRule) -> float:
    """Weighted sum of f over the rule's nodes."""
    values = _values_on(f, rule.nodes)
    if not np.all(np.isfinite(values)):
        bad = rule.nodes[~np.isfinite(values)][0]
        raise ValueError(f"non-finite-evaluation: integrand is not finite at node {bad!r}")
    return float(np.dot(rule.weights, values))


def integrate_2d(f: Callable, rule_x: QuadratureRule, rule_y: QuadratureRule) -> float:
    """Tensor-product quadrature of f(x, y) over the rectangle of the two rules."""
    grid_x, grid_y = np.meshgrid(rule_x.nodes, rule_y.nodes, indexing="ij")
    values = None
    try:
        values = np.asarray(f(grid_x, grid_y), dtype=float)
    except (TypeError, ValueError, IndexError):
        values = None
    if values is None or values.shape != grid_x.shape:
        values = np.asarray(
            [[float(f(x, y)) for y in rule_y.nodes] for x in rule_x.nodes]
        )
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite-evaluation: integrand is not finite on the grid")
    return float(rule_x.weights @ values @ rule_y.weights)
