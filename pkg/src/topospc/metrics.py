"""Distances between persistence diagrams, one homology dimension at a time.

Three metrics: the sorted-duration L1 distance (a pseudometric that ignores
births), the bottleneck distance, and the p-Wasserstein distance. The two
optimal-matching distances augment both diagrams with diagonal points so a
bijection always exists; a point's diagonal cost is (death - birth) / 2
under the L-infinity plane metric.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ValidationError
from .persistence import PersistenceDiagram

__all__ = [
    "duration_vector",
    "duration_distance",
    "bottleneck_distance",
    "wasserstein_distance",
]


def duration_vector(d: PersistenceDiagram, dim: int) -> np.ndarray:
    """Ascending durations (death - birth) of the finite features in one dimension."""
    if dim < 0:
        raise ValidationError(f"dimension must be >= 0, got {dim}")
    return d.durations(dim)


def duration_distance(X: PersistenceDiagram, Y: PersistenceDiagram, dim: int) -> float:
    """L1 distance between sorted, zero-padded duration vectors.

    The shorter vector is padded with zeros to equal length; both are
    sorted ascending; the result is the sum of absolute componentwise
    differences. Two empty diagrams give 0.
    """
    x = duration_vector(X, dim)
    y = duration_vector(Y, dim)
    m = max(x.shape[0], y.shape[0])
    if m == 0:
        return 0.0
    # zeros prepend without disturbing the ascending order
    if x.shape[0] < m:
        x = np.concatenate([np.zeros(m - x.shape[0]), x])
    if y.shape[0] < m:
        y = np.concatenate([np.zeros(m - y.shape[0]), y])
    return float(np.abs(x - y).sum())


def _finite_points(d: PersistenceDiagram, dim: int) -> np.ndarray:
    if dim < 0:
        raise ValidationError(f"dimension must be >= 0, got {dim}")
    return d.finite(dim)


def _cross_costs_linf(px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """(n, m) matrix of L-infinity plane distances between diagram points."""
    db = np.abs(px[:, None, 0] - py[None, :, 0])
    dd = np.abs(px[:, None, 1] - py[None, :, 1])
    return np.maximum(db, dd)


def bottleneck_distance(X: PersistenceDiagram, Y: PersistenceDiagram, dim: int) -> float:
    """Exact bottleneck distance between the finite features of one dimension.

    Computed by binary search over candidate values (all cross L-infinity
    distances and all diagonal costs), testing perfect-matching feasibility
    in the diagonal-augmented bipartite graph at each candidate.
    """
    px = _finite_points(X, dim)
    py = _finite_points(Y, dim)
    n, m = px.shape[0], py.shape[0]
    if n == 0 and m == 0:
        return 0.0
    diag_x = (px[:, 1] - px[:, 0]) / 2.0
    diag_y = (py[:, 1] - py[:, 0]) / 2.0
    cross = _cross_costs_linf(px, py) if n and m else np.empty((n, m))
    candidates = np.unique(np.concatenate([[0.0], cross.ravel(), diag_x, diag_y]))
    lo, hi = 0, candidates.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _bottleneck_feasible(cross, diag_x, diag_y, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def _bottleneck_feasible(cross, diag_x, diag_y, c) -> bool:
    """Perfect matching with all edge costs <= c in the augmented graph.

    Left nodes: X points then m ghost copies of the diagonal. Right nodes:
    Y points then n ghosts. Ghost-ghost edges are free; a real point may
    use a ghost iff its diagonal cost is <= c.
    """
    n, m = cross.shape
    size = n + m
    # adjacency as boolean matrix; Kuhn's algorithm below
    adj = np.zeros((size, size), dtype=bool)
    if n and m:
        adj[:n, :m] = cross <= c
    adj[:n, m:] = (diag_x <= c)[:, None]
    adj[n:, :m] = (diag_y <= c)[None, :]
    adj[n:, m:] = True
    match_right = np.full(size, -1, dtype=np.int64)

    def try_augment(u, seen):
        for v in np.flatnonzero(adj[u]):
            if not seen[v]:
                seen[v] = True
                if match_right[v] == -1 or try_augment(match_right[v], seen):
                    match_right[v] = u
                    return True
        return False

    matched = 0
    for u in range(size):
        if try_augment(u, np.zeros(size, dtype=bool)):
            matched += 1
        else:
            return False
    return matched == size


def wasserstein_distance(
    X: PersistenceDiagram,
    Y: PersistenceDiagram,
    p: float = 2.0,
    dim: int = 0,
    ground: str = "linf",
) -> float:
    """p-Wasserstein distance with diagonal matching, solved exactly.

    The augmented square assignment problem (size n + m) is solved by
    scipy's shortest-augmenting-path solver. `ground` selects the plane
    metric for matched pairs: "linf" (default) or "lp" (the L_p norm,
    under which a point's diagonal cost is (death-birth)/2 * 2^(1/p)).
    """
    if p < 1:
        raise ValidationError(f"p must be >= 1, got {p}")
    if ground not in ("linf", "lp"):
        raise ValidationError(f"ground must be 'linf' or 'lp', got {ground!r}")
    px = _finite_points(X, dim)
    py = _finite_points(Y, dim)
    n, m = px.shape[0], py.shape[0]
    if n == 0 and m == 0:
        return 0.0
    if ground == "linf":
        cross = _cross_costs_linf(px, py) if n and m else np.empty((n, m))
        diag_scale = 1.0
    else:
        db = np.abs(px[:, None, 0] - py[None, :, 0])
        dd = np.abs(px[:, None, 1] - py[None, :, 1])
        cross = (db ** p + dd ** p) ** (1.0 / p) if n and m else np.empty((n, m))
        diag_scale = 2.0 ** (1.0 / p)
    diag_x = (px[:, 1] - px[:, 0]) / 2.0 * diag_scale
    diag_y = (py[:, 1] - py[:, 0]) / 2.0 * diag_scale

    size = n + m
    cost = np.zeros((size, size))
    cost[:n, :m] = cross ** p
    cost[:n, m:] = (diag_x ** p)[:, None]
    cost[n:, :m] = (diag_y ** p)[None, :]
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() ** (1.0 / p))
