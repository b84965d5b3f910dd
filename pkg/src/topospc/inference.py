"""Leave-one-in permutation test of one diagram against a reference group.

The test statistic is the total pairwise distance within the reference
group. Shuffling labels with a single observation in group 2 yields exactly
m0 + 1 allocations: each cloud sits out once. The statistic for the original
allocation (the new diagram sits out) is the cached in-group total; every
other allocation is obtained by an O(1) subtraction from the grand total, so
only the m0 new cross distances are ever computed per test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .metrics import bottleneck_distance, duration_distance, wasserstein_distance
from .persistence import PersistenceDiagram

__all__ = ["ReferenceSet", "PermutationTestResult", "build_reference", "permutation_test"]

DISTANCE_KINDS = ("duration", "bottleneck", "wasserstein")


@dataclass(frozen=True)
class ReferenceSet:
    """Phase I diagrams with their cached pairwise distances in one dimension."""

    diagrams: tuple[PersistenceDiagram, ...]
    dim: int
    distance: str
    intra_distance_matrix: np.ndarray
    wasserstein_p: float = 2.0
    wasserstein_ground: str = "linf"
    intra_total: float = field(init=False)
    _row_sums: np.ndarray = field(init=False)
    _padded_durations: np.ndarray | None = field(init=False)

    def __post_init__(self):
        m = self.intra_distance_matrix
        object.__setattr__(self, "intra_total", float(np.triu(m, k=1).sum()))
        object.__setattr__(self, "_row_sums", m.sum(axis=1))
        cache = None
        if self.distance == "duration":
            cache = _pad_durations([d.durations(self.dim) for d in self.diagrams])
        object.__setattr__(self, "_padded_durations", cache)

    @property
    def m0(self) -> int:
        return len(self.diagrams)

    def cross_distances(self, y: PersistenceDiagram) -> np.ndarray:
        """Distances from every reference diagram to y."""
        if self.distance == "duration":
            return _duration_cross(self._padded_durations, y.durations(self.dim))
        if self.distance == "bottleneck":
            return np.array([bottleneck_distance(d, y, self.dim) for d in self.diagrams])
        return np.array([
            wasserstein_distance(d, y, self.wasserstein_p, self.dim, self.wasserstein_ground)
            for d in self.diagrams
        ])


@dataclass(frozen=True)
class PermutationTestResult:
    observed_stat: float
    null_stats: np.ndarray  # length m0 + 1, contains observed_stat
    p_value: float
    alpha_limit: float
    alpha: float

    @property
    def m0(self) -> int:
        return self.null_stats.shape[0] - 1

    def reject(self) -> bool:
        return self.p_value <= self.alpha


def _pad_durations(vectors: list[np.ndarray]) -> np.ndarray:
    """Stack ascending duration vectors into one matrix, zero-padded in front."""
    width = max((v.shape[0] for v in vectors), default=0)
    out = np.zeros((len(vectors), width))
    for i, v in enumerate(vectors):
        if v.shape[0]:
            out[i, width - v.shape[0]:] = v
    return out


def _duration_cross(padded: np.ndarray, y: np.ndarray) -> np.ndarray:
    width = max(padded.shape[1], y.shape[0])
    ref = padded
    if ref.shape[1] < width:
        ref = np.concatenate([np.zeros((ref.shape[0], width - ref.shape[1])), ref], axis=1)
    yy = np.concatenate([np.zeros(width - y.shape[0]), y])
    return np.abs(ref - yy[None, :]).sum(axis=1)


def _pair_distance(a: PersistenceDiagram, b: PersistenceDiagram, dim: int,
                   distance: str, p: float, ground: str) -> float:
    if distance == "duration":
        return duration_distance(a, b, dim)
    if distance == "bottleneck":
        return bottleneck_distance(a, b, dim)
    return wasserstein_distance(a, b, p, dim, ground)


def build_reference(diagrams, dim: int, distance: str = "duration",
                    wasserstein_p: float = 2.0,
                    wasserstein_ground: str = "linf") -> ReferenceSet:
    """Compute and cache all pairwise distances within the Phase I set."""
    diagrams = tuple(diagrams)
    if len(diagrams) < 2:
        raise ValidationError(f"need at least 2 reference diagrams, got {len(diagrams)}")
    if distance not in DISTANCE_KINDS:
        raise ValidationError(f"unknown distance {distance!r}; choose from {DISTANCE_KINDS}")
    m0 = len(diagrams)
    intra = np.zeros((m0, m0))
    if distance == "duration":
        padded = _pad_durations([d.durations(dim) for d in diagrams])
        for i in range(m0):  # row-at-a-time keeps the temporaries cache-sized
            intra[i] = np.abs(padded - padded[i]).sum(axis=1)
    else:
        for i in range(m0):
            for j in range(i + 1, m0):
                v = _pair_distance(diagrams[i], diagrams[j], dim, distance,
                                   wasserstein_p, wasserstein_ground)
                intra[i, j] = intra[j, i] = v
    return ReferenceSet(diagrams, dim, distance, intra,
                        wasserstein_p=wasserstein_p, wasserstein_ground=wasserstein_ground)


def permutation_test(ref: ReferenceSet, y: PersistenceDiagram,
                     alpha: float = 0.05) -> PermutationTestResult:
    """Test whether y's diagram comes from the reference distribution.

    The null distribution holds the m0 + 1 in-group totals, one per
    leave-one-out allocation. The p-value is the fraction of null values
    <= the observed statistic (ties and the observed value itself count),
    so its minimum is 1/(m0+1). The test is deterministic: the allocations
    are exhaustive, no sampling is involved.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f"alpha must be in (0, 1), got {alpha}")
    cross = ref.cross_distances(y)
    observed = ref.intra_total
    grand_total = observed + float(cross.sum())
    null_excluding_ref = grand_total - cross - ref._row_sums
    null_stats = np.concatenate([[observed], null_excluding_ref])
    n_all = null_stats.shape[0]
    p_value = float(np.count_nonzero(null_stats <= observed)) / n_all
    k = math.floor(alpha * n_all)
    if k >= 1:
        alpha_limit = float(np.partition(null_stats, k - 1)[k - 1])
    else:
        alpha_limit = math.nan
    return PermutationTestResult(observed, null_stats, p_value, alpha_limit, alpha)
