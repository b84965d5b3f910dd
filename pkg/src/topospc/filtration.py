"""Vietoris-Rips filtrations: ordered simplex streams up to a dimension and diameter cap."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import SimplexBudgetError, ValidationError
from .geometry import DistanceMatrix

__all__ = [
    "Simplex",
    "Filtration",
    "build_rips",
    "simplex_counts_at",
    "euler_characteristic_at",
    "DEFAULT_SIMPLEX_BUDGET",
    "FULL_FILTRATION_MAX_POINTS",
]

DEFAULT_SIMPLEX_BUDGET = 50_000_000

# Above this size a full filtration is refused and an explicit diameter cap
# is required; simplex counts in dimension >= 2 grow too fast otherwise.
FULL_FILTRATION_MAX_POINTS = 64


@dataclass(frozen=True)
class Simplex:
    """A simplex with its filtration value (diameter of its vertex set)."""

    vertices: tuple[int, ...]
    value: float

    @property
    def dimension(self) -> int:
        return len(self.vertices) - 1


class Filtration:
    """Rips simplices grouped by dimension, each group in (value, lex) order.

    The filtration value of a simplex is its diameter: the maximum pairwise
    distance among its vertices (0 for vertices). The global filtration
    order is (value, dimension, lexicographic vertices), so every face
    precedes its cofaces.
    """

    def __init__(self, n_points: int, max_dimension: int, max_diameter: float,
                 verts_by_dim: dict[int, np.ndarray], values_by_dim: dict[int, np.ndarray],
                 face_rows_by_dim: dict[int, np.ndarray] | None = None):
        self.n_points = n_points
        self.max_dimension = max_dimension
        self.max_diameter = max_diameter
        self._verts = verts_by_dim
        self._values = values_by_dim
        # boundary-row caches filled by build_rips where cheap to produce
        self._face_rows = face_rows_by_dim or {}

    def dims(self) -> list[int]:
        return sorted(self._verts)

    def simplex_vertices(self, dim: int) -> np.ndarray:
        """(N_dim, dim+1) vertex-index array in (value, lex) order."""
        return self._verts[dim]

    def simplex_values(self, dim: int) -> np.ndarray:
        return self._values[dim]

    def count(self, dim: int) -> int:
        return 0 if dim not in self._values else int(self._values[dim].shape[0])

    def total_count(self) -> int:
        return sum(self.count(d) for d in self.dims())

    def simplices(self) -> list[Simplex]:
        """All simplices in global filtration order."""
        out = []
        for d in self.dims():
            verts = self._verts[d]
            vals = self._values[d]
            for row, v in zip(verts, vals):
                out.append(Simplex(tuple(int(x) for x in row), float(v)))
        out.sort(key=lambda s: (s.value, s.dimension, s.vertices))
        return out


def build_rips(dm: DistanceMatrix, max_dimension: int,
               max_diameter: float | None = None,
               simplex_budget: int = DEFAULT_SIMPLEX_BUDGET) -> Filtration:
    """Build the Rips filtration of a distance matrix.

    Contains every simplex of dimension <= max_dimension whose diameter is
    <= max_diameter. When max_diameter is None, clouds of up to
    FULL_FILTRATION_MAX_POINTS points get a full filtration (cloud diameter
    plus a small tolerance); larger clouds require an explicit cap.
    """
    if max_dimension < 0:
        raise ValidationError(f"max_dimension must be >= 0, got {max_dimension}")
    n = dm.n
    if max_diameter is None:
        if n > FULL_FILTRATION_MAX_POINTS:
            raise ValidationError(
                f"cloud has {n} points (> {FULL_FILTRATION_MAX_POINTS}); "
                "pass an explicit max_diameter"
            )
        diam = dm.diameter()
        max_diameter = diam + 1e-9 * max(diam, 1.0)
    if not max_diameter > 0:
        raise ValidationError(f"max_diameter must be > 0, got {max_diameter}")

    d = dm.entries
    verts_by_dim: dict[int, np.ndarray] = {}
    values_by_dim: dict[int, np.ndarray] = {}
    face_rows_by_dim: dict[int, np.ndarray] = {}
    total = n
    if total > simplex_budget:
        raise SimplexBudgetError(0, total, simplex_budget)
    verts_by_dim[0] = np.arange(n, dtype=np.int64).reshape(-1, 1)
    values_by_dim[0] = np.zeros(n, dtype=np.float64)

    if max_dimension >= 1 and n >= 2:
        iu, ju = np.triu_indices(n, k=1)
        w = d[iu, ju]
        keep = w <= max_diameter
        iu, ju, w = iu[keep], ju[keep], w[keep]
        total += iu.shape[0]
        if total > simplex_budget:
            raise SimplexBudgetError(1, total, simplex_budget)
        # enumeration is already lex (i, j); a stable value sort keeps ties lex
        order = np.argsort(w, kind="stable")
        eu = iu[order].astype(np.int64)
        ev = ju[order].astype(np.int64)
        verts_by_dim[1] = np.column_stack((eu, ev))
        values_by_dim[1] = w[order]

    if max_dimension >= 2 and n >= 3 and verts_by_dim[1].shape[0]:
        eu, ev = verts_by_dim[1][:, 0], verts_by_dim[1][:, 1]
        # forward adjacency sorted by (vertex, neighbor); entries keep their
        # rank in the value-sorted edge order for boundary-row emission
        perm = np.lexsort((ev, eu))
        nbr = ev[perm]
        nbr_rank = perm.astype(np.int64)
        counts = np.bincount(eu, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        cnt = int(_kernels.count_triangles(indptr, nbr, simplex_budget - total))
        total += cnt
        if total > simplex_budget:
            raise SimplexBudgetError(2, total, simplex_budget)
        tri = np.empty((cnt, 3), dtype=np.int64)
        val = np.empty(cnt, dtype=np.float64)
        faces = np.empty((cnt, 3), dtype=np.int64)
        _kernels.fill_triangles(indptr, nbr, nbr_rank, d, tri, val, faces)
        order = np.argsort(val, kind="stable")
        verts_by_dim[2] = tri[order]
        values_by_dim[2] = val[order]
        face_rows_by_dim[2] = faces[order]

    # Dimensions >= 3 by expanding each simplex with vertices past its last.
    for dim in range(3, max_dimension + 1):
        base_v = verts_by_dim.get(dim - 1)
        if base_v is None or base_v.shape[0] == 0:
            break
        base_val = values_by_dim[dim - 1]
        rows = []
        vals = []
        for row, bv in zip(base_v, base_val):
            cand = np.flatnonzero(np.max(d[row, :], axis=0) <= max_diameter)
            cand = cand[cand > row[-1]]
            for c in cand:
                rows.append(np.append(row, c))
                vals.append(max(bv, float(np.max(d[row, c]))))
            total += cand.shape[0]
            if total > simplex_budget:
                raise SimplexBudgetError(dim, total, simplex_budget)
        if not rows:
            break
        verts = np.array(rows, dtype=np.int64)
        val = np.array(vals, dtype=np.float64)
        order = np.lexsort(tuple(verts[:, k] for k in reversed(range(dim + 1))) + (val,))
        verts_by_dim[dim] = verts[order]
        values_by_dim[dim] = val[order]

    return Filtration(n, max_dimension, float(max_diameter), verts_by_dim, values_by_dim,
                      face_rows_by_dim)


def simplex_counts_at(f: Filtration, t: float) -> list[int]:
    """Simplex counts per dimension with filtration value <= t."""
    if t < 0:
        raise ValidationError(f"threshold must be >= 0, got {t}")
    return [int(np.count_nonzero(f.simplex_values(d) <= t)) if f.count(d) else 0
            for d in range(f.max_dimension + 1)]


def euler_characteristic_at(f: Filtration, t: float) -> int:
    """Alternating sum of simplex counts at threshold t."""
    counts = simplex_counts_at(f, t)
    return int(sum((-1) ** i * c for i, c in enumerate(counts)))
