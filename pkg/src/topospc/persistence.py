"""Persistence diagrams from Rips filtrations.

Dimension-0 features come from a union-find pass over edges in filtration
order; dimensions >= 1 come from GF(2) boundary-matrix column reduction with
the clearing (twist) optimization, processing dimensions top-down. Essential
classes keep an infinite death and are flagged, never given fake deaths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import ParseError, ValidationError
from .filtration import Filtration
from .geometry import DistanceMatrix

__all__ = [
    "Feature",
    "PersistenceDiagram",
    "persistence_h0",
    "persistence",
    "betti_numbers",
    "barcode",
    "save_diagram",
    "load_diagram",
]


class Feature(NamedTuple):
    dimension: int
    birth: float
    death: float  # math.inf for essential classes

    @property
    def essential(self) -> bool:
        return math.isinf(self.death)

    @property
    def duration(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (dimension, birth, death) features.

    Stored as an (m, 3) float array sorted by (dimension, birth, death);
    essential classes carry death = inf. Zero-persistence pairs are never
    stored.
    """

    data: np.ndarray
    source_label: str | None = None

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64).reshape(-1, 3)
        order = np.lexsort((arr[:, 2], arr[:, 1], arr[:, 0]))
        arr = arr[order]
        object.__setattr__(self, "data", arr)
        arr.setflags(write=False)

    @classmethod
    def from_features(cls, features, source_label: str | None = None) -> "PersistenceDiagram":
        rows = [(f[0], f[1], f[2]) for f in features]
        return cls(np.array(rows, dtype=np.float64).reshape(-1, 3), source_label)

    @property
    def features(self) -> tuple[Feature, ...]:
        return tuple(Feature(int(r[0]), float(r[1]), float(r[2])) for r in self.data)

    def __len__(self) -> int:
        return self.data.shape[0]

    def max_dimension(self) -> int:
        return int(self.data[:, 0].max()) if len(self) else -1

    def finite(self, dim: int) -> np.ndarray:
        """(k, 2) birth/death rows of the finite features in one dimension."""
        mask = (self.data[:, 0] == dim) & np.isfinite(self.data[:, 2])
        return self.data[mask][:, 1:3]

    def essential_count(self, dim: int) -> int:
        mask = (self.data[:, 0] == dim) & np.isinf(self.data[:, 2])
        return int(np.count_nonzero(mask))

    def durations(self, dim: int) -> np.ndarray:
        """Ascending death-birth durations of the finite features in one dimension."""
        bd = self.finite(dim)
        return np.sort(bd[:, 1] - bd[:, 0])


def _sorted_edges(dm: DistanceMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = dm.n
    iu, ju = np.triu_indices(n, k=1)
    w = dm.entries[iu, ju]
    order = np.lexsort((ju, iu, w))
    return iu[order].astype(np.int64), ju[order].astype(np.int64), w[order]


def persistence_h0(dm: DistanceMatrix, source_label: str | None = None) -> PersistenceDiagram:
    """Dimension-0 persistence by union-find over edges in ascending order.

    Each merge of two components at distance d emits a feature (0, 0, d);
    one essential class remains per connected component.
    """
    n = dm.n
    if n == 1:
        return PersistenceDiagram.from_features([(0, 0.0, math.inf)], source_label)
    eu, ev, ew = _sorted_edges(dm)
    deaths, _ = _kernels.union_find_merges(eu, ev, ew, n, False)
    n_components = n - deaths.shape[0]
    # zero-persistence pairs (duplicate points) are dropped
    feats = [(0, 0.0, float(x)) for x in deaths if x > 0.0]
    feats.extend((0, 0.0, math.inf) for _ in range(n_components))
    return PersistenceDiagram.from_features(feats, source_label)


def persistence(f: Filtration, source_label: str | None = None) -> PersistenceDiagram:
    """Persistence diagram of a Rips filtration.

    Emits features of dimensions 0 .. max_dimension-1 (homology in
    dimension k needs simplices up to k+1); dimension-0 components are
    always reported. Zero-persistence pairs are suppressed.
    """
    n = f.n_points
    feats: list[tuple[int, float, float]] = []

    if f.max_dimension == 0 or f.count(1) == 0:
        feats.extend((0, 0.0, math.inf) for _ in range(n))
        return PersistenceDiagram.from_features(feats, source_label)

    ev = f.simplex_vertices(1)
    ew = f.simplex_values(1)
    need_positive = f.max_dimension >= 2
    deaths, is_merge = _kernels.union_find_merges(
        ev[:, 0].copy(), ev[:, 1].copy(), ew, n, need_positive
    )
    feats.extend((0, 0.0, float(d)) for d in deaths if d > 0.0)
    n_components = n - deaths.shape[0]
    feats.extend((0, 0.0, math.inf) for _ in range(n_components))

    if f.max_dimension >= 2:
        n_positive_edges = f.count(1) - deaths.shape[0]
        pair_row_by_dim: dict[int, np.ndarray] = {}
        cleared = np.zeros(f.count(f.max_dimension), dtype=np.bool_)
        for dim in range(f.max_dimension, 1, -1):
            n_cols = f.count(dim)
            n_rows = f.count(dim - 1)
            if n_cols == 0:
                pair_row_by_dim[dim] = np.empty(0, dtype=np.int64)
                cleared = np.zeros(f.count(dim - 1), dtype=np.bool_)
                continue
            faces = _face_rows(f, dim)
            n_positive = n_positive_edges if dim == 2 else -1
            pair_row = _kernels.reduce_boundary(faces, cleared, n_rows, n_positive)
            pair_row_by_dim[dim] = pair_row
            nxt = np.zeros(n_rows, dtype=np.bool_)
            nxt[pair_row[pair_row >= 0]] = True
            cleared = nxt

        for k in range(1, f.max_dimension):
            vals_k = f.simplex_values(k) if f.count(k) else np.empty(0)
            pair_row = pair_row_by_dim[k + 1]
            if pair_row.shape[0]:
                vals_up = f.simplex_values(k + 1)
                paired = pair_row >= 0
                births = vals_k[pair_row[paired]]
                deaths_k = vals_up[paired]
                keep = deaths_k > births
                feats.extend(
                    (k, float(b), float(d)) for b, d in zip(births[keep], deaths_k[keep])
                )
            # Essential classes: positive k-simplices never paired above.
            if k == 1:
                positive = ~is_merge
            else:
                positive = pair_row_by_dim[k] == -1
            unpaired = positive.copy()
            if pair_row.shape[0]:
                unpaired[pair_row[pair_row >= 0]] = False
            feats.extend((k, float(vals_k[j]), math.inf) for j in np.flatnonzero(unpaired))

    return PersistenceDiagram.from_features(feats, source_label)


def _face_rows(f: Filtration, dim: int) -> np.ndarray:
    """Row indices (into the (dim-1)-simplex order) of each dim-simplex's faces."""
    cached = f._face_rows.get(dim)
    if cached is not None:
        return cached
    verts = f.simplex_vertices(dim)
    if dim == 2:
        n = f.n_points
        edge_verts = f.simplex_vertices(1)
        rank = np.full(n * n, -1, dtype=np.int64)
        rank[edge_verts[:, 0] * n + edge_verts[:, 1]] = np.arange(edge_verts.shape[0])
        i, j, k = verts[:, 0], verts[:, 1], verts[:, 2]
        return np.column_stack((rank[i * n + j], rank[i * n + k], rank[j * n + k]))
    index = {tuple(row): r for r, row in enumerate(map(tuple, f.simplex_vertices(dim - 1)))}
    faces = np.empty((verts.shape[0], dim + 1), dtype=np.int64)
    for r, row in enumerate(map(tuple, verts)):
        for drop in range(dim + 1):
            faces[r, drop] = index[row[:drop] + row[drop + 1:]]
    return faces


def betti_numbers(d: PersistenceDiagram, t: float) -> list[int]:
    """Feature counts alive at threshold t: birth <= t < death, per dimension."""
    if t < 0:
        raise ValidationError(f"threshold must be >= 0, got {t}")
    if len(d) == 0:
        return []
    alive = (d.data[:, 1] <= t) & (t < d.data[:, 2])
    dims = d.data[:, 0].astype(np.int64)
    out = [0] * (d.max_dimension() + 1)
    for dim in dims[alive]:
        out[dim] += 1
    return out


def barcode(d: PersistenceDiagram) -> list[tuple[int, float, float]]:
    """Intervals (dimension, start, end), sorted; end is inf for essential classes."""
    return [(int(r[0]), float(r[1]), float(r[2])) for r in d.data]


def save_diagram(d: PersistenceDiagram, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("dimension,birth,death\n")
        for r in d.data:
            death = "inf" if math.isinf(r[2]) else repr(float(r[2]))
            fh.write(f"{int(r[0])},{float(r[1])!r},{death}\n")


def load_diagram(path, source_label: str | None = None) -> PersistenceDiagram:
    feats = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if lineno == 1 and stripped.lower().startswith("dimension"):
                continue
            parts = stripped.split(",")
            if len(parts) != 3:
                raise ParseError(path, lineno, f"expected 3 fields, got {len(parts)}")
            try:
                feats.append((int(parts[0]), float(parts[1]), float(parts[2])))
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc)) from None
    return PersistenceDiagram.from_features(feats, source_label)
