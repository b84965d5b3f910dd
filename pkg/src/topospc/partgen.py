"""Synthetic lattice parts: wireframes sampled along struts, defects, noise.

Parts are wireframes (nodes plus struts); point clouds are produced by
placing points at uniform arc-length along every strut. Defects move or
remove wireframe elements *before* sampling, so sampled points interpolate
between the displaced nodes automatically. All generators are deterministic
given their parameters; noise is the only random ingredient and is driven
by a counter-based Philox stream keyed by the seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import PointCloud, check_points

__all__ = [
    "Wireframe",
    "DefectSpec",
    "NoiseSpec",
    "gen_cube",
    "gen_layered_tube",
    "gen_cube_lattice",
    "gen_egg_like_lattice",
    "apply_defect",
    "sample_cloud",
    "add_noise",
    "expected_point_count",
    "default_collapse_target",
    "save_wireframe",
    "load_wireframe",
]

DEFECT_KINDS = ("shift_layer", "collapse_edge", "collapse_scale", "missing_strut")
_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class Wireframe:
    """Nodes, struts (node-index pairs), and the sampling arc-length."""

    nodes: np.ndarray
    struts: tuple[tuple[int, int], ...]
    spacing: float
    node_layers: tuple[int, ...] | None = None
    label: str | None = None

    def __post_init__(self):
        nodes = check_points(self.nodes, name="nodes")
        object.__setattr__(self, "nodes", nodes)
        nodes.setflags(write=False)
        if self.spacing <= 0:
            raise ValidationError(f"spacing must be > 0, got {self.spacing}")
        seen = set()
        norm = []
        for a, b in self.struts:
            if not (0 <= a < len(nodes) and 0 <= b < len(nodes)) or a == b:
                raise ValidationError(f"invalid strut ({a}, {b})")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValidationError(f"duplicate strut {key}")
            seen.add(key)
            norm.append(key)
        object.__setattr__(self, "struts", tuple(norm))
        if self.node_layers is not None:
            if len(self.node_layers) != len(nodes):
                raise ValidationError("node_layers length must match node count")
            object.__setattr__(self, "node_layers", tuple(int(x) for x in self.node_layers))

    def strut_lengths(self) -> np.ndarray:
        idx = np.array(self.struts, dtype=np.int64).reshape(-1, 2)
        return np.linalg.norm(self.nodes[idx[:, 0]] - self.nodes[idx[:, 1]], axis=1)


@dataclass(frozen=True)
class DefectSpec:
    """A geometric defect; severity 0 always reproduces the nominal part."""

    kind: str
    severity: float = 0.0
    target: int | None = None
    axis: str = "y"

    def __post_init__(self):
        if self.kind not in DEFECT_KINDS:
            raise ValidationError(f"unknown defect kind {self.kind!r}; choose from {DEFECT_KINDS}")
        if self.severity < 0:
            raise ValidationError(f"severity must be >= 0, got {self.severity}")
        if self.axis not in _AXES:
            raise ValidationError(f"axis must be one of x, y, z, got {self.axis!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """Isotropic Gaussian coordinate noise with a deterministic seed."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValidationError(f"sigma must be >= 0, got {self.sigma}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


def gen_cube(edge: float, spacing: float) -> Wireframe:
    """Wireframe cube: 8 corner nodes, 12 edge struts."""
    if edge <= 0:
        raise ValidationError(f"edge must be > 0, got {edge}")
    corners = np.array([(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)],
                       dtype=np.float64) * edge
    struts = []
    for a in range(8):
        for b in range(a + 1, 8):
            if sum(corners[a] != corners[b]) == 1:
                struts.append((a, b))
    layers = tuple(int(c[2] > 0) for c in corners)
    return Wireframe(corners, tuple(struts), spacing, node_layers=layers, label="cube")


def gen_layered_tube(edge: float, layers: int, spacing: float) -> Wireframe:
    """Open box built as stacked square rings with corner connectors.

    `layers` horizontal rings span the height; consecutive rings are joined
    by vertical struts at the four corners. Ring membership is recorded in
    node_layers for defect targeting. layers=2 gives the plain cube frame.
    """
    if layers < 2:
        raise ValidationError(f"layers must be >= 2, got {layers}")
    if edge <= 0:
        raise ValidationError(f"edge must be > 0, got {edge}")
    ring_xy = np.array([(0, 0), (edge, 0), (edge, edge), (0, edge)], dtype=np.float64)
    nodes = []
    node_layers = []
    for l in range(layers):
        z = edge * l / (layers - 1)
        for x, y in ring_xy:
            nodes.append((x, y, z))
            node_layers.append(l)
    struts = []
    for l in range(layers):
        base = 4 * l
        struts += [(base, base + 1), (base + 1, base + 2), (base + 2, base + 3), (base, base + 3)]
    for l in range(layers - 1):
        for c in range(4):
            struts.append((4 * l + c, 4 * (l + 1) + c))
    return Wireframe(np.array(nodes), tuple(struts), spacing,
                     node_layers=tuple(node_layers), label=f"tube{layers}")


def gen_cube_lattice(nx: int, ny: int, nz: int, cell_edge: float, spacing: float) -> Wireframe:
    """Grid of fused cube cells sharing nodes and struts."""
    if min(nx, ny, nz) < 1:
        raise ValidationError("cell counts must be >= 1")
    if cell_edge <= 0:
        raise ValidationError(f"cell_edge must be > 0, got {cell_edge}")

    def idx(i, j, k):
        return (i * (ny + 1) + j) * (nz + 1) + k

    nodes = np.array([(i, j, k) for i in range(nx + 1) for j in range(ny + 1)
                      for k in range(nz + 1)], dtype=np.float64) * cell_edge
    node_layers = tuple(int(round(p[2] / cell_edge)) for p in nodes)
    struts = []
    for i in range(nx + 1):
        for j in range(ny + 1):
            for k in range(nz + 1):
                if i < nx:
                    struts.append((idx(i, j, k), idx(i + 1, j, k)))
                if j < ny:
                    struts.append((idx(i, j, k), idx(i, j + 1, k)))
                if k < nz:
                    struts.append((idx(i, j, k), idx(i, j, k + 1)))
    return Wireframe(nodes, tuple(struts), spacing, node_layers=node_layers,
                     label=f"lattice{nx}x{ny}x{nz}")


def gen_egg_like_lattice(rings: int = 8, struts_per_ring: int = 12,
                         height: float = 1.0, radius: float = 0.32,
                         spacing: float = 0.026) -> Wireframe:
    """Closed egg-shaped strut lattice: stacked polygon rings, verticals,
    diagonal cross-struts, and apex caps.

    A stand-in for skeletonized lattice CAD parts: ring radii follow an egg
    profile (wider below mid-height). The default parameters sample to
    roughly 1500 points; raise `spacing` for smaller clouds.
    """
    if rings < 2:
        raise ValidationError(f"rings must be >= 2, got {rings}")
    if struts_per_ring < 3:
        raise ValidationError(f"struts_per_ring must be >= 3, got {struts_per_ring}")
    if height <= 0 or radius <= 0:
        raise ValidationError("height and radius must be > 0")
    spr = struts_per_ring
    nodes = [(0.0, 0.0, 0.0)]
    node_layers = [0]
    for l in range(rings):
        t = (l + 1) / (rings + 1)
        rho = radius * math.sin(math.pi * t) * (1.0 + 0.2 * math.cos(math.pi * t))
        for k in range(spr):
            theta = 2.0 * math.pi * k / spr
            nodes.append((rho * math.cos(theta), rho * math.sin(theta), height * t))
            node_layers.append(l + 1)
    nodes.append((0.0, 0.0, height))
    node_layers.append(rings + 1)
    top = len(nodes) - 1

    def ring_node(l, k):
        return 1 + l * spr + (k % spr)

    struts = []
    for k in range(spr):
        struts.append((0, ring_node(0, k)))
    for l in range(rings):
        for k in range(spr):
            struts.append((ring_node(l, k), ring_node(l, k + 1)))
    for l in range(rings - 1):
        for k in range(spr):
            struts.append((ring_node(l, k), ring_node(l + 1, k)))
            struts.append((ring_node(l, k), ring_node(l + 1, k + 1)))
    for k in range(spr):
        struts.append((ring_node(rings - 1, k), top))
    return Wireframe(np.array(nodes), tuple(struts), spacing,
                     node_layers=tuple(node_layers), label="egg")


def default_collapse_target(w: Wireframe) -> int:
    """Node index of the top corner: lexicographic max of (z, y, x)."""
    order = np.lexsort((w.nodes[:, 0], w.nodes[:, 1], w.nodes[:, 2]))
    return int(order[-1])


def apply_defect(w: Wireframe, d: DefectSpec) -> Wireframe:
    """Return the defective wireframe; severity 0 returns the input unchanged."""
    _validate_target(w, d)
    if d.severity == 0.0:
        return w
    if d.kind == "shift_layer":
        nodes = w.nodes.copy()
        mask = np.array([l == d.target for l in w.node_layers])
        nodes[mask, _AXES[d.axis]] += d.severity
        return Wireframe(nodes, w.struts, w.spacing, w.node_layers, w.label)
    if d.kind == "collapse_edge":
        nodes = w.nodes.copy()
        nodes[d.target, 2] -= d.severity
        return Wireframe(nodes, w.struts, w.spacing, w.node_layers, w.label)
    if d.kind == "collapse_scale":
        nodes = w.nodes.copy()
        centroid = nodes.mean(axis=0)
        H = nodes[:, 2].max() - nodes[:, 2].min()
        W = max(nodes[:, 0].max() - nodes[:, 0].min(),
                nodes[:, 1].max() - nodes[:, 1].min())
        if d.severity >= H:
            raise ValidationError(f"collapse severity {d.severity} >= part height {H}")
        scale = np.array([(W + d.severity) / W, (W + d.severity) / W, (H - d.severity) / H])
        nodes = centroid + (nodes - centroid) * scale
        return Wireframe(nodes, w.struts, w.spacing, w.node_layers, w.label)
    # missing_strut: binary defect; any severity > 0 removes the strut
    struts = tuple(s for i, s in enumerate(w.struts) if i != d.target)
    return Wireframe(w.nodes, struts, w.spacing, w.node_layers, w.label)


def _validate_target(w: Wireframe, d: DefectSpec) -> None:
    if d.kind == "shift_layer":
        if w.node_layers is None:
            raise ValidationError("wireframe has no layer information for shift_layer")
        if d.target is None or d.target not in set(w.node_layers):
            raise ValidationError(f"invalid layer target {d.target}")
    elif d.kind == "collapse_edge":
        if d.target is None or not 0 <= d.target < len(w.nodes):
            raise ValidationError(f"invalid corner target {d.target}")
    elif d.kind == "missing_strut":
        if d.target is None or not 0 <= d.target < len(w.struts):
            raise ValidationError(f"invalid strut target {d.target}")


def _segments(length: float, spacing: float) -> int:
    # the 1e-9 slack keeps counts stable when a rigid motion perturbs an
    # exact multiple of the spacing by a few ulps
    return max(int(math.ceil(length / spacing - 1e-9)), 1)


def sample_cloud(w: Wireframe) -> PointCloud:
    """Nodes plus points at uniform arc-length <= spacing along every strut.

    Order is deterministic: nodes first (index order), then strut by strut
    with ascending arc position. Shared nodes are emitted once.
    """
    chunks = [w.nodes]
    for a, b in w.struts:
        pa, pb = w.nodes[a], w.nodes[b]
        k = _segments(float(np.linalg.norm(pb - pa)), w.spacing)
        if k > 1:
            ts = np.arange(1, k) / k
            chunks.append(pa + ts[:, None] * (pb - pa))
    return PointCloud(np.concatenate(chunks, axis=0), w.label)


def expected_point_count(w: Wireframe) -> int:
    """Sampled-cloud size implied by the spacing (nodes plus interior points)."""
    count = len(w.nodes)
    for length in w.strut_lengths():
        count += _segments(float(length), w.spacing) - 1
    return count


def add_noise(c: PointCloud, n: NoiseSpec) -> PointCloud:
    """Add i.i.d. Gaussian noise to every coordinate.

    Drawn from a Philox counter-based generator keyed by the seed; the
    value perturbing point i, coordinate j sits at stream position 3*i+j,
    so identical seeds give identical noise regardless of context.
    """
    if n.sigma == 0.0:
        return c
    gen = np.random.Generator(np.random.Philox(key=int(n.seed)))
    noise = gen.standard_normal(c.points.shape) * n.sigma
    return PointCloud(c.points + noise, c.label)


def save_wireframe(w: Wireframe, path) -> None:
    payload = {
        "nodes": [[float(x) for x in row] for row in w.nodes],
        "struts": [list(s) for s in w.struts],
        "spacing": w.spacing,
        "node_layers": list(w.node_layers) if w.node_layers is not None else None,
        "label": w.label,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_wireframe(path) -> Wireframe:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return Wireframe(
        np.array(payload["nodes"], dtype=np.float64),
        tuple(tuple(s) for s in payload["struts"]),
        float(payload["spacing"]),
        node_layers=tuple(payload["node_layers"]) if payload.get("node_layers") else None,
        label=payload.get("label"),
    )
