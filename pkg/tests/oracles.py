"""Independent brute-force oracles used by the test suite.

Everything here is deliberately naive and kept free of the package's
optimized code paths: full boundary matrices reduced column by column,
exhaustive bijection enumeration for matching distances, networkx for
graph topology, direct recomputation of permutation statistics.
"""

import itertools
import math

import networkx as nx
import numpy as np


def hand_distance_matrix(points):
    """Pairwise Euclidean distances via plain python arithmetic."""
    pts = [tuple(map(float, p)) for p in points]
    n = len(pts)
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = math.sqrt(sum((a - b) ** 2 for a, b in zip(pts[i], pts[j])))
    return out


def naive_persistence(points, max_dimension):
    """Textbook persistence: full boundary matrix, no optimizations.

    Returns (finite, essential): finite is a sorted list of
    (dimension, birth, death); essential a sorted list of (dimension, birth),
    both restricted to dimensions 0 .. max_dimension-1 (dimension 0 always
    included). Zero-persistence pairs are dropped.
    """
    dm = hand_distance_matrix(points)
    n = len(dm)
    simplices = []
    for k in range(1, max_dimension + 2):
        for verts in itertools.combinations(range(n), k):
            value = max((dm[a][b] for a, b in itertools.combinations(verts, 2)), default=0.0)
            simplices.append((value, len(verts) - 1, verts))
    simplices.sort(key=lambda s: (s[0], s[1], s[2]))
    index = {s[2]: pos for pos, s in enumerate(simplices)}

    columns = []
    for value, dim, verts in simplices:
        col = 0
        if dim > 0:
            for face in itertools.combinations(verts, dim):
                col ^= 1 << index[face]
        columns.append(col)

    pivot_of = {}
    pairs = []
    for j in range(len(columns)):
        while columns[j]:
            low = columns[j].bit_length() - 1
            if low in pivot_of:
                columns[j] ^= columns[pivot_of[low]]
            else:
                pivot_of[low] = j
                pairs.append((low, j))
                break

    paired = set()
    finite = []
    for i, j in pairs:
        paired.add(i)
        paired.add(j)
        birth_val, birth_dim = simplices[i][0], simplices[i][1]
        death_val = simplices[j][0]
        if death_val > birth_val and birth_dim <= max_dimension - 1:
            finite.append((birth_dim, birth_val, death_val))
    essential = []
    for pos, (value, dim, verts) in enumerate(simplices):
        if pos not in paired and dim <= max_dimension - 1:
            essential.append((dim, value))
    return sorted(finite), sorted(essential)


def components_at_threshold(points, t):
    """Connected components of the distance graph at threshold t (networkx)."""
    dm = hand_distance_matrix(points)
    g = nx.Graph()
    g.add_nodes_from(range(len(dm)))
    for i in range(len(dm)):
        for j in range(i + 1, len(dm)):
            if dm[i][j] <= t:
                g.add_edge(i, j)
    return nx.number_connected_components(g)


def wireframe_graph_betti(wireframe):
    """(components, independent cycles) of the strut graph."""
    g = nx.Graph()
    g.add_nodes_from(range(len(wireframe.nodes)))
    g.add_edges_from(wireframe.struts)
    c = nx.number_connected_components(g)
    cycles = g.number_of_edges() - g.number_of_nodes() + c
    return c, cycles


def _diag_cost(b, d, ground, p):
    if ground == "linf":
        return (d - b) / 2.0
    return (d - b) / 2.0 * 2.0 ** (1.0 / p)


def _pair_cost(x, y, ground, p):
    if ground == "linf":
        return max(abs(x[0] - y[0]), abs(x[1] - y[1]))
    return (abs(x[0] - y[0]) ** p + abs(x[1] - y[1]) ** p) ** (1.0 / p)


def brute_matching_distance(px, py, kind, p=2.0, ground="linf"):
    """Exhaustive optimum over all partial bijections, rest to the diagonal.

    px, py: lists of (birth, death). kind: "bottleneck" or "wasserstein".
    For bottleneck the ground metric is L-infinity and the objective the max;
    for wasserstein the objective is the p-sum, returned to the 1/p power.
    """
    nx_, ny_ = len(px), len(py)
    if kind == "bottleneck":
        ground = "linf"
    best = math.inf
    for k in range(0, min(nx_, ny_) + 1):
        for xs in itertools.combinations(range(nx_), k):
            for ys in itertools.permutations(range(ny_), k):
                costs = [_pair_cost(px[a], py[b], ground, p) for a, b in zip(xs, ys)]
                costs += [_diag_cost(*px[a], ground, p) for a in range(nx_) if a not in xs]
                costs += [_diag_cost(*py[b], ground, p) for b in range(ny_) if b not in ys]
                if kind == "bottleneck":
                    val = max(costs, default=0.0)
                else:
                    val = sum(c ** p for c in costs) ** (1.0 / p)
                if val < best:
                    best = val
    return best


def in_group_total(diagrams, dim, distance_fn):
    """Direct evaluation of the total pairwise distance within one group."""
    total = 0.0
    for i in range(len(diagrams)):
        for j in range(i + 1, len(diagrams)):
            total += distance_fn(diagrams[i], diagrams[j], dim)
    return total


def random_diagram(rng, max_points=6, dim=0):
    """Random small diagram in one dimension (finite features only)."""
    from topospc.persistence import PersistenceDiagram

    k = int(rng.integers(0, max_points + 1))
    births = rng.uniform(0.0, 2.0, k)
    deaths = births + rng.uniform(1e-3, 2.0, k)
    feats = [(dim, float(b), float(d)) for b, d in zip(births, deaths)]
    return PersistenceDiagram.from_features(feats)
