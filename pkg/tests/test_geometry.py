import math

import numpy as np
import pytest

from topospc.errors import ParseError, ValidationError
from topospc.geometry import (
    PointCloud,
    load_pointcloud,
    pairwise_distances,
    save_pointcloud,
)

from oracles import hand_distance_matrix

CUBE = np.array([(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)


def test_unit_distance():
    dm = pairwise_distances(PointCloud(np.array([[0, 0, 0], [1, 0, 0]], float)))
    assert dm.entries[0, 1] == 1.0
    assert dm.entries[1, 0] == 1.0


def test_cube_distance_multiset():
    oracle = hand_distance_matrix(CUBE)
    dm = pairwise_distances(PointCloud(CUBE))
    assert np.allclose(dm.entries, oracle, atol=1e-12)
    vals = sorted(dm.entries[np.triu_indices(8, 1)])
    expected = sorted([1.0] * 12 + [math.sqrt(2)] * 12 + [math.sqrt(3)] * 4)
    assert np.allclose(vals, expected, atol=1e-12)


def test_single_point():
    dm = pairwise_distances(PointCloud(np.zeros((1, 3))))
    assert dm.entries.shape == (1, 1)
    assert dm.entries[0, 0] == 0.0


def test_matrix_invariants():
    rng = np.random.default_rng(0)
    dm = pairwise_distances(PointCloud(rng.normal(size=(15, 3))))
    assert np.all(np.diag(dm.entries) == 0.0)
    assert np.array_equal(dm.entries, dm.entries.T)
    # triangle inequality over all triples
    e = dm.entries
    for i in range(15):
        for j in range(15):
            for k in range(15):
                assert e[i, j] <= e[i, k] + e[k, j] + 1e-12


def test_validation_errors():
    with pytest.raises(ValidationError):
        PointCloud(np.array([[0.0, 0.0, np.nan]]))
    with pytest.raises(ValidationError):
        PointCloud(np.array([[np.inf, 0.0, 0.0]]))
    with pytest.raises(ValidationError):
        PointCloud(np.zeros((0, 3)))
    with pytest.raises(ValidationError):
        PointCloud(np.zeros((4, 2)))


def test_permutation_equivariance():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(10, 3))
    perm = rng.permutation(10)
    d1 = pairwise_distances(PointCloud(pts)).entries
    d2 = pairwise_distances(PointCloud(pts[perm])).entries
    assert np.allclose(d2, d1[np.ix_(perm, perm)], atol=1e-12)


def test_rigid_motion_invariance():
    rng = np.random.default_rng(2)
    pts = rng.normal(size=(12, 3))
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    moved = PointCloud(pts).transformed(q, offset=(0.3, -1.2, 5.0))
    d1 = pairwise_distances(PointCloud(pts)).entries
    d2 = pairwise_distances(moved).entries
    assert np.allclose(d1, d2, atol=1e-9)


@pytest.mark.parametrize("fmt", ["xyz", "csv"])
def test_roundtrip(tmp_path, fmt):
    rng = np.random.default_rng(3)
    cloud = PointCloud(rng.normal(size=(17, 3)) * 1.23456789)
    path = tmp_path / f"cloud.{fmt}"
    save_pointcloud(cloud, path, fmt)
    back = load_pointcloud(path, fmt)
    assert len(back) == 17
    assert np.allclose(back.points, cloud.points, atol=1e-12)


def test_load_xyz_basic(tmp_path):
    path = tmp_path / "two.xyz"
    path.write_text("0 0 0\n1 1 1\n")
    cloud = load_pointcloud(path)
    assert len(cloud) == 2
    assert np.array_equal(cloud.points, [[0, 0, 0], [1, 1, 1]])


def test_load_skips_comments_and_header(tmp_path):
    path = tmp_path / "part.xyz"
    path.write_text("# part A\n0 0 0\n\n2 0 0\n")
    cloud = load_pointcloud(path)
    assert len(cloud) == 2
    csv = tmp_path / "part.csv"
    csv.write_text("x,y,z\n0,0,0\n1,2,3\n")
    cloud = load_pointcloud(csv)
    assert len(cloud) == 2
    assert np.array_equal(cloud.points[1], [1, 2, 3])


def test_load_errors(tmp_path):
    bad = tmp_path / "bad.xyz"
    bad.write_text("0 0 0\n1 2\n")
    with pytest.raises(ParseError) as err:
        load_pointcloud(bad)
    assert err.value.lineno == 2
    empty = tmp_path / "empty.xyz"
    empty.write_text("# nothing\n")
    with pytest.raises(ParseError):
        load_pointcloud(empty)


def test_order_preserved(tmp_path):
    pts = np.array([[3, 0, 0], [1, 0, 0], [2, 0, 0]], float)
    path = tmp_path / "ordered.xyz"
    save_pointcloud(PointCloud(pts), path)
    assert np.array_equal(load_pointcloud(path).points, pts)
