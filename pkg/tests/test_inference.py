import numpy as np
import pytest

from topospc.errors import ValidationError
from topospc.inference import (
    ReferenceSet,
    build_reference,
    permutation_test,
)
from topospc.metrics import duration_distance
from topospc.persistence import PersistenceDiagram

from oracles import in_group_total, random_diagram


def dur_diag(durations, dim=0):
    return PersistenceDiagram.from_features([(dim, 0.0, float(x)) for x in durations])


def test_build_reference_identical_diagrams():
    ref = build_reference([dur_diag([1.0, 2.0])] * 3, 0)
    assert np.all(ref.intra_distance_matrix == 0.0)
    assert ref.intra_total == 0.0


def test_build_reference_pairwise_sum():
    # durations [0], [1], [3]: pairwise duration distances 1, 3, 2
    ref = build_reference([dur_diag([0.0]), dur_diag([1.0]), dur_diag([3.0])], 0)
    assert ref.intra_total == pytest.approx(6.0)
    assert sorted(ref.intra_distance_matrix[np.triu_indices(3, 1)]) == [1.0, 2.0, 3.0]


def test_build_reference_caches_all_pairs():
    rng = np.random.default_rng(30)
    diagrams = [random_diagram(rng, max_points=5) for _ in range(200)]
    ref = build_reference(diagrams, 0)
    assert ref.intra_distance_matrix.shape == (200, 200)
    assert ref.intra_distance_matrix[np.triu_indices(200, 1)].size == 19900
    assert np.array_equal(ref.intra_distance_matrix, ref.intra_distance_matrix.T)
    expected = in_group_total(diagrams[:12], 0, duration_distance)
    got = np.triu(ref.intra_distance_matrix[:12, :12], 1).sum()
    assert got == pytest.approx(expected, abs=1e-9)


def test_build_reference_needs_two():
    with pytest.raises(ValidationError):
        build_reference([dur_diag([1.0])], 0)
    with pytest.raises(ValidationError):
        build_reference([dur_diag([1.0])] * 3, 0, distance="nope")


class _StubReference(ReferenceSet):
    """Injects arbitrary cross distances to exercise the null-statistic formula."""

    def __init__(self, intra, crosses):
        intra = np.asarray(intra, dtype=float)
        diagrams = tuple(dur_diag([1.0]) for _ in range(intra.shape[0]))
        super().__init__(diagrams, 0, "duration", intra)
        object.__setattr__(self, "_crosses", np.asarray(crosses, dtype=float))

    def cross_distances(self, y):
        return self._crosses


def test_m0_2_hand_enumeration():
    # intra d12 = 5; crosses {1, 2}: grand total 8, nulls {8-1-5, 8-2-5, 5}
    ref = _StubReference([[0.0, 5.0], [5.0, 0.0]], [1.0, 2.0])
    res = permutation_test(ref, dur_diag([1.0]))
    assert res.observed_stat == 5.0
    assert sorted(res.null_stats) == [1.0, 2.0, 5.0]
    assert res.p_value == 1.0


def test_all_ties_gives_p_one():
    ref = build_reference([dur_diag([1.0, 2.0])] * 3, 0)
    res = permutation_test(ref, dur_diag([1.0, 2.0]))
    assert res.p_value == 1.0
    assert not res.reject()


def test_extreme_outlier_hits_p_floor():
    rng = np.random.default_rng(31)
    diagrams = [dur_diag(sorted(rng.uniform(0, 1, 4))) for _ in range(200)]
    ref = build_reference(diagrams, 0)
    res = permutation_test(ref, dur_diag([50.0, 80.0]))
    assert res.p_value == pytest.approx(1 / 201, abs=1e-12)
    assert res.reject()


def test_null_stats_contain_observed_and_floor():
    rng = np.random.default_rng(32)
    for m0 in (2, 5, 9):
        diagrams = [random_diagram(rng, max_points=4) for _ in range(m0)]
        ref = build_reference(diagrams, 0)
        res = permutation_test(ref, random_diagram(rng, max_points=4))
        assert res.null_stats.shape[0] == m0 + 1
        assert res.observed_stat in res.null_stats
        assert res.p_value >= 1 / (m0 + 1) - 1e-15


def test_incremental_equals_direct():
    rng = np.random.default_rng(33)
    for trial in range(6):
        m0 = int(rng.integers(2, 11))
        diagrams = [random_diagram(rng, max_points=5) for _ in range(m0)]
        y = random_diagram(rng, max_points=5)
        ref = build_reference(diagrams, 0)
        res = permutation_test(ref, y)
        everyone = list(diagrams) + [y]
        direct = sorted(
            in_group_total(everyone[:k] + everyone[k + 1:], 0, duration_distance)
            for k in range(m0 + 1)
        )
        assert np.allclose(sorted(res.null_stats), direct, atol=1e-9)


def test_determinism():
    rng = np.random.default_rng(34)
    diagrams = [random_diagram(rng, max_points=5) for _ in range(8)]
    y = random_diagram(rng, max_points=5)
    ref1 = build_reference(diagrams, 0)
    ref2 = build_reference(diagrams, 0)
    r1 = permutation_test(ref1, y, alpha=0.2)
    r2 = permutation_test(ref2, y, alpha=0.2)
    assert np.array_equal(r1.null_stats, r2.null_stats)
    assert r1.p_value == r2.p_value
    assert r1.alpha_limit == r2.alpha_limit


def test_alpha_limit_consistent_with_p_value():
    rng = np.random.default_rng(35)
    for trial in range(10):
        diagrams = [random_diagram(rng, max_points=5) for _ in range(30)]
        ref = build_reference(diagrams, 0)
        res = permutation_test(ref, random_diagram(rng, max_points=5), alpha=0.1)
        rejected = res.p_value <= 0.1
        assert rejected == (res.observed_stat <= res.alpha_limit)


def test_alpha_below_floor_gives_nan_limit():
    ref = build_reference([dur_diag([1.0]), dur_diag([2.0])], 0)
    res = permutation_test(ref, dur_diag([1.5]), alpha=0.05)
    assert np.isnan(res.alpha_limit)
    assert not res.reject()


def test_other_distances_supported():
    rng = np.random.default_rng(36)
    diagrams = [random_diagram(rng, max_points=3) for _ in range(5)]
    y = random_diagram(rng, max_points=3)
    for kind in ("bottleneck", "wasserstein"):
        ref = build_reference(diagrams, 0, distance=kind)
        res = permutation_test(ref, y)
        assert res.null_stats.shape[0] == 6
        assert res.observed_stat == pytest.approx(ref.intra_total)
