import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import make_matrix
from scbm.core import BinaryLabel, ClipKey, EmbeddingMatrix
from scbm.embedding import SyntheticEmbedder, planted_spec
from scbm.errors import DimMismatch, EmptyClass
from scbm.ranking import (
    DistanceMetric,
    DistanceSpace,
    avg_pairwise_l2,
    centroid_distance,
    rank_scenarios,
)


def brute_force_avg_l2(A, B):
    total = 0.0
    for a in A:
        for b in B:
            total += float(np.linalg.norm(np.asarray(a) - np.asarray(b)))
    return total / (len(A) * len(B))


class TestCentroidDistance:
    def test_hand_case_collinear(self):
        assert centroid_distance([(0, 0), (2, 0)], [(4, 0), (6, 0)]) == pytest.approx(4.0)

    def test_identical_sets_are_zero(self):
        A = [(1.0, 2.0), (3.0, -1.0)]
        assert centroid_distance(A, A) == 0.0

    def test_three_four_five(self):
        assert centroid_distance([(3, 4)], [(0, 0)]) == pytest.approx(5.0)

    def test_empty_class(self):
        with pytest.raises(EmptyClass):
            centroid_distance(np.empty((0, 2)), [(1, 2)])

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            centroid_distance([(1, 2)], [(1, 2, 3)])


class TestAvgPairwise:
    def test_one_dimensional_enumeration(self):
        assert avg_pairwise_l2([[0], [2]], [[4], [6]]) == pytest.approx(4.0)

    def test_singleton_same_point_is_zero(self):
        assert avg_pairwise_l2([[1.0, 2.0]], [[1.0, 2.0]]) == 0.0

    def test_matches_brute_force(self, rng):
        for _ in range(20):
            A = rng.standard_normal((5, 5))
            B = rng.standard_normal((5, 5))
            assert avg_pairwise_l2(A, B) == pytest.approx(brute_force_avg_l2(A, B), abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(
        arrays(np.float64, (4, 3), elements=st.floats(-50, 50)),
        arrays(np.float64, (5, 3), elements=st.floats(-50, 50)),
    )
    def test_jensen_bound_and_symmetry(self, A, B):
        c = centroid_distance(A, B)
        p = avg_pairwise_l2(A, B)
        assert c <= p + 1e-9
        assert p == pytest.approx(avg_pairwise_l2(B, A), abs=1e-12)
        assert c == pytest.approx(centroid_distance(B, A), abs=1e-12)

    def test_rotation_invariance(self, rng):
        A = rng.standard_normal((6, 3))
        B = rng.standard_normal((4, 3))
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        assert avg_pairwise_l2(A @ q, B @ q) == pytest.approx(avg_pairwise_l2(A, B), abs=1e-9)
        assert centroid_distance(A @ q, B @ q) == pytest.approx(centroid_distance(A, B), abs=1e-9)


def scenario_matrix(scenario, delta, n_per_class, sigma, seed, dim=8):
    from scbm.core import ClipRecord, ClipStatus

    emb = SyntheticEmbedder(planted_spec(dim, {scenario: delta}, sigma=sigma, seed=seed))
    keys, rows = [], []
    for i in range(2 * n_per_class):
        label = BinaryLabel.NORMAL if i < n_per_class else BinaryLabel.AD_AGING
        clip = ClipRecord(
            subject=f"{scenario}-S{i}", drive="d1", clip=f"{scenario}-c{i}", segment="g",
            scenario=scenario, status=ClipStatus.PURE, duration_min=1.0, timestamp="t",
        )
        rows.append(emb.embed(clip, label))
        keys.append(ClipKey(clip.subject, clip.drive, clip.clip, scenario, label))
    return EmbeddingMatrix(keys, np.stack(rows))


class TestRankScenarios:
    def test_planted_order_recovered(self):
        per = {
            "s1": scenario_matrix("s1", 4.0, 50, 0.2, seed=1),
            "s2": scenario_matrix("s2", 1.0, 50, 0.2, seed=2),
        }
        ranking = rank_scenarios(per, DistanceMetric.CENTROID, DistanceSpace.FULL)
        assert [e.scenario for e in ranking.entries] == ["s1", "s2"]
        assert ranking.best == "s1"

    def test_identical_data_ties_break_lexicographically(self):
        m = make_matrix([[0.0, 0.0], [1.0, 1.0]], labels=[0, 1])
        ranking = rank_scenarios({"b": m, "a": m, "c": m})
        assert [e.scenario for e in ranking.entries] == ["a", "b", "c"]

    def test_single_scenario_is_best(self):
        m = make_matrix([[0.0], [1.0]], labels=[0, 1])
        assert rank_scenarios({"only": m}).best == "only"

    def test_missing_class_rejected(self):
        m = make_matrix([[0.0], [1.0]], labels=[0, 0])
        with pytest.raises(EmptyClass):
            rank_scenarios({"s": m})

    def test_argmax_invariant_under_common_scaling(self):
        per = {
            "s1": scenario_matrix("s1", 4.0, 30, 0.2, seed=1),
            "s2": scenario_matrix("s2", 1.0, 30, 0.2, seed=2),
        }
        scaled = {
            name: EmbeddingMatrix(m.keys, m.vectors * 7.5) for name, m in per.items()
        }
        assert rank_scenarios(per).best == rank_scenarios(scaled).best

    def test_csv_output(self, tmp_path):
        m = make_matrix([[0.0], [1.0]], labels=[0, 1])
        ranking = rank_scenarios({"s": m})
        path = tmp_path / "ranking.csv"
        ranking.to_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "scenario,metric,space,dist_avg,rank"
        assert lines[1].startswith("s,centroid,reduced,")
