"""K-means fitting, polarity ranking, and the cluster-based pitch cut."""

import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emopro.clustering import (
    DEFAULT_POLARITY,
    ClusterModel,
    FeaturePoint,
    Polarity,
    fit_kmeans,
    normalize_features,
    rank_clusters,
    select_pitch_clusters,
)
from emopro.corpus import CandidatePool, EmotionLabel, PromptCandidate
from emopro.pitch import PitchStats

from .oracles import best_two_cluster_inertia


def points_from(coords) -> list[FeaturePoint]:
    return [FeaturePoint(f"p{i}", float(x), float(y)) for i, (x, y) in enumerate(coords)]


def model_inertia(model: ClusterModel, coords) -> float:
    total = 0.0
    for i, (x, y) in enumerate(coords):
        centroid = model.centroids[model.assignments[f"p{i}"]]
        total += float((x - centroid[0]) ** 2 + (y - centroid[1]) ** 2)
    return total


def test_two_separated_groups_are_recovered():
    coords = [(0.0, 0.0), (0.1, 0.0), (10.0, 10.0), (10.1, 10.0)]
    model = fit_kmeans(points_from(coords), k=2, seed=3)
    a = model.assignments
    assert a["p0"] == a["p1"]
    assert a["p2"] == a["p3"]
    assert a["p0"] != a["p2"]


def test_single_cluster_centroid_is_the_mean():
    coords = [(0.0, 0.0), (2.0, 0.0), (0.0, 4.0), (6.0, 2.0)]
    model = fit_kmeans(points_from(coords), k=1, seed=0)
    data = np.array(coords)
    assert np.allclose(model.centroids[0], data.mean(axis=0))
    assert model.inertia == pytest.approx(((data - data.mean(axis=0)) ** 2).sum())


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_matches_exhaustive_two_cluster_optimum(seed):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(8, 2))
    model = fit_kmeans(points_from(data), k=2, seed=99)
    assert model.inertia == pytest.approx(best_two_cluster_inertia(data), rel=1e-9)


def test_fit_is_bit_identical_across_runs():
    rng = np.random.default_rng(7)
    pts = points_from(rng.normal(size=(30, 2)))
    first = fit_kmeans(pts, k=4, seed=11)
    for _ in range(4):
        again = fit_kmeans(pts, k=4, seed=11)
        assert np.array_equal(again.centroids, first.centroids)
        assert again.assignments == first.assignments
        assert again.inertia == first.inertia
        assert again.inertia_history == first.inertia_history


def test_inertia_history_never_increases():
    rng = np.random.default_rng(21)
    model = fit_kmeans(points_from(rng.normal(size=(40, 2))), k=5, seed=2)
    history = model.inertia_history
    assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))
    assert history[-1] == model.inertia


def test_every_point_sits_in_its_nearest_cluster():
    rng = np.random.default_rng(5)
    coords = rng.normal(size=(25, 2))
    model = fit_kmeans(points_from(coords), k=3, seed=17)
    for i, (x, y) in enumerate(coords):
        d = ((model.centroids - np.array([x, y])) ** 2).sum(axis=1)
        assert model.assignments[f"p{i}"] == int(np.argmin(d))
    assert model.inertia == pytest.approx(model_inertia(model, coords), rel=1e-9)


def test_duplicate_heavy_input_is_handled():
    coords = [(0.0, 0.0)] * 4 + [(1.0, 0.0)] * 2 + [(2.0, 0.0)] * 2
    model = fit_kmeans(points_from(coords), k=4, seed=0)
    assert math.isfinite(model.inertia)
    assert model.inertia == pytest.approx(0.0, abs=1e-12)
    again = fit_kmeans(points_from(coords), k=4, seed=0)
    assert again.assignments == model.assignments


def test_fewer_points_than_clusters_is_an_error():
    with pytest.raises(ValueError, match="at least k=3"):
        fit_kmeans(points_from([(0, 0), (1, 1)]), k=3, seed=0)


def rank_model(centroids) -> ClusterModel:
    return ClusterModel(
        k=len(centroids),
        centroids=np.array(centroids, dtype=float),
        assignments={},
        norm_params=None,
        seed=0,
        inertia=0.0,
    )


def test_rank_orders_by_centroid_score():
    model = rank_model([[1.0, 1.0], [0.0, 0.0], [-1.0, -1.0]])
    assert rank_clusters(model, Polarity.HIGH) == [0, 1, 2]
    assert rank_clusters(model, Polarity.LOW) == [2, 1, 0]


def test_rank_breaks_score_ties_toward_lower_index():
    # scores are 2, 2, -3: the tied pair keeps index order either way
    model = rank_model([[2.0, 0.0], [0.0, 2.0], [-3.0, 0.0]])
    assert rank_clusters(model, Polarity.HIGH) == [0, 1, 2]
    assert rank_clusters(model, Polarity.LOW) == [2, 0, 1]


@settings(max_examples=40, deadline=None)
@given(
    scores=st.lists(
        st.floats(min_value=-50, max_value=50),
        min_size=2,
        max_size=8,
        unique=True,
    )
)
def test_high_and_low_are_reverses_when_scores_are_distinct(scores):
    model = rank_model([[s, 0.0] for s in scores])
    high = rank_clusters(model, Polarity.HIGH)
    assert rank_clusters(model, Polarity.LOW) == list(reversed(high))


def test_normalize_features_z_scores_each_column():
    stats = {
        "a": PitchStats(100.0, 10.0, 50, 50),
        "b": PitchStats(200.0, 20.0, 50, 50),
        "c": PitchStats(300.0, 30.0, 50, 50),
    }
    points, params = normalize_features(stats, ("a", "b", "c"))
    root = 1.224744871391589  # sqrt(3/2), the z-score of the extremes
    assert [p.candidate_id for p in points] == ["a", "b", "c"]
    assert points[0].x == pytest.approx(-root)
    assert points[1].x == pytest.approx(0.0)
    assert points[2].x == pytest.approx(root)
    assert points[0].y == pytest.approx(-root)
    assert params.mean == (200.0, 20.0)
    assert params.std[0] == pytest.approx(math.sqrt(20000.0 / 3.0))


def test_normalize_skips_ids_without_stats_and_keeps_order():
    stats = {
        "b": PitchStats(200.0, 20.0, 50, 50),
        "a": PitchStats(100.0, 10.0, 50, 50),
    }
    points, _ = normalize_features(stats, ("a", "missing", "b"))
    assert [p.candidate_id for p in points] == ["a", "b"]


def test_normalize_constant_column_maps_to_zero():
    stats = {
        "a": PitchStats(100.0, 5.0, 50, 50),
        "b": PitchStats(300.0, 5.0, 50, 50),
    }
    points, params = normalize_features(stats, ("a", "b"))
    assert points[0].y == 0.0
    assert points[1].y == 0.0
    assert params.std[1] == 1.0


def grouped_pool(emotion=EmotionLabel.HAPPY):
    """Twelve candidates in three clean (mean, variance) groups of four."""
    candidates = []
    stats = {}
    for i in range(12):
        group = i // 4
        cid = f"p{i}"
        candidates.append(
            PromptCandidate(
                id=cid,
                speaker_id="spk1",
                emotion=emotion,
                audio_path=Path(f"/nonexistent/{cid}.wav"),
                transcript=f"sentence {i}",
            )
        )
        stats[cid] = PitchStats(
            mean_hz=120.0 + 80.0 * group + i % 4,
            variance_hz2=10.0 + 40.0 * group + (i % 4) * 0.5,
            voiced_frames=50,
            total_frames=50,
        )
    pool = CandidatePool("spk1", emotion, tuple(candidates))
    return pool, stats


def test_keeping_every_cluster_keeps_every_candidate():
    pool, stats = grouped_pool()
    sel = select_pitch_clusters(pool, stats, num_clusters=3, m=3, seed=4)
    assert sel.kept.ids() == pool.ids()
    assert sel.kept_clusters == sel.ranked_clusters[:3]


def test_high_polarity_keeps_the_high_group():
    pool, stats = grouped_pool(EmotionLabel.HAPPY)
    sel = select_pitch_clusters(pool, stats, num_clusters=3, m=1, seed=4)
    assert set(sel.kept.ids()) == {"p8", "p9", "p10", "p11"}
    assert sel.polarity is Polarity.HIGH


def test_low_polarity_keeps_the_low_group():
    pool, stats = grouped_pool(EmotionLabel.SAD)
    sel = select_pitch_clusters(pool, stats, num_clusters=3, m=1, seed=4)
    assert set(sel.kept.ids()) == {"p0", "p1", "p2", "p3"}
    assert sel.polarity is Polarity.LOW


def test_explicit_polarity_overrides_the_default():
    pool, stats = grouped_pool(EmotionLabel.HAPPY)
    sel = select_pitch_clusters(
        pool, stats, num_clusters=3, m=1, seed=4, polarity=Polarity.LOW
    )
    assert set(sel.kept.ids()) == {"p0", "p1", "p2", "p3"}


def test_selection_is_invariant_to_positive_affine_feature_maps():
    pool, stats = grouped_pool()
    rescaled = {
        cid: PitchStats(
            mean_hz=3.0 * s.mean_hz + 40.0,
            variance_hz2=0.25 * s.variance_hz2 + 7.0,
            voiced_frames=s.voiced_frames,
            total_frames=s.total_frames,
        )
        for cid, s in stats.items()
    }
    base = select_pitch_clusters(pool, stats, num_clusters=3, m=2, seed=4)
    moved = select_pitch_clusters(pool, rescaled, num_clusters=3, m=2, seed=4)
    assert set(base.kept.ids()) == set(moved.kept.ids())


def test_candidates_without_stats_never_survive():
    pool, stats = grouped_pool()
    del stats["p5"]
    sel = select_pitch_clusters(pool, stats, num_clusters=3, m=3, seed=4)
    assert "p5" not in sel.kept.ids()
    assert len(sel.kept) == 11


def test_m_must_not_exceed_cluster_count():
    pool, stats = grouped_pool()
    with pytest.raises(ValueError, match="1 <= m <= num_clusters"):
        select_pitch_clusters(pool, stats, num_clusters=3, m=4, seed=4)


def test_default_polarity_covers_every_emotion():
    assert set(DEFAULT_POLARITY) == set(EmotionLabel)
    assert DEFAULT_POLARITY[EmotionLabel.HAPPY] is Polarity.HIGH
    assert DEFAULT_POLARITY[EmotionLabel.SURPRISED] is Polarity.HIGH
    assert DEFAULT_POLARITY[EmotionLabel.ANGER] is Polarity.HIGH
    assert DEFAULT_POLARITY[EmotionLabel.SAD] is Polarity.LOW
    assert DEFAULT_POLARITY[EmotionLabel.COMFORT] is Polarity.LOW


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31 - 1))
def test_random_point_sets_cluster_consistently(seed):
    rng = np.random.default_rng(seed)
    coords = rng.normal(size=(12, 2))
    model = fit_kmeans(points_from(coords), k=3, seed=seed)
    history = model.inertia_history
    assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))
    assert model.inertia == pytest.approx(model_inertia(model, coords), rel=1e-9)
