"""Pitch-feature clustering: z-score features, K-means, polarity-ranked cluster cut.

Each (speaker, emotion) pool is clustered on (F0 mean, F0 variance); the m
clusters whose centroids score strongest toward the emotion's polarity
(High keeps large mean+variance, Low keeps small) survive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .corpus import CandidatePool, EmotionLabel
from .pitch import PitchStats

logger = logging.getLogger(__name__)

KMEANS_RESTARTS = 10
KMEANS_MAX_ITER = 100


class Polarity(str, Enum):
    HIGH = "high"
    LOW = "low"


# Expressive emotions sit high in (mean, variance); subdued ones sit low.
DEFAULT_POLARITY: dict[EmotionLabel, Polarity] = {
    EmotionLabel.HAPPY: Polarity.HIGH,
    EmotionLabel.SURPRISED: Polarity.HIGH,
    EmotionLabel.ANGER: Polarity.HIGH,
    EmotionLabel.SAD: Polarity.LOW,
    EmotionLabel.COMFORT: Polarity.LOW,
}


@dataclass(frozen=True)
class FeaturePoint:
    """One candidate in normalized (mean, variance) space."""

    candidate_id: str
    x: float
    y: float


@dataclass(frozen=True)
class NormParams:
    """Per-feature z-score parameters (population std; 1.0 when degenerate)."""

    mean: tuple[float, float]
    std: tuple[float, float]


@dataclass(frozen=True)
class ClusterModel:
    k: int
    centroids: np.ndarray = field(repr=False)
    assignments: dict[str, int]
    norm_params: NormParams | None
    seed: int
    inertia: float
    inertia_history: tuple[float, ...] = ()

    def members(self, cluster: int) -> tuple[str, ...]:
        return tuple(
            cid for cid, idx in self.assignments.items() if idx == cluster
        )


def normalize_features(
    stats: dict[str, PitchStats], order: tuple[str, ...]
) -> tuple[list[FeaturePoint], NormParams]:
    """Z-score (mean_hz, variance_hz2) within the pool, in the given id order."""
    ids = [cid for cid in order if cid in stats]
    raw = np.array(
        [[stats[cid].mean_hz, stats[cid].variance_hz2] for cid in ids]
    )
    center = raw.mean(axis=0)
    spread = raw.std(axis=0)
    spread = np.where(spread > 0, spread, 1.0)
    normed = (raw - center) / spread
    points = [
        FeaturePoint(cid, float(x), float(y))
        for cid, (x, y) in zip(ids, normed)
    ]
    params = NormParams(
        mean=(float(center[0]), float(center[1])),
        std=(float(spread[0]), float(spread[1])),
    )
    return points, params


def _squared_distances(data: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    deltas = data[:, np.newaxis, :] - centroids[np.newaxis, :, :]
    return np.einsum("ijk,ijk->ij", deltas, deltas)


def _plusplus_init(
    data: np.ndarray, k: int, rng: np.random.Generator
) -> np.ndarray:
    n = data.shape[0]
    centroids = np.empty((k, data.shape[1]))
    centroids[0] = data[rng.integers(n)]
    for i in range(1, k):
        dist_sq = _squared_distances(data, centroids[:i]).min(axis=1)
        total = dist_sq.sum()
        if total > 0:
            idx = rng.choice(n, p=dist_sq / total)
        else:
            idx = rng.integers(n)
        centroids[i] = data[idx]
    return centroids


def _lloyd(
    data: np.ndarray, centroids: np.ndarray
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    history: list[float] = []
    labels = np.zeros(data.shape[0], dtype=int)
    for _ in range(KMEANS_MAX_ITER):
        dist_sq = _squared_distances(data, centroids)
        new_labels = dist_sq.argmin(axis=1)  # ties resolve to the lowest index

        # Repair empty clusters with the points farthest from their centroid.
        assigned_sq = dist_sq[np.arange(data.shape[0]), new_labels]
        for cluster in range(centroids.shape[0]):
            if np.any(new_labels == cluster):
                continue
            farthest = int(np.argmax(assigned_sq))
            new_labels[farthest] = cluster
            assigned_sq[farthest] = 0.0

        history.append(float(assigned_sq.sum()))
        converged = bool(np.array_equal(new_labels, labels)) and len(history) > 1
        labels = new_labels
        for cluster in range(centroids.shape[0]):
            mask = labels == cluster
            if mask.any():
                centroids[cluster] = data[mask].mean(axis=0)
        if converged:
            break

    dist_sq = _squared_distances(data, centroids)
    labels = dist_sq.argmin(axis=1)
    inertia = float(dist_sq[np.arange(data.shape[0]), labels].sum())
    history.append(inertia)
    return centroids, labels, inertia, history


def fit_kmeans(
    points: list[FeaturePoint],
    k: int,
    seed: int,
    *,
    restarts: int = KMEANS_RESTARTS,
    norm_params: NormParams | None = None,
) -> ClusterModel:
    """Lloyd's algorithm with k-means++ seeding and best-of-n restarts.

    Deterministic for a fixed seed: restart r uses the stream (seed, r) and
    the winner is the lowest (inertia, restart index) pair.
    """
    if len(points) < k:
        raise ValueError(f"need at least k={k} points, got {len(points)}")
    data = np.array([[p.x, p.y] for p in points])

    best: tuple[float, int] | None = None
    best_result = None
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        centroids = _plusplus_init(data.copy(), k, rng)
        centroids, labels, inertia, history = _lloyd(data, centroids)
        key = (inertia, restart)
        if best is None or key < best:
            best = key
            best_result = (centroids, labels, inertia, history)

    centroids, labels, inertia, history = best_result
    assignments = {p.candidate_id: int(label) for p, label in zip(points, labels)}
    return ClusterModel(
        k=k,
        centroids=centroids,
        assignments=assignments,
        norm_params=norm_params,
        seed=seed,
        inertia=inertia,
        inertia_history=tuple(history),
    )


def rank_clusters(model: ClusterModel, polarity: Polarity) -> list[int]:
    """Cluster indices ordered by centroid score s = z_mean + z_var.

    High polarity ranks descending, Low ascending; ties break toward the
    lower cluster index.
    """
    scores = model.centroids[:, 0] + model.centroids[:, 1]
    sign = -1.0 if polarity is Polarity.HIGH else 1.0
    return sorted(range(model.k), key=lambda i: (sign * scores[i], i))


@dataclass(frozen=True)
class PitchClusterSelection:
    kept: CandidatePool
    model: ClusterModel
    ranked_clusters: tuple[int, ...]
    kept_clusters: tuple[int, ...]
    polarity: Polarity


def select_pitch_clusters(
    pool: CandidatePool,
    stats: dict[str, PitchStats],
    *,
    num_clusters: int,
    m: int,
    seed: int,
    polarity: Polarity | None = None,
) -> PitchClusterSelection:
    """Keep every candidate in the top-m polarity-ranked clusters.

    Candidates absent from ``stats`` (insufficient voicing) never reach the
    clustering. Output pool preserves manifest order.
    """
    if not 1 <= m <= num_clusters:
        raise ValueError(f"need 1 <= m <= num_clusters, got m={m}, k={num_clusters}")
    if polarity is None:
        polarity = DEFAULT_POLARITY[pool.emotion]

    points, norm_params = normalize_features(stats, pool.ids())
    model = fit_kmeans(points, num_clusters, seed, norm_params=norm_params)
    ranked = rank_clusters(model, polarity)
    kept = tuple(ranked[:m])
    kept_set = set(kept)
    keep_ids = {
        cid for cid, cluster in model.assignments.items() if cluster in kept_set
    }
    logger.info(
        "pitch stage kept %d of %d candidates (%d of %d clusters, polarity=%s)",
        len(keep_ids),
        len(pool),
        m,
        num_clusters,
        polarity.value,
    )
    return PitchClusterSelection(
        kept=pool.subset(keep_ids),
        model=model,
        ranked_clusters=tuple(ranked),
        kept_clusters=kept,
        polarity=polarity,
    )
