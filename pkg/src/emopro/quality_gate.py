"""Perceptual quality and emotional coherence gate (static stage, step 2).

Each pitch-surviving candidate gets a perceptual quality score for its
audio and a coherence score for how well its transcript expresses the
target emotion. The two raw scores live on different scales, so each is
min-max normalized within the pool before summing; the Top n% by combined
score survive.
"""

from __future__ import annotations

import base64
import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .backends import BackendRole, BackendSet, call_backend
from .corpus import CandidatePool, PromptCandidate
from .errors import BackendError, EmptyPoolError

logger = logging.getLogger(__name__)

SCORE_WORKERS = 8


@dataclass(frozen=True)
class QualityScore:
    """Raw backend scores for one candidate, plus pool-normalized forms.

    The raw fields are filled by `score_quality`; the normalized fields
    stay None until `aggregate_and_cut` computes them within a pool.
    """

    candidate_id: str
    dnsmos_raw: float
    coherence_raw: float
    dnsmos_norm: float | None = None
    coherence_norm: float | None = None
    combined: float | None = None


@dataclass(frozen=True)
class QualityGateResult:
    kept: CandidatePool
    scores: tuple[QualityScore, ...]  # all scored candidates, combined desc
    n_percent: float


def score_quality(
    candidate: PromptCandidate,
    audio_bytes: bytes,
    backends: BackendSet,
    rubric: str,
) -> QualityScore:
    """Fetch raw quality and coherence scores for one candidate.

    The original file bytes go over the wire unmodified so the request is
    byte-stable across runs (re-encoding would perturb the cache key).
    """
    audio_b64 = base64.b64encode(audio_bytes).decode("ascii")
    quality = call_backend(
        BackendRole.QUALITY, {"audio_b64": audio_b64}, backends
    )
    coherence = call_backend(
        BackendRole.COHERENCE,
        {
            "text": candidate.transcript,
            "emotion": candidate.emotion.value,
            "rubric": rubric,
        },
        backends,
    )
    return QualityScore(
        candidate_id=candidate.id,
        dnsmos_raw=float(quality["score"]),
        coherence_raw=float(coherence["score"]),
    )


def score_pool(
    pool: CandidatePool,
    backends: BackendSet,
    rubric: str,
    *,
    max_workers: int = SCORE_WORKERS,
) -> list[QualityScore]:
    """Score every candidate in the pool, excluding ones whose backend
    calls fail after retries (logged, not fatal)."""

    def job(candidate: PromptCandidate) -> QualityScore | None:
        try:
            audio_bytes = candidate.audio_path.read_bytes()
            return score_quality(candidate, audio_bytes, backends, rubric)
        except (BackendError, OSError) as exc:
            logger.warning(
                "excluding %s from quality gate: %s", candidate.id, exc
            )
            return None

    with ThreadPoolExecutor(max_workers=max_workers) as pool_exec:
        results = list(pool_exec.map(job, pool.candidates))
    return [score for score in results if score is not None]


def minmax_normalize(values: list[float]) -> list[float]:
    """Map values onto [0, 1]; a constant column maps to all 0.5."""
    low, high = min(values), max(values)
    span = high - low
    if span == 0.0:
        return [0.5] * len(values)
    return [(v - low) / span for v in values]


def aggregate_and_cut(
    pool: CandidatePool, scores: list[QualityScore], n_percent: float
) -> QualityGateResult:
    """Normalize, sum, and keep the top ceil(n_percent/100 x scored)."""
    if not scores:
        raise EmptyPoolError("quality gate received no scored candidates")
    if not 0.0 < n_percent <= 100.0:
        raise ValueError(f"n_percent must be in (0, 100], got {n_percent}")
    known = set(pool.ids())
    for score in scores:
        if score.candidate_id not in known:
            raise ValueError(
                f"score for {score.candidate_id!r} does not belong to the pool"
            )

    dnsmos_norm = minmax_normalize([s.dnsmos_raw for s in scores])
    coherence_norm = minmax_normalize([s.coherence_raw for s in scores])
    enriched = [
        dataclasses.replace(
            score,
            dnsmos_norm=dn,
            coherence_norm=cn,
            combined=dn + cn,
        )
        for score, dn, cn in zip(scores, dnsmos_norm, coherence_norm)
    ]
    enriched.sort(key=lambda s: (-s.combined, s.candidate_id))

    keep_count = math.ceil(n_percent / 100.0 * len(enriched))
    kept_ids = {s.candidate_id for s in enriched[:keep_count]}
    kept = pool.subset(kept_ids)
    logger.info(
        "quality gate kept %d of %d candidates (top %.1f%%)",
        len(kept),
        len(scores),
        n_percent,
    )
    return QualityGateResult(
        kept=kept, scores=tuple(enriched), n_percent=n_percent
    )
