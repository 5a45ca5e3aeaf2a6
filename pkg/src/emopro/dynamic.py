"""Dynamic selection: pick the prompt most relevant to the target text.

The static stage leaves an ordered Top-k. At synthesis time the semantic
backend scores the target text against each surviving transcript in one
batched call; the argmax wins, with ties (and backend failure) resolved
in favor of the static ordering.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .backends import BackendRole, BackendSet, call_backend
from .errors import BackendError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SemanticScore:
    candidate_id: str
    relevance: float  # in [0, 1], enforced at the wire


@dataclass(frozen=True)
class DynamicChoice:
    chosen_id: str
    scores: tuple[SemanticScore, ...]  # static order, one per candidate
    fallback: bool  # True when the backend failed and static Top-1 was used


def select_prompt(
    target_text: str,
    candidates: list[tuple[str, str]],
    backends: BackendSet,
) -> DynamicChoice:
    """Choose the most relevant (candidate_id, transcript) for target_text.

    `candidates` must be in static rank order; on a relevance tie the
    earlier entry wins, and on backend failure the first entry is chosen.
    """
    if not candidates:
        raise ValueError("dynamic selection needs at least one candidate")
    if not target_text.strip():
        raise ValueError("target text is empty")

    try:
        response = call_backend(
            BackendRole.SEMANTIC,
            {
                "target_text": target_text,
                "candidate_texts": [transcript for _, transcript in candidates],
            },
            backends,
        )
    except BackendError as exc:
        logger.warning(
            "semantic backend failed, falling back to static top-1: %s", exc
        )
        return DynamicChoice(
            chosen_id=candidates[0][0],
            scores=(),
            fallback=True,
        )

    scores = tuple(
        SemanticScore(candidate_id=cid, relevance=float(rel))
        for (cid, _), rel in zip(candidates, response["scores"])
    )
    best = max(range(len(scores)), key=lambda i: (scores[i].relevance, -i))
    logger.info(
        "dynamic selection chose %s (relevance %.4f) for %r",
        scores[best].candidate_id,
        scores[best].relevance,
        target_text[:60],
    )
    return DynamicChoice(chosen_id=scores[best].candidate_id, scores=scores, fallback=False)
