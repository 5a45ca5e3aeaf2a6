"""Static-stage orchestration and result persistence.

`run_static` chains manifest loading, pitch statistics, cluster
filtering, the quality gate, and the model-performance stage, then
persists everything needed for the dynamic stage and reporting into one
JSON result file. Any stage failure still persists the stages completed
so far, marked failed, before the error propagates.
"""

from __future__ import annotations

import datetime
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from filelock import FileLock

from .backends import BackendSet
from .clustering import (
    PitchClusterSelection,
    fit_kmeans,
    normalize_features,
    select_pitch_clusters,
)
from .config import SelectionConfig
from .corpus import CandidatePool, EmotionLabel, PromptCandidate, decode_audio, load_manifest
from .dynamic import DynamicChoice, select_prompt
from .errors import (
    AudioDecodeError,
    BackendError,
    EmoProError,
    EmptyPoolError,
    InsufficientVoicingError,
    PipelineError,
    ResultError,
)
from .model_perf import aggregate_perf, rank_and_select_topk, run_probes
from .pitch import PitchStats, compute_pitch_stats, estimate_f0_contour
from .quality_gate import aggregate_and_cut, score_pool

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

STATUS_COMPLETE = "complete"
STATUS_FAILED = "failed"


@dataclass
class StaticSelectionResult:
    """Everything the static stage decided, in JSON-serializable form."""

    config: dict[str, Any]
    config_hash: str
    manifest_path: str
    speaker_id: str
    emotion: str
    pool_ids: list[str] = field(default_factory=list)
    post_pitch_ids: list[str] = field(default_factory=list)
    post_quality_ids: list[str] = field(default_factory=list)
    top_k_ids: list[str] = field(default_factory=list)
    transcripts: dict[str, str] = field(default_factory=dict)
    pitch_stats: dict[str, dict[str, float]] = field(default_factory=dict)
    cluster: dict[str, Any] = field(default_factory=dict)
    quality_scores: dict[str, dict[str, float]] = field(default_factory=dict)
    perf: dict[str, dict[str, float]] = field(default_factory=dict)
    status: str = STATUS_FAILED
    failure: str | None = None
    created_at: str = ""
    elapsed_s: float = 0.0
    schema_version: int = SCHEMA_VERSION

    def check_containment(self) -> None:
        pool = set(self.pool_ids)
        post_pitch = set(self.post_pitch_ids)
        post_quality = set(self.post_quality_ids)
        top_k = set(self.top_k_ids)
        if not (top_k <= post_quality <= post_pitch <= pool):
            raise PipelineError(
                "stage containment violated: "
                f"{len(top_k)} top-k, {len(post_quality)} post-quality, "
                f"{len(post_pitch)} post-pitch, {len(pool)} pool"
            )


def save_result(result: StaticSelectionResult, path: Path | str) -> None:
    """Write the result atomically under an advisory lock."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lock = FileLock(str(path) + ".lock")
    with lock:
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(
            json.dumps(asdict(result), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        tmp.replace(path)
    logger.info("wrote result file %s (%s)", path, result.status)


def load_result(path: Path | str) -> StaticSelectionResult:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ResultError(f"result file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ResultError(f"result file {path} must hold a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ResultError(
            f"result file {path} has schema_version {version!r}; "
            f"this build reads version {SCHEMA_VERSION}"
        )
    try:
        return StaticSelectionResult(**data)
    except TypeError as exc:
        raise ResultError(f"result file {path} has unexpected fields: {exc}") from None


def _pitch_stats_for_pool(
    pool: CandidatePool, config: SelectionConfig
) -> dict[str, PitchStats]:
    """Per-candidate voiced-F0 statistics; unanalyzable candidates are
    dropped with a warning rather than failing the pool."""
    pitch_cfg = config.pitch_config()

    def job(candidate: PromptCandidate) -> tuple[str, PitchStats] | None:
        try:
            audio = decode_audio(candidate)
            contour = estimate_f0_contour(audio, pitch_cfg)
            return candidate.id, compute_pitch_stats(contour, pitch_cfg)
        except (AudioDecodeError, InsufficientVoicingError, OSError) as exc:
            logger.warning("excluding %s from pitch stage: %s", candidate.id, exc)
            return None

    with ThreadPoolExecutor(max_workers=config.max_in_flight) as executor:
        outcomes = list(executor.map(job, pool.candidates))
    return dict(item for item in outcomes if item is not None)


def _cluster_payload(selection: PitchClusterSelection) -> dict[str, Any]:
    model = selection.model
    return {
        "k": model.k,
        "seed": model.seed,
        "inertia": model.inertia,
        "inertia_history": list(model.inertia_history),
        "centroids": [list(map(float, row)) for row in model.centroids],
        "assignments": dict(sorted(model.assignments.items())),
        "ranked_clusters": list(selection.ranked_clusters),
        "kept_clusters": list(selection.kept_clusters),
        "polarity": selection.polarity.value,
    }


def run_static(
    config: SelectionConfig,
    manifest_path: Path | str,
    speaker_id: str,
    emotion: EmotionLabel,
    backends: BackendSet,
    out_path: Path | str,
) -> StaticSelectionResult:
    """Run the full static stage and persist the result file.

    On failure the partial result is persisted with status "failed" and
    the original error re-raised wrapped in `PipelineError`.
    """
    started = time.monotonic()
    result = StaticSelectionResult(
        config=config.to_dict(),
        config_hash=config.snapshot_hash,
        manifest_path=str(manifest_path),
        speaker_id=speaker_id,
        emotion=emotion.value,
        created_at=datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )
    try:
        pool = load_manifest(manifest_path, speaker_id, emotion)
        result.pool_ids = list(pool.ids())
        result.transcripts = {c.id: c.transcript for c in pool.candidates}

        stats = _pitch_stats_for_pool(pool, config)
        if not stats:
            raise EmptyPoolError("no candidate produced usable pitch statistics")
        result.pitch_stats = {
            cid: {
                "mean_hz": s.mean_hz,
                "variance_hz2": s.variance_hz2,
                "voiced_frames": s.voiced_frames,
                "total_frames": s.total_frames,
            }
            for cid, s in sorted(stats.items())
        }

        selection = select_pitch_clusters(
            pool,
            stats,
            num_clusters=config.num_clusters,
            m=config.m,
            seed=config.seed,
            polarity=config.polarity_for(emotion.value),
        )
        result.cluster = _cluster_payload(selection)
        post_pitch = selection.kept
        result.post_pitch_ids = list(post_pitch.ids())

        rubric = config.resolve_rubric()
        scores = score_pool(
            post_pitch, backends, rubric, max_workers=config.max_in_flight
        )
        gate = aggregate_and_cut(post_pitch, scores, config.n_percent)
        result.quality_scores = {
            s.candidate_id: {
                "dnsmos_raw": s.dnsmos_raw,
                "coherence_raw": s.coherence_raw,
                "dnsmos_norm": s.dnsmos_norm,
                "coherence_norm": s.coherence_norm,
                "combined": s.combined,
            }
            for s in gate.scores
        }
        post_quality = gate.kept
        result.post_quality_ids = list(post_quality.ids())

        probes = config.resolve_probe_texts()
        perfs = []
        for candidate in post_quality.candidates:
            try:
                probe_results = run_probes(
                    candidate, probes, backends, max_workers=config.max_in_flight
                )
                perfs.append(aggregate_perf(probe_results))
            except BackendError as exc:
                logger.warning(
                    "excluding %s from model-performance stage: %s",
                    candidate.id,
                    exc,
                )
        if not perfs:
            raise EmptyPoolError("every candidate failed the model-performance stage")
        top = rank_and_select_topk(perfs, config.k)
        result.perf = {
            p.candidate_id: {
                "mean_cer": p.mean_cer,
                "mean_spk_a": p.mean_spk_a,
                "mean_spk_b": p.mean_spk_b,
                "mean_emo": p.mean_emo,
                "rank_score": p.rank_score,
            }
            for p in top.ranked
        }
        result.top_k_ids = list(top.top_ids)

        result.check_containment()
        result.status = STATUS_COMPLETE
        result.elapsed_s = time.monotonic() - started
        save_result(result, out_path)
        logger.info(
            "static stage: %d -> %d -> %d -> %d candidates in %.2fs",
            len(result.pool_ids),
            len(result.post_pitch_ids),
            len(result.post_quality_ids),
            len(result.top_k_ids),
            result.elapsed_s,
        )
        return result
    except EmoProError as exc:
        result.status = STATUS_FAILED
        result.failure = str(exc)
        result.elapsed_s = time.monotonic() - started
        save_result(result, out_path)
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError(f"static stage failed: {exc}") from exc


def run_dynamic(
    result: StaticSelectionResult,
    target_text: str,
    backends: BackendSet,
) -> DynamicChoice:
    """Dynamic selection over a persisted static result."""
    if result.status != STATUS_COMPLETE:
        raise ResultError(
            f"result file is marked {result.status!r}"
            + (f": {result.failure}" if result.failure else "")
        )
    if not result.top_k_ids:
        raise EmptyPoolError("result file holds an empty top-k")
    candidates = []
    for cid in result.top_k_ids:
        transcript = result.transcripts.get(cid)
        if transcript is None:
            raise ResultError(f"result file lacks a transcript for {cid!r}")
        candidates.append((cid, transcript))
    return select_prompt(target_text, candidates, backends)
