"""In-model performance evaluation (static stage, step 3).

Every surviving candidate is used as a prompt to synthesize a fixed set
of probe texts. Each synthesis is transcribed and embedded; character
error rate plus three cosine similarities (two speaker roles, one emotion
role, synthesized vs prompt audio) summarize how the candidate behaves
inside the actual TTS model. Candidates are then ordered by Borda
rank-sum over the four metric columns and the Top k survive.
"""

from __future__ import annotations

import base64
import dataclasses
import hashlib
import logging
import math
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .backends import BackendRole, BackendSet, call_backend
from .corpus import PromptCandidate
from .errors import BackendError
from .quality_gate import SCORE_WORKERS

logger = logging.getLogger(__name__)

PROBE_FAILURE_TOLERANCE = 0.25

# Embedding roles compared between synthesized and prompt audio.
_SIM_ROLES = (
    BackendRole.SPEAKER_EMBED_A,
    BackendRole.SPEAKER_EMBED_B,
    BackendRole.EMOTION_EMBED,
)


def normalize_for_cer(text: str) -> str:
    """NFKC, lowercase, and drop all whitespace and punctuation.

    Whitespace carries no information in languages written without word
    spacing, and punctuation is routinely normalized away by recognizers,
    so neither should count as an error.
    """
    text = unicodedata.normalize("NFKC", text).lower()
    return "".join(
        ch
        for ch in text
        if not ch.isspace() and not unicodedata.category(ch).startswith("P")
    )


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit costs, two-row dynamic program."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def compute_cer(reference: str, hypothesis: str) -> float:
    """Character error rate over normalized text; may exceed 1."""
    ref = normalize_for_cer(reference)
    hyp = normalize_for_cer(hypothesis)
    if not ref:
        raise ValueError("reference text is empty after normalization")
    return edit_distance(ref, hyp) / len(ref)


def cosine_similarity(a: list[float], b: list[float]) -> float:
    if len(a) != len(b):
        raise ValueError(f"embedding lengths differ: {len(a)} vs {len(b)}")
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))


@dataclass(frozen=True)
class ProbeTextSet:
    """Ordered probe texts plus a content hash for cache keying."""

    texts: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.texts:
            raise ValueError("probe text set is empty")
        for i, text in enumerate(self.texts):
            if not text.strip():
                raise ValueError(f"probe text {i} is empty")

    def __len__(self) -> int:
        return len(self.texts)

    @property
    def content_hash(self) -> str:
        digest = hashlib.sha256()
        digest.update(str(len(self.texts)).encode("ascii"))
        for text in self.texts:
            digest.update(b"\x00")
            digest.update(text.encode("utf-8"))
        return digest.hexdigest()

    @classmethod
    def from_file(cls, path: Path | str) -> "ProbeTextSet":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(tuple(line.strip() for line in lines if line.strip()))

    @classmethod
    def default(cls) -> "ProbeTextSet":
        text = (
            resources.files("emopro.assets")
            .joinpath("probe_texts.txt")
            .read_text(encoding="utf-8")
        )
        return cls(tuple(line.strip() for line in text.splitlines() if line.strip()))


@dataclass(frozen=True)
class ProbeResult:
    candidate_id: str
    probe_index: int
    probe_text: str
    synth_audio_ref: str  # "sha256:<hex>" of the synthesized WAV bytes
    asr_hypothesis: str
    cer: float
    spk_sim_a: float
    spk_sim_b: float
    emo_sim: float


@dataclass(frozen=True)
class CandidatePerf:
    candidate_id: str
    mean_cer: float
    mean_spk_a: float
    mean_spk_b: float
    mean_emo: float
    rank_score: int | None = None  # Borda rank-sum, filled by ranking


@dataclass(frozen=True)
class TopKResult:
    ranked: tuple[CandidatePerf, ...]  # every candidate, best first
    top_ids: tuple[str, ...]  # first min(k, len) ids from `ranked`
    k: int


def run_probes(
    candidate: PromptCandidate,
    probes: ProbeTextSet,
    backends: BackendSet,
    *,
    max_workers: int = SCORE_WORKERS,
) -> list[ProbeResult]:
    """Synthesize and score every probe text with this candidate as prompt.

    Individual probe failures are tolerated up to 25% of the set; past
    that the whole candidate is rejected with `BackendError`.
    """
    prompt_bytes = candidate.audio_path.read_bytes()
    prompt_b64 = base64.b64encode(prompt_bytes).decode("ascii")
    prompt_embeds = {
        role: call_backend(role, {"audio_b64": prompt_b64}, backends)["embedding"]
        for role in _SIM_ROLES
    }

    def job(item: tuple[int, str]) -> ProbeResult | None:
        index, probe_text = item
        try:
            synth = call_backend(
                BackendRole.TTS,
                {
                    "prompt_audio_b64": prompt_b64,
                    "prompt_text": candidate.transcript,
                    "target_text": probe_text,
                },
                backends,
            )
            synth_b64 = synth["audio_b64"]
            hypothesis = call_backend(
                BackendRole.ASR, {"audio_b64": synth_b64}, backends
            )["text"]
            sims = {}
            for role in _SIM_ROLES:
                embed = call_backend(
                    role, {"audio_b64": synth_b64}, backends
                )["embedding"]
                sims[role] = cosine_similarity(embed, prompt_embeds[role])
        except BackendError as exc:
            logger.warning(
                "probe %d failed for candidate %s: %s", index, candidate.id, exc
            )
            return None
        digest = hashlib.sha256(base64.b64decode(synth_b64)).hexdigest()
        return ProbeResult(
            candidate_id=candidate.id,
            probe_index=index,
            probe_text=probe_text,
            synth_audio_ref=f"sha256:{digest}",
            asr_hypothesis=hypothesis,
            cer=compute_cer(probe_text, hypothesis),
            spk_sim_a=sims[BackendRole.SPEAKER_EMBED_A],
            spk_sim_b=sims[BackendRole.SPEAKER_EMBED_B],
            emo_sim=sims[BackendRole.EMOTION_EMBED],
        )

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        outcomes = list(executor.map(job, enumerate(probes.texts)))
    results = [r for r in outcomes if r is not None]
    failed = len(outcomes) - len(results)
    if failed > PROBE_FAILURE_TOLERANCE * len(outcomes):
        raise BackendError(
            f"candidate {candidate.id}: {failed}/{len(outcomes)} probes failed, "
            f"over the {PROBE_FAILURE_TOLERANCE:.0%} tolerance"
        )
    return results


def aggregate_perf(results: list[ProbeResult]) -> CandidatePerf:
    if not results:
        raise ValueError("cannot aggregate zero probe results")
    ids = {r.candidate_id for r in results}
    if len(ids) != 1:
        raise ValueError(f"probe results span multiple candidates: {sorted(ids)}")
    n = len(results)
    return CandidatePerf(
        candidate_id=results[0].candidate_id,
        mean_cer=sum(r.cer for r in results) / n,
        mean_spk_a=sum(r.spk_sim_a for r in results) / n,
        mean_spk_b=sum(r.spk_sim_b for r in results) / n,
        mean_emo=sum(r.emo_sim for r in results) / n,
    )


def _column_ranks(values: list[float], *, descending: bool) -> list[int]:
    """Competition ranks: 1 + number of strictly better values (ties share)."""
    ranks = []
    for v in values:
        if descending:
            better = sum(1 for other in values if other > v)
        else:
            better = sum(1 for other in values if other < v)
        ranks.append(1 + better)
    return ranks


def rank_performances(perfs: list[CandidatePerf]) -> list[CandidatePerf]:
    """Fill rank_score = Borda rank-sum over the four metric columns."""
    if not perfs:
        raise ValueError("cannot rank zero candidates")
    columns = [
        _column_ranks([p.mean_cer for p in perfs], descending=False),
        _column_ranks([p.mean_spk_a for p in perfs], descending=True),
        _column_ranks([p.mean_spk_b for p in perfs], descending=True),
        _column_ranks([p.mean_emo for p in perfs], descending=True),
    ]
    ranked = [
        dataclasses.replace(perf, rank_score=sum(col[i] for col in columns))
        for i, perf in enumerate(perfs)
    ]
    ranked.sort(key=lambda p: (p.rank_score, p.mean_cer, p.candidate_id))
    return ranked


def rank_and_select_topk(perfs: list[CandidatePerf], k: int) -> TopKResult:
    """Order by rank-sum (ties: lower mean CER, then lower id), keep Top k."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    ranked = rank_performances(perfs)
    top = ranked[: min(k, len(ranked))]
    logger.info(
        "model-performance stage kept %d of %d candidates", len(top), len(ranked)
    )
    return TopKResult(
        ranked=tuple(ranked),
        top_ids=tuple(p.candidate_id for p in top),
        k=k,
    )
