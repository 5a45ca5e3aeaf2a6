"""Synthetic prompt corpora with known pitch structure.

Builds pools of pure-tone WAV candidates arranged in tight "blobs": blob
b has mean F0 = base + step*b and a two-segment frequency switch whose
half-range grows with b, so both pitch mean and pitch variance increase
strictly with the blob index. That makes the cluster polarity ranking
known by construction, which is what the end-to-end fixtures rely on.

Each candidate gets a unique transcript and a metadata tag readable by
the mock backends; a matching mock fixture file is written next to the
manifest.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import wavio
from .corpus import EmotionLabel

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240601

_SUBJECTS = (
    "the morning train",
    "a quiet library",
    "the harbor wind",
    "an old clock tower",
    "the garden gate",
    "a narrow bridge",
    "the village market",
    "a distant lighthouse",
    "the river path",
    "an open meadow",
)

_PREDICATES = (
    "waits beyond the last hill",
    "carries the scent of rain",
    "stands against the evening sky",
    "remembers every passing year",
    "opens onto a field of clover",
    "echoes with familiar footsteps",
    "glows under the first frost",
    "keeps its own slow time",
    "turns silver in the moonlight",
    "leans into the northern wind",
    "gathers leaves along its edge",
    "hums with early summer bees",
    "holds the warmth of afternoon",
    "marks the end of the old road",
    "watches over the sleeping town",
    "winds between the willow trees",
    "rests beneath a woolen fog",
    "brightens when the swallows return",
    "shelters a family of wrens",
    "fades into the violet dusk",
)


def transcript_for(blob: int, member: int) -> str:
    """Unique sentence per (blob, member); stable across runs."""
    subject = _SUBJECTS[blob % len(_SUBJECTS)]
    predicate = _PREDICATES[member % len(_PREDICATES)]
    return f"{subject[0].upper()}{subject[1:]} {predicate}."


def two_segment_tone(
    sample_rate: int,
    duration_s: float,
    mean_hz: float,
    delta_hz: float,
    amplitude: float = 0.4,
) -> np.ndarray:
    """Sine at mean-delta for the first half, mean+delta for the second.

    Phase is continuous across the switch, so the clip has no click; the
    F0 contour mean is ~mean_hz and its population variance ~delta_hz^2.
    """
    n = int(round(duration_s * sample_rate))
    half = n // 2
    freq = np.full(n, mean_hz + delta_hz, dtype=np.float64)
    freq[:half] = mean_hz - delta_hz
    phase = 2.0 * np.pi * np.cumsum(freq) / sample_rate
    return amplitude * np.sin(phase)


@dataclass(frozen=True)
class SyntheticCorpus:
    root: Path
    manifest_path: Path
    fixture_path: Path
    speaker_id: str
    emotion: EmotionLabel
    ids_by_blob: tuple[tuple[str, ...], ...]  # blob index -> candidate ids

    @property
    def all_ids(self) -> tuple[str, ...]:
        return tuple(cid for blob in self.ids_by_blob for cid in blob)


def build_corpus(
    root: Path | str,
    *,
    speaker_id: str = "spk1",
    emotion: EmotionLabel = EmotionLabel.HAPPY,
    num_blobs: int = 10,
    per_blob: int = 20,
    base_hz: float = 120.0,
    step_hz: float = 30.0,
    base_delta_hz: float = 2.0,
    step_delta_hz: float = 2.0,
    sample_rate: int = 16000,
    duration_s: float = 0.8,
    seed: int = DEFAULT_SEED,
    embed_epsilon: float = 0.05,
) -> SyntheticCorpus:
    """Write WAVs, a manifest, and a mock fixture under `root`."""
    root = Path(root)
    audio_dir = root / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    rows = []
    ids_by_blob: list[tuple[str, ...]] = []
    index = 0
    for blob in range(num_blobs):
        mean_hz = base_hz + step_hz * blob
        delta_hz = base_delta_hz + step_delta_hz * blob
        blob_ids = []
        for member in range(per_blob):
            pid = f"p{index:03d}"
            text = transcript_for(blob, member)
            # Small per-candidate jitter keeps blobs tight but distinct.
            cand_mean = mean_hz + rng.uniform(-0.5, 0.5)
            cand_delta = delta_hz + rng.uniform(-0.1, 0.1)
            tone = two_segment_tone(sample_rate, duration_s, cand_mean, cand_delta)
            tag = {
                "speaker": speaker_id,
                "emotion": emotion.value,
                "pid": pid,
                "text": text,
            }
            wavio.write_wav(audio_dir / f"{pid}.wav", sample_rate, tone, tag=tag)
            rows.append(
                {
                    "id": pid,
                    "speaker": speaker_id,
                    "emotion": emotion.value,
                    "audio": f"audio/{pid}.wav",
                    "text": text,
                }
            )
            blob_ids.append(pid)
            index += 1
        ids_by_blob.append(tuple(blob_ids))

    manifest_path = root / "manifest.jsonl"
    with manifest_path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    fixture_path = root / "fixture.json"
    fixture = {
        "seed": seed,
        "embed_dim": 8,
        "embed_keys": [f"{speaker_id}|{emotion.value}"],
        "embed_epsilon": embed_epsilon,
        "tts_mode": "tone",
        "tts_sample_rate": sample_rate,
    }
    fixture_path.write_text(
        json.dumps(fixture, indent=2) + "\n", encoding="utf-8"
    )
    logger.info(
        "built synthetic corpus: %d candidates in %d blobs under %s",
        index,
        num_blobs,
        root,
    )
    return SyntheticCorpus(
        root=root,
        manifest_path=manifest_path,
        fixture_path=fixture_path,
        speaker_id=speaker_id,
        emotion=emotion,
        ids_by_blob=tuple(ids_by_blob),
    )
