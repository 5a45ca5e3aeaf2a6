"""Prompt corpus ingestion: manifest parsing, audio decoding, validation.

The manifest is JSON Lines, one record per line:
``{"id": ..., "speaker": ..., "emotion": ..., "audio": ..., "text": ...}``
with ``audio`` resolved relative to the manifest's directory.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator

import numpy as np

from . import wavio
from .errors import (
    AudioDecodeError,
    DuplicateIdError,
    EmptyPoolError,
    ManifestError,
)

logger = logging.getLogger(__name__)

MANIFEST_FIELDS = ("id", "speaker", "emotion", "audio", "text")

# Validation defaults; the corpus itself carries no bounds.
MIN_DURATION_S = 0.5
MAX_DURATION_S = 30.0
MAX_CLIPPING_FRACTION = 0.01

# One 16-bit step below full scale, so railed integer PCM counts as clipped.
CLIP_LEVEL = 1.0 - 1.0 / 32768.0


class EmotionLabel(str, Enum):
    """Closed set of emotion classes the corpus is annotated with."""

    HAPPY = "happy"
    SAD = "sad"
    ANGER = "anger"
    SURPRISED = "surprised"
    COMFORT = "comfort"

    @classmethod
    def parse(cls, raw: str) -> "EmotionLabel":
        try:
            return cls(raw.strip().lower())
        except ValueError:
            valid = ", ".join(sorted(member.value for member in cls))
            raise ValueError(
                f"unknown emotion label {raw!r}; expected one of: {valid}"
            ) from None


@dataclass(frozen=True)
class PromptCandidate:
    """One corpus entry: a reference utterance with transcript and labels."""

    id: str
    speaker_id: str
    emotion: EmotionLabel
    audio_path: Path
    transcript: str
    duration_s: float | None = None


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio, samples within [-1, 1]."""

    sample_rate_hz: int
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not 8000 <= self.sample_rate_hz <= 192000:
            raise ValueError(
                f"sample rate {self.sample_rate_hz} outside supported range 8000..192000"
            )
        if self.samples.ndim != 1 or self.samples.size < 1:
            raise ValueError("AudioBuffer requires a non-empty mono sample array")
        peak = float(np.max(np.abs(self.samples)))
        if peak > 1.0 + 1e-9:
            raise ValueError(f"sample magnitude {peak} exceeds 1.0")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class CandidatePool:
    """Candidates for exactly one (speaker, emotion) pair, in manifest order."""

    speaker_id: str
    emotion: EmotionLabel
    candidates: tuple[PromptCandidate, ...]

    def __post_init__(self):
        for candidate in self.candidates:
            if candidate.speaker_id != self.speaker_id:
                raise ValueError(
                    f"candidate {candidate.id!r} has speaker {candidate.speaker_id!r}, "
                    f"pool is scoped to {self.speaker_id!r}"
                )
            if candidate.emotion != self.emotion:
                raise ValueError(
                    f"candidate {candidate.id!r} has emotion {candidate.emotion.value!r}, "
                    f"pool is scoped to {self.emotion.value!r}"
                )

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self) -> Iterator[PromptCandidate]:
        return iter(self.candidates)

    def ids(self) -> tuple[str, ...]:
        return tuple(candidate.id for candidate in self.candidates)

    def subset(self, keep_ids) -> "CandidatePool":
        """Pool restricted to ``keep_ids``, preserving manifest order."""
        keep = set(keep_ids)
        return CandidatePool(
            self.speaker_id,
            self.emotion,
            tuple(c for c in self.candidates if c.id in keep),
        )


def _require_text_field(record: dict, name: str, lineno: int) -> str:
    value = record.get(name)
    if not isinstance(value, str) or not value.strip():
        raise ManifestError(f"field {name!r} must be a non-empty string", lineno)
    return value


def load_manifest(
    path: str | Path, speaker_id: str, emotion: EmotionLabel
) -> CandidatePool:
    """Load every record matching (speaker_id, emotion), in file order.

    Raises ManifestError (with line number) on malformed records,
    DuplicateIdError on a repeated id, EmptyPoolError when nothing matches.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")

    seen_ids: set[str] = set()
    matches: list[PromptCandidate] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"invalid JSON ({exc.msg})", lineno) from None
            if not isinstance(record, dict):
                raise ManifestError("record is not a JSON object", lineno)
            missing = [name for name in MANIFEST_FIELDS if name not in record]
            if missing:
                raise ManifestError(
                    f"missing field(s): {', '.join(missing)}", lineno
                )
            candidate_id = _require_text_field(record, "id", lineno)
            speaker = _require_text_field(record, "speaker", lineno)
            audio = _require_text_field(record, "audio", lineno)
            text = _require_text_field(record, "text", lineno)
            try:
                label = EmotionLabel.parse(_require_text_field(record, "emotion", lineno))
            except ValueError as exc:
                raise ManifestError(str(exc), lineno) from None

            if candidate_id in seen_ids:
                raise DuplicateIdError(
                    f"duplicate candidate id {candidate_id!r}", lineno
                )
            seen_ids.add(candidate_id)

            if speaker == speaker_id and label == emotion:
                matches.append(
                    PromptCandidate(
                        id=candidate_id,
                        speaker_id=speaker,
                        emotion=label,
                        audio_path=path.parent / audio,
                        transcript=text,
                    )
                )

    if not matches:
        raise EmptyPoolError(
            f"manifest {path} has no records for speaker {speaker_id!r} "
            f"with emotion {emotion.value!r}"
        )
    logger.info(
        "loaded %d candidates for (%s, %s) from %s",
        len(matches),
        speaker_id,
        emotion.value,
        path,
    )
    return CandidatePool(speaker_id, emotion, tuple(matches))


def decode_audio(candidate: PromptCandidate) -> AudioBuffer:
    """Decode the candidate's audio file to a mono buffer.

    Multi-channel audio is averaged to mono; values are clipped to [-1, 1].
    """
    rate, samples = wavio.read_wav(candidate.audio_path)
    if samples.shape[0] == 0:
        raise AudioDecodeError(f"zero-length audio in {candidate.audio_path}")
    mono = samples.mean(axis=1) if samples.shape[1] > 1 else samples[:, 0]
    mono = np.clip(mono, -1.0, 1.0)
    try:
        return AudioBuffer(sample_rate_hz=rate, samples=mono)
    except ValueError as exc:
        raise AudioDecodeError(f"{candidate.audio_path}: {exc}") from None


@dataclass(frozen=True)
class ValidationReport:
    """Report-only quality flags for one candidate."""

    candidate_id: str
    flags: tuple[str, ...]
    duration_s: float
    clipping_fraction: float

    @property
    def ok(self) -> bool:
        return not self.flags


def validate_candidate(
    candidate: PromptCandidate,
    audio: AudioBuffer,
    *,
    min_duration_s: float = MIN_DURATION_S,
    max_duration_s: float = MAX_DURATION_S,
    max_clipping_fraction: float = MAX_CLIPPING_FRACTION,
) -> ValidationReport:
    """Flag empty transcripts, out-of-range durations, and clipping."""
    flags: list[str] = []
    if not candidate.transcript.strip():
        flags.append("empty-transcript")
    duration = audio.duration_s
    if not min_duration_s <= duration <= max_duration_s:
        flags.append("duration-out-of-range")
    clipping = float(np.mean(np.abs(audio.samples) >= CLIP_LEVEL))
    if clipping > max_clipping_fraction:
        flags.append("clipping")
    return ValidationReport(
        candidate_id=candidate.id,
        flags=tuple(flags),
        duration_s=duration,
        clipping_fraction=clipping,
    )
