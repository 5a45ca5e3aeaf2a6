"""Deterministic mock scorers driven by a JSON fixture.

The mocks coordinate through a metadata tag embedded in the WAV files they
exchange (see `wavio.TAG_CHUNK_ID`): mock TTS reads the prompt's tag and
writes a fresh tag onto its output, mock ASR echoes the tagged text back,
and the embedding mocks map the tagged speaker/emotion pair onto a fixed
basis vector. Scores come from fixture tables when present and otherwise
from a hash of (seed, role, key), so every value is reproducible without
any stored table.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .. import wavio
from ..errors import MockFixtureError
from .roles import EMBED_ROLES, BackendRole

logger = logging.getLogger(__name__)

_TWO_64 = float(2**64)


def stable_unit_float(seed: int, role: str, key: str) -> float:
    """Hash (seed, role, key) to a float in [0, 1); stable across runs."""
    digest = hashlib.sha256(f"{seed}|{role}|{key}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / _TWO_64


def _hash_rng(seed: int, role: str, key: str) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}|{role}|{key}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "big"))


@dataclass(frozen=True)
class MockFixture:
    """Declarative description of what the mock suite should return.

    Score tables are keyed by candidate id (quality), text (coherence),
    or "target||candidate" (semantic); ASR overrides map tagged text to
    the transcript the mock should emit instead. `strict` turns a table
    miss into an error instead of a procedural fallback.
    """

    seed: int = 0
    embed_dim: int = 32
    embed_keys: tuple[str, ...] = ()
    embed_epsilon: float = 0.0
    tts_mode: str = "tone"
    tts_sample_rate: int = 16000
    tts_duration_s: float = 0.5
    tts_pitch_range: tuple[float, float] = (120.0, 380.0)
    quality: dict[str, float] = field(default_factory=dict)
    coherence: dict[str, float] = field(default_factory=dict)
    semantic: dict[str, float] = field(default_factory=dict)
    asr: dict[str, str] = field(default_factory=dict)
    strict: bool = False

    def __post_init__(self) -> None:
        if self.embed_dim < 1:
            raise MockFixtureError("embed_dim must be at least 1")
        if len(self.embed_keys) > self.embed_dim:
            raise MockFixtureError(
                f"{len(self.embed_keys)} embed keys exceed embed_dim={self.embed_dim}"
            )
        if len(set(self.embed_keys)) != len(self.embed_keys):
            raise MockFixtureError("embed_keys contains duplicates")
        if self.tts_mode not in ("tone", "echo_prompt"):
            raise MockFixtureError(f"unknown tts_mode {self.tts_mode!r}")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MockFixture":
        known = {
            "seed", "embed_dim", "embed_keys", "embed_epsilon", "tts_mode",
            "tts_sample_rate", "tts_duration_s", "tts_pitch_range",
            "quality", "coherence", "semantic", "asr", "strict",
        }
        unknown = set(data) - known
        if unknown:
            raise MockFixtureError(f"unknown fixture keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "embed_keys" in kwargs:
            kwargs["embed_keys"] = tuple(kwargs["embed_keys"])
        if "tts_pitch_range" in kwargs:
            low, high = kwargs["tts_pitch_range"]
            kwargs["tts_pitch_range"] = (float(low), float(high))
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: Path | str) -> "MockFixture":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise MockFixtureError(f"fixture {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise MockFixtureError(f"fixture {path} must be a JSON object")
        return cls.from_dict(data)


def _decode_tag(payload: dict, field_name: str) -> tuple[bytes, dict]:
    raw = base64.b64decode(payload[field_name])
    tag = wavio.read_tag_bytes(raw)
    if tag is None:
        raise MockFixtureError(
            f"audio in {field_name!r} carries no mock metadata tag"
        )
    for key in ("speaker", "emotion", "pid", "text"):
        if key not in tag:
            raise MockFixtureError(f"mock metadata tag missing field {key!r}")
    return raw, tag


class MockBackend:
    """One mocked role: a callable handler plus a thread-safe call counter."""

    def __init__(
        self,
        role: BackendRole,
        fixture: MockFixture,
        handler: Callable[[dict], dict],
    ) -> None:
        self.role = role
        self.fixture = fixture
        self.model_id = f"mock-{role.value}-v1"
        self._handler = handler
        self._lock = threading.Lock()
        self._calls = 0

    @property
    def calls(self) -> int:
        with self._lock:
            return self._calls

    def handle(self, payload: dict) -> dict:
        with self._lock:
            self._calls += 1
        return self._handler(payload)


def _lookup(
    fixture: MockFixture,
    table: dict[str, float],
    role: str,
    key: str,
) -> float | None:
    if key in table:
        return float(table[key])
    if fixture.strict:
        raise MockFixtureError(f"strict fixture has no {role} entry for {key!r}")
    return None


def _tts_handler(fixture: MockFixture) -> Callable[[dict], dict]:
    def handle(payload: dict) -> dict:
        raw, tag = _decode_tag(payload, "prompt_audio_b64")
        if fixture.tts_mode == "echo_prompt":
            return {"audio_b64": payload["prompt_audio_b64"]}
        low, high = fixture.tts_pitch_range
        u = stable_unit_float(fixture.seed, "tts", str(tag["pid"]))
        pitch_hz = low + (high - low) * u
        rate = fixture.tts_sample_rate
        n = int(round(fixture.tts_duration_s * rate))
        t = np.arange(n, dtype=np.float64) / rate
        tone = 0.4 * np.sin(2.0 * np.pi * pitch_hz * t)
        out_tag = {
            "speaker": tag["speaker"],
            "emotion": tag["emotion"],
            "pid": tag["pid"],
            "text": payload["target_text"],
        }
        data = wavio.write_wav_bytes(rate, tone, tag=out_tag)
        return {"audio_b64": base64.b64encode(data).decode("ascii")}

    return handle


def _asr_handler(fixture: MockFixture) -> Callable[[dict], dict]:
    def handle(payload: dict) -> dict:
        _, tag = _decode_tag(payload, "audio_b64")
        text = str(tag["text"])
        return {"text": fixture.asr.get(text, text)}

    return handle


def _embed_handler(fixture: MockFixture, role: BackendRole) -> Callable[[dict], dict]:
    def handle(payload: dict) -> dict:
        _, tag = _decode_tag(payload, "audio_b64")
        key = f"{tag['speaker']}|{tag['emotion']}"
        try:
            index = fixture.embed_keys.index(key)
        except ValueError:
            raise MockFixtureError(
                f"embedding key {key!r} not listed in fixture embed_keys"
            ) from None
        vec = np.zeros(fixture.embed_dim, dtype=np.float64)
        vec[index] = 1.0
        if fixture.embed_epsilon > 0.0:
            rng = _hash_rng(
                fixture.seed, role.value, f"{tag['pid']}|{tag['text']}"
            )
            vec = vec + fixture.embed_epsilon * rng.standard_normal(fixture.embed_dim)
            vec = vec / np.linalg.norm(vec)
        return {"embedding": [float(v) for v in vec]}

    return handle


def _quality_handler(fixture: MockFixture) -> Callable[[dict], dict]:
    def handle(payload: dict) -> dict:
        _, tag = _decode_tag(payload, "audio_b64")
        key = str(tag["pid"])
        score = _lookup(fixture, fixture.quality, "quality", key)
        if score is None:
            u = stable_unit_float(fixture.seed, "quality", key)
            score = 1.0 + 4.0 * u
        return {"score": score}

    return handle


def _coherence_handler(fixture: MockFixture) -> Callable[[dict], dict]:
    def handle(payload: dict) -> dict:
        key = payload["text"]
        score = _lookup(fixture, fixture.coherence, "coherence", key)
        if score is None:
            score = stable_unit_float(
                fixture.seed, "coherence", f"{payload['emotion']}|{key}"
            )
        return {"score": score}

    return handle


def _semantic_handler(fixture: MockFixture) -> Callable[[dict], dict]:
    def handle(payload: dict) -> dict:
        target = payload["target_text"]
        scores = []
        for candidate in payload["candidate_texts"]:
            score = _lookup(
                fixture, fixture.semantic, "semantic", f"{target}||{candidate}"
            )
            if score is None:
                score = _lookup(fixture, fixture.semantic, "semantic", candidate)
            if score is None:
                score = stable_unit_float(
                    fixture.seed, "semantic", f"{target}||{candidate}"
                )
            scores.append(score)
        return {"scores": scores}

    return handle


def mock_backend_from_fixture(role: BackendRole, fixture: MockFixture) -> MockBackend:
    if role is BackendRole.TTS:
        handler = _tts_handler(fixture)
    elif role is BackendRole.ASR:
        handler = _asr_handler(fixture)
    elif role in EMBED_ROLES:
        handler = _embed_handler(fixture, role)
    elif role is BackendRole.QUALITY:
        handler = _quality_handler(fixture)
    elif role is BackendRole.COHERENCE:
        handler = _coherence_handler(fixture)
    elif role is BackendRole.SEMANTIC:
        handler = _semantic_handler(fixture)
    else:  # pragma: no cover - exhaustive over the enum
        raise MockFixtureError(f"no mock available for role {role!r}")
    return MockBackend(role, fixture, handler)


def build_mock_suite(fixture: MockFixture) -> dict[BackendRole, MockBackend]:
    return {role: mock_backend_from_fixture(role, fixture) for role in BackendRole}
