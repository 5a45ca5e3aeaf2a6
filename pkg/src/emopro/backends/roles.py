"""Scorer roles and their wire schemas.

Every neural capability the pipeline consumes hides behind one of eight
roles. A request is an envelope ``{"role", "model_id", "payload"}`` POSTed
to the role's endpoint; the response uses the same envelope shape. Payload
schemas and value ranges are validated on both sides of the wire.
"""

from __future__ import annotations

import base64
import binascii
import math
from enum import Enum
from typing import Any

from ..errors import ProtocolError


class BackendRole(str, Enum):
    TTS = "tts"
    ASR = "asr"
    SPEAKER_EMBED_A = "speaker_embed_a"
    SPEAKER_EMBED_B = "speaker_embed_b"
    EMOTION_EMBED = "emotion_embed"
    QUALITY = "quality"
    COHERENCE = "coherence"
    SEMANTIC = "semantic"


EMBED_ROLES = frozenset(
    {BackendRole.SPEAKER_EMBED_A, BackendRole.SPEAKER_EMBED_B, BackendRole.EMOTION_EMBED}
)

ROLE_PATHS: dict[BackendRole, str] = {
    BackendRole.TTS: "/v1/tts",
    BackendRole.ASR: "/v1/asr",
    BackendRole.SPEAKER_EMBED_A: "/v1/embed/speaker_a",
    BackendRole.SPEAKER_EMBED_B: "/v1/embed/speaker_b",
    BackendRole.EMOTION_EMBED: "/v1/embed/emotion",
    BackendRole.QUALITY: "/v1/quality",
    BackendRole.COHERENCE: "/v1/coherence",
    BackendRole.SEMANTIC: "/v1/semantic",
}

PATH_TO_ROLE = {path: role for role, path in ROLE_PATHS.items()}

# Declared score ranges, enforced on every response.
QUALITY_RANGE = (1.0, 5.0)
UNIT_RANGE = (0.0, 1.0)


def _require_object(value: Any, what: str) -> dict:
    if not isinstance(value, dict):
        raise ProtocolError(f"{what} is not a JSON object")
    return value


def _require_field(payload: dict, name: str, role: BackendRole, side: str) -> Any:
    if name not in payload:
        raise ProtocolError(
            f"{role.value} {side} missing required field {name!r}"
        )
    return payload[name]


def _require_text(
    payload: dict, name: str, role: BackendRole, side: str, *, non_empty: bool = False
) -> str:
    value = _require_field(payload, name, role, side)
    if not isinstance(value, str):
        raise ProtocolError(f"{role.value} {side} field {name!r} must be a string")
    if non_empty and not value.strip():
        raise ProtocolError(f"{role.value} {side} field {name!r} must be non-empty")
    return value


def _require_number(payload: dict, name: str, role: BackendRole, side: str) -> float:
    value = _require_field(payload, name, role, side)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError(f"{role.value} {side} field {name!r} must be a number")
    return float(value)


def _require_b64(payload: dict, name: str, role: BackendRole, side: str) -> str:
    value = _require_text(payload, name, role, side, non_empty=True)
    try:
        base64.b64decode(value, validate=True)
    except (binascii.Error, ValueError):
        raise ProtocolError(
            f"{role.value} {side} field {name!r} is not valid base64"
        ) from None
    return value


def _check_range(
    role: BackendRole, name: str, value: float, bounds: tuple[float, float]
) -> None:
    low, high = bounds
    if not (math.isfinite(value) and low <= value <= high):
        raise ProtocolError(
            f"{role.value} response field {name!r} value {value} outside "
            f"range [{low}, {high}]"
        )


def validate_request(role: BackendRole, payload: Any) -> dict:
    """Check a request payload against the role schema; returns the payload."""
    payload = _require_object(payload, f"{role.value} request payload")
    if role is BackendRole.TTS:
        _require_b64(payload, "prompt_audio_b64", role, "request")
        _require_text(payload, "prompt_text", role, "request")
        _require_text(payload, "target_text", role, "request", non_empty=True)
    elif role is BackendRole.ASR or role in EMBED_ROLES or role is BackendRole.QUALITY:
        _require_b64(payload, "audio_b64", role, "request")
    elif role is BackendRole.COHERENCE:
        _require_text(payload, "text", role, "request", non_empty=True)
        _require_text(payload, "emotion", role, "request", non_empty=True)
        _require_text(payload, "rubric", role, "request", non_empty=True)
    elif role is BackendRole.SEMANTIC:
        _require_text(payload, "target_text", role, "request", non_empty=True)
        texts = _require_field(payload, "candidate_texts", role, "request")
        if (
            not isinstance(texts, list)
            or not texts
            or not all(isinstance(t, str) for t in texts)
        ):
            raise ProtocolError(
                f"{role.value} request field 'candidate_texts' must be a "
                "non-empty list of strings"
            )
    return payload


def validate_response(role: BackendRole, request: dict, response: Any) -> dict:
    """Check a response payload against the role schema and declared ranges."""
    response = _require_object(response, f"{role.value} response payload")
    if role is BackendRole.TTS:
        _require_b64(response, "audio_b64", role, "response")
    elif role is BackendRole.ASR:
        _require_text(response, "text", role, "response")
    elif role in EMBED_ROLES:
        values = _require_field(response, "embedding", role, "response")
        if not isinstance(values, list) or not values:
            raise ProtocolError(
                f"{role.value} response field 'embedding' must be a non-empty list"
            )
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ProtocolError(
                    f"{role.value} response field 'embedding' contains a "
                    "non-finite or non-numeric value"
                )
    elif role is BackendRole.QUALITY:
        _check_range(role, "score", _require_number(response, "score", role, "response"), QUALITY_RANGE)
    elif role is BackendRole.COHERENCE:
        _check_range(role, "score", _require_number(response, "score", role, "response"), UNIT_RANGE)
    elif role is BackendRole.SEMANTIC:
        scores = _require_field(response, "scores", role, "response")
        if not isinstance(scores, list):
            raise ProtocolError(f"{role.value} response field 'scores' must be a list")
        expected = len(request.get("candidate_texts", []))
        if len(scores) != expected:
            raise ProtocolError(
                f"{role.value} response has {len(scores)} scores for "
                f"{expected} candidate texts"
            )
        for score in scores:
            if isinstance(score, bool) or not isinstance(score, (int, float)):
                raise ProtocolError(
                    f"{role.value} response field 'scores' must contain numbers"
                )
            _check_range(role, "scores", float(score), UNIT_RANGE)
    return response


def make_envelope(role: BackendRole, model_id: str, payload: dict) -> dict:
    return {"role": role.value, "model_id": model_id, "payload": payload}


def parse_envelope(data: Any, *, expect_role: BackendRole | None = None) -> tuple[BackendRole, str, dict]:
    data = _require_object(data, "wire envelope")
    for name in ("role", "model_id", "payload"):
        if name not in data:
            raise ProtocolError(f"wire envelope missing required field {name!r}")
    try:
        role = BackendRole(data["role"])
    except ValueError:
        raise ProtocolError(f"unknown backend role {data['role']!r}") from None
    if expect_role is not None and role is not expect_role:
        raise ProtocolError(
            f"envelope role {role.value!r} does not match endpoint "
            f"{expect_role.value!r}"
        )
    model_id = data["model_id"]
    if not isinstance(model_id, str) or not model_id:
        raise ProtocolError("wire envelope field 'model_id' must be a non-empty string")
    payload = _require_object(data["payload"], "envelope payload")
    return role, model_id, payload
