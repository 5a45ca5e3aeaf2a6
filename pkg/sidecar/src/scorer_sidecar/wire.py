"""Server-side view of the scorer wire protocol.

Role names, endpoint paths, the request envelope, and per-role payload
schemas, matching the protocol reference shipped with the client package.
Requests and our own responses are both validated here; a handler whose
output fails validation is a server bug, not a client error.
"""

from __future__ import annotations

import base64
import binascii
import math
from typing import Any

from .errors import WireError

ROLES = (
    "tts",
    "asr",
    "speaker_embed_a",
    "speaker_embed_b",
    "emotion_embed",
    "quality",
    "coherence",
    "semantic",
)

EMBED_ROLES = frozenset({"speaker_embed_a", "speaker_embed_b", "emotion_embed"})

ROLE_PATHS = {
    "tts": "/v1/tts",
    "asr": "/v1/asr",
    "speaker_embed_a": "/v1/embed/speaker_a",
    "speaker_embed_b": "/v1/embed/speaker_b",
    "emotion_embed": "/v1/embed/emotion",
    "quality": "/v1/quality",
    "coherence": "/v1/coherence",
    "semantic": "/v1/semantic",
}

PATH_TO_ROLE = {path: role for role, path in ROLE_PATHS.items()}

HEALTH_PATH = "/v1/health"

QUALITY_RANGE = (1.0, 5.0)
UNIT_RANGE = (0.0, 1.0)


def _require_object(value: Any, what: str) -> dict:
    if not isinstance(value, dict):
        raise WireError(f"{what} is not a JSON object")
    return value


def _require_field(payload: dict, name: str, role: str, side: str) -> Any:
    if name not in payload:
        raise WireError(f"{role} {side} missing required field {name!r}")
    return payload[name]


def _require_text(
    payload: dict, name: str, role: str, side: str, *, non_empty: bool = False
) -> str:
    value = _require_field(payload, name, role, side)
    if not isinstance(value, str):
        raise WireError(f"{role} {side} field {name!r} must be a string")
    if non_empty and not value.strip():
        raise WireError(f"{role} {side} field {name!r} must be non-empty")
    return value


def _require_b64(payload: dict, name: str, role: str, side: str) -> str:
    value = _require_text(payload, name, role, side, non_empty=True)
    try:
        base64.b64decode(value, validate=True)
    except (binascii.Error, ValueError):
        raise WireError(f"{role} {side} field {name!r} is not valid base64") from None
    return value


def parse_envelope(data: Any, expect_role: str) -> tuple[str, dict]:
    """Return (model_id, payload) from a request envelope."""
    data = _require_object(data, "wire envelope")
    for name in ("role", "model_id", "payload"):
        if name not in data:
            raise WireError(f"wire envelope missing required field {name!r}")
    role = data["role"]
    if role not in ROLE_PATHS:
        raise WireError(f"unknown backend role {role!r}")
    if role != expect_role:
        raise WireError(
            f"envelope role {role!r} does not match endpoint {expect_role!r}"
        )
    model_id = data["model_id"]
    if not isinstance(model_id, str) or not model_id:
        raise WireError("wire envelope field 'model_id' must be a non-empty string")
    payload = _require_object(data["payload"], "envelope payload")
    return model_id, payload


def validate_request(role: str, payload: dict) -> dict:
    payload = _require_object(payload, f"{role} request payload")
    if role == "tts":
        _require_b64(payload, "prompt_audio_b64", role, "request")
        _require_text(payload, "prompt_text", role, "request")
        _require_text(payload, "target_text", role, "request", non_empty=True)
    elif role == "asr" or role in EMBED_ROLES or role == "quality":
        _require_b64(payload, "audio_b64", role, "request")
    elif role == "coherence":
        _require_text(payload, "text", role, "request", non_empty=True)
        _require_text(payload, "emotion", role, "request", non_empty=True)
        _require_text(payload, "rubric", role, "request", non_empty=True)
    elif role == "semantic":
        _require_text(payload, "target_text", role, "request", non_empty=True)
        texts = _require_field(payload, "candidate_texts", role, "request")
        if (
            not isinstance(texts, list)
            or not texts
            or not all(isinstance(t, str) for t in texts)
        ):
            raise WireError(
                f"{role} request field 'candidate_texts' must be a "
                "non-empty list of strings"
            )
    return payload


def _check_range(role: str, name: str, value: Any, bounds: tuple[float, float]) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise WireError(f"{role} response field {name!r} must be a number")
    low, high = bounds
    if not (math.isfinite(value) and low <= value <= high):
        raise WireError(
            f"{role} response field {name!r} value {value} outside "
            f"range [{low}, {high}]"
        )
    return float(value)


def validate_response(role: str, request: dict, response: Any) -> dict:
    """Check one of our own responses before it goes out on the wire."""
    response = _require_object(response, f"{role} response payload")
    if role == "tts":
        _require_b64(response, "audio_b64", role, "response")
    elif role == "asr":
        _require_text(response, "text", role, "response")
    elif role in EMBED_ROLES:
        values = response.get("embedding")
        if not isinstance(values, list) or not values:
            raise WireError(
                f"{role} response field 'embedding' must be a non-empty list"
            )
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise WireError(
                    f"{role} response field 'embedding' contains a "
                    "non-finite or non-numeric value"
                )
    elif role == "quality":
        _check_range(role, "score", response.get("score"), QUALITY_RANGE)
    elif role == "coherence":
        _check_range(role, "score", response.get("score"), UNIT_RANGE)
    elif role == "semantic":
        scores = response.get("scores")
        if not isinstance(scores, list):
            raise WireError(f"{role} response field 'scores' must be a list")
        expected = len(request.get("candidate_texts", []))
        if len(scores) != expected:
            raise WireError(
                f"{role} response has {len(scores)} scores for "
                f"{expected} candidate texts"
            )
        for score in scores:
            _check_range(role, "scores", score, UNIT_RANGE)
    return response


def make_envelope(role: str, model_id: str, payload: dict) -> dict:
    return {"role": role, "model_id": model_id, "payload": payload}
