"""Conformance checks for any server implementing the wire protocol.

`run_conformance` probes a live base URL: it reads `/v1/health`, then for
every role either exercises the endpoint (bound roles must return valid,
in-range, deterministic responses) or confirms the server refuses it with
status 503 (unbound roles). Both the bundled mock server and external
scorer sidecars are held to the same checks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import requests

from ..errors import TransportError
from .cache import canonical_json
from .roles import (
    EMBED_ROLES,
    ROLE_PATHS,
    BackendRole,
    make_envelope,
    parse_envelope,
    validate_response,
)

logger = logging.getLogger(__name__)

PROBE_MODEL_ID = "contract-probe"


@dataclass(frozen=True)
class RoleCheck:
    role: BackendRole
    bound: bool
    model_id: str | None
    passed: bool
    failures: tuple[str, ...]


def _probe_payload(role: BackendRole, wav_b64: str) -> dict:
    if role is BackendRole.TTS:
        return {
            "prompt_audio_b64": wav_b64,
            "prompt_text": "a short reference clip",
            "target_text": "the quick brown fox jumps over the lazy dog",
        }
    if role is BackendRole.ASR or role in EMBED_ROLES or role is BackendRole.QUALITY:
        return {"audio_b64": wav_b64}
    if role is BackendRole.COHERENCE:
        return {
            "text": "what a wonderful surprise this turned out to be",
            "emotion": "happy",
            "rubric": "score 0 if the text contradicts the emotion, 1 if it "
            "clearly expresses it, 0.5 otherwise; respond with the number only",
        }
    return {
        "target_text": "the weather is lovely today",
        "candidate_texts": [
            "the weather is lovely today",
            "please close the door quietly",
        ],
    }


def fetch_health(base_url: str, timeout_s: float = 10.0) -> dict:
    url = base_url.rstrip("/") + "/v1/health"
    try:
        resp = requests.get(url, timeout=timeout_s)
    except requests.RequestException as exc:
        raise TransportError(f"health check failed: {exc}") from exc
    if resp.status_code != 200:
        raise TransportError(f"health check returned status {resp.status_code}")
    data = resp.json()
    if not isinstance(data, dict) or not isinstance(data.get("roles"), dict):
        raise TransportError("health response missing a 'roles' object")
    return data


def _check_bound_role(
    base_url: str, role: BackendRole, payload: dict, timeout_s: float
) -> list[str]:
    failures: list[str] = []
    url = base_url.rstrip("/") + ROLE_PATHS[role]
    envelope = make_envelope(role, PROBE_MODEL_ID, payload)
    bodies = []
    for attempt in ("first", "second"):
        try:
            resp = requests.post(url, json=envelope, timeout=timeout_s)
        except requests.RequestException as exc:
            failures.append(f"{attempt} request failed: {exc}")
            return failures
        if resp.status_code != 200:
            failures.append(
                f"{attempt} request returned status {resp.status_code}: "
                f"{resp.text[:200]}"
            )
            return failures
        try:
            reply_role, _, response = parse_envelope(resp.json(), expect_role=role)
            validate_response(role, payload, response)
        except Exception as exc:
            failures.append(f"{attempt} response invalid: {exc}")
            return failures
        bodies.append(canonical_json(response))
    if bodies[0] != bodies[1]:
        failures.append("responses to identical requests differ; role is not deterministic")
    return failures


def _check_unbound_role(
    base_url: str, role: BackendRole, payload: dict, timeout_s: float
) -> list[str]:
    url = base_url.rstrip("/") + ROLE_PATHS[role]
    envelope = make_envelope(role, PROBE_MODEL_ID, payload)
    try:
        resp = requests.post(url, json=envelope, timeout=timeout_s)
    except requests.RequestException as exc:
        return [f"request failed: {exc}"]
    if resp.status_code != 503:
        return [
            f"unbound role answered with status {resp.status_code}; expected 503"
        ]
    return []


def run_conformance(
    base_url: str,
    wav_b64: str,
    *,
    roles: tuple[BackendRole, ...] = tuple(BackendRole),
    timeout_s: float = 30.0,
) -> list[RoleCheck]:
    """Probe every role on a live server; returns one check per role."""
    health = fetch_health(base_url, timeout_s=timeout_s)
    bound = health["roles"]
    checks = []
    for role in roles:
        payload = _probe_payload(role, wav_b64)
        model_id = bound.get(role.value)
        if model_id is not None:
            failures = _check_bound_role(base_url, role, payload, timeout_s)
        else:
            failures = _check_unbound_role(base_url, role, payload, timeout_s)
        checks.append(
            RoleCheck(
                role=role,
                bound=model_id is not None,
                model_id=model_id,
                passed=not failures,
                failures=tuple(failures),
            )
        )
        logger.info(
            "contract %s: %s", role.value, "ok" if not failures else failures
        )
    return checks


def summarize(checks: list[RoleCheck]) -> str:
    lines = []
    for check in checks:
        state = "bound" if check.bound else "unbound"
        verdict = "pass" if check.passed else "FAIL " + "; ".join(check.failures)
        lines.append(f"{check.role.value:16s} {state:8s} {verdict}")
    return "\n".join(lines)
