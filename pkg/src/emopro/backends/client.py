"""HTTP client for scorer backends, with caching and in-process mocks.

`call_backend` is the single entry point the pipeline uses for every
scorer invocation. It validates the request, consults the cache, then
either dispatches to an in-process mock or POSTs the envelope to the
configured endpoint, validates the response, and caches it. A semaphore
caps concurrent in-flight requests across threads.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field

import requests

from ..errors import ConfigError, ProtocolError, TransportError
from .cache import RequestCache, canonical_json, request_key
from .mock import MockBackend
from .roles import (
    ROLE_PATHS,
    BackendRole,
    make_envelope,
    parse_envelope,
    validate_request,
    validate_response,
)

logger = logging.getLogger(__name__)

MAX_IN_FLIGHT = 8

# One Session per thread: connection reuse without sharing a Session
# across threads (requests does not guarantee that is safe).
_local = threading.local()


def _session() -> requests.Session:
    session = getattr(_local, "session", None)
    if session is None:
        session = requests.Session()
        _local.session = session
    return session


@dataclass(frozen=True)
class EndpointConfig:
    """Where one backend role lives and how to talk to it."""

    base_url: str
    model_id: str = "default"
    timeout_s: float = 30.0
    retries: int = 3
    backoff_s: float = 0.25
    api_token: str | None = None

    def __post_init__(self) -> None:
        if not self.base_url.startswith(("http://", "https://")):
            raise ConfigError(f"endpoint base_url {self.base_url!r} must be http(s)")
        if self.retries < 1:
            raise ConfigError("endpoint retries must be at least 1")

    def url_for(self, role: BackendRole) -> str:
        return self.base_url.rstrip("/") + ROLE_PATHS[role]


@dataclass
class BackendSet:
    """The full complement of scorers the pipeline may call.

    Each role resolves to an in-process mock (preferred when present) or
    an HTTP endpoint. Roles bound to neither raise `ConfigError` on use.
    """

    endpoints: dict[BackendRole, EndpointConfig] = field(default_factory=dict)
    mocks: dict[BackendRole, MockBackend] = field(default_factory=dict)
    cache: RequestCache | None = None
    max_in_flight: int = MAX_IN_FLIGHT

    def __post_init__(self) -> None:
        if self.max_in_flight < 1:
            raise ConfigError("max_in_flight must be at least 1")
        self._gate = threading.Semaphore(self.max_in_flight)

    def model_id_for(self, role: BackendRole) -> str:
        if role in self.mocks:
            return self.mocks[role].model_id
        if role in self.endpoints:
            return self.endpoints[role].model_id
        raise ConfigError(f"no backend configured for role {role.value!r}")

    @classmethod
    def from_mocks(
        cls,
        mocks: dict[BackendRole, MockBackend],
        cache: RequestCache | None = None,
    ) -> "BackendSet":
        return cls(mocks=dict(mocks), cache=cache)

    @classmethod
    def from_base_url(
        cls,
        base_url: str,
        cache: RequestCache | None = None,
        *,
        model_id: str = "default",
        timeout_s: float = 30.0,
        api_token: str | None = None,
    ) -> "BackendSet":
        endpoint = EndpointConfig(
            base_url=base_url,
            model_id=model_id,
            timeout_s=timeout_s,
            api_token=api_token,
        )
        return cls(endpoints={role: endpoint for role in BackendRole}, cache=cache)


def _post_with_retries(
    role: BackendRole, endpoint: EndpointConfig, envelope: dict
) -> dict:
    url = endpoint.url_for(role)
    headers = {"Content-Type": "application/json"}
    if endpoint.api_token:
        headers["Authorization"] = f"Bearer {endpoint.api_token}"
    last_error: Exception | None = None
    for attempt in range(endpoint.retries):
        if attempt:
            time.sleep(endpoint.backoff_s * (2 ** (attempt - 1)))
        try:
            resp = _session().post(
                url, json=envelope, headers=headers, timeout=endpoint.timeout_s
            )
        except requests.RequestException as exc:
            last_error = exc
            logger.warning(
                "%s request attempt %d failed: %s", role.value, attempt + 1, exc
            )
            continue
        if resp.status_code >= 500:
            last_error = TransportError(
                f"{role.value} endpoint returned {resp.status_code}"
            )
            logger.warning(
                "%s request attempt %d got status %d",
                role.value,
                attempt + 1,
                resp.status_code,
            )
            continue
        if resp.status_code != 200:
            detail = resp.text[:200]
            raise ProtocolError(
                f"{role.value} endpoint rejected request with status "
                f"{resp.status_code}: {detail}"
            )
        try:
            return resp.json()
        except json.JSONDecodeError:
            raise ProtocolError(
                f"{role.value} endpoint returned a non-JSON body"
            ) from None
    raise TransportError(
        f"{role.value} endpoint unreachable after {endpoint.retries} attempts: "
        f"{last_error}"
    )


def call_backend(role: BackendRole, payload: dict, backends: BackendSet) -> dict:
    """Invoke one scorer role and return its validated response payload."""
    validate_request(role, payload)
    model_id = backends.model_id_for(role)

    key = None
    if backends.cache is not None:
        key = request_key(role, model_id, payload)
        hit = backends.cache.get(role, key)
        if hit is not None:
            try:
                response = json.loads(hit.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                raise ProtocolError(
                    f"cache entry for {role.value} key {key[:12]} is corrupt"
                ) from None
            return validate_response(role, payload, response)

    with backends._gate:
        if role in backends.mocks:
            response = backends.mocks[role].handle(payload)
        else:
            envelope = make_envelope(role, model_id, payload)
            data = _post_with_retries(role, backends.endpoints[role], envelope)
            reply_role, _, response = parse_envelope(data, expect_role=role)
            assert reply_role is role

    response = validate_response(role, payload, response)
    if backends.cache is not None and key is not None:
        backends.cache.put(role, key, canonical_json(response))
    return response
