"""Wire protocol, caching, mocks, and client for the scorer backends."""

from .cache import CacheRecord, RequestCache, canonical_json, request_key
from .client import BackendSet, EndpointConfig, call_backend
from .contract import RoleCheck, fetch_health, run_conformance, summarize
from .mock import (
    MockBackend,
    MockFixture,
    build_mock_suite,
    mock_backend_from_fixture,
    stable_unit_float,
)
from .roles import (
    EMBED_ROLES,
    PATH_TO_ROLE,
    ROLE_PATHS,
    BackendRole,
    make_envelope,
    parse_envelope,
    validate_request,
    validate_response,
)
from .server import MockWireServer

__all__ = [
    "BackendRole",
    "BackendSet",
    "CacheRecord",
    "EMBED_ROLES",
    "EndpointConfig",
    "MockBackend",
    "MockFixture",
    "MockWireServer",
    "PATH_TO_ROLE",
    "ROLE_PATHS",
    "RequestCache",
    "RoleCheck",
    "build_mock_suite",
    "call_backend",
    "canonical_json",
    "fetch_health",
    "make_envelope",
    "mock_backend_from_fixture",
    "parse_envelope",
    "request_key",
    "run_conformance",
    "stable_unit_float",
    "summarize",
    "validate_request",
    "validate_response",
]
