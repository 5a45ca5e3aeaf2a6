"""HTTP server that exposes the mock suite over the wire protocol.

Used by `emopro mock-serve` and by tests that need a real socket. Besides
the eight role endpoints it serves `GET /v1/health` (bound roles and model
ids) and `GET /v1/stats` (per-role wire call counters), which lets callers
prove that cached reruns perform zero wire calls.
"""

from __future__ import annotations

import json
import logging
import threading
from collections import Counter
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..errors import MockFixtureError, ProtocolError
from .mock import MockFixture, build_mock_suite
from .roles import PATH_TO_ROLE, make_envelope, parse_envelope, validate_request

logger = logging.getLogger(__name__)

HEALTH_PATH = "/v1/health"
STATS_PATH = "/v1/stats"


class MockWireServer:
    """Threaded HTTP server wrapping a mock suite; bind port 0 for ephemeral."""

    def __init__(self, fixture: MockFixture, host: str = "127.0.0.1", port: int = 0):
        self.fixture = fixture
        self.suite = build_mock_suite(fixture)
        self._counter_lock = threading.Lock()
        self._wire_calls: Counter = Counter()
        handler = _make_handler(self)
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self.host, self.port = self._httpd.server_address[:2]
        self._thread: threading.Thread | None = None

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def count_call(self, role_value: str) -> None:
        with self._counter_lock:
            self._wire_calls[role_value] += 1

    def stats(self) -> dict:
        with self._counter_lock:
            calls = dict(sorted(self._wire_calls.items()))
        return {"calls": calls, "total": sum(calls.values())}

    def health(self) -> dict:
        return {
            "status": "ok",
            "roles": {
                role.value: backend.model_id for role, backend in self.suite.items()
            },
        }

    def start(self) -> None:
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, name="mock-wire-server", daemon=True
        )
        self._thread.start()
        logger.info("mock wire server listening on %s", self.base_url)

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None

    def serve_forever(self) -> None:
        logger.info("mock wire server listening on %s", self.base_url)
        try:
            self._httpd.serve_forever()
        finally:
            self._httpd.server_close()


def _make_handler(server: MockWireServer) -> type:
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"
        # Responses go out in two small writes; without TCP_NODELAY the
        # second one stalls ~40 ms behind a delayed ACK on keep-alive
        # connections.
        disable_nagle_algorithm = True

        def log_message(self, fmt, *args):  # noqa: N802 - stdlib hook
            logger.debug("mock server: " + fmt, *args)

        def _reply(self, status: int, body: dict) -> None:
            data = json.dumps(body).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def do_GET(self):  # noqa: N802 - stdlib hook
            if self.path == HEALTH_PATH:
                self._reply(200, server.health())
            elif self.path == STATS_PATH:
                self._reply(200, server.stats())
            else:
                self._reply(404, {"error": f"unknown path {self.path!r}"})

        def do_POST(self):  # noqa: N802 - stdlib hook
            role = PATH_TO_ROLE.get(self.path)
            if role is None:
                self._reply(404, {"error": f"unknown path {self.path!r}"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                raw = self.rfile.read(length)
                data = json.loads(raw.decode("utf-8"))
            except (ValueError, UnicodeDecodeError):
                self._reply(400, {"error": "request body is not valid JSON"})
                return
            try:
                _, _, payload = parse_envelope(data, expect_role=role)
                validate_request(role, payload)
            except ProtocolError as exc:
                self._reply(400, {"error": str(exc)})
                return
            server.count_call(role.value)
            backend = server.suite[role]
            try:
                response = backend.handle(payload)
            except MockFixtureError as exc:
                self._reply(422, {"error": str(exc)})
                return
            except Exception as exc:  # pragma: no cover - defensive
                logger.exception("mock %s handler failed", role.value)
                self._reply(500, {"error": f"internal error: {exc}"})
                return
            self._reply(200, make_envelope(role, backend.model_id, response))

    return Handler
