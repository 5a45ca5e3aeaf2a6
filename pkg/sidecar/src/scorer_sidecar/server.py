"""One process, eight role endpoints, plus health."""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .bindings import RoleBinding, load_bindings
from .config import SidecarConfig
from .errors import ServeError, UpstreamError, WireError
from .wire import (
    HEALTH_PATH,
    PATH_TO_ROLE,
    make_envelope,
    parse_envelope,
    validate_request,
    validate_response,
)

logger = logging.getLogger(__name__)


class SidecarServer:
    """Threaded HTTP server over a set of role bindings."""

    def __init__(
        self,
        bindings: dict[str, RoleBinding],
        host: str = "127.0.0.1",
        port: int = 0,
        failures: dict[str, str] | None = None,
    ):
        self.bindings = bindings
        self.failures = dict(failures or {})
        handler = _make_handler(self)
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self.host, self.port = self._httpd.server_address[:2]
        self._thread: threading.Thread | None = None

    @property
    def base_url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def health(self) -> dict:
        return {
            "status": "ok",
            "roles": {
                role: binding.model_id for role, binding in self.bindings.items()
            },
        }

    def start(self) -> None:
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, name="scorer-sidecar", daemon=True
        )
        self._thread.start()
        logger.info("sidecar listening on %s", self.base_url)

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None

    def wait(self) -> None:
        """Block until the serving thread exits."""
        if self._thread is not None:
            self._thread.join()


def serve_scoring_api(config: SidecarConfig) -> SidecarServer:
    """Load the configured bindings and return a running server."""
    bindings, failures = load_bindings(config)
    server = SidecarServer(
        bindings, host=config.host, port=config.port, failures=failures
    )
    server.start()
    return server


def _make_handler(server: SidecarServer) -> type:
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"
        # Responses go out in two small writes; without TCP_NODELAY the
        # second one stalls ~40 ms behind a delayed ACK on keep-alive
        # connections.
        disable_nagle_algorithm = True

        def log_message(self, fmt, *args):  # noqa: N802 - stdlib hook
            logger.debug("sidecar: " + fmt, *args)

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
            else:
                self._reply(404, {"error": f"unknown path {self.path!r}"})

        def do_POST(self):  # noqa: N802 - stdlib hook
            role = PATH_TO_ROLE.get(self.path)
            if role is None:
                self._reply(404, {"error": f"unknown path {self.path!r}"})
                return
            try:
                length = int(self.headers.get("Content-Length", "0"))
                data = json.loads(self.rfile.read(length).decode("utf-8"))
            except (ValueError, UnicodeDecodeError):
                self._reply(400, {"error": "request body is not valid JSON"})
                return
            binding = server.bindings.get(role)
            if binding is None:
                self._reply(
                    503, {"error": f"role {role!r} is not bound on this server"}
                )
                return
            try:
                _, payload = parse_envelope(data, expect_role=role)
                validate_request(role, payload)
            except WireError as exc:
                self._reply(400, {"error": str(exc)})
                return
            try:
                response = binding.handler(payload)
            except ServeError as exc:
                self._reply(422, {"error": str(exc)})
                return
            except UpstreamError as exc:
                self._reply(502, {"error": str(exc)})
                return
            except Exception as exc:  # pragma: no cover - defensive
                logger.exception("%s handler failed", role)
                self._reply(500, {"error": f"internal error: {exc}"})
                return
            try:
                validate_response(role, payload, response)
            except WireError as exc:
                logger.error("%s produced an invalid response: %s", role, exc)
                self._reply(500, {"error": f"internal error: {exc}"})
                return
            self._reply(200, make_envelope(role, binding.model_id, response))

    return Handler
