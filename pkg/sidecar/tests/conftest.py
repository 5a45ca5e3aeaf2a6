import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest
import requests

from scorer_sidecar import SidecarConfig, serve_scoring_api
from scorer_sidecar.audio import encode_wav_b64
from scorer_sidecar.wire import ROLE_PATHS, make_envelope

RATE = 16000


def sine(freq_hz: float, duration_s: float = 0.5, rate: int = RATE, amp: float = 0.3):
    t = np.arange(int(round(duration_s * rate))) / rate
    return amp * np.sin(2.0 * np.pi * freq_hz * t)


def white_noise(seed: int = 0, duration_s: float = 0.5, rate: int = RATE, amp: float = 0.5):
    rng = np.random.default_rng(seed)
    return amp * rng.uniform(-1.0, 1.0, int(round(duration_s * rate)))


def post_role(base_url: str, role: str, payload: dict, model_id: str = "any"):
    """POST a well-formed envelope to a role endpoint; returns the response."""
    return requests.post(
        base_url + ROLE_PATHS[role],
        json=make_envelope(role, model_id, payload),
        timeout=10,
    )


def call_role(base_url: str, role: str, payload: dict) -> dict:
    resp = post_role(base_url, role, payload)
    assert resp.status_code == 200, f"{role}: {resp.status_code} {resp.text}"
    return resp.json()["payload"]


@pytest.fixture(scope="session")
def tone_b64():
    return encode_wav_b64(RATE, sine(220.0))


@pytest.fixture(scope="session")
def noise_b64():
    return encode_wav_b64(RATE, white_noise())


@pytest.fixture(scope="session")
def server():
    """A sidecar with the default bindings on an ephemeral port."""
    srv = serve_scoring_api(SidecarConfig(port=0))
    yield srv
    srv.stop()


class ScriptedUpstream:
    """A one-endpoint HTTP stub standing in for a remote judge API.

    Each POST answers with the current (status, body) script and records
    the request JSON for inspection.
    """

    def __init__(self):
        self.status = 200
        self.body: object = {"score": 0.5}
        self.requests: list[dict] = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"
            disable_nagle_algorithm = True

            def log_message(self, fmt, *args):
                pass

            def do_POST(self):
                length = int(self.headers.get("Content-Length", "0"))
                outer.requests.append(json.loads(self.rfile.read(length)))
                if isinstance(outer.body, str):
                    data = outer.body.encode("utf-8")
                else:
                    data = json.dumps(outer.body).encode("utf-8")
                self.send_response(outer.status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self._httpd.server_address[1]}/score"
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, daemon=True
        )
        self._thread.start()

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5.0)


@pytest.fixture
def upstream():
    stub = ScriptedUpstream()
    yield stub
    stub.stop()
