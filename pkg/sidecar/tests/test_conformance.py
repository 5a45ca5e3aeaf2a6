"""Cross-package checks: the selection engine's own client and contract
suite run against a live sidecar, over real HTTP only."""

import base64

import numpy as np
import pytest

emopro_backends = pytest.importorskip(
    "emopro.backends", reason="the selection engine package is not installed"
)

from emopro import wavio  # noqa: E402
from emopro.backends import BackendRole, BackendSet, RequestCache  # noqa: E402
from emopro.backends.client import call_backend  # noqa: E402
from emopro.backends.contract import run_conformance, summarize  # noqa: E402

from scorer_sidecar import SidecarConfig, serve_scoring_api  # noqa: E402

from .conftest import RATE, call_role, sine  # noqa: E402


@pytest.fixture(scope="module")
def probe_wav_b64():
    return base64.b64encode(wavio.write_wav_bytes(RATE, sine(220.0, 0.6))).decode(
        "ascii"
    )


def test_contract_suite_passes_against_live_sidecar(server, probe_wav_b64):
    checks = run_conformance(server.base_url, probe_wav_b64)
    assert [c.role for c in checks] == [
        "tts",
        "asr",
        "speaker_embed_a",
        "speaker_embed_b",
        "emotion_embed",
        "quality",
        "coherence",
        "semantic",
    ]
    for check in checks:
        assert check.passed, f"{check.role}: {check.failures}"
        assert check.bound == (check.role != "asr")
    rendered = summarize(checks)
    assert "FAIL" not in rendered
    assert "asr" in rendered


def test_health_model_ids_match_conformance_report(server, probe_wav_b64):
    checks = run_conformance(server.base_url, probe_wav_b64)
    by_role = {c.role: c for c in checks}
    for role, binding in server.bindings.items():
        assert by_role[role].model_id == binding.model_id


def test_engine_client_calls_each_scoring_role(server, tmp_path, probe_wav_b64):
    backends = BackendSet.from_base_url(
        server.base_url, RequestCache(tmp_path / "cache")
    )
    quality = call_backend(
        BackendRole.QUALITY, {"audio_b64": probe_wav_b64}, backends
    )
    assert 1.0 <= quality["score"] <= 5.0
    embed = call_backend(
        BackendRole.SPEAKER_EMBED_A, {"audio_b64": probe_wav_b64}, backends
    )
    assert np.linalg.norm(embed["embedding"]) == pytest.approx(1.0, abs=1e-6)
    scores = call_backend(
        BackendRole.SEMANTIC,
        {"target_text": "good morning", "candidate_texts": ["good morning", "bye"]},
        backends,
    )["scores"]
    assert scores[0] == pytest.approx(1.0)
    synth = call_backend(
        BackendRole.TTS,
        {
            "prompt_audio_b64": probe_wav_b64,
            "prompt_text": "prompt",
            "target_text": "a target line",
        },
        backends,
    )
    rate, _samples = wavio.read_wav_bytes(base64.b64decode(synth["audio_b64"]))
    assert rate == RATE


def test_engine_cache_survives_sidecar_shutdown(tmp_path, probe_wav_b64):
    srv = serve_scoring_api(SidecarConfig(port=0))
    try:
        backends = BackendSet.from_base_url(
            srv.base_url, RequestCache(tmp_path / "cache")
        )
        payload = {"audio_b64": probe_wav_b64}
        first = call_backend(BackendRole.EMOTION_EMBED, payload, backends)
    finally:
        srv.stop()
    # With the sidecar gone, only the request cache can answer.
    second = call_backend(BackendRole.EMOTION_EMBED, payload, backends)
    assert first == second


def test_tagged_wav_from_the_engine_is_accepted(server):
    tag = {"speaker": "spk1", "emotion": "happy", "pid": "p1", "text": "hi"}
    data = wavio.write_wav_bytes(RATE, sine(180.0, 0.5), tag=tag)
    payload = {"audio_b64": base64.b64encode(data).decode("ascii")}
    out = call_role(server.base_url, "quality", payload)
    assert 1.0 <= out["score"] <= 5.0
