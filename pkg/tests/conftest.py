import base64
import json
from pathlib import Path

import numpy as np
import pytest

from emopro import wavio
from emopro.backends import (
    BackendSet,
    MockFixture,
    RequestCache,
    build_mock_suite,
)
from emopro.corpus import EmotionLabel

RATE = 16000


def sine(freq_hz: float, duration_s: float = 2.0, rate: int = RATE, amp: float = 0.3):
    t = np.arange(int(round(duration_s * rate))) / rate
    return amp * np.sin(2.0 * np.pi * freq_hz * t)


def tagged_wav_b64(
    pid: str = "p001",
    speaker: str = "spk1",
    emotion: str = "happy",
    text: str = "a plain sentence",
    freq_hz: float = 220.0,
    duration_s: float = 0.6,
) -> str:
    tag = {"speaker": speaker, "emotion": emotion, "pid": pid, "text": text}
    data = wavio.write_wav_bytes(RATE, sine(freq_hz, duration_s), tag=tag)
    return base64.b64encode(data).decode("ascii")


def write_manifest(path: Path, rows: list[dict]) -> Path:
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    return path


@pytest.fixture
def small_pool(tmp_path):
    """Four tagged candidates for (spk1, happy) plus two non-matching rows."""
    audio_dir = tmp_path / "audio"
    audio_dir.mkdir()
    rows = []
    texts = [
        "What a bright and lovely morning this is.",
        "I can hardly wait to see the parade.",
        "The garden burst into bloom overnight.",
        "Everyone cheered when the lights came on.",
    ]
    for i, (freq, text) in enumerate(zip((150.0, 200.0, 280.0, 340.0), texts)):
        pid = f"c{i}"
        tag = {"speaker": "spk1", "emotion": "happy", "pid": pid, "text": text}
        wavio.write_wav(
            audio_dir / f"{pid}.wav", RATE, sine(freq, 0.8), tag=tag
        )
        rows.append(
            {
                "id": pid,
                "speaker": "spk1",
                "emotion": "happy",
                "audio": f"audio/{pid}.wav",
                "text": text,
            }
        )
    wavio.write_wav(audio_dir / "other.wav", RATE, sine(180.0, 0.8))
    rows.append(
        {
            "id": "x0",
            "speaker": "spk2",
            "emotion": "happy",
            "audio": "audio/other.wav",
            "text": "Different speaker entirely.",
        }
    )
    rows.append(
        {
            "id": "x1",
            "speaker": "spk1",
            "emotion": "sad",
            "audio": "audio/other.wav",
            "text": "A different emotion entirely.",
        }
    )
    manifest = write_manifest(tmp_path / "manifest.jsonl", rows)
    return manifest, rows


@pytest.fixture
def mock_backends(tmp_path):
    """In-process mocks for all roles, with a fresh cache directory."""
    fixture = MockFixture(
        seed=7,
        embed_dim=8,
        embed_keys=("spk1|happy", "spk1|sad", "spk2|happy"),
    )
    suite = build_mock_suite(fixture)
    backends = BackendSet.from_mocks(suite, RequestCache(tmp_path / "cache"))
    return backends, suite


@pytest.fixture(scope="session")
def demo_corpus(tmp_path_factory):
    """The 200-candidate, 10-blob corpus used by end-to-end tests."""
    from emopro.synth import build_corpus

    root = tmp_path_factory.mktemp("demo-corpus")
    return build_corpus(root / "corpus")


HAPPY = EmotionLabel.HAPPY
