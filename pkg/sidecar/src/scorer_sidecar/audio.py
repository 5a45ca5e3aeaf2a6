"""Decode wire audio payloads into mono sample buffers."""

from __future__ import annotations

import base64
import io
import wave

import numpy as np

from .errors import AudioDecodeError

_WIDTH_DTYPES = {2: "<i2", 4: "<i4"}
_WIDTH_SCALES = {2: 32768.0, 4: 2147483648.0}


def decode_wav_b64(audio_b64: str) -> tuple[int, np.ndarray]:
    """Base64 WAV -> (sample rate, mono float64 samples in [-1, 1])."""
    raw = base64.b64decode(audio_b64)
    try:
        with wave.open(io.BytesIO(raw)) as wf:
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            frames = wf.readframes(wf.getnframes())
    except (wave.Error, EOFError) as exc:
        reason = str(exc) or "truncated or empty stream"
        raise AudioDecodeError(f"audio payload is not decodable WAV: {reason}") from exc
    if width == 1:
        samples = (
            np.frombuffer(frames, dtype=np.uint8).astype(np.float64) - 128.0
        ) / 128.0
    elif width in _WIDTH_DTYPES:
        samples = (
            np.frombuffer(frames, dtype=_WIDTH_DTYPES[width]).astype(np.float64)
            / _WIDTH_SCALES[width]
        )
    else:
        raise AudioDecodeError(f"unsupported WAV sample width {width}")
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    if samples.size == 0:
        raise AudioDecodeError("audio payload holds zero samples")
    if rate <= 0:
        raise AudioDecodeError(f"audio payload declares sample rate {rate}")
    return rate, samples


def encode_wav_b64(rate: int, samples: np.ndarray) -> str:
    """Mono float samples in [-1, 1] -> base64 of a 16-bit PCM WAV."""
    clipped = np.clip(samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype("<i2")
    out = io.BytesIO()
    with wave.open(out, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(pcm.tobytes())
    return base64.b64encode(out.getvalue()).decode("ascii")
