"""Minimal RIFF/WAVE codec: integer PCM16 and IEEE float32, any channel count.

Only the subset the corpus loader and the deterministic mocks need. Unknown
chunks are skipped on read. An optional auxiliary chunk (id ``emoJ``) holding
a small JSON object can be written and recovered; the mock backends use it to
coordinate across wire calls, and ordinary WAV readers ignore it.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any

import numpy as np

from .errors import AudioDecodeError

TAG_CHUNK_ID = b"emoJ"

_FMT_PCM = 1
_FMT_IEEE_FLOAT = 3
_FMT_EXTENSIBLE = 0xFFFE

# Symmetric 16-bit scaling keeps |round-trip error| <= 0.5 / 32767 < 2**-15.
_PCM16_SCALE = 32767.0


def _read_exact(data: bytes, offset: int, size: int, what: str) -> bytes:
    if offset + size > len(data):
        raise AudioDecodeError(f"truncated WAV data while reading {what}")
    return data[offset : offset + size]


def _iter_chunks(data: bytes):
    """Yield (chunk_id, payload) for every chunk after the RIFF header."""
    header = _read_exact(data, 0, 12, "RIFF header")
    if header[:4] != b"RIFF" or header[8:12] != b"WAVE":
        raise AudioDecodeError("not a RIFF/WAVE file")
    offset = 12
    while offset < len(data):
        chunk_header = _read_exact(data, offset, 8, "chunk header")
        chunk_id = chunk_header[:4]
        (size,) = struct.unpack("<I", chunk_header[4:])
        payload = _read_exact(data, offset + 8, size, f"chunk {chunk_id!r}")
        yield chunk_id, payload
        offset += 8 + size + (size & 1)  # chunks are word-aligned


def _parse_fmt(payload: bytes) -> tuple[int, int, int, int]:
    """Return (format_code, channels, sample_rate, bits_per_sample)."""
    if len(payload) < 16:
        raise AudioDecodeError("truncated WAV data while reading fmt chunk")
    fmt_code, channels, rate, _byte_rate, _align, bits = struct.unpack(
        "<HHIIHH", payload[:16]
    )
    if fmt_code == _FMT_EXTENSIBLE:
        # Sub-format GUID starts at byte 24; its first two bytes carry the code.
        if len(payload) < 26:
            raise AudioDecodeError("truncated WAVE_FORMAT_EXTENSIBLE fmt chunk")
        (fmt_code,) = struct.unpack("<H", payload[24:26])
    return fmt_code, channels, rate, bits


def read_wav_bytes(data: bytes) -> tuple[int, np.ndarray]:
    """Decode WAV bytes to ``(sample_rate, samples)``.

    ``samples`` is float64 with shape (frames, channels). PCM16 is scaled by
    1/32767 and clipped to [-1, 1]; float32 data is returned as stored.
    """
    fmt = None
    pcm = None
    for chunk_id, payload in _iter_chunks(data):
        if chunk_id == b"fmt ":
            fmt = _parse_fmt(payload)
        elif chunk_id == b"data":
            pcm = payload
    if fmt is None:
        raise AudioDecodeError("WAV file has no fmt chunk")
    if pcm is None:
        raise AudioDecodeError("WAV file has no data chunk")
    fmt_code, channels, rate, bits = fmt
    if channels < 1:
        raise AudioDecodeError("WAV fmt chunk declares zero channels")

    if fmt_code == _FMT_PCM and bits == 16:
        width = 2
        usable = len(pcm) - len(pcm) % (width * channels)
        raw = np.frombuffer(pcm[:usable], dtype="<i2").astype(np.float64)
        samples = np.clip(raw / _PCM16_SCALE, -1.0, 1.0)
    elif fmt_code == _FMT_IEEE_FLOAT and bits == 32:
        width = 4
        usable = len(pcm) - len(pcm) % (width * channels)
        samples = np.frombuffer(pcm[:usable], dtype="<f4").astype(np.float64)
    else:
        raise AudioDecodeError(
            f"unsupported WAV encoding (format code {fmt_code}, {bits}-bit); "
            "expected 16-bit integer PCM or 32-bit float"
        )
    return rate, samples.reshape(-1, channels)


def read_wav(path: str | Path) -> tuple[int, np.ndarray]:
    """Read a WAV file from disk; see :func:`read_wav_bytes`."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise AudioDecodeError(f"cannot read audio file {path}: {exc}") from exc
    return read_wav_bytes(data)


def read_tag_bytes(data: bytes) -> dict[str, Any] | None:
    """Recover the auxiliary JSON chunk, or None when absent or unreadable."""
    try:
        for chunk_id, payload in _iter_chunks(data):
            if chunk_id == TAG_CHUNK_ID:
                return json.loads(payload.decode("utf-8"))
    except (AudioDecodeError, UnicodeDecodeError, json.JSONDecodeError):
        return None
    return None


def write_wav_bytes(
    sample_rate: int,
    samples: np.ndarray,
    *,
    encoding: str = "pcm16",
    tag: dict[str, Any] | None = None,
) -> bytes:
    """Encode samples (shape (n,) or (n, channels), values in [-1, 1]) to WAV bytes."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, np.newaxis]
    if samples.ndim != 2:
        raise ValueError("samples must have shape (n,) or (n, channels)")
    frames, channels = samples.shape
    clipped = np.clip(samples, -1.0, 1.0)

    if encoding == "pcm16":
        fmt_code, bits = _FMT_PCM, 16
        pcm = np.round(clipped * _PCM16_SCALE).astype("<i2").tobytes()
    elif encoding == "float32":
        fmt_code, bits = _FMT_IEEE_FLOAT, 32
        pcm = clipped.astype("<f4").tobytes()
    else:
        raise ValueError(f"unsupported encoding {encoding!r}")

    width = bits // 8
    fmt_payload = struct.pack(
        "<HHIIHH",
        fmt_code,
        channels,
        sample_rate,
        sample_rate * channels * width,
        channels * width,
        bits,
    )
    chunks = [(b"fmt ", fmt_payload), (b"data", pcm)]
    if tag is not None:
        chunks.append(
            (TAG_CHUNK_ID, json.dumps(tag, sort_keys=True).encode("utf-8"))
        )

    body = bytearray()
    for chunk_id, payload in chunks:
        body += chunk_id
        body += struct.pack("<I", len(payload))
        body += payload
        if len(payload) & 1:
            body += b"\x00"
    return b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + bytes(body)


def write_wav(
    path: str | Path,
    sample_rate: int,
    samples: np.ndarray,
    *,
    encoding: str = "pcm16",
    tag: dict[str, Any] | None = None,
) -> None:
    Path(path).write_bytes(
        write_wav_bytes(sample_rate, samples, encoding=encoding, tag=tag)
    )
