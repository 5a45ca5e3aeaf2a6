"""Fundamental-frequency estimation and the mean/variance features built on it.

The estimator is YIN: per frame, a windowed difference function is normalized
by its cumulative mean (which makes the decision amplitude-invariant), the
first dip under the voicing threshold is refined by parabolic interpolation,
and frames with no qualifying dip are marked unvoiced. Statistics are then
taken over voiced frames only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil

import numpy as np
from numpy.fft import irfft, rfft

from .corpus import AudioBuffer
from .errors import InsufficientVoicingError


@dataclass(frozen=True)
class PitchConfig:
    """Analysis knobs for F0 extraction and the voicing rule."""

    frame_size_s: float = 0.040
    hop_s: float = 0.010
    f0_min_hz: float = 60.0
    f0_max_hz: float = 500.0
    yin_threshold: float = 0.15
    min_voiced: int = 10

    def __post_init__(self):
        if self.f0_min_hz <= 0 or self.f0_min_hz >= self.f0_max_hz:
            raise ValueError("need 0 < f0_min_hz < f0_max_hz")
        # The frame must span two periods of the lowest trackable pitch.
        if self.frame_size_s < 2.0 / self.f0_min_hz:
            raise ValueError(
                f"frame_size_s {self.frame_size_s} shorter than two periods "
                f"of f0_min_hz ({2.0 / self.f0_min_hz:.4f} s)"
            )
        if self.hop_s <= 0:
            raise ValueError("hop_s must be positive")
        if not 0 < self.yin_threshold < 1:
            raise ValueError("yin_threshold must lie in (0, 1)")
        if self.min_voiced < 1:
            raise ValueError("min_voiced must be >= 1")


@dataclass(frozen=True)
class F0Contour:
    """Per-frame F0 in Hz; NaN marks unvoiced frames."""

    frame_hop_s: float
    values: np.ndarray = field(repr=False)

    def voiced_values(self) -> np.ndarray:
        return self.values[~np.isnan(self.values)]

    @property
    def total_frames(self) -> int:
        return int(self.values.size)

    @property
    def voiced_frames(self) -> int:
        return int(np.count_nonzero(~np.isnan(self.values)))


@dataclass(frozen=True)
class PitchStats:
    """Mean and population variance of F0 over voiced frames."""

    mean_hz: float
    variance_hz2: float
    voiced_frames: int
    total_frames: int


def _frame_signal(samples: np.ndarray, frame: int, hop: int) -> np.ndarray:
    n_frames = 1 + (samples.size - frame) // hop
    view = np.lib.stride_tricks.sliding_window_view(samples, frame)[::hop]
    return view[:n_frames]


def _difference_function(frames: np.ndarray, window: int, tau_max: int) -> np.ndarray:
    """Windowed squared-difference d[tau] for tau in 0..tau_max, per frame.

    d[tau] = sum_{j<W} (x[j] - x[j+tau])^2
           = e[0] + e[tau] - 2 * sum_{j<W} x[j] x[j+tau]
    with e[tau] the energy of the W-sample window starting at tau. The cross
    term is one FFT cross-correlation of the frame with its leading window.
    """
    n_frames, frame_len = frames.shape
    nfft = 1 << (2 * frame_len - 1).bit_length()
    spec_full = rfft(frames, nfft, axis=1)
    spec_head = rfft(frames[:, :window], nfft, axis=1)
    corr = irfft(spec_full * np.conj(spec_head), nfft, axis=1)[:, : tau_max + 1]

    squared = np.concatenate(
        [np.zeros((n_frames, 1)), np.cumsum(frames * frames, axis=1)], axis=1
    )
    energy = squared[:, window : window + tau_max + 1] - squared[:, : tau_max + 1]
    diff = energy[:, :1] + energy - 2.0 * corr
    return np.maximum(diff, 0.0)


def _cmndf(diff: np.ndarray) -> np.ndarray:
    """Cumulative-mean-normalized difference; 1 at lag 0 and wherever flat."""
    tau = np.arange(1, diff.shape[1])
    running = np.cumsum(diff[:, 1:], axis=1)
    out = np.ones_like(diff)
    np.divide(diff[:, 1:] * tau, running, out=out[:, 1:], where=running > 0)
    return out


def estimate_f0_contour(audio: AudioBuffer, cfg: PitchConfig) -> F0Contour:
    """One F0 estimate per hop-aligned frame; NaN where voicing fails."""
    sr = audio.sample_rate_hz
    frame = int(round(cfg.frame_size_s * sr))
    hop = int(round(cfg.hop_s * sr))
    if audio.samples.size < frame:
        raise ValueError(
            f"audio of {audio.samples.size} samples is shorter than one "
            f"{frame}-sample analysis frame"
        )
    window = frame // 2
    tau_min = max(2, int(np.floor(sr / cfg.f0_max_hz)))
    tau_max = min(int(ceil(sr / cfg.f0_min_hz)), frame - window)

    frames = _frame_signal(audio.samples, frame, hop)
    diff = _difference_function(frames, window, tau_max)
    cmndf = _cmndf(diff)

    values = np.full(frames.shape[0], np.nan)
    below = cmndf[:, : tau_max + 1] < cfg.yin_threshold
    below[:, :tau_min] = False
    for i in range(frames.shape[0]):
        row = cmndf[i]
        if not below[i].any():
            continue
        # First lag under the threshold, then walk to the bottom of that dip.
        tau = int(np.argmax(below[i]))
        while tau + 1 <= tau_max and row[tau + 1] < row[tau]:
            tau += 1
        refined = float(tau)
        if 0 < tau < tau_max:
            denom = row[tau - 1] - 2.0 * row[tau] + row[tau + 1]
            if denom > 0:
                shift = 0.5 * (row[tau - 1] - row[tau + 1]) / denom
                refined += float(np.clip(shift, -0.5, 0.5))
        f0 = sr / refined
        if cfg.f0_min_hz <= f0 <= cfg.f0_max_hz:
            values[i] = f0
    return F0Contour(frame_hop_s=hop / sr, values=values)


def compute_pitch_stats(contour: F0Contour, cfg: PitchConfig) -> PitchStats:
    """Mean and population variance over voiced frames.

    Raises InsufficientVoicingError when fewer than cfg.min_voiced frames
    are voiced; such candidates are excluded from clustering.
    """
    voiced = contour.voiced_values()
    if voiced.size < cfg.min_voiced:
        raise InsufficientVoicingError(
            f"only {voiced.size} voiced frames of {contour.total_frames}; "
            f"need at least {cfg.min_voiced}"
        )
    mean = float(np.mean(voiced))
    variance = float(np.mean((voiced - mean) ** 2))
    return PitchStats(
        mean_hz=mean,
        variance_hz2=variance,
        voiced_frames=int(voiced.size),
        total_frames=contour.total_frames,
    )
