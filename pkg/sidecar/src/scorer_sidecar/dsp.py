"""Shared signal features for the classical adapters.

Everything here is a pure function of the input buffer, which is what
makes the adapters built on top deterministic for frozen "models".
"""

from __future__ import annotations

import numpy as np

EPS = 1e-10


def frame_signal(samples: np.ndarray, frame: int, hop: int) -> np.ndarray:
    """Slice into overlapping frames; pads the tail so nothing is lost."""
    if samples.size < frame:
        samples = np.pad(samples, (0, frame - samples.size))
    count = 1 + (samples.size - frame) // hop
    idx = np.arange(frame)[None, :] + hop * np.arange(count)[:, None]
    return samples[idx]


def power_spectra(frames: np.ndarray) -> np.ndarray:
    windowed = frames * np.hanning(frames.shape[1])
    return np.abs(np.fft.rfft(windowed, axis=1)) ** 2


def band_energies(
    spectra: np.ndarray, rate: int, edges_hz: np.ndarray
) -> np.ndarray:
    """Log energy per band per frame, bands delimited by `edges_hz`."""
    nfft = 2 * (spectra.shape[1] - 1)
    freqs = np.fft.rfftfreq(nfft, d=1.0 / rate)
    bins = np.searchsorted(freqs, edges_hz)
    energies = np.empty((spectra.shape[0], len(edges_hz) - 1))
    for b in range(len(edges_hz) - 1):
        lo, hi = bins[b], max(bins[b + 1], bins[b] + 1)
        energies[:, b] = spectra[:, lo:hi].sum(axis=1)
    return np.log(energies + EPS)


def rms_track(frames: np.ndarray) -> np.ndarray:
    return np.sqrt(np.mean(frames**2, axis=1))


def zcr_track(frames: np.ndarray) -> np.ndarray:
    signs = np.sign(frames)
    signs[signs == 0] = 1
    return np.mean(np.abs(np.diff(signs, axis=1)) > 0, axis=1)


def spectral_flatness(spectra: np.ndarray) -> np.ndarray:
    """Geometric over arithmetic mean of the power spectrum, per frame."""
    log_mean = np.mean(np.log(spectra + EPS), axis=1)
    return np.exp(log_mean) / (np.mean(spectra, axis=1) + EPS)


def periodicity(frames: np.ndarray, rate: int) -> np.ndarray:
    """Peak normalized autocorrelation in the speech pitch band, per frame."""
    size = frames.shape[1]
    nfft = 1 << (2 * size - 1).bit_length()
    spec = np.fft.rfft(frames, nfft, axis=1)
    acf = np.fft.irfft(spec * np.conj(spec), nfft, axis=1)[:, :size]
    zero_lag = acf[:, :1] + EPS
    lo = max(2, int(rate / 500.0))
    hi = min(size - 1, int(rate / 60.0))
    if hi <= lo:
        return np.zeros(frames.shape[0])
    peaks = acf[:, lo:hi].max(axis=1) / zero_lag[:, 0]
    return np.clip(peaks, 0.0, 1.0)


def l2_normalize(vector: np.ndarray) -> np.ndarray:
    """Unit-norm version; digital silence maps to a fixed basis vector."""
    norm = float(np.linalg.norm(vector))
    if norm < 1e-12:
        fallback = np.zeros_like(vector)
        fallback[0] = 1.0
        return fallback
    return vector / norm
