"""Model adapters behind the scorer roles.

The defaults are classical-DSP and lexical stand-ins: pure functions of
the request payload, so identical requests always produce identical
responses and every score lands inside its declared range by
construction. The one adapter that delegates to a remote model (the LLM
coherence judge) forwards the rubric it received and keeps no state, per
the protocol's stateless-judging rule.
"""

from __future__ import annotations

import hashlib
import math
import re

import numpy as np
import requests

from .audio import decode_wav_b64, encode_wav_b64
from .dsp import (
    band_energies,
    frame_signal,
    l2_normalize,
    periodicity,
    power_spectra,
    rms_track,
    spectral_flatness,
    zcr_track,
)
from .errors import UpstreamError

FRAME_S = 0.032
HOP_S = 0.016


def _frames_of(payload_field: str, payload: dict) -> tuple[int, np.ndarray]:
    rate, samples = decode_wav_b64(payload[payload_field])
    frame = max(32, int(round(FRAME_S * rate)))
    hop = max(16, int(round(HOP_S * rate)))
    return rate, frame_signal(samples, frame, hop)


class DspQualityProxy:
    """Clipping, silence, and noisiness heuristics mapped onto [1, 5]."""

    role = "quality"
    model_id = "dsp-quality-proxy-1.0"
    score_range = (1.0, 5.0)

    def handle(self, payload: dict) -> dict:
        rate, samples = decode_wav_b64(payload["audio_b64"])
        frame = max(32, int(round(FRAME_S * rate)))
        hop = max(16, int(round(HOP_S * rate)))
        frames = frame_signal(samples, frame, hop)
        spectra = power_spectra(frames)
        rms = rms_track(frames)
        clip_frac = float(np.mean(np.abs(samples) >= 0.985))
        silence_frac = float(np.mean(rms < 1e-3))
        noisiness = float(np.mean(spectral_flatness(spectra)))
        level = float(np.sqrt(np.mean(samples**2)))
        too_quiet = max(0.0, 0.01 - level) / 0.01
        score = (
            5.0
            - 3.5 * clip_frac
            - 1.5 * noisiness
            - 1.0 * silence_frac
            - 1.0 * too_quiet
        )
        return {"score": float(min(5.0, max(1.0, score)))}


class FilterbankEmbedder:
    """Mean and spread of log band energies as a timbre fingerprint.

    The two speaker roles use different band layouts so their
    similarities are correlated but not identical, like two independent
    verification models would be.
    """

    def __init__(self, role: str, model_id: str, bands: int, lo_hz: float, hi_hz: float):
        self.role = role
        self.model_id = model_id
        self.score_range = None
        self._bands = bands
        self._lo_hz = lo_hz
        self._hi_hz = hi_hz

    def handle(self, payload: dict) -> dict:
        rate, frames = _frames_of("audio_b64", payload)
        hi = min(self._hi_hz, rate / 2.0)
        edges = np.geomspace(self._lo_hz, max(hi, self._lo_hz * 2), self._bands + 1)
        energies = band_energies(power_spectra(frames), rate, edges)
        vector = np.concatenate([energies.mean(axis=0), energies.std(axis=0)])
        return {"embedding": [float(v) for v in l2_normalize(vector)]}


class ProsodyEmotionEmbedder:
    """Energy, voicing, and brightness dynamics as an emotion fingerprint."""

    role = "emotion_embed"
    model_id = "prosody-stats-1.0"
    score_range = None

    def handle(self, payload: dict) -> dict:
        rate, frames = _frames_of("audio_b64", payload)
        rms = rms_track(frames)
        zcr = zcr_track(frames)
        voiced = periodicity(frames, rate)
        half = max(1, rms.size // 2)
        vector = np.array(
            [
                rms.mean(),
                rms.std(),
                zcr.mean(),
                zcr.std(),
                voiced.mean(),
                voiced.std(),
                rms[half:].mean() - rms[:half].mean(),
                voiced[half:].mean() - voiced[:half].mean(),
            ]
        )
        return {"embedding": [float(v) for v in l2_normalize(vector)]}


_LEXICON = {
    "happy": {
        "happy", "joy", "joyful", "delight", "delighted", "glad", "cheerful",
        "wonderful", "great", "lovely", "smile", "laugh", "laughing", "bright",
        "excited", "celebrate", "fantastic", "pleased", "sunny", "cheered",
    },
    "sad": {
        "sad", "sorrow", "grief", "cry", "crying", "tears", "lonely", "miss",
        "lost", "gloomy", "mourn", "heartbroken", "weep", "regret", "dark",
        "empty", "hopeless", "blue", "ache", "hurt",
    },
    "anger": {
        "angry", "anger", "furious", "rage", "hate", "mad", "shout", "yell",
        "outrage", "annoyed", "irritated", "fault", "blame", "unfair",
        "enough", "stop", "never", "insult", "ruin", "ruined",
    },
    "surprised": {
        "surprised", "surprise", "wow", "sudden", "suddenly", "unexpected",
        "unbelievable", "astonished", "amazed", "shocked", "gasp", "really",
        "incredible", "startled", "whoa", "remarkable",
    },
    "comfort": {
        "comfort", "calm", "gentle", "soothe", "soothing", "safe", "warm",
        "rest", "easy", "relax", "soft", "quiet", "peaceful", "alright",
        "okay", "fine", "breathe", "here", "together", "home",
    },
}

_OPPOSITE = {"happy": "sad", "sad": "happy", "anger": "comfort", "comfort": "anger"}


class LexiconCoherenceJudge:
    """Keyword agreement between a transcript and a target emotion.

    A local stand-in for an LLM judge: the rubric in the request is
    accepted and ignored, since this judge's criteria are baked into its
    lexicons (the service stays stateless either way).
    """

    role = "coherence"
    model_id = "lexicon-judge-1.0"
    score_range = (0.0, 1.0)

    def handle(self, payload: dict) -> dict:
        tokens = re.findall(r"[a-z']+", payload["text"].lower())
        emotion = payload["emotion"].strip().lower()
        lexicon = _LEXICON.get(emotion, frozenset())
        opposite = _LEXICON.get(_OPPOSITE.get(emotion, ""), frozenset())
        hits = sum(token in lexicon for token in tokens)
        anti = sum(token in opposite for token in tokens)
        score = 0.5 + 0.5 * math.tanh(0.75 * (hits - anti))
        return {"score": float(min(1.0, max(0.0, score)))}


class LLMCoherenceJudge:
    """Forwards (rubric, emotion, text) to a remote LLM scoring API."""

    role = "coherence"
    score_range = (0.0, 1.0)

    def __init__(self, api_url: str, model: str, api_key: str, timeout_s: float = 30.0):
        self.api_url = api_url
        self.model = model
        self.model_id = f"llm-judge-{model}"
        self._api_key = api_key
        self._timeout_s = timeout_s

    def handle(self, payload: dict) -> dict:
        prompt = (
            f"{payload['rubric']}\n\n"
            f"Emotion: {payload['emotion']}\n"
            f"Text: {payload['text']}\n\n"
            "Reply with one number between 0 and 1."
        )
        try:
            resp = requests.post(
                self.api_url,
                json={"model": self.model, "prompt": prompt},
                headers={"Authorization": f"Bearer {self._api_key}"},
                timeout=self._timeout_s,
            )
        except requests.RequestException as exc:
            raise UpstreamError(f"judge API unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise UpstreamError(f"judge API returned status {resp.status_code}")
        try:
            body = resp.json()
        except ValueError:
            raise UpstreamError("judge API returned a non-JSON body") from None
        score = body.get("score")
        if score is None:
            match = re.search(r"-?\d+(?:\.\d+)?", str(body.get("text", "")))
            score = float(match.group()) if match else None
        if (
            score is None
            or isinstance(score, bool)
            or not isinstance(score, (int, float))
            or not 0.0 <= float(score) <= 1.0
        ):
            raise UpstreamError(f"judge API reply unusable as a score: {body!r}")
        return {"score": float(score)}


def _tokenize(text: str) -> list[str]:
    return re.findall(r"[a-z0-9']+", text.lower())


class TfidfSemanticScorer:
    """Cosine between tf-idf vectors of the target and each candidate."""

    role = "semantic"
    model_id = "tfidf-cosine-1.0"
    score_range = (0.0, 1.0)

    def handle(self, payload: dict) -> dict:
        docs = [_tokenize(payload["target_text"])] + [
            _tokenize(text) for text in payload["candidate_texts"]
        ]
        vocab = sorted({token for doc in docs for token in doc})
        index = {token: i for i, token in enumerate(vocab)}
        counts = np.zeros((len(docs), max(len(vocab), 1)))
        for d, doc in enumerate(docs):
            for token in doc:
                counts[d, index[token]] += 1.0
        present = (counts > 0).sum(axis=0)
        idf = np.log((1.0 + len(docs)) / (1.0 + present)) + 1.0
        vectors = counts * idf
        norms = np.linalg.norm(vectors, axis=1)
        target = vectors[0]
        scores = []
        for cand, norm in zip(vectors[1:], norms[1:]):
            denom = norms[0] * norm
            value = float(target @ cand / denom) if denom > 0 else 0.0
            scores.append(min(1.0, max(0.0, value)))
        return {"scores": scores}


class DevToneTts:
    """Development TTS: a deterministic tone keyed by prompt and text.

    Lets the full pipeline run against this service without a real
    synthesizer; the output is honest audio (correct rate, headroom,
    fades) but carries no speech content.
    """

    role = "tts"
    model_id = "dev-tone-tts-1.0"
    score_range = None

    def handle(self, payload: dict) -> dict:
        rate, _ = decode_wav_b64(payload["prompt_audio_b64"])
        digest = hashlib.sha256(
            payload["prompt_audio_b64"].encode("ascii")
            + b"\x00"
            + payload["target_text"].encode("utf-8")
        ).digest()
        freq = 100.0 + (int.from_bytes(digest[:8], "big") % 3000) / 10.0
        t = np.arange(int(0.5 * rate)) / rate
        tone = 0.3 * np.sin(2 * np.pi * freq * t)
        tone += 0.08 * np.sin(2 * np.pi * 2 * freq * t)
        fade = min(int(0.005 * rate), tone.size // 2)
        if fade:
            ramp = np.linspace(0.0, 1.0, fade)
            tone[:fade] *= ramp
            tone[-fade:] *= ramp[::-1]
        return {"audio_b64": encode_wav_b64(rate, tone)}
