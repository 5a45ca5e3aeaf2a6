"""Role-to-adapter bindings and the adapter registry.

A config names one adapter per role (or "none" to leave the role
unbound). Naming an adapter that does not exist is a config error and
aborts startup; a known adapter that fails to load (say, a judge with no
API key) leaves just that role unavailable while the rest serve.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Callable

from . import adapters
from .config import SidecarConfig
from .errors import ConfigError, SidecarError
from .wire import ROLES

logger = logging.getLogger(__name__)

UNBOUND = "none"


@dataclass(frozen=True)
class RoleBinding:
    """One loaded model serving one role."""

    role: str
    model_id: str
    handler: Callable[[dict], dict]
    score_range: tuple[float, float] | None


def _bind(adapter) -> RoleBinding:
    return RoleBinding(
        role=adapter.role,
        model_id=adapter.model_id,
        handler=adapter.handle,
        score_range=adapter.score_range,
    )


def _load_llm_judge(config: SidecarConfig) -> RoleBinding:
    if not config.llm_api_url:
        raise SidecarError("llm-judge needs llm_api_url in the config")
    api_key = os.environ.get(config.llm_api_key_env, "")
    if not api_key:
        raise SidecarError(
            f"llm-judge needs an API key in ${config.llm_api_key_env}"
        )
    return _bind(
        adapters.LLMCoherenceJudge(config.llm_api_url, config.llm_model, api_key)
    )


ADAPTER_LOADERS: dict[str, dict[str, Callable[[SidecarConfig], RoleBinding]]] = {
    "tts": {"dev-tone": lambda cfg: _bind(adapters.DevToneTts())},
    "asr": {},
    "speaker_embed_a": {
        "fbank-a": lambda cfg: _bind(
            adapters.FilterbankEmbedder(
                "speaker_embed_a", "fbank-stats-a-1.0", 12, 80.0, 6400.0
            )
        ),
    },
    "speaker_embed_b": {
        "fbank-b": lambda cfg: _bind(
            adapters.FilterbankEmbedder(
                "speaker_embed_b", "fbank-stats-b-1.0", 16, 60.0, 7800.0
            )
        ),
    },
    "emotion_embed": {
        "prosody": lambda cfg: _bind(adapters.ProsodyEmotionEmbedder()),
    },
    "quality": {"dsp-proxy": lambda cfg: _bind(adapters.DspQualityProxy())},
    "coherence": {
        "lexicon": lambda cfg: _bind(adapters.LexiconCoherenceJudge()),
        "llm-judge": _load_llm_judge,
    },
    "semantic": {"tfidf": lambda cfg: _bind(adapters.TfidfSemanticScorer())},
}


def load_bindings(
    config: SidecarConfig,
) -> tuple[dict[str, RoleBinding], dict[str, str]]:
    """Load every configured role; returns (bindings, per-role failures)."""
    bindings: dict[str, RoleBinding] = {}
    failures: dict[str, str] = {}
    for role in ROLES:
        spec = config.role_specs[role]
        if spec == UNBOUND:
            continue
        loaders = ADAPTER_LOADERS[role]
        if spec not in loaders:
            known = ", ".join(sorted(loaders) + [UNBOUND])
            raise ConfigError(
                f"unknown adapter {spec!r} for role {role!r} (known: {known})"
            )
        try:
            bindings[role] = loaders[spec](config)
        except SidecarError as exc:
            failures[role] = str(exc)
            logger.warning("role %s unavailable: %s", role, exc)
    return bindings, failures
