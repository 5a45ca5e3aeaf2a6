"""Flat key-value config: which adapter serves each role, and where."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .wire import ROLES

DEFAULT_SPECS = {
    "tts": "dev-tone",
    "asr": "none",
    "speaker_embed_a": "fbank-a",
    "speaker_embed_b": "fbank-b",
    "emotion_embed": "prosody",
    "quality": "dsp-proxy",
    "coherence": "lexicon",
    "semantic": "tfidf",
}


@dataclass(frozen=True)
class SidecarConfig:
    host: str = "127.0.0.1"
    port: int = 8760
    role_specs: dict[str, str] = field(
        default_factory=lambda: dict(DEFAULT_SPECS)
    )
    llm_api_url: str = ""
    llm_model: str = "judge-1"
    llm_api_key_env: str = "SIDECAR_LLM_API_KEY"


def parse_config_text(text: str) -> dict[str, str]:
    """`key = value` lines; `#` comments; later keys win."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in ROLES and key not in (
            "host",
            "port",
            "llm_api_url",
            "llm_model",
            "llm_api_key_env",
        ):
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = value
    return values


def load_config(path: Path | str | None = None) -> SidecarConfig:
    if path is None:
        return SidecarConfig()
    path = Path(path)
    try:
        values = parse_config_text(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    specs = dict(DEFAULT_SPECS)
    for role in ROLES:
        if role in values:
            specs[role] = values[role]
    port = SidecarConfig.port
    if "port" in values:
        try:
            port = int(values["port"])
        except ValueError:
            raise ConfigError(f"port must be an integer, got {values['port']!r}") from None
    return SidecarConfig(
        host=values.get("host", SidecarConfig.host),
        port=port,
        role_specs=specs,
        llm_api_url=values.get("llm_api_url", SidecarConfig.llm_api_url),
        llm_model=values.get("llm_model", SidecarConfig.llm_model),
        llm_api_key_env=values.get(
            "llm_api_key_env", SidecarConfig.llm_api_key_env
        ),
    )
