"""Pipeline configuration: one flat key-value namespace.

Every knob lives in `CONFIG_KEYS`; the same table drives the config-file
parser, the generated CLI flags, and the env-var defaults, so a key can
never exist in one layer and not the others. Precedence: CLI flag over
config file over environment over built-in default.
"""

from __future__ import annotations

import hashlib
import logging
import os
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from .backends import BackendRole, BackendSet, EndpointConfig, RequestCache
from .clustering import Polarity
from .errors import ConfigError
from .model_perf import ProbeTextSet
from .pitch import PitchConfig

logger = logging.getLogger(__name__)

BUILTIN = "builtin"

ENV_BACKEND_URL = "EMOPRO_BACKEND_URL"
ENV_CACHE_DIR = "EMOPRO_CACHE_DIR"
ENV_SEED = "EMOPRO_SEED"


def _parse_polarity_overrides(raw: str) -> tuple[tuple[str, str], ...]:
    """Parse "happy=High,sad=Low" into sorted (emotion, polarity) pairs."""
    if not raw.strip():
        return ()
    pairs = []
    for part in raw.split(","):
        if "=" not in part:
            raise ValueError(
                f"polarity override {part!r} is not of the form emotion=High|Low"
            )
        emotion, _, polarity = part.partition("=")
        emotion = emotion.strip().lower()
        polarity = polarity.strip().capitalize()
        if polarity not in ("High", "Low"):
            raise ValueError(
                f"polarity for {emotion!r} must be High or Low, got {polarity!r}"
            )
        pairs.append((emotion, polarity))
    return tuple(sorted(pairs))


def _format_polarity_overrides(pairs: tuple[tuple[str, str], ...]) -> str:
    return ",".join(f"{emotion}={polarity}" for emotion, polarity in pairs)


@dataclass(frozen=True)
class ConfigKey:
    name: str
    parse: Callable[[str], Any]
    default: Any
    help: str
    env: str | None = None


CONFIG_KEYS: tuple[ConfigKey, ...] = (
    ConfigKey("num_clusters", int, 10, "pitch clusters fitted per pool"),
    ConfigKey("m", int, 3, "pitch clusters kept (1 <= m <= num_clusters)"),
    ConfigKey("n_percent", float, 15.0, "top percentage kept by the quality gate"),
    ConfigKey("k", int, 5, "candidates kept by the model-performance stage"),
    ConfigKey("seed", int, 0, "clustering seed", env=ENV_SEED),
    ConfigKey(
        "polarity_overrides",
        _parse_polarity_overrides,
        (),
        "per-emotion cluster polarity, e.g. happy=High,sad=Low",
    ),
    ConfigKey("frame_size_s", float, 0.040, "pitch analysis frame length, seconds"),
    ConfigKey("hop_s", float, 0.010, "pitch analysis hop, seconds"),
    ConfigKey("f0_min_hz", float, 60.0, "lowest admissible F0"),
    ConfigKey("f0_max_hz", float, 500.0, "highest admissible F0"),
    ConfigKey("yin_threshold", float, 0.15, "dip threshold on the normalized difference"),
    ConfigKey("min_voiced", int, 10, "minimum voiced frames per usable candidate"),
    ConfigKey("probe_texts", str, BUILTIN, "probe text file, or 'builtin'"),
    ConfigKey("rubric", str, BUILTIN, "coherence rubric file, or 'builtin'"),
    ConfigKey("backend_url", str, "", "scorer base URL", env=ENV_BACKEND_URL),
    ConfigKey("model_id", str, "default", "model id sent with every request"),
    ConfigKey("timeout_s", float, 30.0, "per-request timeout, seconds"),
    ConfigKey("retries", int, 3, "wire attempts per request"),
    ConfigKey("api_token", str, "", "bearer token passed through to backends"),
    ConfigKey("cache_dir", str, "", "response cache directory", env=ENV_CACHE_DIR),
    ConfigKey("max_in_flight", int, 8, "global cap on concurrent backend calls"),
)

_KEYS_BY_NAME = {key.name: key for key in CONFIG_KEYS}


@dataclass(frozen=True)
class SelectionConfig:
    num_clusters: int = 10
    m: int = 3
    n_percent: float = 15.0
    k: int = 5
    seed: int = 0
    polarity_overrides: tuple[tuple[str, str], ...] = ()
    frame_size_s: float = 0.040
    hop_s: float = 0.010
    f0_min_hz: float = 60.0
    f0_max_hz: float = 500.0
    yin_threshold: float = 0.15
    min_voiced: int = 10
    probe_texts: str = BUILTIN
    rubric: str = BUILTIN
    backend_url: str = ""
    model_id: str = "default"
    timeout_s: float = 30.0
    retries: int = 3
    api_token: str = ""
    cache_dir: str = ""
    max_in_flight: int = 8

    def __post_init__(self) -> None:
        if self.num_clusters < 1:
            raise ConfigError("num_clusters must be at least 1")
        if not 1 <= self.m <= self.num_clusters:
            raise ConfigError(
                f"m={self.m} must satisfy 1 <= m <= num_clusters={self.num_clusters}"
            )
        if not 0.0 < self.n_percent <= 100.0:
            raise ConfigError(f"n_percent={self.n_percent} must be in (0, 100]")
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if not self.model_id:
            raise ConfigError("model_id must be non-empty")
        try:
            self.pitch_config()
        except ValueError as exc:
            raise ConfigError(f"invalid pitch settings: {exc}") from None

    def pitch_config(self) -> PitchConfig:
        return PitchConfig(
            frame_size_s=self.frame_size_s,
            hop_s=self.hop_s,
            f0_min_hz=self.f0_min_hz,
            f0_max_hz=self.f0_max_hz,
            yin_threshold=self.yin_threshold,
            min_voiced=self.min_voiced,
        )

    def polarity_for(self, emotion: str) -> Polarity | None:
        for name, polarity in self.polarity_overrides:
            if name == emotion:
                return Polarity(polarity.lower())
        return None

    def resolve_probe_texts(self) -> ProbeTextSet:
        if self.probe_texts == BUILTIN:
            return ProbeTextSet.default()
        try:
            return ProbeTextSet.from_file(self.probe_texts)
        except OSError as exc:
            raise ConfigError(f"cannot read probe texts: {exc}") from exc

    def resolve_rubric(self) -> str:
        if self.rubric == BUILTIN:
            return (
                resources.files("emopro.assets")
                .joinpath("coherence_rubric.txt")
                .read_text(encoding="utf-8")
            )
        try:
            return Path(self.rubric).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read rubric: {exc}") from exc

    def make_backend_set(self) -> BackendSet:
        if not self.backend_url:
            raise ConfigError(
                f"no backend URL configured (set backend_url or {ENV_BACKEND_URL})"
            )
        endpoint = EndpointConfig(
            base_url=self.backend_url,
            model_id=self.model_id,
            timeout_s=self.timeout_s,
            retries=self.retries,
            api_token=self.api_token or None,
        )
        cache = RequestCache(self.cache_dir) if self.cache_dir else None
        return BackendSet(
            endpoints={role: endpoint for role in BackendRole},
            cache=cache,
            max_in_flight=self.max_in_flight,
        )

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "polarity_overrides":
                value = _format_polarity_overrides(value)
            out[f.name] = value
        return out

    @property
    def snapshot_hash(self) -> str:
        digest = hashlib.sha256()
        for name, value in sorted(self.to_dict().items()):
            digest.update(f"{name}={value!r}\n".encode("utf-8"))
        return digest.hexdigest()


def parse_config_file(path: Path | str) -> dict[str, str]:
    """Read a flat `key = value` file; '#' starts a comment."""
    raw: dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(
                f"config line {lineno}: expected 'key = value', got {line!r}"
            )
        key, _, value = text.partition("=")
        key = key.strip()
        if key not in _KEYS_BY_NAME:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        raw[key] = value.strip()
    return raw


def build_config(
    file_values: dict[str, str] | None = None,
    overrides: dict[str, Any] | None = None,
    *,
    env: dict[str, str] | None = None,
) -> SelectionConfig:
    """Combine defaults, env vars, a config file, and CLI overrides."""
    env = os.environ if env is None else env
    file_values = file_values or {}
    overrides = overrides or {}
    values: dict[str, Any] = {}
    for key in CONFIG_KEYS:
        value: Any = key.default
        if key.env and env.get(key.env):
            value = _parse_value(key, env[key.env])
        if key.name in file_values:
            value = _parse_value(key, file_values[key.name])
        if key.name in overrides and overrides[key.name] is not None:
            override = overrides[key.name]
            value = _parse_value(key, override) if isinstance(override, str) else override
        values[key.name] = value
    unknown = set(overrides) - {key.name for key in CONFIG_KEYS}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return SelectionConfig(**values)


def _parse_value(key: ConfigKey, raw: str) -> Any:
    try:
        return key.parse(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config key {key.name!r}: {exc}") from None
