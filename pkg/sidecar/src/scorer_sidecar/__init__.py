"""Scoring service speaking the emopro wire protocol.

One process serves the eight scorer roles over HTTP. Each role is bound
to a model adapter by a flat config file; roles whose adapter fails to
load answer 503 while the rest keep working. The bundled adapters are
deterministic classical-DSP stand-ins, so the service runs with no model
weights installed; heavier adapters slot in through the same registry.
"""

from .bindings import RoleBinding, load_bindings
from .config import SidecarConfig, load_config
from .errors import (
    AudioDecodeError,
    ConfigError,
    ServeError,
    SidecarError,
    UpstreamError,
    WireError,
)
from .server import SidecarServer, serve_scoring_api

__all__ = [
    "AudioDecodeError",
    "ConfigError",
    "RoleBinding",
    "ServeError",
    "SidecarConfig",
    "SidecarError",
    "SidecarServer",
    "UpstreamError",
    "WireError",
    "load_bindings",
    "load_config",
    "serve_scoring_api",
]
