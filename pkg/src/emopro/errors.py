"""Exception taxonomy shared across the selection pipeline."""

from __future__ import annotations


class EmoProError(Exception):
    """Base class for every error this package raises deliberately."""


class ManifestError(EmoProError):
    """Malformed manifest content: bad JSON, missing fields, bad labels."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"manifest line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateIdError(ManifestError):
    """A candidate id occurs more than once in a manifest."""


class EmptyPoolError(EmoProError):
    """No manifest record matches the requested (speaker, emotion) pair."""


class AudioDecodeError(EmoProError):
    """Audio file is missing, truncated, corrupt, or uses an unsupported encoding."""


class InsufficientVoicingError(EmoProError):
    """Too few voiced frames to compute stable pitch statistics."""


class BackendError(EmoProError):
    """Base class for scorer-backend failures."""


class TransportError(BackendError):
    """Wire call still failing after the configured number of retries."""


class ProtocolError(BackendError):
    """Backend response violates the role schema or a declared value range."""


class MockFixtureError(BackendError):
    """A deterministic mock was asked for a key its fixture does not define."""


class ConfigError(EmoProError):
    """Invalid configuration file, key, or value."""


class ResultError(EmoProError):
    """Result file is missing required content, failed, or version-incompatible."""


class PipelineError(EmoProError):
    """A static-selection stage failed; partial results were persisted."""
