"""Exception taxonomy; the server maps each class to one HTTP status."""


class SidecarError(Exception):
    """Base class for everything raised on purpose in this package."""


class ConfigError(SidecarError):
    """Bad config file or unknown adapter name."""


class WireError(SidecarError):
    """Malformed envelope or request payload (HTTP 400)."""


class ServeError(SidecarError):
    """Well-formed request this server cannot serve (HTTP 422)."""


class AudioDecodeError(ServeError):
    """The audio payload is valid base64 but not decodable WAV."""


class UpstreamError(SidecarError):
    """A delegated model API failed (HTTP 502)."""
