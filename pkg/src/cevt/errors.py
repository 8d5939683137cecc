"""Typed errors for everything that crosses a file or CLI boundary."""


class CevtError(Exception):
    """Base error; ``code`` feeds the one-line CLI diagnostic."""

    code = "error"


class FormatError(CevtError):
    """Malformed event/image/tensor file content."""

    code = "format"


class ConfigError(CevtError):
    """Bad configuration file or parameter value."""

    code = "config"


class InputError(CevtError):
    """Missing or unusable input path."""

    code = "io"
