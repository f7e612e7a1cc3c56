"""Exception hierarchy shared by every module."""


class WLForgeError(Exception):
    """Base class for all package errors."""


class DomainError(WLForgeError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(WLForgeError, ValueError):
    """A refinement or model configuration is not supported."""


class UnsupportedConfigurationError(ConfigurationError):
    """The requested computation is undefined for this configuration (e.g. gradients of sign)."""


class FormatError(WLForgeError, ValueError):
    """An input file violates its format."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class TrainingError(WLForgeError, RuntimeError):
    """Training diverged (non-finite loss)."""
