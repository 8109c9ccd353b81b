"""Exception types shared across the package."""


class HdvError(Exception):
    """Base class for errors raised by this package."""


class CorpusFormatError(HdvError, ValueError):
    """Malformed or inconsistent corpus input files."""


class ModelFormatError(HdvError, ValueError):
    """Corrupt, truncated, or incompatible model files."""


class UnknownTokenError(HdvError, KeyError):
    """Query token absent from the vocabulary or unusable for retrieval."""

    def __str__(self) -> str:  # KeyError quotes its message by default
        return self.args[0] if self.args else ""
