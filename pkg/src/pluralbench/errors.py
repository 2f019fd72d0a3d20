"""Exception hierarchy shared across the toolkit."""


class PluralbenchError(Exception):
    """Base class for all toolkit errors."""


class FeatureTableError(PluralbenchError):
    """Malformed phonetic feature table (bad header, row width, duplicates)."""


class UnknownPhonemeError(PluralbenchError):
    """A phoneme symbol is missing from the feature table."""

    def __init__(self, symbol, position=None, context=None):
        self.symbol = symbol
        self.position = position
        self.context = context
        msg = f"unknown phoneme symbol {symbol!r}"
        if position is not None:
            msg += f" at position {position}"
        if context is not None:
            msg += f" in {context}"
        super().__init__(msg)


class LexiconFormatError(PluralbenchError):
    """A lexicon file row could not be parsed; carries the line number."""

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ConfigError(PluralbenchError):
    """Invalid or incomplete experiment configuration."""


class ModelFormatError(PluralbenchError):
    """A serialized model file is unreadable or structurally invalid."""


class ExperimentError(PluralbenchError):
    """A pipeline stage failed; names the stage and chains the cause."""

    def __init__(self, stage, cause):
        self.stage = stage
        super().__init__(f"stage {stage!r} failed: {cause}")
