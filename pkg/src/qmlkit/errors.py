"""Exception types shared across the toolkit."""


class QmlkitError(Exception):
    """Base class for toolkit-specific errors."""


class CircuitParseError(QmlkitError):
    """Raised when a circuit document cannot be parsed.

    The message always names the offending location, e.g. ``ops[3].gate``.
    """


class ConfigError(QmlkitError):
    """Raised when an experiment config fails validation.

    ``errors`` holds one message per offending key, each prefixed with the
    key path.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
