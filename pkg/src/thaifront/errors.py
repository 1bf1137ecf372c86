"""Exception types shared across the front-end."""


class ThaiFrontError(Exception):
    """Base class for all data errors raised by this package."""


class ParseError(ThaiFrontError, ValueError):
    """A file or string does not follow its documented grammar."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class ValidationError(ThaiFrontError, ValueError):
    """A value violates a documented invariant."""


class UnresolvableWordError(ThaiFrontError, LookupError):
    """No rule, exception entry or fallback could pronounce a word."""

    def __init__(self, word, reason=""):
        self.word = word
        msg = f"cannot pronounce {word!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
