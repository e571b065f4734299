"""Exceptions shared across the solver."""


class InputError(Exception):
    """Malformed user input: instance documents, regexes, alphabets."""


class InternalError(Exception):
    """An invariant the pipeline guarantees was violated; always a bug."""


class CapExceeded(Exception):
    """A configured resource cap was hit; surfaces as an UNKNOWN verdict."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason
