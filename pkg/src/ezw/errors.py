class EzwError(Exception):
    pass


class InputError(EzwError, ValueError):
    """Arguments that violate an operation's preconditions."""


class FormatError(EzwError):
    """Malformed PGM or EZW1 data.

    ``offset`` is the byte position where parsing gave up, when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)
        self.offset = offset
