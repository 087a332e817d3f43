class ContractError(ValueError):
    """An argument violated a documented precondition."""


class FormatError(ValueError):
    """A persisted container failed to parse.

    Carries the byte offset at which parsing failed when known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset
