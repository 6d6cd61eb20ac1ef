"""Exception hierarchy shared across the toolkit."""


class HelmetUseError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(HelmetUseError):
    """An input violates a documented invariant.

    ``rule`` is a stable machine-readable identifier (also used by the
    HTTP service in 422 responses).
    """

    def __init__(self, message: str, rule: str = "invalid"):
        super().__init__(message)
        self.rule = rule


class ParseError(ValidationError):
    """A textual input could not be parsed.

    Carries enough location information (offset within a label, or line
    number within a file) to point at the offending token.
    """

    def __init__(self, message: str, *, offset: int | None = None,
                 line: int | None = None, rule: str = "parse"):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if offset is not None:
            loc.append(f"offset {offset}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message, rule=rule)
        self.offset = offset
        self.line = line
