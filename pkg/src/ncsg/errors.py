"""Exception hierarchy shared across the package."""


class NcsgError(Exception):
    """Base class for every error raised by ncsg."""


class DimensionError(NcsgError, ValueError):
    pass


class EmptyDualError(NcsgError, ValueError):
    pass


class GroupMismatchError(NcsgError, TypeError):
    pass


class AliasingError(NcsgError, ValueError):
    """A truncation or quadrature margin would be violated."""


class DomainError(NcsgError, ValueError):
    """An expression could not be evaluated at some point (division by zero, sqrt < 0)."""


class ExprSyntaxError(NcsgError, ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class FormatError(NcsgError, ValueError):
    """Malformed NCMAT1/NCSYM1 container or mismatched header."""


class ConfigError(NcsgError, ValueError):
    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
