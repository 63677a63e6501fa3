"""Exception hierarchy shared by the library and the CLI."""


class CantorFGError(Exception):
    """Base class for every error raised by cantorfg."""


class SpecError(CantorFGError, ValueError):
    """Malformed system spec, expression or clopen description."""


class FieldMismatchError(CantorFGError, ValueError):
    def __init__(self, message: str = "field mismatch"):
        super().__init__(message)


class NotFullRankError(CantorFGError, ValueError):
    def __init__(self, message: str = "not full rank"):
        super().__init__(message)


class NotADiscriminantError(CantorFGError, ValueError):
    def __init__(self, D: int):
        self.D = D
        super().__init__(f"not a discriminant: {D}")


class UnitRankError(CantorFGError, ValueError):
    def __init__(self, message: str = "rank 2, use verify path"):
        super().__init__(message)


class UncertifiedError(CantorFGError):
    def __init__(self, message: str = "uncertified"):
        super().__init__(message)


class NotInOrderError(CantorFGError, ValueError):
    def __init__(self, offenders):
        self.offenders = list(offenders)
        super().__init__(f"candidates outside the order: {', '.join(str(o) for o in self.offenders)}")


class CoverBoundExceeded(CantorFGError):
    def __init__(self, bound: int):
        self.bound = bound
        super().__init__(f"cover bound exceeded ({bound} group elements)")


class NotOrbitEquivalenceError(CantorFGError):
    def __init__(self, detail: str = ""):
        message = "not an orbit equivalence at clopen level"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class InvariantViolation(CantorFGError):
    """An exact self-check failed. Always indicates a bug, never bad input."""
