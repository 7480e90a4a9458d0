"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: InputError -> 2, CapExceeded -> 3,
InvariantViolation -> 4.
"""


class FodefError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1
    kind = "error"

    def to_payload(self):
        return {"error": self.kind, "message": str(self)}


class InputError(FodefError, ValueError):
    exit_code = 2
    kind = "input"


class FormulaSyntaxError(InputError):
    kind = "syntax"

    def __init__(self, message, pos=None):
        if pos is not None:
            message = f"{message} at position {pos}"
        super().__init__(message)
        self.pos = pos

    def to_payload(self):
        out = super().to_payload()
        out["position"] = self.pos
        return out


class UnboundVariableError(InputError):
    kind = "unbound-variable"


class ArityError(FormulaSyntaxError):
    kind = "arity"


class PreconditionError(InputError):
    kind = "precondition"


class CapExceeded(FodefError):
    exit_code = 3
    kind = "cap-exceeded"


class InvariantViolation(FodefError, AssertionError):
    exit_code = 4
    kind = "invariant"


class Timeout(FodefError):
    """A Turing machine did not halt within the step budget."""

    exit_code = 3
    kind = "timeout"

    def __init__(self, steps):
        super().__init__(f"machine did not halt within {steps} steps")
        self.steps = steps


class IllegalMove(FodefError):
    exit_code = 4
    kind = "illegal-move"
