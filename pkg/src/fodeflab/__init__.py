"""First-order definability of finite graphs: EF games, formula measures,
Turing-machine compilation, diverging and ranked trees, succinctness tables."""

from .errors import (
    CapExceeded, FodefError, IllegalMove, InputError, InvariantViolation,
    PreconditionError, Timeout,
)

__version__ = "0.1.0"

__all__ = [
    "FodefError", "InputError", "PreconditionError", "CapExceeded",
    "InvariantViolation", "Timeout", "IllegalMove", "__version__",
]
