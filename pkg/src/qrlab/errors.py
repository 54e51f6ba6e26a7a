"""Exception taxonomy.  The CLI maps these onto exit codes."""


class QrlabError(Exception):
    """Base class for every condition qrlab raises on purpose."""


class InputError(QrlabError):
    """Malformed or inadmissible input (exit code 2)."""


class ParseError(InputError):
    """Syntax or semantic error in a presentation file, with position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class BudgetExceeded(QrlabError):
    """A configured resource bound was hit before the computation finished
    (exit code 3).  Partial results are never reported as complete."""


class PropertyViolation(QrlabError):
    """A mathematically forced invariant failed on concrete data (exit code 1).
    Either the implementation is wrong or the input is a counterexample;
    both deserve a hard stop."""


class TorsionObstruction(QrlabError):
    """p-torsion present where a torsion-free coefficient module was required
    (lifting coinvariants to Z/p^k).  Reported, never papered over."""
