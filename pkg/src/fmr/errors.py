"""Exception hierarchy shared by all fmr modules."""

from __future__ import annotations


class FmrError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(FmrError):
    """Malformed or out-of-domain input (bad modulus, bad spec file, ...)."""


class AxiomViolationError(FmrError):
    """A ring/bimodule law failed an exhaustive check.

    Carries the name of the first failing law and a witness tuple.
    """

    def __init__(self, law: str, witness: tuple):
        self.law = law
        self.witness = witness
        super().__init__(f"{law} violated at witness {witness}")


class LawViolationError(FmrError):
    """A candidate automorphism failed one of the four certification laws."""

    def __init__(self, law: str, witness: tuple):
        self.law = law
        self.witness = witness
        super().__init__(f"automorphism {law} law violated at witness {witness}")


class UnsupportedMultiplierError(FmrError):
    """Operation requires binary (0/1) multipliers but a non-binary one was given."""


class CenterMismatchError(FmrError):
    """The unit-group center disagreed with the units of the ring center.

    Never expected for the rings in scope; treated as a data bug.
    """


class InternalConsistencyError(FmrError):
    """A structurally certified construction failed a downstream cross-check."""


class BudgetExceededError(FmrError):
    """A search exceeded its node or size budget."""

    def __init__(self, message: str, nodes: int = 0):
        self.nodes = nodes
        super().__init__(message)


class TheoremViolationError(FmrError):
    """A structural fact that must hold on the instance failed its check.

    Surfaced, never silently ignored: carries the check label and a witness.
    """

    def __init__(self, label: str, witness=None):
        self.label = label
        self.witness = witness
        super().__init__(f"{label}: violated (witness={witness!r})")
