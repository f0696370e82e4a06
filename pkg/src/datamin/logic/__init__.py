"""Formula algebra and the enumeration-based solver backend."""
from .boxes import BoxUnion
from .engine import (
    DEFAULT_BUDGET,
    check,
    equivalent,
    model,
    project,
    quantifier_eliminate,
    truth_table,
    value_table,
)
from .formula import (
    EXISTS,
    FORALL,
    Formula,
    Quantifier,
    conj,
    disj,
    eq,
    exists,
    forall,
    free_vars,
    implies,
    neg,
    substitute,
)
from .smtlib import to_smtlib

__all__ = [
    "DEFAULT_BUDGET",
    "EXISTS",
    "FORALL",
    "BoxUnion",
    "Formula",
    "Quantifier",
    "check",
    "conj",
    "disj",
    "eq",
    "equivalent",
    "exists",
    "forall",
    "free_vars",
    "implies",
    "model",
    "neg",
    "project",
    "quantifier_eliminate",
    "substitute",
    "to_smtlib",
    "truth_table",
    "value_table",
]
