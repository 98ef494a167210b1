"""Arithmetic circuits and equations over sets of natural numbers."""

from .natset import (
    EMPTY,
    OMEGA,
    FinCofSet,
    NotClosedError,
    TailHint,
    TriBool,
    WindowSet,
    parse_set,
)
from .circuit import Circuit, CircuitBuilder, evaluate, member, parse_circuit
from .stdlib import stdlib
from .equations import (
    EquationSystem,
    ResolvedSystem,
    bounded_sat,
    least_fixpoint,
    parse_system,
    semidecide_unsat,
    stage_chain,
    transform,
)
from .grammar import ConjGrammar, bounded_language, naive_derivable, parse_grammar

__version__ = "0.1.0"

__all__ = [
    "EMPTY",
    "OMEGA",
    "FinCofSet",
    "NotClosedError",
    "TailHint",
    "TriBool",
    "WindowSet",
    "parse_set",
    "Circuit",
    "CircuitBuilder",
    "evaluate",
    "member",
    "parse_circuit",
    "stdlib",
    "EquationSystem",
    "ResolvedSystem",
    "bounded_sat",
    "least_fixpoint",
    "parse_system",
    "semidecide_unsat",
    "stage_chain",
    "transform",
    "ConjGrammar",
    "bounded_language",
    "naive_derivable",
    "parse_grammar",
    "__version__",
]
