"""Conjunctive grammars over the one-letter alphabet {a}.

File format, one rule per line (a nonterminal may have several lines)::

    S -> a S & S a | a
    E -> eps

``|`` separates alternatives, ``&`` separates the conjuncts of one
alternative, and a conjunct is a space-separated string of ``a``, ``eps``
(or ``ε``) and nonterminals. ``#`` starts a comment.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import CircuitBuilder
from .equations import Equation, EquationSystem, ResolvedSystem, least_fixpoint

TERMINAL = "a"
EPSILON = ("eps", "ε")

Conjunct = tuple[str, ...]  # symbols; () is the empty word
Alternative = tuple[Conjunct, ...]


class GrammarError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class ConjGrammar:
    start: str
    rules: dict[str, tuple[Alternative, ...]]

    def __post_init__(self):
        if self.start not in self.rules:
            raise GrammarError(f"start symbol {self.start!r} has no rule")
        for nt, alts in self.rules.items():
            for alt in alts:
                for conj in alt:
                    for sym in conj:
                        if sym != TERMINAL and sym not in self.rules:
                            raise GrammarError(f"{nt}: undefined nonterminal {sym!r}")

    @property
    def nonterminals(self) -> tuple[str, ...]:
        return tuple(self.rules)

    def __str__(self):
        lines = []
        for nt, alts in self.rules.items():
            body = " | ".join(" & ".join(" ".join(c) if c else "eps" for c in alt) for alt in alts)
            lines.append(f"{nt} -> {body}")
        return "\n".join(lines)


def parse_grammar(text: str, start: str | None = None) -> ConjGrammar:
    """Parse a grammar; the start symbol defaults to the first rule's head."""
    rules: dict[str, list[Alternative]] = {}
    where: dict[str, int] = {}
    refs: list[tuple[str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise GrammarError("expected 'Nonterminal -> body'", lineno)
        head, body = (p.strip() for p in line.split("->", 1))
        if not head or len(head.split()) != 1:
            raise GrammarError(f"bad rule head {head!r}", lineno)
        if head == TERMINAL or head in EPSILON:
            raise GrammarError(f"{head!r} is reserved and cannot be a nonterminal", lineno)
        alts = rules.setdefault(head, [])
        where.setdefault(head, lineno)
        for alt_text in body.split("|"):
            conjs = []
            for conj_text in alt_text.split("&"):
                syms = conj_text.split()
                if not syms:
                    raise GrammarError(f"empty conjunct in rule for {head}", lineno)
                if any(s in EPSILON for s in syms):
                    if len(syms) != 1:
                        raise GrammarError("eps must stand alone in a conjunct", lineno)
                    syms = []
                for s in syms:
                    if s != TERMINAL:
                        if not (s[0].isalpha() or s[0] == "_") or not all(ch.isalnum() or ch in "_'" for ch in s):
                            raise GrammarError(f"unknown symbol {s!r}", lineno)
                        refs.append((s, lineno))
                conjs.append(tuple(syms))
            alts.append(tuple(conjs))
    if not rules:
        raise GrammarError("grammar has no rules")
    for s, lineno in refs:
        if s not in rules:
            raise GrammarError(f"undefined nonterminal {s!r}", lineno)
    if start is None:
        start = min(where, key=where.get)
    return ConjGrammar(start, {nt: tuple(alts) for nt, alts in rules.items()})


def to_equation_system(g: ConjGrammar) -> tuple[ResolvedSystem, str]:
    """One variable per nonterminal, named after it; returns (system, start)."""
    defs = {}
    for nt, alts in g.rules.items():
        b = CircuitBuilder()
        union = None
        for alt in alts:
            inter = None
            for conj in alt:
                if not conj:
                    term = b.const(0)
                else:
                    term = None
                    for sym in conj:
                        t = b.const(1) if sym == TERMINAL else b.var(sym)
                        term = t if term is None else b.plus(term, t)
                inter = term if inter is None else b.inter(inter, term)
            union = inter if union is None else b.union(union, inter)
        defs[nt] = b.build(union)
    return ResolvedSystem(defs), g.start


def emptiness_system(g: ConjGrammar) -> EquationSystem:
    """The translated system plus ``X_start = empty``; solvable iff the language is empty."""
    rs, start = to_equation_system(g)
    lb, rb = CircuitBuilder(), CircuitBuilder()
    return rs.to_system().with_equations(Equation(lb.build(lb.var(start)), rb.build(rb.empty())))


def bounded_language(g: ConjGrammar, bound: int) -> list[int]:
    """Lengths k <= bound with a^k in the language."""
    rs, start = to_equation_system(g)
    return least_fixpoint(rs, bound).elements(start)


def _derivable_table(g: ConjGrammar, k: int) -> dict[str, set[int]]:
    """Saturate facts (nonterminal, length) up to length k."""
    facts: dict[str, set[int]] = {nt: set() for nt in g.rules}

    def lengths(conj: Conjunct) -> set[int]:
        # all lengths <= k of words matching the symbol string
        acc = {0}
        for sym in conj:
            step = {1} if sym == TERMINAL else facts[sym]
            acc = {x + y for x in acc for y in step if x + y <= k}
            if not acc:
                break
        return acc

    changed = True
    while changed:
        changed = False
        for nt, alts in g.rules.items():
            for alt in alts:
                common = None
                for conj in alt:
                    ls = lengths(conj)
                    common = ls if common is None else common & ls
                    if not common:
                        break
                new = common - facts[nt]
                if new:
                    facts[nt] |= new
                    changed = True
    return facts


def naive_derivable(g: ConjGrammar, k: int) -> bool:
    if k < 0:
        return False
    return k in _derivable_table(g, k)[g.start]


def pow4_grammar() -> ConjGrammar:
    """Generates a^(4^n): A_i derives the words a^(i * 4^n)."""
    return parse_grammar(
        "A1 -> A1 A3 & A2 A2 | a\n"
        "A2 -> A1 A1 & A2 A6 | a a\n"
        "A3 -> A1 A2 & A6 A6 | a a a\n"
        "A6 -> A1 A2 & A3 A3\n"
    )
