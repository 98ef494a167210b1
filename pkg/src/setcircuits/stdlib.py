"""Named circuits: the textbook examples and the operator terms used elsewhere.

Unary operators (``cOf``, ``geq``, the discriminators, ``fin``) are circuits
in one variable ``x``.
"""

from __future__ import annotations

from typing import Callable

from .circuit import Circuit, CircuitBuilder
from .natset import is_prime

VAR = "x"


def evens() -> Circuit:
    b = CircuitBuilder()
    one = b.const(1)
    om = b.omega()
    two = b.plus(one, one)
    return b.build(b.times(two, om))


def primes() -> Circuit:
    b = CircuitBuilder()
    one = b.const(1)
    not_one = b.comp(one)
    composite = b.times(not_one, not_one)  # {0} and the composites
    return b.build(b.inter(b.comp(composite), not_one))


def one() -> Circuit:
    """{1} from {0} alone: complement of (~{0} + ~{0}), minus {0}."""
    b = CircuitBuilder()
    nz = b.comp(b.const(0))
    return b.build(b.inter(b.comp(b.plus(nz, nz)), nz))


def c_of() -> Circuit:
    b = CircuitBuilder()
    return b.build(b.plus(b.var(VAR), b.omega()))


geq = c_of


def disc_plus_times() -> Circuit:
    b = CircuitBuilder()
    return b.build(b.plus(b.omega(), b.times(b.const(0), b.var(VAR))))


def disc_plus_leq() -> Circuit:
    b = CircuitBuilder()
    return b.build(b.plus(b.omega(), b.down(b.var(VAR))))


def fin() -> Circuit:
    """omega for infinite arguments, empty for finite ones."""
    b = CircuitBuilder()
    inner = b.comp(b.down(b.var(VAR)))
    return b.build(b.comp(b.plus(b.omega(), b.down(inner))))


def g_term(op: str = "plus") -> Circuit:
    """~(~e o ~e) & ~e where e is the identity of ``op``."""
    if op not in ("plus", "times"):
        raise ValueError("g_term is defined for 'plus' or 'times'")
    b = CircuitBuilder()
    ne = b.comp(b.const(0 if op == "plus" else 1))
    return b.build(b.inter(b.comp(b.gate(op, ne, ne)), ne))


def a1() -> Circuit:
    """The primes, written as the numbers with exactly one prime factor."""
    b = CircuitBuilder()
    not_one = b.comp(b.const(1))
    return b.build(b.inter(b.comp(b.times(not_one, not_one)), not_one))


def a_n(n: int) -> Circuit:
    """n-fold product of a1; a_n(0) is {1}."""
    if n < 0:
        raise ValueError("a_n needs n >= 0")
    b = CircuitBuilder()
    if n == 0:
        return b.build(b.const(1))
    prime = b.include(a1())
    acc = prime
    for _ in range(n - 1):
        acc = b.times(acc, prime)
    return b.build(acc)


def po_p(p: int) -> Circuit:
    """All powers of the prime ``p``, in five steps from ``omega * {p}``."""
    if not is_prime(p):
        raise ValueError(f"po_p needs a prime, got {p}")
    b = CircuitBuilder()
    om = b.omega()
    multiples = b.times(om, b.const(p))
    coprime = b.inter(b.comp(multiples), b.comp(b.const(1)))
    has_coprime_factor = b.times(om, coprime)
    return b.build(b.comp(has_coprime_factor))


def independence_witness(ps: list[int], qs: list[int]) -> Circuit:
    """(omega*{p0}) & ... & ~(omega*{q0}) & ... for distinct primes."""
    allp = list(ps) + list(qs)
    if not ps or len(set(allp)) != len(allp) or not all(is_prime(p) for p in allp):
        raise ValueError("independence witness needs distinct primes")
    b = CircuitBuilder()
    om = b.omega()
    acc = None
    for p in ps:
        t = b.times(om, b.const(p))
        acc = t if acc is None else b.inter(acc, t)
    for q in qs:
        acc = b.inter(acc, b.comp(b.times(om, b.const(q))))
    return b.build(acc)


_REGISTRY: dict[str, Callable[..., Circuit]] = {
    "evens": evens,
    "primes": primes,
    "one": one,
    "cOf": c_of,
    "geq": geq,
    "discPlusTimes": disc_plus_times,
    "discPlusLeq": disc_plus_leq,
    "fin": fin,
    "gTerm": g_term,
    "aN": a_n,
    "a1": a1,
    "poP": po_p,
}

_PARAM_NAMES = {"gTerm": "op", "aN": "n", "poP": "p"}


def names() -> list[str]:
    return sorted(_REGISTRY)


def stdlib(name: str, *params) -> Circuit:
    try:
        make = _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown stdlib circuit {name!r}; known: {', '.join(names())}") from None
    if name in _PARAM_NAMES:
        if len(params) != 1:
            raise ValueError(f"{name} takes one parameter ({_PARAM_NAMES[name]})")
        param = params[0]
        if name == "gTerm":
            param = {"+": "plus", "⊕": "plus", "*": "times", "⊗": "times"}.get(param, param)
        elif not isinstance(param, int):
            param = int(param)
        return make(param)
    if params:
        raise ValueError(f"{name} takes no parameters")
    return make()
