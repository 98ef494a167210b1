"""Finite commutative Boolean monoids.

An algebra with ``k`` atoms has the ``2**k`` atom subsets as elements,
encoded as bitmasks. The monoid operation is given on atoms and extended
additively, so ``x o y`` is the join of ``t[i][j]`` over atoms ``i`` in ``x``
and ``j`` in ``y``.

The quotients ``B_n`` of the plus-algebra have atoms ``g_0 .. g_n`` with
``g_i o g_j = g_{i+j}`` when ``i + j <= n`` and bottom otherwise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .natset import FinCofSet, WindowSet, is_prime, otimes

EXHAUSTIVE_LIMIT = 2**24
CONGRUENCE_LIMIT = 2**16
TABLE_ATOM_LIMIT = 10


class AlgebraError(ValueError):
    pass


class SizeLimitError(AlgebraError):
    pass


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _atoms_of(x: int) -> list[int]:
    return [i for i in range(x.bit_length()) if x >> i & 1]


@dataclass(frozen=True)
class FiniteCBM:
    atom_count: int
    atom_table: tuple[tuple[int, ...], ...]
    identity: int
    atom_names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        k = self.atom_count
        if k < 1:
            raise AlgebraError("need at least one atom")
        if len(self.atom_table) != k or any(len(row) != k for row in self.atom_table):
            raise AlgebraError("atom table must be k x k")
        top = (1 << k) - 1
        if any(v & ~top for row in self.atom_table for v in row):
            raise AlgebraError("table entries must be atom subsets")
        if not 0 < self.identity <= top:
            raise AlgebraError("identity must be a nonzero atom subset")

    @property
    def size(self) -> int:
        return 1 << self.atom_count

    @property
    def top(self) -> int:
        return self.size - 1

    def elements(self) -> range:
        return range(self.size)

    def atom_name(self, i: int) -> str:
        return self.atom_names[i] if self.atom_names else f"a{i}"

    def compose(self, x: int, y: int) -> int:
        if self.atom_count <= TABLE_ATOM_LIMIT:
            return int(self.table[x, y])
        out = 0
        for i in _atoms_of(x):
            row = self.atom_table[i]
            for j in _atoms_of(y):
                out |= row[j]
        return out

    @cached_property
    def table(self) -> np.ndarray:
        """Full element-level table, built by additive extension."""
        if self.atom_count > TABLE_ATOM_LIMIT:
            raise SizeLimitError(f"element table limited to {TABLE_ATOM_LIMIT} atoms")
        n, k = self.size, self.atom_count
        dtype = np.uint16 if k <= 16 else np.uint32
        # rows for atom pairs, then extend one argument at a time
        by_atom = np.zeros((k, n), dtype=dtype)
        for i in range(k):
            for y in range(1, n):
                low = y & -y
                j = low.bit_length() - 1
                by_atom[i, y] = by_atom[i, y ^ low] | self.atom_table[i][j]
        t = np.zeros((n, n), dtype=dtype)
        for x in range(1, n):
            low = x & -x
            t[x] = t[x ^ low] | by_atom[low.bit_length() - 1]
        return t

    @cached_property
    def closure_map(self) -> tuple[int, ...]:
        """c(x) = x o top for every element."""
        rows = [0] * self.atom_count
        for i, row in enumerate(self.atom_table):
            for v in row:
                rows[i] |= v
        out = [0] * self.size
        for x in range(1, self.size):
            low = x & -x
            out[x] = out[x ^ low] | rows[low.bit_length() - 1]
        return tuple(out)

    def c(self, x: int) -> int:
        return self.closure_map[x]

    def format_element(self, x: int) -> str:
        if x == 0:
            return "⊥"
        return "{" + ",".join(self.atom_name(i) for i in _atoms_of(x)) + "}"


def make_bn(n: int) -> FiniteCBM:
    if n < 0:
        raise AlgebraError("B_n needs n >= 0")
    k = n + 1
    table = tuple(tuple(1 << (i + j) if i + j <= n else 0 for j in range(k)) for i in range(k))
    return FiniteCBM(k, table, 1, tuple(f"g{i}" for i in range(k)))


def monoid_violations(alg: FiniteCBM) -> list[str]:
    """Commutativity, associativity and identity, checked on atoms.

    Additive extension carries each law from atoms to all elements.
    """
    k, out = alg.atom_count, []
    atoms = [1 << i for i in range(k)]
    if any(alg.atom_table[i][j] != alg.atom_table[j][i] for i in range(k) for j in range(i)):
        out.append("commutative")
    if any(
        alg.compose(alg.compose(x, y), z) != alg.compose(x, alg.compose(y, z))
        for x in atoms
        for y in atoms
        for z in atoms
    ):
        out.append("associative")
    if any(alg.compose(alg.identity, x) != x for x in atoms):
        out.append("identity")
    return out


def make_cbm(atom_table: Sequence[Sequence[int | Iterable[int] | None]], identity: Iterable[int],
             names: Sequence[str] | None = None, check: bool = True) -> FiniteCBM:
    """Build from an atom table whose entries are atom indices, index sets or None.

    With ``check`` the monoid laws are enforced; pass False to build
    deliberately broken tables for the identity checker.
    """
    def enc(v):
        if v is None:
            return 0
        if isinstance(v, int):
            return 1 << v
        return sum(1 << i for i in set(v))

    table = tuple(tuple(enc(v) for v in row) for row in atom_table)
    alg = FiniteCBM(len(table), table, enc(identity), tuple(names) if names else None)
    if check:
        bad = monoid_violations(alg)
        if bad:
            raise AlgebraError(f"not a commutative monoid table: fails {', '.join(bad)}")
    return alg


# ---------------------------------------------------------------------------
# terms over {join, meet, neg, bot, top, circ, e}


@dataclass(frozen=True)
class Term:
    op: str
    args: tuple[Term, ...] = ()
    name: str | None = None

    def __str__(self):
        return format_term(self)


def var(name: str) -> Term:
    return Term("var", (), name)


BOT = Term("bot")
TOP = Term("top")
E = Term("e")


def join(*ts: Term) -> Term:
    acc = ts[0]
    for t in ts[1:]:
        acc = Term("join", (acc, t))
    return acc


def meet(*ts: Term) -> Term:
    acc = ts[0]
    for t in ts[1:]:
        acc = Term("meet", (acc, t))
    return acc


def neg(t: Term) -> Term:
    return Term("neg", (t,))


def circ(a: Term, b: Term) -> Term:
    return Term("circ", (a, b))


def c(t: Term) -> Term:
    return circ(t, TOP)


G = meet(neg(circ(neg(E), neg(E))), neg(E))


def gpow(n: int) -> Term:
    if n == 0:
        return E
    acc = G
    for _ in range(n - 1):
        acc = circ(acc, G)
    return acc


_INFIX = {"join": "∨", "meet": "∧", "circ": "∘"}


def format_term(t: Term) -> str:
    if t == G:
        return "g"
    if t.op == "var":
        return t.name
    if t.op in ("bot", "top", "e"):
        return {"bot": "⊥", "top": "⊤", "e": "e"}[t.op]
    if t.op == "neg":
        return "⎺" + format_term(t.args[0])
    if t.op == "circ" and t.args[1] == TOP:
        return f"c({format_term(t.args[0])})"
    return "(" + f" {_INFIX[t.op]} ".join(format_term(a) for a in t.args) + ")"


def term_vars(t: Term) -> list[str]:
    out: list[str] = []

    def walk(u: Term):
        if u.op == "var":
            if u.name not in out:
                out.append(u.name)
        for a in u.args:
            walk(a)

    walk(t)
    return out


def eval_term(t: Term, alg: FiniteCBM, assignment: Mapping[str, int] | None = None) -> int:
    assignment = assignment or {}
    cache: dict[Term, int] = {}

    def ev(u: Term) -> int:
        if u in cache:
            return cache[u]
        op = u.op
        if op == "var":
            if u.name not in assignment:
                raise AlgebraError(f"unbound variable {u.name!r}")
            v = assignment[u.name]
        elif op == "bot":
            v = 0
        elif op == "top":
            v = alg.top
        elif op == "e":
            v = alg.identity
        elif op == "neg":
            v = alg.top & ~ev(u.args[0])
        elif op == "join":
            v = ev(u.args[0]) | ev(u.args[1])
        elif op == "meet":
            v = ev(u.args[0]) & ev(u.args[1])
        elif op == "circ":
            v = alg.compose(ev(u.args[0]), ev(u.args[1]))
        else:
            raise AlgebraError(f"unknown term operation {op!r}")
        cache[u] = v
        return v

    return ev(t)


def _eval_vec(t: Term, alg: FiniteCBM, env: Mapping[str, np.ndarray], cache: dict) -> np.ndarray:
    if t in cache:
        return cache[t]
    op = t.op
    if op == "var":
        v = env[t.name]
    elif op == "bot":
        v = np.uint16(0)
    elif op == "top":
        v = np.uint16(alg.top)
    elif op == "e":
        v = np.uint16(alg.identity)
    elif op == "neg":
        v = np.uint16(alg.top) ^ _eval_vec(t.args[0], alg, env, cache)
    elif op in ("join", "meet"):
        a = _eval_vec(t.args[0], alg, env, cache)
        b = _eval_vec(t.args[1], alg, env, cache)
        v = (a | b) if op == "join" else (a & b)
    elif op == "circ":
        a = _eval_vec(t.args[0], alg, env, cache)
        b = _eval_vec(t.args[1], alg, env, cache)
        v = alg.table[a, b]
    else:
        raise AlgebraError(f"unknown term operation {op!r}")
    cache[t] = v
    return v


# ---------------------------------------------------------------------------
# identities


@dataclass(frozen=True)
class IdentityScheme:
    name: str
    left: Term
    right: Term
    index: int | None = None

    @property
    def variables(self) -> list[str]:
        vs = term_vars(self.left)
        return vs + [v for v in term_vars(self.right) if v not in vs]

    @property
    def label(self) -> str:
        return self.name if self.index is None else f"{self.name}[n={self.index}]"

    def __str__(self):
        return f"{format_term(self.left)} = {format_term(self.right)}"


@dataclass(frozen=True)
class IdentityResult:
    scheme: IdentityScheme
    holds: bool
    counterexample: dict[str, int] | None
    checked: int
    mode: str


x_, y_, z_ = var("x"), var("y"), var("z")


def cbm_axioms() -> list[IdentityScheme]:
    return [
        IdentityScheme("ba-complement-join", join(x_, neg(x_)), TOP),
        IdentityScheme("ba-complement-meet", meet(x_, neg(x_)), BOT),
        IdentityScheme("ba-distributive", meet(x_, join(y_, z_)), join(meet(x_, y_), meet(x_, z_))),
        IdentityScheme("commutative", circ(x_, y_), circ(y_, x_)),
        IdentityScheme("associative", circ(circ(x_, y_), z_), circ(x_, circ(y_, z_))),
        IdentityScheme("identity", circ(E, x_), x_),
        IdentityScheme("normal", circ(x_, BOT), BOT),
        IdentityScheme("additive", circ(x_, join(y_, z_)), join(circ(x_, y_), circ(x_, z_))),
    ]


def ge0() -> IdentityScheme:
    return IdentityScheme("ge0", meet(E, circ(x_, y_)), meet(E, x_, y_))


def ge1(n: int) -> IdentityScheme:
    return IdentityScheme("ge1", c(gpow(n + 1)), neg(join(*[gpow(i) for i in range(n + 1)])), n)


def ge2() -> IdentityScheme:
    left = meet(c(meet(c(x_), neg(c(y_)))), c(meet(c(y_), neg(c(x_)))))
    return IdentityScheme("ge2", left, BOT)


def ge4() -> IdentityScheme:
    right = join(circ(meet(E, x_), meet(G, y_)), circ(meet(G, x_), meet(E, y_)))
    return IdentityScheme("ge4", meet(G, circ(x_, y_)), right)


def ge5(n: int) -> IdentityScheme:
    gn = gpow(n)
    return IdentityScheme("ge5", circ(meet(x_, gn), meet(neg(x_), gn)), BOT, n)


def ge7() -> IdentityScheme:
    return IdentityScheme("ge7", c(x_), c(meet(x_, neg(circ(x_, neg(E))))))


def ge_identities(max_index: int) -> list[IdentityScheme]:
    """The six identities, schemes instantiated for indices 0..max_index."""
    out = [ge0()]
    out += [ge1(n) for n in range(max_index + 1)]
    out += [ge2(), ge4()]
    out += [ge5(n) for n in range(max_index + 1)]
    out.append(ge7())
    return out


def check_identity(
    scheme: IdentityScheme,
    alg: FiniteCBM,
    mode: str = "exhaustive",
    seed: int = 0,
    trials: int = 10_000,
) -> IdentityResult:
    """Exhaustive mode decides; random mode can only find counterexamples.

    The exhaustive counterexample is the lexicographically least assignment
    (variables in order of first appearance).
    """
    vs = scheme.variables
    n = alg.size
    if mode == "exhaustive":
        total = n ** len(vs)
        if total > EXHAUSTIVE_LIMIT:
            raise SizeLimitError(f"{total} assignments exceed the exhaustive limit {EXHAUSTIVE_LIMIT}")
        if not vs:
            lv, rv = eval_term(scheme.left, alg), eval_term(scheme.right, alg)
            return IdentityResult(scheme, lv == rv, None if lv == rv else {}, 1, mode)
        rest = len(vs) - 1
        tail_grid = (
            np.indices((n,) * rest, dtype=np.uint16).reshape(rest, -1) if rest else np.zeros((0, 1), np.uint16)
        )
        for first in range(n):
            env = {vs[0]: np.full(tail_grid.shape[1], first, dtype=np.uint16)}
            for i, v in enumerate(vs[1:]):
                env[v] = tail_grid[i]
            bad = _mismatch(scheme, alg, env)
            if bad is not None:
                cex = {v: int(env[v][bad]) for v in vs}
                return IdentityResult(scheme, False, cex, first * tail_grid.shape[1] + bad + 1, mode)
        return IdentityResult(scheme, True, None, total, mode)
    if mode == "random":
        rng = np.random.default_rng(seed)
        env = {v: rng.integers(0, n, size=trials, dtype=np.uint16) for v in vs}
        if not vs:
            return check_identity(scheme, alg, "exhaustive")
        bad = _mismatch(scheme, alg, env)
        if bad is not None:
            return IdentityResult(scheme, False, {v: int(env[v][bad]) for v in vs}, bad + 1, mode)
        return IdentityResult(scheme, True, None, trials, mode)
    raise AlgebraError(f"unknown mode {mode!r}")


def _mismatch(scheme: IdentityScheme, alg: FiniteCBM, env) -> int | None:
    cache: dict = {}
    lv = np.broadcast_to(_eval_vec(scheme.left, alg, env, cache), next(iter(env.values())).shape)
    rv = np.broadcast_to(_eval_vec(scheme.right, alg, env, cache), lv.shape)
    diff = np.flatnonzero(lv != rv)
    return int(diff[0]) if diff.size else None


# ---------------------------------------------------------------------------
# congruences


@dataclass(frozen=True)
class CongruenceIdeal:
    generator: int
    elements: frozenset[int]

    def __len__(self):
        return len(self.elements)

    def __le__(self, other: CongruenceIdeal) -> bool:
        return self.generator & ~other.generator == 0


def congruence_elements(alg: FiniteCBM) -> list[int]:
    return [x for x in alg.elements() if alg.c(x) == x]


def _check_size(alg: FiniteCBM) -> None:
    if alg.size > CONGRUENCE_LIMIT:
        raise SizeLimitError(f"{alg.size} elements exceed the limit {CONGRUENCE_LIMIT}")


def _subsets(x: int) -> list[int]:
    out, s = [], x
    while True:
        out.append(s)
        if s == 0:
            break
        s = (s - 1) & x
    return sorted(out)


def congruences(alg: FiniteCBM) -> list[CongruenceIdeal]:
    """All congruence ideals, as principal ideals below congruence elements.

    Sorted by size then generator, which is a linear extension of inclusion.
    """
    _check_size(alg)
    out = []
    for x in congruence_elements(alg):
        ideal = CongruenceIdeal(x, frozenset(_subsets(x)))
        _verify_ideal(alg, ideal)
        out.append(ideal)
    out.sort(key=lambda i: (len(i), i.generator))
    return out


def _verify_ideal(alg: FiniteCBM, ideal: CongruenceIdeal) -> None:
    els = ideal.elements
    for y in els:
        if alg.c(y) not in els:
            raise AlgebraError(f"ideal below {ideal.generator} not closed under c")
    for y in els:
        for z in els:
            if (y | z) not in els:
                raise AlgebraError("ideal not closed under joins")


def is_chain(ideals: Sequence[CongruenceIdeal]) -> bool:
    return all(a <= b for a, b in zip(ideals, ideals[1:]))


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class Classification:
    subdirectly_irreducible: bool
    simple: bool
    annihilators: tuple[int, ...]
    isomorphic_to_bn: int | None
    congruence_elements_chain: bool
    e_is_atom: bool
    monolith: int | None


def annihilators(alg: FiniteCBM) -> list[int]:
    """Nonzero z with x o z = z for every nonzero x."""
    nonzero = range(1, alg.size)
    return [z for z in nonzero if all(alg.compose(x, z) == z for x in nonzero)]


def g_element(alg: FiniteCBM) -> int:
    return eval_term(G, alg)


def recognize_bn(alg: FiniteCBM) -> int | None:
    """Return n if ``alg`` is isomorphic to B_n, via the powers of g."""
    g = g_element(alg)
    powers = [alg.identity]
    while powers[-1] != 0:
        if len(powers) > alg.atom_count:
            return None
        powers.append(alg.compose(powers[-1], g))
    powers.pop()
    n = len(powers) - 1
    if n + 1 != alg.atom_count:
        return None
    if any(_popcount(p) != 1 for p in powers):
        return None
    joined = 0
    for p in powers:
        joined |= p
    if joined != alg.top:
        return None
    for i, pi in enumerate(powers):
        for j, pj in enumerate(powers):
            want = powers[i + j] if i + j <= n else 0
            if alg.compose(pi, pj) != want:
                return None
    return n


def classify(alg: FiniteCBM) -> Classification:
    _check_size(alg)
    ce = congruence_elements(alg)
    nonzero = [x for x in ce if x]
    minimal = [x for x in nonzero if not any(y != x and y & ~x == 0 for y in nonzero)]
    si = len(minimal) == 1
    simple = all(alg.c(x) == alg.top for x in range(1, alg.size))
    chain = all(x & ~y == 0 or y & ~x == 0 for x, y in itertools.combinations(ce, 2))
    return Classification(
        subdirectly_irreducible=si,
        simple=simple,
        annihilators=tuple(annihilators(alg)),
        isomorphic_to_bn=recognize_bn(alg),
        congruence_elements_chain=chain,
        e_is_atom=_popcount(alg.identity) == 1,
        monolith=minimal[0] if si else None,
    )


# ---------------------------------------------------------------------------
# the quotient map onto B_n


def quotient_pi(n: int, a: FinCofSet) -> int:
    """Element of B_n given by the atoms g_i with i in a and i <= n."""
    return sum(1 << i for i in range(n + 1) if i in a)


# ---------------------------------------------------------------------------
# idempotent subsemigroup generated by powers of primes


@dataclass(frozen=True)
class PoIdempotentReport:
    primes: tuple[int, ...]
    bound: int
    elements: dict[tuple[int, ...], tuple[int, ...]]
    idempotent: dict[tuple[int, ...], bool]
    matches_oracle: dict[tuple[int, ...], bool]
    closed: bool
    distinct: bool
    absorbing: tuple[int, ...] | None
    identity: tuple[int, ...] | None

    @property
    def ok(self) -> bool:
        return (
            all(self.idempotent.values())
            and all(self.matches_oracle.values())
            and self.distinct
            and self.closed
        )


def _smooth_numbers(ps: Sequence[int], bound: int) -> set[int]:
    """Products of powers of ``ps`` in [1, bound] by direct enumeration."""
    out = {1}
    for p in ps:
        grown = set()
        for m in out:
            v = m
            while v <= bound:
                grown.add(v)
                v *= p
        out = grown
    return out


def check_po_idempotents(primes: Sequence[int], bound: int) -> PoIdempotentReport:
    from .circuit import evaluate
    from .stdlib import po_p

    ps = tuple(primes)
    if not ps or len(ps) > 3:
        raise AlgebraError("between one and three primes")
    if len(set(ps)) != len(ps) or not all(is_prime(p) for p in ps):
        raise AlgebraError(f"need distinct primes, got {ps}")
    window_mask = ((1 << (bound + 1)) - 1) & ~1  # positions 1..bound

    gens = {p: evaluate(po_p(p), window=bound).output for p in ps}
    subsets = [m for r in range(1, len(ps) + 1) for m in itertools.combinations(ps, r)]
    windows: dict[tuple[int, ...], WindowSet] = {}
    for m in subsets:
        acc = gens[m[0]]
        for p in m[1:]:
            acc = otimes(acc, gens[p])
        windows[m] = acc

    def bits(w: WindowSet) -> int:
        return w.bits & window_mask

    elements = {m: tuple(i for i in w.elements() if i >= 1) for m, w in windows.items()}
    idem = {m: bits(otimes(w, w)) == bits(w) and not (w.unknown & window_mask) for m, w in windows.items()}
    oracle = {m: set(elements[m]) == _smooth_numbers(m, bound) for m in subsets}
    distinct = len({bits(w) for w in windows.values()}) == len(windows)
    closed = all(
        bits(otimes(windows[m1], windows[m2])) == bits(windows[tuple(sorted(set(m1) | set(m2), key=ps.index))])
        for m1 in subsets
        for m2 in subsets
    )
    full = tuple(ps)
    absorbing = full if all(bits(otimes(windows[full], w)) == bits(windows[full]) for w in windows.values()) else None
    identity = None
    for m, u in windows.items():
        if all(bits(otimes(u, w)) == bits(w) for w in windows.values()):
            identity = m
            break
    return PoIdempotentReport(ps, bound, elements, idem, oracle, closed, distinct, absorbing, identity)
