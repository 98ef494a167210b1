"""Equations between set terms and their bounded-stage semantics.

A stage-``n`` solution assigns every variable a subset of ``[0, n]`` such
that both sides of each equation agree on ``[0, n]`` when evaluated over the
truncated sets. Stage satisfiability is decidable by search; a system with
no stage-``n`` solution has no solution at all (for the fragments accepted by
:func:`semidecide_unsat`), which gives a semidecision for unsatisfiability.

Terms are written as s-expressions::

    (= (plus x (const 1)) (comp x))
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .circuit import ARITY, Circuit, CircuitBuilder
from .natset import FinCofSet, TailHint, WindowSet, _bit_positions, _product_mask
from .stdlib import VAR, disc_plus_leq, disc_plus_times

EXHAUSTIVE_BITS = 24
LOCAL_OPS = frozenset({"const", "empty", "omega", "var", "union", "inter", "comp", "plus"})


class EquationError(ValueError):
    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        super().__init__(f"offset {pos}: {message}" if pos is not None else message)


class SearchLimitError(EquationError):
    pass


# ---------------------------------------------------------------------------
# s-expressions


def _tokenize(text: str) -> list[tuple[str, int]]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in ";#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch.isspace():
            i += 1
        elif ch in "()":
            toks.append((ch, i))
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();#":
                j += 1
            toks.append((text[i:j], i))
            i = j
    return toks


def _read(toks, k):
    if k >= len(toks):
        raise EquationError("unexpected end of input")
    tok, pos = toks[k]
    if tok == ")":
        raise EquationError("unexpected ')'", pos)
    if tok != "(":
        return (tok, pos), k + 1
    items = []
    k += 1
    while True:
        if k >= len(toks):
            raise EquationError("unclosed '('", pos)
        if toks[k][0] == ")":
            return (items, pos), k + 1
        item, k = _read(toks, k)
        items.append(item)


def _read_all(text: str):
    toks = _tokenize(text)
    out, k = [], 0
    while k < len(toks):
        item, k = _read(toks, k)
        out.append(item)
    return out


_UNARY = ("comp", "down")
_BINARY = ("union", "inter", "plus", "times")


def _build(b: CircuitBuilder, sx) -> int:
    body, pos = sx
    if isinstance(body, str):
        if body == "empty":
            return b.empty()
        if body == "omega":
            return b.omega()
        if body.isdigit():
            return b.const(int(body))
        if not (body[0].isalpha() or body[0] == "_"):
            raise EquationError(f"bad symbol {body!r}", pos)
        if body in ARITY:
            raise EquationError(f"operator {body!r} used as a variable", pos)
        return b.var(body)
    if not body:
        raise EquationError("empty form", pos)
    head, hpos = body[0]
    if not isinstance(head, str):
        raise EquationError("operator expected", hpos)
    args = body[1:]
    if head == "const":
        if len(args) != 1 or not isinstance(args[0][0], str) or not args[0][0].isdigit():
            raise EquationError("(const n) needs one natural number", pos)
        return b.const(int(args[0][0]))
    if head in _UNARY:
        if len(args) != 1:
            raise EquationError(f"{head} takes one argument", pos)
        return b.gate(head, _build(b, args[0]))
    if head in _BINARY:
        if len(args) < 2:
            raise EquationError(f"{head} takes at least two arguments", pos)
        acc = _build(b, args[0])
        for a in args[1:]:
            acc = b.gate(head, acc, _build(b, a))
        return acc
    raise EquationError(f"unknown operator {head!r}", hpos)


def parse_term(text: str) -> Circuit:
    forms = _read_all(text)
    if len(forms) != 1:
        raise EquationError(f"expected one term, found {len(forms)}")
    b = CircuitBuilder()
    return b.build(_build(b, forms[0]))


def format_term(c: Circuit, i: int | None = None) -> str:
    nd = c.nodes[c.output if i is None else i]
    if nd.op == "const":
        return f"(const {nd.value})"
    if nd.op == "var":
        return nd.value
    if nd.op in ("empty", "omega"):
        return nd.op
    return "(" + " ".join([nd.op] + [format_term(c, a) for a in nd.args]) + ")"


# ---------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class Equation:
    lhs: Circuit
    rhs: Circuit

    def __str__(self):
        return f"(= {format_term(self.lhs)} {format_term(self.rhs)})"

    @property
    def ops(self) -> frozenset[str]:
        return frozenset(nd.op for c in (self.lhs, self.rhs) for nd in c.nodes)

    @property
    def variables(self) -> tuple[str, ...]:
        vs = list(self.lhs.variables)
        vs += [v for v in self.rhs.variables if v not in vs]
        return tuple(vs)


def _is_empty_term(c: Circuit) -> bool:
    return c.nodes[c.output].op == "empty"


def _bare_var(c: Circuit) -> str | None:
    nd = c.nodes[c.output]
    return nd.value if nd.op == "var" else None


@dataclass(frozen=True)
class EquationSystem:
    equations: tuple[Equation, ...]
    variables: tuple[str, ...] = ()

    def __post_init__(self):
        seen = list(self.variables)
        for eq in self.equations:
            seen += [v for v in eq.variables if v not in seen]
        object.__setattr__(self, "variables", tuple(seen))

    @property
    def monotone(self) -> bool:
        return all("comp" not in eq.ops for eq in self.equations)

    def __str__(self):
        return "\n".join(map(str, self.equations))

    def with_equations(self, *eqs: Equation) -> EquationSystem:
        return EquationSystem(self.equations + tuple(eqs), self.variables)


def equation(lhs: str | Circuit, rhs: str | Circuit) -> Equation:
    l = parse_term(lhs) if isinstance(lhs, str) else lhs
    r = parse_term(rhs) if isinstance(rhs, str) else rhs
    return Equation(l, r)


def parse_system(text: str) -> EquationSystem:
    forms = _read_all(text)
    # a single outer list of equations is also accepted
    if len(forms) == 1 and isinstance(forms[0][0], list) and forms[0][0] and isinstance(forms[0][0][0][0], list):
        forms = forms[0][0]
    eqs = []
    for body, pos in forms:
        if not isinstance(body, list) or not body or body[0][0] != "=":
            raise EquationError("expected (= lhs rhs)", pos)
        if len(body) != 3:
            raise EquationError("(= lhs rhs) takes two sides", pos)
        bl, br = CircuitBuilder(), CircuitBuilder()
        eqs.append(Equation(bl.build(_build(bl, body[1])), br.build(_build(br, body[2]))))
    if not eqs:
        raise EquationError("no equations")
    return EquationSystem(tuple(eqs))


@dataclass(frozen=True)
class ResolvedSystem:
    """One defining term per variable, ``X_i = phi_i(X)``, all monotone."""

    defs: Mapping[str, Circuit]

    def __post_init__(self):
        for v, c in self.defs.items():
            bad = {nd.op for nd in c.nodes} & {"comp"}
            if bad:
                raise EquationError(f"definition of {v} is not monotone (uses complement)")
            for w in c.variables:
                if w not in self.defs:
                    raise EquationError(f"definition of {v} mentions undefined variable {w}")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.defs)

    def to_system(self) -> EquationSystem:
        eqs = []
        for v, c in self.defs.items():
            b = CircuitBuilder()
            eqs.append(Equation(b.build(b.var(v)), c))
        return EquationSystem(tuple(eqs), tuple(self.defs))


# ---------------------------------------------------------------------------
# stage semantics over bitmasks


def stage_eval(c: Circuit, env: Mapping[str, int], n: int) -> int:
    """Value of ``c`` over subsets of [0, n], as a bitmask."""
    mask = (1 << (n + 1)) - 1
    vals: list[int] = []
    for nd in c.nodes:
        op = nd.op
        if op == "const":
            v = 1 << nd.value if nd.value <= n else 0
        elif op == "empty":
            v = 0
        elif op == "omega":
            v = mask
        elif op == "var":
            v = env[nd.value] & mask
        elif op == "comp":
            v = ~vals[nd.args[0]] & mask
        elif op == "down":
            a = vals[nd.args[0]]
            v = (1 << a.bit_length()) - 1
        else:
            a, b = vals[nd.args[0]], vals[nd.args[1]]
            if op == "union":
                v = a | b
            elif op == "inter":
                v = a & b
            elif op == "plus":
                v = 0
                for i in _bit_positions(a):
                    v |= b << i
                v &= mask
            else:
                v = _product_mask(a, b, n)
                if (a & 1 and b) or (b & 1 and a):
                    v |= 1
        vals.append(v)
    return vals[c.output]


def stage_holds(eq: Equation, env: Mapping[str, int], n: int) -> bool:
    return stage_eval(eq.lhs, env, n) == stage_eval(eq.rhs, env, n)


def satisfies(system: EquationSystem, env: Mapping[str, int], n: int) -> bool:
    return all(stage_holds(eq, env, n) for eq in system.equations)


def _is_local(eq: Equation) -> bool:
    """Bits 0..k of both sides depend only on bits 0..k of the variables."""
    return eq.ops <= LOCAL_OPS


# ---------------------------------------------------------------------------
# least fixpoints


def _kleene(defs: Mapping[str, Circuit], n: int, start: Mapping[str, int] | None = None):
    env = {v: 0 for v in defs}
    if start:
        env.update(start)
    iterations = 0
    while True:
        nxt = {v: stage_eval(c, env, n) for v, c in defs.items()}
        iterations += 1
        if nxt == env:
            return env, iterations
        env = nxt


@dataclass(frozen=True)
class FixpointResult:
    values: dict[str, WindowSet]
    iterations: int

    def elements(self, v: str) -> list[int]:
        return self.values[v].elements()


def least_fixpoint(rs: ResolvedSystem, bound: int) -> FixpointResult:
    """Kleene iteration from the all-empty assignment over [0, bound].

    For definitions built from union, intersection, plus and constants the
    bits equal the true least solution cut to [0, bound]. With ``times`` or
    ``down`` they are the least stage solution. No claim is made above the
    window.
    """
    env, iterations = _kleene(rs.defs, bound)
    values = {v: WindowSet(bound, bits, TailHint.UNKNOWN) for v, bits in env.items()}
    return FixpointResult(values, iterations)


def _split_resolved(system: EquationSystem):
    """Split into monotone definitions plus ``term = empty`` constraints.

    Returns ``(defs, constraints)`` or None if the system has another shape.
    """
    if not system.monotone:
        return None
    defs: dict[str, Circuit] = {}
    constraints: list[Circuit] = []
    for eq in system.equations:
        if _is_empty_term(eq.rhs):
            constraints.append(eq.lhs)
        elif _is_empty_term(eq.lhs):
            constraints.append(eq.rhs)
        else:
            lv, rv = _bare_var(eq.lhs), _bare_var(eq.rhs)
            if lv is not None and lv not in defs:
                defs[lv] = eq.rhs
            elif rv is not None and rv not in defs:
                defs[rv] = eq.lhs
            else:
                return None
    b = CircuitBuilder()
    for v in system.variables:
        if v not in defs:
            # free variable: its least choice is empty
            defs[v] = b.build(b.empty())
    return defs, constraints


def resolve(system: EquationSystem) -> ResolvedSystem:
    """View a system of definitions ``x = phi`` as a resolved system."""
    split = _split_resolved(system)
    if split is None or split[1]:
        raise EquationError("not a resolved system: need one monotone definition 'x = term' per variable")
    return ResolvedSystem(split[0])


# ---------------------------------------------------------------------------
# bounded-stage search


@dataclass(frozen=True)
class StageResult:
    n: int
    status: str  # "found", "none" or "budget"
    assignment: dict[str, tuple[int, ...]] | None = None
    method: str = "search"
    explored: int = 0
    seed: int | None = None

    @property
    def found(self) -> bool:
        return self.status == "found"


class _Budget(Exception):
    pass


def _masks_to_sets(variables, masks) -> dict[str, tuple[int, ...]]:
    return {v: tuple(_bit_positions(m)) for v, m in zip(variables, masks)}


def _sets_to_masks(variables, sets) -> dict[str, int]:
    out = {}
    for v in variables:
        out[v] = sum(1 << i for i in sets.get(v, ()))
    return out


def _dfs(system: EquationSystem, n: int, lower: Mapping[str, int] | None, budget: int | None,
         counter: list[int]) -> Iterator[dict[str, int]]:
    """Solutions in lexicographic order of (bits at 0, bits at 1, ...).

    Within a position the first variable is the most significant bit.
    """
    vs = system.variables
    m = len(vs)
    local = [eq for eq in system.equations if _is_local(eq)]
    lower_bits = [lower.get(v, 0) if lower else 0 for v in vs]
    env = {v: 0 for v in vs}

    def forced(k: int) -> int:
        f = 0
        for i in range(m):
            if lower_bits[i] >> k & 1:
                f |= 1 << (m - 1 - i)
        return f

    def rec(k: int):
        if k > n:
            if all(stage_holds(eq, env, n) for eq in system.equations):
                yield dict(env)
            return
        need = forced(k)
        for vec in range(1 << m):
            if vec & need != need:
                continue
            counter[0] += 1
            if budget is not None and counter[0] > budget:
                raise _Budget
            for i, v in enumerate(vs):
                bit = vec >> (m - 1 - i) & 1
                env[v] = (env[v] & ~(1 << k)) | (bit << k)
            if all(stage_holds(eq, env, k) for eq in local):
                yield from rec(k + 1)
        for v in vs:
            env[v] &= ~(1 << k)

    if m == 0:
        counter[0] += 1
        if satisfies(system, {}, n):
            yield {}
        return
    yield from rec(0)


def _check_exhaustive(system: EquationSystem, n: int) -> None:
    bits = len(system.variables) * (n + 1)
    if bits > EXHAUSTIVE_BITS:
        raise SearchLimitError(
            f"{bits} assignment bits exceed the exhaustive limit {EXHAUSTIVE_BITS}; "
            "use mode='random' with a budget"
        )


def bounded_sat(
    system: EquationSystem,
    n: int,
    mode: str = "exhaustive",
    budget: int | None = None,
    seed: int = 0,
    lower: Mapping[str, int] | None = None,
) -> StageResult:
    """Look for a stage-``n`` solution.

    Exhaustive mode decides and returns the lexicographically least solution.
    Systems made of monotone definitions and ``term = empty`` constraints are
    decided through their least stage fixpoint, which is that same solution,
    so the size limit does not apply to them. Random mode is sound for
    ``found`` only and reports ``budget`` when it gives up.
    """
    if n < 0:
        raise EquationError("stage must be a natural number")
    vs = system.variables
    if mode == "random":
        rng = random.Random(seed)
        trials = budget if budget is not None else 10_000
        full = (1 << (n + 1)) - 1
        for t in range(trials):
            env = {v: rng.getrandbits(n + 1) & full for v in vs}
            if lower:
                env = {v: env[v] | lower.get(v, 0) for v in vs}
            if satisfies(system, env, n):
                return StageResult(n, "found", _masks_to_sets(vs, [env[v] for v in vs]), "random", t + 1, seed)
        return StageResult(n, "budget", None, "random", trials, seed)
    if mode != "exhaustive":
        raise EquationError(f"unknown mode {mode!r}")

    split = _split_resolved(system)
    if split is not None:
        defs, constraints = split
        env, iterations = _kleene(defs, n)
        covers = not lower or all(lower.get(v, 0) & ~env[v] == 0 for v in vs)
        if covers:
            ok = all(stage_eval(c, env, n) == 0 for c in constraints)
            if ok:
                return StageResult(n, "found", _masks_to_sets(vs, [env[v] for v in vs]), "least-fixpoint", iterations)
            if not lower:
                return StageResult(n, "none", None, "least-fixpoint", iterations)
    _check_exhaustive(system, n)
    counter = [0]
    try:
        for sol in _dfs(system, n, lower, budget, counter):
            return StageResult(n, "found", _masks_to_sets(vs, [sol[v] for v in vs]), "search", counter[0])
    except _Budget:
        return StageResult(n, "budget", None, "search", counter[0])
    return StageResult(n, "none", None, "search", counter[0])


def stage_solutions(system: EquationSystem, n: int, lower: Mapping[str, int] | None = None) -> Iterator[dict[str, tuple[int, ...]]]:
    """Every stage-``n`` solution, lexicographically ordered."""
    _check_exhaustive(system, n)
    vs = system.variables
    for sol in _dfs(system, n, lower, None, [0]):
        yield _masks_to_sets(vs, [sol[v] for v in vs])


def _require_stage_sound(system: EquationSystem) -> None:
    if not system.monotone:
        raise EquationError("stage semidecision needs a monotone system (no complement)")
    for eq in system.equations:
        if _is_empty_term(eq.lhs) or _is_empty_term(eq.rhs):
            continue
        if not _is_local(eq):
            raise EquationError(
                f"{eq}: times and down are only accepted in equations of the form "
                "term = empty; elsewhere cutting a solution to [0, n] need not give a stage solution"
            )


@dataclass(frozen=True)
class Semidecision:
    status: str  # "unsat" or "unknown"
    stage: int | None
    max_n: int
    note: str = ""


def semidecide_unsat(system: EquationSystem, max_n: int, budget: int | None = None) -> Semidecision:
    """Run stages 0..max_n; report the first stage without a solution.

    Never claims satisfiability.
    """
    _require_stage_sound(system)
    for n in range(max_n + 1):
        r = bounded_sat(system, n, budget=budget)
        if r.status == "none":
            return Semidecision("unsat", n, max_n)
        if r.status == "budget":
            return Semidecision("unknown", None, max_n, f"search budget exhausted at stage {n}")
    return Semidecision("unknown", None, max_n)


def stage_chain(system: EquationSystem, max_n: int, budget: int | None = None) -> list[dict[str, tuple[int, ...]]]:
    """A chain s_0 <= s_1 <= ... of stage solutions, as long as found up to max_n."""
    if not system.monotone:
        raise EquationError("stage chains need a monotone system (no complement)")
    vs = system.variables
    if _split_resolved(system) is not None:
        # least stage fixpoints grow with n, so they form the chain directly
        chain = []
        for n in range(max_n + 1):
            lower = _sets_to_masks(vs, chain[-1]) if chain else None
            r = bounded_sat(system, n, lower=lower)
            if not r.found:
                break
            chain.append(r.assignment)
        return chain

    best: list = []
    counter = [0]

    def extend(n: int, prefix: list) -> bool:
        nonlocal best
        if len(prefix) > len(best):
            best = list(prefix)
        if n > max_n:
            return True
        _check_exhaustive(system, n)
        lower = _sets_to_masks(vs, prefix[-1]) if prefix else None
        for sol in _dfs(system, n, lower, budget, counter):
            prefix.append(_masks_to_sets(vs, [sol[v] for v in vs]))
            if extend(n + 1, prefix):
                return True
            prefix.pop()
        return False

    try:
        extend(0, [])
    except _Budget:
        pass
    return best


# ---------------------------------------------------------------------------
# inequation to equation


def transform(
    tau: Circuit,
    sigma: Circuit,
    mode: str = "discriminator",
    disc: str = "discPlusTimes",
    allowed_ops: set[str] | frozenset[str] | None = None,
) -> Equation:
    """Turn ``tau != sigma`` into an equivalent equation.

    ``discriminator``: d(tau △ sigma) = omega, with d one of the two
    discriminator terms. ``annihilator``: {0} * (tau △ sigma) = {0}.
    """
    if mode == "discriminator":
        if disc == "discPlusTimes":
            d, needs = disc_plus_times(), {"plus", "times"}
        elif disc == "discPlusLeq":
            d, needs = disc_plus_leq(), {"plus", "down"}
        else:
            raise EquationError(f"unknown discriminator {disc!r}")
    elif mode == "annihilator":
        d, needs = None, {"times"}
    else:
        raise EquationError(f"unknown transform mode {mode!r}")
    needs |= {"union", "inter", "comp"}
    if allowed_ops is not None and not needs <= set(allowed_ops):
        missing = ", ".join(sorted(needs - set(allowed_ops)))
        raise EquationError(f"{mode} transform needs operations not in the fragment: {missing}")

    b = CircuitBuilder()
    t, s = b.include(tau), b.include(sigma)
    sym = b.union(b.inter(t, b.comp(s)), b.inter(s, b.comp(t)))
    if d is not None:
        lhs = b.include(d, bind={VAR: sym})
        rb = CircuitBuilder()
        return Equation(b.build(lhs), rb.build(rb.omega()))
    lhs = b.times(b.const(0), sym)
    rb = CircuitBuilder()
    return Equation(b.build(lhs), rb.build(rb.const(0)))


def fincof_holds(eq: Equation, assignment: Mapping[str, FinCofSet]) -> bool:
    from .circuit import evaluate

    return evaluate(eq.lhs, assignment).output == evaluate(eq.rhs, assignment).output
