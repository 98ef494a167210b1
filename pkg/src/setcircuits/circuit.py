"""Arithmetic circuits over sets of naturals.

A circuit is a DAG whose nodes are constants ``{n}``, ``empty``, ``omega``,
set variables, or gates (``comp``, ``down``, ``union``, ``inter``, ``plus``,
``times``). Nodes are stored in topological order, children first.

Text format, one statement per line::

    # the even numbers
    n1 = const 1
    n2 = omega
    n3 = plus n1 n1
    n4 = times n3 n2
    output n4
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import natset
from .natset import FinCofSet, NotClosedError, SetValue, TriBool, WindowSet

ARITY = {
    "const": 0,
    "empty": 0,
    "omega": 0,
    "var": 0,
    "comp": 1,
    "down": 1,
    "union": 2,
    "inter": 2,
    "plus": 2,
    "times": 2,
}
GATES = ("union", "inter", "comp", "plus", "times", "down")
ADDITIVE_GATES = frozenset({"union", "inter", "comp", "plus", "down"})


class CircuitError(ValueError):
    """Invalid circuit, optionally tied to a line of circuit text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Node:
    op: str
    args: tuple[int, ...] = ()
    value: int | str | None = None  # constant for "const", name for "var"


@dataclass(frozen=True)
class Circuit:
    nodes: tuple[Node, ...]
    output: int
    names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        validate(self)

    def __len__(self):
        return len(self.nodes)

    def name(self, i: int) -> str:
        return self.names[i] if self.names else f"n{i}"

    @property
    def variables(self) -> tuple[str, ...]:
        seen = []
        for nd in self.nodes:
            if nd.op == "var" and nd.value not in seen:
                seen.append(nd.value)
        return tuple(seen)

    @property
    def max_constant(self) -> int:
        return max((nd.value for nd in self.nodes if nd.op == "const"), default=0)

    def reachable(self) -> list[int]:
        """Indices of nodes feeding the output, ascending."""
        keep = {self.output}
        for i in range(self.output, -1, -1):
            if i in keep:
                keep.update(self.nodes[i].args)
        return sorted(keep)


@dataclass(frozen=True)
class FragmentInfo:
    ops: frozenset[str]
    monotone: bool
    additive_exact: bool


def validate(c: Circuit) -> None:
    """Raise :class:`CircuitError` unless ``c`` is a well-formed circuit."""
    if not c.nodes:
        raise CircuitError("circuit has no nodes, hence no output")
    if not 0 <= c.output < len(c.nodes):
        raise CircuitError(f"output index {c.output} out of range")
    for i, nd in enumerate(c.nodes):
        if nd.op not in ARITY:
            raise CircuitError(f"node {i}: unknown label {nd.op!r}")
        if len(nd.args) != ARITY[nd.op]:
            raise CircuitError(
                f"node {i}: {nd.op} takes {ARITY[nd.op]} argument(s), got {len(nd.args)}"
            )
        for a in nd.args:
            # children must precede their parent; this also rules out cycles
            if not 0 <= a < i:
                raise CircuitError(f"node {i}: child {a} does not precede it")
        if nd.op == "const" and not (isinstance(nd.value, int) and nd.value >= 0):
            raise CircuitError(f"node {i}: constant must be a natural number")
        if nd.op == "var" and not (isinstance(nd.value, str) and nd.value):
            raise CircuitError(f"node {i}: variable needs a name")


class CircuitBuilder:
    """Incremental construction with structural sharing of equal nodes."""

    def __init__(self):
        self.nodes: list[Node] = []
        self._index: dict[Node, int] = {}

    def _add(self, op, args=(), value=None) -> int:
        nd = Node(op, tuple(args), value)
        if nd not in self._index:
            self._index[nd] = len(self.nodes)
            self.nodes.append(nd)
        return self._index[nd]

    def const(self, n: int) -> int:
        return self._add("const", value=n)

    def empty(self) -> int:
        return self._add("empty")

    def omega(self) -> int:
        return self._add("omega")

    def var(self, name: str) -> int:
        return self._add("var", value=name)

    def comp(self, x: int) -> int:
        return self._add("comp", (x,))

    def down(self, x: int) -> int:
        return self._add("down", (x,))

    def union(self, a: int, b: int) -> int:
        return self._add("union", (a, b))

    def inter(self, a: int, b: int) -> int:
        return self._add("inter", (a, b))

    def plus(self, a: int, b: int) -> int:
        return self._add("plus", (a, b))

    def times(self, a: int, b: int) -> int:
        return self._add("times", (a, b))

    def gate(self, op: str, *args: int) -> int:
        return self._add(op, args)

    def include(self, c: Circuit, bind: Mapping[str, int] | None = None) -> int:
        """Copy ``c`` in, optionally substituting node ids for its variables."""
        bind = bind or {}
        remap: dict[int, int] = {}
        for i in c.reachable():
            nd = c.nodes[i]
            if nd.op == "var" and nd.value in bind:
                remap[i] = bind[nd.value]
            else:
                remap[i] = self._add(nd.op, [remap[a] for a in nd.args], nd.value)
        return remap[c.output]

    def build(self, output: int) -> Circuit:
        return Circuit(tuple(self.nodes), output)


# ---------------------------------------------------------------------------
# text format


def parse_circuit(text: str) -> Circuit:
    stmts: dict[str, tuple[int, str, list[str]]] = {}
    order: list[str] = []
    output: tuple[int, str] | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "output":
            if len(toks) != 2:
                raise CircuitError("expected 'output <id>'", lineno)
            if output is not None:
                raise CircuitError("duplicate output statement", lineno)
            output = (lineno, toks[1])
            continue
        if len(toks) < 3 or toks[1] != "=":
            raise CircuitError(f"expected '<id> = <label> ...', got {line!r}", lineno)
        ident, op, args = toks[0], toks[2], toks[3:]
        if op not in ARITY:
            raise CircuitError(f"unknown label {op!r}", lineno)
        if ident in stmts:
            raise CircuitError(f"node {ident!r} defined twice", lineno)
        if op in ("const", "var"):
            if len(args) != 1:
                raise CircuitError(f"{op} takes exactly one operand", lineno)
            if op == "const" and not args[0].isdigit():
                raise CircuitError(f"constant must be a natural number, got {args[0]!r}", lineno)
        elif len(args) != ARITY[op]:
            raise CircuitError(
                f"arity mismatch: {op} takes {ARITY[op]} argument(s), got {len(args)}", lineno
            )
        stmts[ident] = (lineno, op, args)
        order.append(ident)
    if output is None:
        raise CircuitError("no output statement")
    if output[1] not in stmts:
        raise CircuitError(f"output refers to undefined node {output[1]!r}", output[0])
    for ident in order:
        lineno, op, args = stmts[ident]
        if op not in ("const", "var"):
            for a in args:
                if a not in stmts:
                    raise CircuitError(f"dangling reference to {a!r}", lineno)

    # depth-first topological sort; grey nodes on the stack reveal cycles
    position: dict[str, int] = {}
    sorted_ids: list[str] = []
    state: dict[str, int] = {}

    def visit(root: str) -> None:
        stack = [(root, False)]
        while stack:
            ident, done = stack.pop()
            if done:
                state[ident] = 2
                position[ident] = len(sorted_ids)
                sorted_ids.append(ident)
                continue
            if state.get(ident) == 2:
                continue
            if state.get(ident) == 1:
                raise CircuitError(f"cycle through node {ident!r}", stmts[ident][0])
            state[ident] = 1
            stack.append((ident, True))
            lineno, op, args = stmts[ident]
            if op in ("const", "var"):
                continue
            for a in reversed(args):
                if state.get(a) == 1:
                    raise CircuitError(f"cycle through node {a!r}", lineno)
                if state.get(a) != 2:
                    stack.append((a, False))

    for ident in order:
        if ident not in state:
            visit(ident)

    nodes = []
    for ident in sorted_ids:
        _, op, args = stmts[ident]
        if op == "const":
            nodes.append(Node("const", (), int(args[0])))
        elif op == "var":
            nodes.append(Node("var", (), args[0]))
        else:
            nodes.append(Node(op, tuple(position[a] for a in args)))
    return Circuit(tuple(nodes), position[output[1]], tuple(sorted_ids))


def format_circuit(c: Circuit) -> str:
    lines = []
    for i, nd in enumerate(c.nodes):
        if nd.op in ("const", "var"):
            rhs = f"{nd.op} {nd.value}"
        else:
            rhs = " ".join([nd.op] + [c.name(a) for a in nd.args])
        lines.append(f"{c.name(i)} = {rhs}")
    lines.append(f"output {c.name(c.output)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# interpretation


@dataclass(frozen=True)
class Evaluation:
    values: tuple[SetValue, ...]
    output: SetValue
    engine: str


def evaluate(
    c: Circuit,
    assignment: Mapping[str, SetValue] | None = None,
    window: int | None = None,
) -> Evaluation:
    """Evaluate every node bottom-up.

    ``window=None`` selects the exact finite/cofinite engine, which raises
    :class:`NotClosedError` at a ``times`` gate whose result leaves that
    class. An integer selects the window engine over ``[0, window]``.
    """
    assignment = assignment or {}
    missing = [v for v in c.variables if v not in assignment]
    if missing:
        raise CircuitError(f"unbound variable(s): {', '.join(missing)}")

    def lift(x: SetValue) -> SetValue:
        if window is None:
            if not isinstance(x, FinCofSet):
                raise TypeError("the exact engine needs FinCofSet inputs")
            return x
        if isinstance(x, FinCofSet):
            return natset.to_window(x, window)
        if x.bound != window:
            raise natset.WindowMismatchError(
                f"assigned window bound {x.bound} differs from engine bound {window}"
            )
        return x

    values: list[SetValue] = []
    for i, nd in enumerate(c.nodes):
        op = nd.op
        if op == "const":
            v = lift(FinCofSet.singleton(nd.value))
        elif op == "empty":
            v = lift(natset.EMPTY)
        elif op == "omega":
            v = lift(natset.OMEGA)
        elif op == "var":
            v = lift(assignment[nd.value])
        elif op == "comp":
            v = natset.complement(values[nd.args[0]])
        elif op == "down":
            v = natset.down_close(values[nd.args[0]])
        else:
            a, b = values[nd.args[0]], values[nd.args[1]]
            if op == "union":
                v = natset.union(a, b)
            elif op == "inter":
                v = natset.inter(a, b)
            elif op == "plus":
                v = natset.oplus(a, b)
            else:
                try:
                    v = natset.otimes(a, b)
                except NotClosedError as exc:
                    raise NotClosedError(f"times gate {c.name(i)}: {exc}") from None
        values.append(v)
    engine = "fincof" if window is None else f"window({window})"
    return Evaluation(tuple(values), values[c.output], engine)


def default_bound(c: Circuit, n: int) -> int:
    return max(n, c.max_constant)


def member(
    c: Circuit,
    n: int,
    bound: int | None = None,
    assignment: Mapping[str, SetValue] | None = None,
) -> TriBool:
    """Decide ``n in I(c)`` with the window engine.

    IN/OUT answers are exact; UNDECIDED only comes from the zero rule of
    ``times`` or from ``down`` over an unknown tail.
    """
    if bound is None:
        bound = default_bound(c, n)
        for v in (assignment or {}).values():
            if isinstance(v, WindowSet):
                bound = v.bound
    if bound < n:
        raise ValueError(f"window bound {bound} is below the queried number {n}")
    return evaluate(c, assignment, window=bound).output.query(n)


def classify_fragment(c: Circuit) -> FragmentInfo:
    ops = frozenset(c.nodes[i].op for i in c.reachable() if c.nodes[i].op in GATES)
    return FragmentInfo(ops, "comp" not in ops, ops <= ADDITIVE_GATES)


OP_SYMBOLS = {
    "union": "∪",
    "inter": "∩",
    "comp": "⁻",
    "plus": "⊕",
    "times": "⊗",
    "down": "↓",
}
