"""Reference computations written independently of the package.

Nothing here imports setcircuits; circuits are read through their public
``nodes`` / ``output`` fields only.
"""

from __future__ import annotations

import math
import random


def sieve(limit: int) -> set[int]:
    flags = [True] * (limit + 1)
    flags[0:2] = [False, False][: limit + 1]
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = [False] * len(flags[p * p :: p])
    return {i for i, f in enumerate(flags) if f}


def big_omega(m: int) -> int:
    count, p = 0, 2
    while p * p <= m:
        while m % p == 0:
            m //= p
            count += 1
        p += 1
    return count + (1 if m > 1 else 0)


def powers(p: int, bound: int) -> set[int]:
    out, q = set(), 1
    while q <= bound:
        out.add(q)
        q *= p
    return out


def naive_eval(c, horizon: int, env: dict[str, set[int]] | None = None) -> list[set[int]]:
    """Every node as an explicit set cut to [0, horizon].

    Products by double loop, sums by shifting. The zero rule of ``times`` uses nonemptiness of
    the cut operands, so for bit 0 the answer is only a lower bound unless the
    horizon is large enough.
    """
    env = env or {}
    full = set(range(horizon + 1))
    vals: list[set[int]] = []
    for nd in c.nodes:
        op = nd.op
        if op == "const":
            v = {nd.value} if nd.value <= horizon else set()
        elif op == "empty":
            v = set()
        elif op == "omega":
            v = set(full)
        elif op == "var":
            v = {x for x in env[nd.value] if x <= horizon}
        elif op == "comp":
            v = full - vals[nd.args[0]]
        elif op == "down":
            a = vals[nd.args[0]]
            v = set(range(max(a) + 1)) if a else set()
        else:
            a, b = vals[nd.args[0]], vals[nd.args[1]]
            if op == "union":
                v = a | b
            elif op == "inter":
                v = a & b
            elif op == "plus":
                bm = sum(1 << y for y in b)
                acc = 0
                for x in a:
                    acc |= bm << x
                acc &= (1 << (horizon + 1)) - 1
                v = {i for i in range(acc.bit_length()) if acc >> i & 1}
            else:
                v = set()
                for x in sorted(a):
                    if x == 0:
                        continue
                    for y in sorted(b):
                        if y == 0:
                            continue
                        if x * y > horizon:
                            break
                        v.add(x * y)
                if (0 in a and b) or (0 in b and a):
                    v.add(0)
        vals.append(v)
    return vals


def random_circuit(rng: random.Random, builder_cls, depth: int, ops, max_const: int = 11, variables=()):
    b = builder_cls()

    def leaf():
        r = rng.random()
        if variables and r < 0.2:
            return b.var(rng.choice(variables))
        if r < 0.8:
            return b.const(rng.randrange(max_const + 1))
        return b.omega() if r < 0.9 else b.empty()

    def grow(d):
        if d == 0 or rng.random() < 0.25:
            return leaf()
        op = rng.choice(ops)
        if op in ("comp", "down"):
            return b.gate(op, grow(d - 1))
        return b.gate(op, grow(d - 1), grow(d - 1))

    return b.build(grow(depth))


# ---------------------------------------------------------------------------
# algebra oracles


def bn_compose(n: int, x: int, y: int) -> int:
    """Elements of B_n as bitmasks over atoms g_0..g_n."""
    out = 0
    for i in range(n + 1):
        if x >> i & 1:
            for j in range(n + 1 - i):
                if y >> j & 1:
                    out |= 1 << (i + j)
    return out


# ---------------------------------------------------------------------------
# grammar oracle


def lengths_by_saturation(rules: dict[str, list[list[list[str]]]], k: int) -> dict[str, set[int]]:
    """Least (nonterminal, length) facts, lengths <= k; 'a' is the terminal."""
    facts = {nt: set() for nt in rules}
    changed = True
    while changed:
        changed = False
        for nt, alts in rules.items():
            for alt in alts:
                common = None
                for conj in alt:
                    acc = {0}
                    for sym in conj:
                        step = {1} if sym == "a" else facts[sym]
                        acc = {x + y for x in acc for y in step if x + y <= k}
                    common = acc if common is None else common & acc
                if common - facts[nt]:
                    facts[nt] |= common
                    changed = True
    return facts


def random_grammar_text(rng: random.Random, max_nts: int = 4, max_alts: int = 3) -> str:
    nts = [f"N{i}" for i in range(rng.randint(1, max_nts))]
    lines = []
    for nt in nts:
        alts = []
        for _ in range(rng.randint(1, max_alts)):
            conjs = []
            for _ in range(rng.choice([1, 1, 2])):
                length = rng.randint(0, 3)
                syms = [rng.choice(nts + ["a", "a"]) for _ in range(length)]
                conjs.append(" ".join(syms) if syms else "eps")
            alts.append(" & ".join(conjs))
        lines.append(f"{nt} -> {' | '.join(alts)}")
    return "\n".join(lines)


def grammar_rules(text: str) -> dict[str, list[list[list[str]]]]:
    """Plain reading of the grammar text format, for the oracles."""
    rules: dict[str, list[list[list[str]]]] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, body = (p.strip() for p in line.split("->", 1))
        for alt in body.split("|"):
            conjs = []
            for conj in alt.split("&"):
                syms = [s for s in conj.split() if s not in ("eps", "ε")]
                conjs.append(syms)
            rules.setdefault(head, []).append(conjs)
    return rules


def relaxed_productive(rules) -> set[str]:
    """Nonterminals productive when every conjunct only needs to be productive.

    A nonterminal outside this set has an empty language.
    """
    prod: set[str] = set()
    changed = True
    while changed:
        changed = False
        for nt, alts in rules.items():
            if nt in prod:
                continue
            if any(all(all(s == "a" or s in prod for s in conj) for conj in alt) for alt in alts):
                prod.add(nt)
                changed = True
    return prod
