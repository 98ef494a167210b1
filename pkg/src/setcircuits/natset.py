"""Subsets of the naturals and their complex operations.

Two value domains live here:

* :class:`FinCofSet` is exact. Every value is a finite set or the complement
  of one, which is closed under the Boolean operations, ``plus`` and ``down``.
  ``times`` leaves the class in general and is refused unless a window bound
  is supplied.
* :class:`WindowSet` is an approximation for circuits that need ``times``.
  Membership of ``0..bound`` is tracked three-valued (``bits`` are known
  members, ``unknown`` are undetermined positions) and a :class:`TailHint`
  records what is known above the bound.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Union


class NotClosedError(ValueError):
    """A ``times`` result is neither finite nor cofinite."""


class WindowMismatchError(ValueError):
    pass


class TriBool(enum.Enum):
    IN = "in"
    OUT = "out"
    UNDECIDED = "undecided"

    def __str__(self):
        return self.value.capitalize()


UNDECIDED = TriBool.UNDECIDED


class TailHint(enum.Enum):
    """Claim about the elements strictly above a window bound."""

    EMPTY = "empty"
    FULL = "full"
    NONEMPTY = "nonempty"
    UNKNOWN = "unknown"

    @property
    def has_element(self) -> bool:
        return self in (TailHint.FULL, TailHint.NONEMPTY)


# ---------------------------------------------------------------------------
# finite / cofinite engine


@dataclass(frozen=True)
class FinCofSet:
    """A finite or cofinite subset of the naturals.

    ``support`` is the set itself when ``cofinite`` is false and its
    complement otherwise, always strictly ascending, so equal sets compare
    equal structurally.
    """

    cofinite: bool
    support: tuple[int, ...]

    def __post_init__(self):
        s = self.support
        if any(x < 0 for x in s) or any(a >= b for a, b in zip(s, s[1:])):
            raise ValueError(f"support must be strictly ascending naturals: {s!r}")

    @classmethod
    def finite(cls, elems: Iterable[int] = ()) -> FinCofSet:
        return cls(False, tuple(sorted(set(elems))))

    @classmethod
    def cofinite_of(cls, missing: Iterable[int] = ()) -> FinCofSet:
        return cls(True, tuple(sorted(set(missing))))

    @classmethod
    def singleton(cls, n: int) -> FinCofSet:
        return cls(False, (n,))

    @property
    def kind(self) -> str:
        return "Cofinite" if self.cofinite else "Finite"

    def __contains__(self, n: int) -> bool:
        return (n in self._support_set) != self.cofinite

    @property
    def _support_set(self) -> frozenset[int]:
        # cached lazily; frozen dataclass needs object.__setattr__
        try:
            return self.__dict__["_sset"]
        except KeyError:
            s = frozenset(self.support)
            object.__setattr__(self, "_sset", s)
            return s

    def is_empty(self) -> bool:
        return not self.cofinite and not self.support

    def is_omega(self) -> bool:
        return self.cofinite and not self.support

    def min(self) -> int | None:
        if self.is_empty():
            return None
        if not self.cofinite:
            return self.support[0]
        n = 0
        for x in self.support:
            if x != n:
                break
            n += 1
        return n

    def max(self) -> int | None:
        """Largest element, ``None`` for the empty set; cofinite sets raise."""
        if self.cofinite:
            raise ValueError("a cofinite set has no maximum")
        return self.support[-1] if self.support else None

    def elements_upto(self, bound: int) -> list[int]:
        return [n for n in range(bound + 1) if n in self]

    def __str__(self):
        return format_set(self)

    def __repr__(self):
        return f"FinCofSet({format_set(self)})"

    def __or__(self, other):
        return union(self, other)

    def __and__(self, other):
        return inter(self, other)

    def __invert__(self):
        return complement(self)

    def __le__(self, other):
        return inter(self, other) == self


EMPTY = FinCofSet(False, ())
OMEGA = FinCofSet(True, ())


def _fc_union(a: FinCofSet, b: FinCofSet) -> FinCofSet:
    sa, sb = a._support_set, b._support_set
    if not a.cofinite and not b.cofinite:
        return FinCofSet.finite(sa | sb)
    if a.cofinite and b.cofinite:
        return FinCofSet.cofinite_of(sa & sb)
    fin, cof = (sa, sb) if b.cofinite else (sb, sa)
    return FinCofSet.cofinite_of(cof - fin)


def _fc_complement(a: FinCofSet) -> FinCofSet:
    return FinCofSet(not a.cofinite, a.support)


def _fc_inter(a: FinCofSet, b: FinCofSet) -> FinCofSet:
    return _fc_complement(_fc_union(_fc_complement(a), _fc_complement(b)))


def _fc_plus(a: FinCofSet, b: FinCofSet) -> FinCofSet:
    if a.is_empty() or b.is_empty():
        return EMPTY
    if not a.cofinite and not b.cofinite:
        return FinCofSet.finite(x + y for x in a.support for y in b.support)
    if not a.cofinite:
        a, b = b, a
    # a cofinite, b nonempty: every m > max(missing a) + min b is a sum
    threshold = (a.support[-1] + 1 if a.support else 0) + b.min()
    missing = [m for m in range(threshold) if not _plus_hits(a, b, m)]
    return FinCofSet.cofinite_of(missing)


def _plus_hits(a: FinCofSet, b: FinCofSet, m: int) -> bool:
    return any(k in b and (m - k) in a for k in range(m + 1))


def _times_closed(a: FinCofSet, b: FinCofSet) -> bool:
    if a.is_empty() or b.is_empty():
        return True
    if a == FinCofSet.singleton(0) or b == FinCofSet.singleton(0):
        return True
    if not a.cofinite and not b.cofinite:
        return True
    # a cofinite operand only stays cofinite when the other side contains 1
    if a.cofinite and 1 in b:
        return True
    if b.cofinite and 1 in a:
        return True
    return False


def _times_hits(a: FinCofSet, b: FinCofSet, m: int) -> bool:
    if m == 0:
        return (0 in a and not b.is_empty()) or (0 in b and not a.is_empty())
    return any(m % d == 0 and d in a and (m // d) in b for d in range(1, m + 1))


def _fc_times(a: FinCofSet, b: FinCofSet, window: int | None) -> FinCofSet | WindowSet:
    if not _times_closed(a, b):
        if window is None:
            raise NotClosedError(
                f"{format_set(a)} * {format_set(b)} is neither finite nor cofinite; "
                "use the window engine"
            )
        return _ws_times(to_window(a, window), to_window(b, window))
    if a.is_empty() or b.is_empty():
        return EMPTY
    zero = FinCofSet.singleton(0)
    if a == zero or b == zero:
        return zero
    if not a.cofinite and not b.cofinite:
        return FinCofSet.finite(x * y for x in a.support for y in b.support)
    # the partner contains 1, so the result contains this cofinite operand
    # and only its gaps can be missing
    big = a if (a.cofinite and 1 in b) else b
    return FinCofSet.cofinite_of(m for m in big.support if not _times_hits(a, b, m))


def _fc_down(a: FinCofSet) -> FinCofSet:
    if a.is_empty():
        return EMPTY
    if a.cofinite:
        return OMEGA
    return FinCofSet.finite(range(a.support[-1] + 1))


# ---------------------------------------------------------------------------
# window engine


@dataclass(frozen=True)
class WindowSet:
    """A subset of the naturals observed through ``[0, bound]``.

    ``bits`` has bit ``i`` set when ``i`` is known to be a member and
    ``unknown`` marks positions whose membership could not be determined.
    The two masks are disjoint. ``tail`` describes ``(bound, oo)``.
    """

    bound: int
    bits: int
    tail: TailHint = TailHint.UNKNOWN
    unknown: int = 0

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError("window bound must be a natural number")
        full = (1 << (self.bound + 1)) - 1
        if self.bits & ~full or self.unknown & ~full:
            raise ValueError("bits outside the window")
        if self.bits & self.unknown:
            raise ValueError("a position cannot be both known and unknown")

    @classmethod
    def from_elements(cls, bound: int, elems: Iterable[int], tail=TailHint.UNKNOWN) -> WindowSet:
        bits = 0
        for e in elems:
            if 0 <= e <= bound:
                bits |= 1 << e
        return cls(bound, bits, tail)

    @property
    def mask(self) -> int:
        return (1 << (self.bound + 1)) - 1

    @property
    def maybe(self) -> int:
        return self.bits | self.unknown

    def query(self, n: int) -> TriBool:
        if n < 0:
            raise ValueError("negative query")
        if n > self.bound:
            if self.tail is TailHint.EMPTY:
                return TriBool.OUT
            if self.tail is TailHint.FULL:
                return TriBool.IN
            return TriBool.UNDECIDED
        if self.bits >> n & 1:
            return TriBool.IN
        if self.unknown >> n & 1:
            return TriBool.UNDECIDED
        return TriBool.OUT

    def __contains__(self, n: int) -> bool:
        return self.query(n) is TriBool.IN

    def elements(self) -> list[int]:
        return _bit_positions(self.bits)

    def undecided(self) -> list[int]:
        return _bit_positions(self.unknown)

    def nonempty(self) -> bool | TriBool:
        """True/False when determined, ``UNDECIDED`` otherwise."""
        if self.bits or self.tail.has_element:
            return True
        if not self.unknown and self.tail is TailHint.EMPTY:
            return False
        return UNDECIDED

    def is_exact(self) -> bool:
        return not self.unknown

    def same_bits(self, other: WindowSet) -> bool:
        return self.bits == other.bits and self.unknown == other.unknown

    def __str__(self):
        return format_window(self)


def _bit_positions(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _check_bounds(a: WindowSet, b: WindowSet) -> None:
    if a.bound != b.bound:
        raise WindowMismatchError(f"window bounds differ: {a.bound} vs {b.bound}")


def _ws_union(a: WindowSet, b: WindowSet) -> WindowSet:
    _check_bounds(a, b)
    bits = a.bits | b.bits
    maybe = a.maybe | b.maybe
    ta, tb = a.tail, b.tail
    if ta is TailHint.FULL or tb is TailHint.FULL:
        tail = TailHint.FULL
    elif ta is TailHint.EMPTY:
        tail = tb
    elif tb is TailHint.EMPTY:
        tail = ta
    elif TailHint.NONEMPTY in (ta, tb):
        tail = TailHint.NONEMPTY
    else:
        tail = TailHint.UNKNOWN
    return WindowSet(a.bound, bits, tail, maybe & ~bits)


def _ws_inter(a: WindowSet, b: WindowSet) -> WindowSet:
    _check_bounds(a, b)
    bits = a.bits & b.bits
    maybe = a.maybe & b.maybe
    ta, tb = a.tail, b.tail
    if ta is TailHint.EMPTY or tb is TailHint.EMPTY:
        tail = TailHint.EMPTY
    elif ta is TailHint.FULL:
        tail = tb
    elif tb is TailHint.FULL:
        tail = ta
    else:
        tail = TailHint.UNKNOWN
    return WindowSet(a.bound, bits, tail, maybe & ~bits)


_TAIL_COMPLEMENT = {
    TailHint.EMPTY: TailHint.FULL,
    TailHint.FULL: TailHint.EMPTY,
    TailHint.NONEMPTY: TailHint.UNKNOWN,
    TailHint.UNKNOWN: TailHint.UNKNOWN,
}


def _ws_complement(a: WindowSet) -> WindowSet:
    bits = ~a.maybe & a.mask
    return WindowSet(a.bound, bits, _TAIL_COMPLEMENT[a.tail], a.unknown)


def _shift_sum(a: int, b: int, mask: int) -> int:
    """Bitmask of {i + j} for i in a, j in b, cut to ``mask``."""
    if a.bit_count() > b.bit_count():
        a, b = b, a
    out = 0
    for i in _bit_positions(a):
        out |= b << i
    return out & mask


def _run_start(w: WindowSet) -> int:
    """Least x with [x, bound] inside the known bits (bound + 1 if none)."""
    x = w.bound + 1
    while x > 0 and w.bits >> (x - 1) & 1:
        x -= 1
    return x


def _lowest(mask: int) -> int | None:
    return (mask & -mask).bit_length() - 1 if mask else None


def _highest(mask: int) -> int | None:
    return mask.bit_length() - 1 if mask else None


def _definitely_empty(w: WindowSet) -> bool:
    return w.nonempty() is False


def _ws_plus(a: WindowSet, b: WindowSet) -> WindowSet:
    _check_bounds(a, b)
    B = a.bound
    bits = _shift_sum(a.bits, b.bits, a.mask)
    maybe = _shift_sum(a.maybe, b.maybe, a.mask)
    tail = _plus_tail(a, b)
    return WindowSet(B, bits, tail, maybe & ~bits)


def _plus_tail(a: WindowSet, b: WindowSet) -> TailHint:
    B = a.bound
    if _definitely_empty(a) or _definitely_empty(b):
        return TailHint.EMPTY
    ne_a, ne_b = a.nonempty() is True, b.nonempty() is True
    for x, y in ((a, b), (b, a)):
        if x.tail is TailHint.FULL and y.bits:
            # x contains [run_start, oo); y's least known member shifts it
            if _run_start(x) + _lowest(y.bits) <= B + 1:
                return TailHint.FULL
    if (a.tail.has_element and ne_b) or (b.tail.has_element and ne_a):
        return TailHint.NONEMPTY
    if a.bits and b.bits and _highest(a.bits) + _highest(b.bits) > B:
        return TailHint.NONEMPTY
    if a.tail is TailHint.EMPTY and b.tail is TailHint.EMPTY:
        hi = (_highest(a.maybe) or 0) + (_highest(b.maybe) or 0)
        if hi <= B:
            return TailHint.EMPTY
    return TailHint.UNKNOWN


def _product_mask(a: int, b: int, B: int) -> int:
    """Bitmask of {i * j : 1 <= i, j; i*j <= B} (positions >= 1 only)."""
    out = 0
    bl = [j for j in _bit_positions(b) if j >= 1]
    if not bl:
        return 0
    for i in _bit_positions(a):
        if i == 0:
            continue
        lim = B // i
        for j in bl:
            if j > lim:
                break
            out |= 1 << (i * j)
    return out


def _ws_times(a: WindowSet, b: WindowSet) -> WindowSet:
    _check_bounds(a, b)
    B = a.bound
    bits = _product_mask(a.bits, b.bits, B)
    maybe = _product_mask(a.maybe, b.maybe, B)
    # zero rule: 0 in a*b iff (0 in a and b nonempty) or (0 in b and a nonempty)
    ne_a, ne_b = a.nonempty(), b.nonempty()
    zero_in = (a.bits & 1 and ne_b is True) or (b.bits & 1 and ne_a is True)
    zero_maybe = (a.maybe & 1 and ne_b is not False) or (b.maybe & 1 and ne_a is not False)
    if zero_in:
        bits |= 1
    if zero_maybe:
        maybe |= 1
    return WindowSet(B, bits, _times_tail(a, b), maybe & ~bits)


def _times_tail(a: WindowSet, b: WindowSet) -> TailHint:
    B = a.bound
    if _definitely_empty(a) or _definitely_empty(b):
        return TailHint.EMPTY
    for x, y in ((a, b), (b, a)):
        # y inside {0} above and below the window: products are all 0
        if y.tail is TailHint.EMPTY and not (y.maybe >> 1):
            return TailHint.EMPTY
    for x, y in ((a, b), (b, a)):
        if x.tail is TailHint.FULL and y.bits >> 1 & 1:
            return TailHint.FULL
    for x, y in ((a, b), (b, a)):
        if x.tail.has_element and (y.bits >> 1 or y.tail.has_element):
            return TailHint.NONEMPTY
    pa, pb = a.bits >> 1, b.bits >> 1
    if pa and pb and _highest(a.bits) * _highest(b.bits) > B:
        return TailHint.NONEMPTY
    if a.tail is TailHint.EMPTY and b.tail is TailHint.EMPTY:
        if (_highest(a.maybe) or 0) * (_highest(b.maybe) or 0) <= B:
            return TailHint.EMPTY
    return TailHint.UNKNOWN


def _ws_down(a: WindowSet) -> WindowSet:
    B, full = a.bound, a.mask
    if a.tail is TailHint.FULL:
        return WindowSet(B, full, TailHint.FULL)
    if a.tail is TailHint.NONEMPTY:
        return WindowSet(B, full, TailHint.NONEMPTY)
    hb, hm = _highest(a.bits), _highest(a.maybe)
    bits = (1 << (hb + 1)) - 1 if hb is not None else 0
    if a.tail is TailHint.EMPTY:
        maybe = (1 << (hm + 1)) - 1 if hm is not None else 0
        return WindowSet(B, bits, TailHint.EMPTY, maybe & ~bits)
    # unknown tail: anything above the known maximum may still be covered
    return WindowSet(B, bits, TailHint.UNKNOWN, full & ~bits)


# ---------------------------------------------------------------------------
# public operations (dispatch on domain)

SetValue = Union[FinCofSet, WindowSet]


def _same_domain(a, b) -> None:
    if type(a) is not type(b):
        raise TypeError(f"operands from different domains: {type(a).__name__}, {type(b).__name__}")


def union(a: SetValue, b: SetValue) -> SetValue:
    _same_domain(a, b)
    return _fc_union(a, b) if isinstance(a, FinCofSet) else _ws_union(a, b)


def inter(a: SetValue, b: SetValue) -> SetValue:
    _same_domain(a, b)
    return _fc_inter(a, b) if isinstance(a, FinCofSet) else _ws_inter(a, b)


def complement(a: SetValue) -> SetValue:
    return _fc_complement(a) if isinstance(a, FinCofSet) else _ws_complement(a)


def boolean(op: str, a: SetValue, b: SetValue | None = None) -> SetValue:
    if op == "complement":
        if b is not None:
            raise TypeError("complement is unary")
        return complement(a)
    if b is None:
        raise TypeError(f"{op} needs two operands")
    if op == "union":
        return union(a, b)
    if op == "inter":
        return inter(a, b)
    raise ValueError(f"unknown Boolean operation {op!r}")


def oplus(a: SetValue, b: SetValue) -> SetValue:
    _same_domain(a, b)
    return _fc_plus(a, b) if isinstance(a, FinCofSet) else _ws_plus(a, b)


def otimes(a: SetValue, b: SetValue, window: int | None = None) -> SetValue:
    """Complex product. On FinCofSets a non-closed product needs ``window``."""
    _same_domain(a, b)
    if isinstance(a, FinCofSet):
        return _fc_times(a, b, window)
    return _ws_times(a, b)


def down_close(a: SetValue) -> SetValue:
    return _fc_down(a) if isinstance(a, FinCofSet) else _ws_down(a)


def c_closure(a: SetValue) -> SetValue:
    """x + omega, the closure whose fixed points are congruence elements."""
    om = OMEGA if isinstance(a, FinCofSet) else to_window(OMEGA, a.bound)
    return oplus(a, om)


class Analysis(NamedTuple):
    is_empty: bool | TriBool
    min: int | None | TriBool


def analyze(a: SetValue) -> Analysis:
    if isinstance(a, FinCofSet):
        return Analysis(a.is_empty(), a.min())
    ne = a.nonempty()
    is_empty = UNDECIDED if ne is UNDECIDED else not ne
    lo_known, lo_maybe = _lowest(a.bits), _lowest(a.maybe)
    if lo_maybe is not None:
        mn = lo_known if lo_known == lo_maybe else UNDECIDED
    elif a.tail is TailHint.EMPTY:
        mn = None
    elif a.tail is TailHint.FULL:
        mn = a.bound + 1
    else:
        mn = UNDECIDED
    return Analysis(is_empty, mn)


def to_window(a: FinCofSet, bound: int) -> WindowSet:
    bits = 0
    for n in range(bound + 1):
        if n in a:
            bits |= 1 << n
    if a.cofinite:
        tail = TailHint.FULL if (not a.support or a.support[-1] <= bound) else TailHint.NONEMPTY
    else:
        tail = TailHint.EMPTY if (not a.support or a.support[-1] <= bound) else TailHint.NONEMPTY
    return WindowSet(bound, bits, tail)


def prime_factor_count(m: int) -> int:
    """Number of prime factors of ``m`` counted with multiplicity."""
    if m < 1:
        raise ValueError("prime factor count is defined for m >= 1 only")
    count = 0
    d = 2
    while d * d <= m:
        while m % d == 0:
            m //= d
            count += 1
        d += 1
    return count + (1 if m > 1 else 0)


def is_prime(m: int) -> bool:
    return m >= 2 and prime_factor_count(m) == 1


# ---------------------------------------------------------------------------
# literal syntax: {1,2,3}  ~{0}  empty  omega

_LITERAL = re.compile(r"^\s*(~?)\s*\{\s*([0-9,\s]*)\}\s*$")


def parse_set(text: str) -> FinCofSet:
    t = text.strip()
    if t == "empty":
        return EMPTY
    if t == "omega":
        return OMEGA
    m = _LITERAL.match(t)
    if not m:
        raise ValueError(f"bad set literal {text!r}; expected {{1,2}}, ~{{0}}, empty or omega")
    body = m.group(2).strip()
    items = [x.strip() for x in body.split(",")] if body else []
    if not all(x.isdigit() for x in items):
        raise ValueError(f"bad set literal {text!r}")
    return FinCofSet(bool(m.group(1)), tuple(sorted({int(x) for x in items})))


def format_set(a: FinCofSet) -> str:
    if a.is_empty():
        return "empty"
    if a.is_omega():
        return "omega"
    body = "{" + ",".join(map(str, a.support)) + "}"
    return "~" + body if a.cofinite else body


def format_window(w: WindowSet) -> str:
    parts = ["{" + ",".join(map(str, w.elements())) + "}"]
    if w.unknown:
        parts.append("undecided {" + ",".join(map(str, w.undecided())) + "}")
    parts.append(f"tail {w.tail.value}")
    return f"[0,{w.bound}] " + " ".join(parts)
