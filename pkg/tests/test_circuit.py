import random

import pytest

from setcircuits.circuit import (
    Circuit,
    CircuitBuilder,
    CircuitError,
    Node,
    classify_fragment,
    evaluate,
    format_circuit,
    member,
    parse_circuit,
    validate,
)
from setcircuits.natset import EMPTY, FinCofSet, NotClosedError, TailHint, TriBool, parse_set
from setcircuits.stdlib import evens, one, primes

from oracles import naive_eval, random_circuit, sieve

EVENS_TEXT = """\
1 = const 1
2 = omega
3 = plus 1 1
4 = times 3 2
output 4
"""


def test_parse_numbered_evens():
    c = parse_circuit(EVENS_TEXT)
    assert len(c.nodes) == 4
    assert c.nodes[c.output].op == "times"
    assert c.name(c.output) == "4"


def test_round_trip():
    for c in (evens(), primes(), one()):
        again = parse_circuit(format_circuit(c))
        assert format_circuit(again) == format_circuit(c)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("n1 = comp n1\noutput n1", "cycle"),
        ("n0 = const 0\nn1 = plus n0\noutput n1", "arity mismatch"),
        ("n0 = const 0\noutput n0\noutput n0", "duplicate output"),
        ("n0 = const 0\nn1 = union n0 n9\noutput n1", "dangling"),
        ("n0 = const x\noutput n0", "natural number"),
        ("n0 = frob n1\noutput n0", "unknown label"),
        ("n0 = const 1", "no output"),
        ("a = comp b\nb = comp a\noutput a", "cycle"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(CircuitError) as err:
        parse_circuit(text)
    assert fragment in str(err.value)


def test_parse_error_carries_line():
    with pytest.raises(CircuitError) as err:
        parse_circuit("# header\nn0 = const 1\nn1 = plus n0\noutput n1")
    assert err.value.line == 3


def test_out_of_order_definitions_are_sorted():
    c = parse_circuit("n2 = plus n0 n1\nn0 = const 1\nn1 = const 2\noutput n2")
    assert evaluate(c).output == parse_set("{3}")


def test_validate():
    validate(primes())
    with pytest.raises(CircuitError):
        Circuit((Node("times", (0,)),), 0)
    with pytest.raises(CircuitError):
        Circuit((), 0)
    with pytest.raises(CircuitError):
        Circuit((Node("comp", (0,)),), 0)


def test_builder_shares_nodes():
    b = CircuitBuilder()
    x = b.const(3)
    assert b.const(3) == x
    assert b.plus(x, b.omega()) == b.plus(x, b.omega())


def test_evaluate_evens_window():
    w = evaluate(evens(), window=20).output
    assert w.elements() == list(range(0, 21, 2))
    assert w.tail in (TailHint.FULL, TailHint.NONEMPTY)


def test_evaluate_one_exact():
    assert evaluate(one()).output == FinCofSet.finite([1])


def test_not_closed_names_gate():
    with pytest.raises(NotClosedError) as err:
        evaluate(primes())
    assert "times gate" in str(err.value)


def test_unbound_variable():
    b = CircuitBuilder()
    c = b.build(b.var("x"))
    with pytest.raises(CircuitError):
        evaluate(c)
    assert evaluate(c, {"x": EMPTY}).output == EMPTY


def test_member_examples():
    assert member(evens(), 17, bound=17) is TriBool.OUT
    assert member(primes(), 97, bound=97) is TriBool.IN
    assert member(one(), 1, bound=1) is TriBool.IN
    with pytest.raises(ValueError):
        member(evens(), 10, bound=5)


def test_primes_window_matches_sieve():
    w = evaluate(primes(), window=300).output
    assert set(w.elements()) == sieve(300)


def test_classify_fragment():
    f = classify_fragment(evens())
    assert f.ops == {"plus", "times"} and f.monotone
    f = classify_fragment(primes())
    assert "comp" in f.ops and not f.monotone
    f = classify_fragment(one())
    assert f.ops == {"comp", "plus", "inter"} and f.additive_exact


def test_any_node_may_be_output():
    c = parse_circuit("n0 = const 2\nn1 = plus n0 n0\nn2 = comp n1\noutput n1")
    assert evaluate(c).output == parse_set("{4}")


def test_monotone_circuits_are_isotone():
    rng = random.Random(7)
    for _ in range(150):
        c = random_circuit(rng, CircuitBuilder, 4, ["union", "inter", "plus", "times", "down"], variables=("x",))
        small = set(rng.sample(range(12), 3))
        large = small | set(rng.sample(range(12), 3))
        lo = evaluate(c, {"x": FinCofSet.finite(small)}, window=30).output
        hi = evaluate(c, {"x": FinCofSet.finite(large)}, window=30).output
        assert lo.bits & ~hi.maybe == 0


def test_window_engine_matches_naive_evaluator():
    # union, intersection and plus only look below each position
    rng = random.Random(3)
    for _ in range(150):
        c = random_circuit(rng, CircuitBuilder, 5, ["union", "inter", "plus"])
        got = evaluate(c, window=40).output
        assert set(got.elements()) == naive_eval(c, 40)[c.output]
        assert got.undecided() == []


def test_member_is_deterministic():
    c = primes()
    assert [member(c, n, bound=60) for n in range(61)] == [member(c, n, bound=60) for n in range(61)]
