import random

import pytest

from setcircuits.circuit import CircuitBuilder
from setcircuits.equations import (
    EquationError,
    EquationSystem,
    ResolvedSystem,
    SearchLimitError,
    bounded_sat,
    equation,
    fincof_holds,
    format_term,
    least_fixpoint,
    parse_system,
    parse_term,
    resolve,
    satisfies,
    semidecide_unsat,
    stage_chain,
    stage_eval,
    stage_solutions,
    transform,
)
from setcircuits.natset import FinCofSet, parse_set

EVENS_EQ = "(= (plus x (const 1)) (comp x))"


def masks(assignment):
    return {v: sum(1 << i for i in s) for v, s in assignment.items()}


# --- syntax ----------------------------------------------------------------------------


def test_parse_term_round_trip():
    text = "(union (plus x (const 1)) (times omega (down y)))"
    assert format_term(parse_term(text)) == text


def test_nary_fold():
    assert format_term(parse_term("(plus a b c)")) == "(plus (plus a b) c)"


def test_parse_system_forms():
    s = parse_system("; comment\n(= x (const 1))\n# another\n(= y empty)")
    assert s.variables == ("x", "y")
    wrapped = parse_system("((= x (const 1)) (= y empty))")
    assert [str(e) for e in wrapped.equations] == [str(e) for e in s.equations]


@pytest.mark.parametrize(
    "text",
    ["(= x)", "(plus x (const 1))", "(= x (frob y))", "(= x (const -1))", "(= x (comp a b))", "(= x (union a", ")", ""],
)
def test_parse_errors(text):
    with pytest.raises(EquationError):
        parse_system(text)


def test_monotone_flag():
    assert parse_system("(= x (plus x x))").monotone
    assert not parse_system(EVENS_EQ).monotone


# --- stage evaluation ----------------------------------------------------------------------


def test_stage_eval_truncates():
    t = parse_term("(plus x (const 3))")
    assert stage_eval(t, {"x": 0b11}, 4) == 0b11000
    assert stage_eval(parse_term("(comp x)"), {"x": 0b1}, 2) == 0b110
    assert stage_eval(parse_term("(down (const 2))"), {}, 5) == 0b111


def test_stage_times_zero_rule_uses_cut_sets():
    t = parse_term("(times (const 0) x)")
    assert stage_eval(t, {"x": 0}, 3) == 0
    assert stage_eval(t, {"x": 0b1000}, 3) == 1


# --- boundedSat -----------------------------------------------------------------------------


def test_constant_mismatch():
    r = bounded_sat(parse_system("(= (const 0) empty)"), 0)
    assert r.status == "none"


def test_simple_solution():
    r = bounded_sat(parse_system("(= (inter x (const 1)) (const 1))"), 1)
    assert r.found and r.assignment == {"x": (1,)}


@pytest.mark.parametrize("n", [6, 7, 8, 9, 10])
def test_evens_equation_unique_solution(n):
    s = parse_system(EVENS_EQ)
    sols = list(stage_solutions(s, n))
    assert sols == [{"x": tuple(range(0, n + 1, 2))}]
    assert bounded_sat(s, n).assignment == sols[0]


def test_reported_assignment_satisfies():
    s = parse_system("(= (union x y) (const 3))\n(= (inter x y) empty)\n(= (plus x (const 1)) (inter y (const 4)))")
    for n in range(6):
        r = bounded_sat(s, n)
        if r.found:
            assert satisfies(s, masks(r.assignment), n)


def test_certificate_is_lexicographically_least():
    s = parse_system("(= (inter x (const 2)) (const 2))")
    first = next(stage_solutions(s, 3))
    assert bounded_sat(s, 3).assignment == first == {"x": (2,)}


def test_exhaustive_limit_and_budget():
    s = parse_system("(= (union x y) (comp (union x y)))")
    with pytest.raises(SearchLimitError):
        bounded_sat(s, 12)
    r = bounded_sat(parse_system("(= (inter x (const 10)) (const 10))"), 10, budget=5)
    assert r.status == "budget"


def test_random_mode_is_seeded():
    s = parse_system("(= (inter x (const 1)) (const 1))")
    a = bounded_sat(s, 30, mode="random", seed=4, budget=200)
    b = bounded_sat(s, 30, mode="random", seed=4, budget=200)
    assert a == b and a.found and a.seed == 4
    assert satisfies(s, masks(a.assignment), 30)


def test_resolved_fast_path_handles_large_stages():
    s = parse_system("(= x (union (const 0) (plus x (const 3))))\n(= (inter x (const 7)) empty)")
    r = bounded_sat(s, 200)
    assert r.method == "least-fixpoint" and r.found
    assert r.assignment["x"] == tuple(range(0, 201, 3))


def random_monotone_system(rng: random.Random, m: int) -> EquationSystem:
    names = ["x", "y"][:m]

    def term(d):
        b = CircuitBuilder()

        def grow(d):
            if d == 0 or rng.random() < 0.3:
                r = rng.random()
                if r < 0.5:
                    return b.var(rng.choice(names))
                if r < 0.85:
                    return b.const(rng.randrange(5))
                return b.omega() if r < 0.93 else b.empty()
            return b.gate(rng.choice(["union", "inter", "plus"]), grow(d - 1), grow(d - 1))

        return b.build(grow(d))

    eqs = [equation(term(2), term(2)) for _ in range(rng.randrange(1, 3))]
    return EquationSystem(tuple(eqs), tuple(names))


def test_fast_path_agrees_with_search():
    rng = random.Random(5)
    checked = 0
    for _ in range(300):
        rs = ResolvedSystem({"x": random_monotone_system(rng, 1).equations[0].rhs})
        s = rs.to_system().with_equations(equation("(inter x (const 2))", "empty"))
        for n in range(5):
            fast = bounded_sat(s, n)
            slow = next(stage_solutions(s, n), None)
            assert fast.assignment == slow
            checked += 1
    assert checked == 1500


def test_stage_monotonicity_small():
    rng = random.Random(8)
    for _ in range(60):
        s = random_monotone_system(rng, rng.choice([1, 2]))
        found = [bounded_sat(s, n).found for n in range(6)]
        for n in range(5):
            assert not found[n + 1] or found[n]


# --- semidecision ------------------------------------------------------------------------------


def test_semidecide_examples():
    r = semidecide_unsat(parse_system("(= (const 0) empty)"), 5)
    assert (r.status, r.stage) == ("unsat", 0)
    r = semidecide_unsat(parse_system("(= x x)"), 6)
    assert (r.status, r.stage, r.max_n) == ("unknown", None, 6)


def test_semidecide_rejects_complement():
    with pytest.raises(EquationError, match="monotone"):
        semidecide_unsat(parse_system(EVENS_EQ), 3)


def test_semidecide_rejects_cut_unsound_times():
    # x = {2} solves this, yet no stage-1 assignment does
    s = parse_system("(= (times x (const 0)) (const 0))\n(= (inter x (const 0)) empty)\n(= (inter x (const 1)) empty)")
    assert bounded_sat(s, 1).status == "none"
    assert fincof_holds(s.equations[0], {"x": parse_set("{2}")})
    with pytest.raises(EquationError, match="term = empty"):
        semidecide_unsat(s, 3)


def test_semidecide_accepts_times_in_emptiness_constraints():
    s = parse_system("(= x (union (const 2) (plus x x)))\n(= (inter (times x x) (const 4)) empty)")
    r = semidecide_unsat(s, 6)
    assert (r.status, r.stage) == ("unsat", 4)


def test_semidecide_agrees_with_bounded_sat():
    rng = random.Random(2)
    for _ in range(40):
        s = random_monotone_system(rng, 1)
        r = semidecide_unsat(s, 5)
        if r.status == "unsat":
            assert bounded_sat(s, r.stage).status == "none"
            assert all(bounded_sat(s, k).found for k in range(r.stage))


# --- chains -------------------------------------------------------------------------------------


def test_stage_chain_examples():
    assert stage_chain(parse_system("(= x x)"), 3) == [{"x": ()}] * 4
    chain = stage_chain(parse_system("(= (union x (const 0)) x)"), 3)
    assert len(chain) == 4 and all(0 in s["x"] for s in chain)
    assert stage_chain(parse_system("(= (const 0) empty)"), 3) == []


def test_stage_chain_is_nested():
    s = parse_system("(= (inter x (const 2)) (const 2))\n(= (inter x y) empty)\n(= (union x y) omega)")
    chain = stage_chain(s, 5)
    assert len(chain) == 6
    for a, b in zip(chain, chain[1:]):
        for v in ("x", "y"):
            assert set(a[v]) <= set(b[v])


def test_stage_chain_backtracks():
    # the lexicographically least stage-1 solution x={} cannot be extended
    s = parse_system("(= (inter x (const 0)) empty)\n(= (union (inter x (union (const 1) (const 2))) y) (union (const 1) (const 2)))\n(= (inter (plus x (const 1)) y) empty)")
    chain = stage_chain(s, 3)
    assert len(chain) == 4
    for n, sol in enumerate(chain):
        assert satisfies(s, masks(sol), n)


# --- least fixpoints ------------------------------------------------------------------------------


def test_least_fixpoint_examples():
    rs = ResolvedSystem({"X": parse_term("(union (const 0) (plus X (const 2)))")})
    assert least_fixpoint(rs, 10).elements("X") == [0, 2, 4, 6, 8, 10]
    rs = ResolvedSystem({"X": parse_term("X")})
    assert least_fixpoint(rs, 5).elements("X") == []


def test_least_fixpoint_iteration_bound():
    rs = ResolvedSystem({"X": parse_term("(union (const 0) (plus X (const 1)))"), "Y": parse_term("(plus X X)")})
    r = least_fixpoint(rs, 30)
    assert r.elements("Y") == list(range(31))
    assert r.iterations <= 2 * 31 + 1


def test_least_fixpoint_below_other_solutions():
    rng = random.Random(9)
    for _ in range(80):
        rhs = random_monotone_system(rng, 1).equations[0].rhs
        rs = ResolvedSystem({"x": rhs})
        s = rs.to_system()
        for n in range(7):
            lfp = least_fixpoint(rs, n).values["x"].bits
            assert satisfies(s, {"x": lfp}, n)
            for sol in stage_solutions(s, n):
                assert lfp & ~masks(sol)["x"] == 0


def test_resolved_system_validation():
    with pytest.raises(EquationError):
        ResolvedSystem({"x": parse_term("(comp x)")})
    with pytest.raises(EquationError):
        ResolvedSystem({"x": parse_term("y")})
    with pytest.raises(EquationError):
        resolve(parse_system("(= (plus x x) (const 2))"))
    assert resolve(parse_system("(= x (const 2))")).variables == ("x",)


# --- transforms --------------------------------------------------------------------------------------


def test_transform_shapes():
    tau, sigma = parse_term("x"), parse_term("(const 3)")
    d = transform(tau, sigma)
    assert format_term(d.rhs) == "omega"
    a = transform(tau, sigma, mode="annihilator")
    assert format_term(a.rhs) == "(const 0)"
    assert format_term(a.lhs).startswith("(times (const 0)")


@pytest.mark.parametrize("mode, disc", [("discriminator", "discPlusTimes"), ("discriminator", "discPlusLeq"), ("annihilator", "discPlusTimes")])
def test_self_inequation_becomes_unsatisfiable(mode, disc):
    tau = parse_term("(plus x (const 1))")
    eq = transform(tau, tau, mode=mode, disc=disc)
    rng = random.Random(0)
    for _ in range(50):
        a = FinCofSet(rng.random() < 0.5, tuple(sorted(rng.sample(range(20), 3))))
        assert not fincof_holds(eq, {"x": a})


def test_transform_fragment_check():
    tau, sigma = parse_term("x"), parse_term("(const 1)")
    with pytest.raises(EquationError, match="times"):
        transform(tau, sigma, allowed_ops={"union", "inter", "comp", "plus"})
    transform(tau, sigma, disc="discPlusLeq", allowed_ops={"union", "inter", "comp", "plus", "down"})
    with pytest.raises(EquationError):
        transform(tau, sigma, mode="bogus")


def test_transform_preserves_satisfaction():
    rng = random.Random(21)
    for _ in range(200):
        b = CircuitBuilder()
        x = b.var("x")
        c = b.const(rng.randrange(6))
        op = rng.choice(["union", "inter", "plus"])
        tau = b.build(b.gate(op, x, c))
        sigma = parse_term(f"(const {rng.randrange(8)})")
        eq = transform(tau, sigma)
        a = FinCofSet(rng.random() < 0.4, tuple(sorted(rng.sample(range(10), rng.randrange(4)))))
        from setcircuits.circuit import evaluate

        differ = evaluate(tau, {"x": a}).output != evaluate(sigma).output
        assert fincof_holds(eq, {"x": a}) == differ
