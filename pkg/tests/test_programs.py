import random
from collections import Counter

import pytest

from linlog.formula import Embedded, Horn, NormalizedSequent, PlusHorn, SimpleProduct
from linlog.proof import check_proof
from linlog.programs import (
    HornLabel,
    NoAssignment,
    NotAStrongSolution,
    PopLabel,
    Program,
    ProgramError,
    PushLabel,
    assign_usage,
    build_plan,
    check_strong_solution,
    edge,
    evaluate,
    find_strong_solution,
    program_from_proof,
    program_from_sexpr,
    program_to_proof,
    program_to_sexpr,
    run_strong,
    vertex,
)

from helpers import planted_sequent

P = SimpleProduct.of
HORN13 = Program.chain(HornLabel(P(1), P(3)))
PUSH_POP = Program.chain(PushLabel(P(4), P(2), P(5)), PopLabel(P(2, 5)))
FORK = Program.of(vertex(edge(HornLabel(P(1), P(2))), edge(HornLabel(P(1), P(3)))))


def seq(text):
    return NormalizedSequent.parse(text)


def test_single_horn_edge():
    t = run_strong(HORN13, P(1, 2))
    assert t.out[1] == P(2, 3) and t.stack[1] == ()


def test_push_then_pop():
    t = run_strong(PUSH_POP, P(1, 2))
    assert t.out[1] == P(2, 5) and t.stack[1] == (P(1, 4),)
    assert t.out[2] == P(1, 4) and t.stack[2] == ()


def test_push_with_empty_transfer():
    p = Program.chain(PushLabel(P(4), None, P(5)), PopLabel(P(5)))
    t = run_strong(p, P(1))
    assert t.out[1] == P(5) and t.out[2] == P(1, 4)


def test_pop_at_root_is_undefined():
    # a lone pop has no partner push, so the tree is still well formed
    t = run_strong(Program.chain(PopLabel(P(1))), P(1))
    assert t.out[1] is None


def test_inapplicable_horn_is_undefined():
    t = run_strong(HORN13, P(2))
    assert t.out[1] is None


def test_evaluate():
    assert evaluate(Program.chain(), P(1), P(1))
    assert evaluate(HORN13, P(1, 2), P(2, 3))
    assert not evaluate(HORN13, P(1, 2), P(3))


def test_usage_examples():
    u = assign_usage(HORN13, [Horn(P(1), P(3))], [])
    assert u == {1: u[1]} and u[1].formula == Horn(P(1), P(3)) and not u[1].from_gamma
    plus = PlusHorn(P(1), P(2), P(3))
    u = assign_usage(FORK, [plus], [])
    assert {x.formula for x in u.values()} == {plus}
    with pytest.raises(NoAssignment):
        assign_usage(HORN13, [Horn(P(1), P(3)), Horn(P(2), P(2))], [])


def test_gamma_formulas_are_reusable():
    p = Program.chain(HornLabel(P(1), P(1, 1)), HornLabel(P(1), P(1, 1)))
    u = assign_usage(p, [], [Horn(P(1), P(1, 1))])
    assert all(x.from_gamma for x in u.values())


def test_strong_solution_examples():
    assert check_strong_solution(Program.chain(), seq("p1 |- p1"))
    assert check_strong_solution(Program.chain(), seq("p1, !(p1 -o p2) |- p1"))
    assert check_strong_solution(HORN13, seq("(p1 * p2), (p1 -o p3) |- (p3 * p2)"))
    assert not check_strong_solution(HORN13, seq("(p1 * p2) |- (p3 * p2)"))


@pytest.mark.parametrize("bad", [
    lambda: Program.of(vertex(edge(HornLabel(P(1), P(2))), edge(HornLabel(P(2), P(3))))),
    lambda: Program.of(vertex(edge(HornLabel(P(1), P(2))), edge(HornLabel(P(1), P(3))), edge(HornLabel(P(1), P(4))))),
    lambda: Program.chain(PushLabel(P(1), None, P(2))),
    lambda: Program(vertex(edge(HornLabel(P(1), P(2))))),
])
def test_validation(bad):
    with pytest.raises(ProgramError):
        bad()


@pytest.mark.parametrize("p", [HORN13, PUSH_POP, FORK, Program.chain()])
def test_serialization_round_trip(p):
    text = program_to_sexpr(p)
    assert program_from_sexpr(text) == p
    assert program_to_sexpr(program_from_sexpr(text)) == text


@pytest.mark.parametrize("text", ["(vertex x)", "(vertex 0 (edge (jump (p1)) (vertex 1)))",
                                  "(vertex 0 (edge (horn () (p1)) (vertex 1)))", "(vertex 0"])
def test_malformed_programs(text):
    with pytest.raises(ProgramError):
        program_from_sexpr(text)


@pytest.mark.parametrize("text,edges", [
    ("p1 |- p1", 0),
    ("(p1 * p2), (p1 -o p3) |- (p2 * p3)", 1),
    ("p1, (p1 -o (p2 + p3)), !(p2 -o p4), !(p3 -o p4) |- p4", 4),
    ("p1, ((p2 -o p3) -o p4), (p2 -o p3) |- (p1 * p4)", 3),
    ("p1, ((p1 -o p2) & (p1 -o p3)) |- p3", 1),
])
def test_programs_become_checked_proofs(text, edges):
    s = seq(text)
    p = find_strong_solution(s)
    assert p is not None and p.edge_count() == edges
    d = program_to_proof(p, s)
    assert check_proof(d) is None and d.conclusion == s.to_sequent()
    assert program_from_proof(d) == p


def test_linear_formulas_cannot_serve_both_branches_twice():
    assert find_strong_solution(seq("p1, (p1 -o (p2 + p3)), (p2 -o p4), (p3 -o p4) |- p4")) is None


def test_plus_fork_needs_its_formula():
    with pytest.raises(NotAStrongSolution):
        build_plan(FORK, seq("p1 |- p2"))


def test_token_conservation_along_horn_edges():
    rng = random.Random(3)
    for _ in range(200):
        s = planted_sequent(rng)
        p = find_strong_solution(s)
        if p is None:
            continue
        trace = run_strong(p, s.w)
        for child, (parent, e) in p.parent.items():
            if isinstance(e.label, HornLabel):
                before, after = Counter(trace.out[parent].literals), Counter(trace.out[child].literals)
                assert before - Counter(e.label.x.literals) + Counter(e.label.y.literals) == after


def test_bounds_are_respected():
    s = seq("p1, !(p1 -o p2), !(p2 -o p3), !(p3 -o p1) |- p3")
    assert find_strong_solution(s, max_edges=1) is None
    assert find_strong_solution(s, max_edges=2).edge_count() == 2
