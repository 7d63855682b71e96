import itertools
from functools import lru_cache
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from linlog.formula import Bang, Literal, Lollipop, Plus, Sequent, Tensor, With, parse_sequent
from linlog.proof import check_proof, proofs_from_sexpr
from linlog.prover import BudgetExhausted, Proved, Refuted, SearchBudget, occurrences_refute, prove


# A deliberately naive oracle: exhaustive cut-free search for single-conclusion
# sequents over literals with *, -o, & and +.  Every rule shrinks the sequent.

def _key(lhs):
    return tuple(sorted(lhs, key=lambda f: f.text))


@lru_cache(maxsize=None)
def naive(lhs: tuple, goal) -> bool:
    if len(lhs) == 1 and lhs[0] == goal:
        return True
    for i, f in enumerate(lhs):
        rest = lhs[:i] + lhs[i + 1:]
        if isinstance(f, Tensor) and naive(_key(rest + (f.left, f.right)), goal):
            return True
        if isinstance(f, With) and (naive(_key(rest + (f.left,)), goal) or naive(_key(rest + (f.right,)), goal)):
            return True
        if isinstance(f, Plus) and naive(_key(rest + (f.left,)), goal) and naive(_key(rest + (f.right,)), goal):
            return True
        if isinstance(f, Lollipop):
            for mask in itertools.product((0, 1), repeat=len(rest)):
                g1 = tuple(x for x, m in zip(rest, mask) if m == 0)
                g2 = tuple(x for x, m in zip(rest, mask) if m == 1)
                if naive(_key(g1), f.antecedent) and naive(_key(g2 + (f.consequent,)), goal):
                    return True
    if isinstance(goal, Tensor):
        for mask in itertools.product((0, 1), repeat=len(lhs)):
            g1 = tuple(x for x, m in zip(lhs, mask) if m == 0)
            g2 = tuple(x for x, m in zip(lhs, mask) if m == 1)
            if naive(_key(g1), goal.left) and naive(_key(g2), goal.right):
                return True
    if isinstance(goal, Lollipop) and naive(_key(lhs + (goal.antecedent,)), goal.consequent):
        return True
    if isinstance(goal, With) and naive(lhs, goal.left) and naive(lhs, goal.right):
        return True
    if isinstance(goal, Plus) and (naive(lhs, goal.left) or naive(lhs, goal.right)):
        return True
    return False


small = st.recursive(
    st.integers(1, 3).map(Literal),
    lambda c: st.builds(lambda k, a, b: k(a, b), st.sampled_from([Tensor, Lollipop, With, Plus]), c, c),
    max_leaves=4,
)


@given(st.lists(small, min_size=0, max_size=3), small)
@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_prover_agrees_with_naive_oracle(lhs, goal):
    s = Sequent(tuple(lhs), (goal,))
    res = prove(s, SearchBudget(max_depth=30))
    expected = naive(_key(tuple(lhs)), goal)
    if isinstance(res, Proved):
        assert expected
        assert check_proof(res.proof) is None and res.proof.conclusion == s
    elif isinstance(res, Refuted):
        assert not expected
    else:
        pytest.fail(f"no verdict for {s.text}: {res}")


@pytest.mark.parametrize("text", [
    "p1, !(p1 -o (p1 * p1)) |- (p1 * (p1 * (p1 * p1)))",
    "!p1, !(p1 -o p2) |- (p2 * p2)",
    "(p1 @ p2), (p1 -o bot) |- p2",
    "p1, p2 |- (p1 * p2), bot",
    "|- (bot @ 1)",
])
def test_proofs_are_checked(text):
    s = parse_sequent(text)
    res = prove(s)
    assert isinstance(res, Proved)
    assert check_proof(res.proof) is None and res.proof.conclusion == s


def test_contraction_cap_reports_exhaustion():
    s = parse_sequent("p1, !(p1 -o p1) |- p2")
    res = prove(s, SearchBudget(max_contractions_per_bang_formula=2))
    assert isinstance(res, (Refuted, BudgetExhausted))
    assert not isinstance(res, Proved)


def test_depth_budget_is_respected():
    s = parse_sequent("p1, (p1 -o p2), (p2 -o p3), (p3 -o p4), (p4 -o p5) |- p5")
    assert isinstance(prove(s, SearchBudget(max_depth=15)), Proved)
    assert not isinstance(prove(s, SearchBudget(max_depth=2)), Proved)


def test_node_budget():
    s = parse_sequent("p1, !(p1 -o (p1 * p1)), !(p1 -o p2) |- (p2 * (p2 * (p2 * p3)))")
    assert isinstance(prove(s, SearchBudget(max_nodes=50)), (BudgetExhausted, Refuted))


@pytest.mark.parametrize("text", [
    "(bot * bot) |-",
    "bot, bot |-",
    "|- (bot * bot)",
])
def test_balance_pruning_does_not_change_verdicts(text):
    s = parse_sequent(text)
    on = prove(s, SearchBudget(balance_pruning=True))
    off = prove(s, SearchBudget(balance_pruning=False))
    assert type(on) is type(off)


def test_empty_goal_without_bottom_is_refuted():
    assert isinstance(prove(parse_sequent("p1, (p1 -o p2) |-")), Refuted)


def test_occurrence_pruning_never_refutes_a_checked_proof():
    data = Path(__file__).parent / "data" / "golden_proofs.sexp"
    for d in proofs_from_sexpr(data.read_text()):
        for q in d.nodes():
            lhs = [f for f in q.conclusion.lhs if not isinstance(f, Bang)]
            bangs = [f.body for f in q.conclusion.lhs if isinstance(f, Bang)]
            assert not occurrences_refute(lhs, bangs, q.conclusion.rhs), q.conclusion.text


@pytest.mark.parametrize("text", ["p1 |- p1, p1", "p1, (p1 -o p2) |- p2, 1", "!(p1 -o p1), p1 |- p1, p1"])
def test_single_conclusion_rule(text):
    assert isinstance(prove(parse_sequent(text)), Refuted)
