import re
from pathlib import Path

import pytest

from linlog.formula import BOT, parse_formula, parse_sequent
from linlog.proof import (
    PRINCIPAL_SIDE,
    Proof,
    ProofFormatError,
    RuleId,
    arity,
    axiom,
    check_proof,
    node,
    project_left,
    proof_from_sexpr,
    proof_to_sexpr,
    proofs_from_sexpr,
    tensor_right,
)

DATA = Path(__file__).parent / "data"


def golden():
    return proofs_from_sexpr((DATA / "golden_proofs.sexp").read_text())


def test_rule_table_has_21_entries():
    assert len(RuleId) == 21
    assert set(PRINCIPAL_SIDE) == set(RuleId)
    assert sum(arity(r) == 2 for r in RuleId) == 5
    assert {r for r in RuleId if arity(r) == 0} == {RuleId.I, RuleId.L_BOT, RuleId.R_ONE}


def test_golden_proofs_cover_every_rule():
    used = {q.rule for d in golden() for q in d.nodes()}
    assert used == set(RuleId)


@pytest.mark.parametrize("d", golden(), ids=lambda d: d.conclusion.text)
def test_golden_proofs_check(d):
    assert check_proof(d) is None


def test_serialization_is_bit_exact():
    text = (DATA / "golden_proofs.sexp").read_text()
    for d in golden():
        s = proof_to_sexpr(d)
        assert proof_from_sexpr(s) == d
        assert proof_to_sexpr(proof_from_sexpr(s)) == s
        assert s in text


def test_corrupted_proofs_name_the_broken_rule():
    text = (DATA / "corrupted_proofs.sexp").read_text()
    expected = re.findall(r"^; expect (\S+):", text, re.M)
    proofs = proofs_from_sexpr(text)
    assert len(proofs) == len(expected) == 10
    for want, d in zip(expected, proofs):
        v = check_proof(d)
        assert v is not None and v.rule == want and v.path == ()


def test_violation_path_points_below_the_root():
    good = proof_from_sexpr('(rule L* (seq "(p1 * p2) |- (p1 * p2)") (principal lhs 0)'
                            ' (rule R* (seq "p1, p2 |- (p1 * p2)") (principal rhs 0)'
                            ' (rule I (seq "p1 |- p1")) (rule I (seq "p2 |- p2"))))')
    assert check_proof(good) is None
    bad = proof_from_sexpr('(rule L* (seq "(p1 * p2) |- (p1 * p2)") (principal lhs 0)'
                           ' (rule R* (seq "p1, p2 |- (p1 * p2)") (principal rhs 0)'
                           ' (rule I (seq "p1 |- p1"))'
                           ' (rule L! (seq "p2 |- p2") (principal lhs 0) (rule I (seq "p2 |- p2")))))')
    v = check_proof(bad)
    assert v.path == (0, 1) and v.rule == "L!"


@pytest.mark.parametrize("text", [
    "(rule X (seq \"p1 |- p1\"))",
    "(rule I (seq p1))",
    "(rule I (seq \"p1 |- p1\")",
    "(rule L-o (seq \"p1 |- p1\") (principal middle 0))",
])
def test_malformed_serializations(text):
    with pytest.raises(ProofFormatError):
        proof_from_sexpr(text)


def test_wrong_arity_is_reported():
    d = Proof(parse_sequent("p1 |- p1"), RuleId.I, None, (axiom(parse_formula("p1")),))
    assert "premises" in check_proof(d).message


def test_principal_index_out_of_range():
    d = Proof(parse_sequent("p1 |- p1"), RuleId.L_BANG, ("lhs", 3), (axiom(parse_formula("p1")),))
    assert check_proof(d) is not None


def test_tensor_right_builder():
    g = parse_formula("(p1 * (p2 * p3))")
    d = tensor_right([parse_formula(t) for t in ("p1", "p2", "p3")], g)
    assert check_proof(d) is None and d.conclusion.text == "p1, p2, p3 |- (p1 * (p2 * p3))"


def test_project_left_follows_a_sum_to_its_case_split():
    d = golden()[7]  # (p1 + p2) |- (p2 + p1)
    s = parse_formula("(p1 + p2)")
    left = project_left(d, s, 0)
    right = project_left(d, s, 1)
    assert check_proof(left) is None and left.conclusion.text == "p1 |- (p2 + p1)"
    assert check_proof(right) is None and right.conclusion.text == "p2 |- (p2 + p1)"


def test_bot_unit_rules():
    d = node(RuleId.R_BOT, [], [parse_formula("1"), BOT], [node(RuleId.R_ONE, [], [parse_formula("1")], [], parse_formula("1"))], BOT)
    assert check_proof(d) is None
    assert d.conclusion.text == "|- 1, bot"
