"""Proof trees over the cut-free rule table, the checker, and serialization."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

from .formula import (
    Bang,
    Bottom,
    Formula,
    Lollipop,
    One,
    Par,
    Plus,
    Sequent,
    Tensor,
    With,
    par_leaves_of,
    parse_sequent,
    tensor_leaves_of,
)
from .sexpr import SexprError, Str, quote, read_all, read_one


class RuleId(str, Enum):
    I = "I"
    L_IMP = "L-o"
    R_IMP = "R-o"
    L_TENSOR = "L*"
    R_TENSOR = "R*"
    L_PAR = "L@"
    R_PAR = "R@"
    L_PLUS = "L+"
    R_PLUS1 = "R+1"
    R_PLUS2 = "R+2"
    L_WITH1 = "L&1"
    L_WITH2 = "L&2"
    R_WITH = "R&"
    L_BANG = "L!"
    R_BANG = "R!"
    W_BANG = "W!"
    C_BANG = "C!"
    L_BOT = "Lbot"
    R_BOT = "Rbot"
    L_ONE = "L1"
    R_ONE = "R1"

    def __str__(self) -> str:
        return self.value


ARITY = {
    RuleId.I: 0, RuleId.L_BOT: 0, RuleId.R_ONE: 0,
    RuleId.L_IMP: 2, RuleId.R_TENSOR: 2, RuleId.L_PAR: 2, RuleId.L_PLUS: 2, RuleId.R_WITH: 2,
}

# Side on which each rule's principal formula lives.
PRINCIPAL_SIDE = {
    RuleId.I: None, RuleId.L_BOT: "lhs", RuleId.R_ONE: "rhs",
    RuleId.L_IMP: "lhs", RuleId.R_IMP: "rhs", RuleId.L_TENSOR: "lhs", RuleId.R_TENSOR: "rhs",
    RuleId.L_PAR: "lhs", RuleId.R_PAR: "rhs", RuleId.L_PLUS: "lhs", RuleId.R_PLUS1: "rhs",
    RuleId.R_PLUS2: "rhs", RuleId.L_WITH1: "lhs", RuleId.L_WITH2: "lhs", RuleId.R_WITH: "rhs",
    RuleId.L_BANG: "lhs", RuleId.R_BANG: "rhs", RuleId.W_BANG: "lhs", RuleId.C_BANG: "lhs",
    RuleId.R_BOT: "rhs", RuleId.L_ONE: "lhs",
}


def arity(rule: RuleId) -> int:
    return ARITY.get(rule, 1)


@dataclass(frozen=True)
class Proof:
    conclusion: Sequent
    rule: RuleId
    principal: Optional[tuple[str, int]]
    premises: tuple["Proof", ...] = ()

    @property
    def principal_formula(self) -> Optional[Formula]:
        if self.principal is None:
            return None
        side, index = self.principal
        seq = self.conclusion.lhs if side == "lhs" else self.conclusion.rhs
        if 0 <= index < len(seq):
            return seq[index]
        return None

    def nodes(self) -> Iterator["Proof"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.premises))

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def height(self) -> int:
        if not self.premises:
            return 1
        return 1 + max(p.height() for p in self.premises)


def node(rule: RuleId, lhs: Iterable[Formula], rhs: Iterable[Formula],
         premises: Sequence[Proof] = (), principal: Optional[Formula] = None) -> Proof:
    """Build a node; the principal formula is located in the sorted sequent."""
    seq = Sequent(tuple(lhs), tuple(rhs))
    pos = None
    side = PRINCIPAL_SIDE[rule]
    if side is not None:
        if principal is None:
            raise ValueError(f"rule {rule} needs a principal formula")
        items = seq.lhs if side == "lhs" else seq.rhs
        try:
            pos = (side, items.index(principal))
        except ValueError:
            raise ValueError(f"principal {principal} not on the {side} of {seq}") from None
    return Proof(seq, rule, pos, tuple(premises))


# ---------------------------------------------------------------------------
# Checking


@dataclass(frozen=True)
class Violation:
    path: tuple[int, ...]
    rule: str
    sequent: str
    message: str

    def __str__(self) -> str:
        where = "root" if not self.path else "root." + ".".join(map(str, self.path))
        return f"rule {self.rule} at {where} ({self.sequent}): {self.message}"


class _Bad(Exception):
    pass


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise _Bad(message)


def _minus(whole: Counter, part: Iterable[Formula]) -> Counter:
    out = Counter(whole)
    for f in part:
        _require(out[f] > 0, f"formula {f} missing from context")
        out[f] -= 1
        if out[f] == 0:
            del out[f]
    return out


def _plus(a: Counter, *items: Formula) -> Counter:
    out = Counter(a)
    for f in items:
        out[f] += 1
    return out


def _check_node(p: Proof) -> None:
    rule = p.rule
    _require(isinstance(rule, RuleId), f"unknown rule {rule!r}")
    _require(len(p.premises) == arity(rule),
             f"expected {arity(rule)} premises, got {len(p.premises)}")
    concl = p.conclusion
    lhs, rhs = Counter(concl.lhs), Counter(concl.rhs)
    prem = [(Counter(q.conclusion.lhs), Counter(q.conclusion.rhs)) for q in p.premises]

    if rule is RuleId.I:
        _require(len(concl.lhs) == 1 and len(concl.rhs) == 1 and concl.lhs[0] == concl.rhs[0],
                 "axiom must have the form A |- A")
        return

    side = PRINCIPAL_SIDE[rule]
    _require(p.principal is not None and p.principal[0] == side,
             f"principal formula must be on the {side}")
    a = p.principal_formula
    _require(a is not None, "principal index out of range")
    ctx_l = _minus(lhs, [a]) if side == "lhs" else lhs
    ctx_r = _minus(rhs, [a]) if side == "rhs" else rhs

    def expect(i: int, l: Counter, r: Counter) -> None:
        pl, pr = prem[i]
        _require(pl == l and pr == r, f"premise {i} does not match the rule instance")

    def split(l1: Counter, r1: Counter, l2: Counter, r2: Counter,
              add_l1=(), add_r1=(), add_l2=(), add_r2=()) -> None:
        # premises must partition the context after removing their active formulas
        rest_l1, rest_r1 = _minus(l1, add_l1), _minus(r1, add_r1)
        rest_l2, rest_r2 = _minus(l2, add_l2), _minus(r2, add_r2)
        _require(rest_l1 + rest_l2 == ctx_l and rest_r1 + rest_r2 == ctx_r,
                 "premise contexts do not partition the conclusion context")

    if rule is RuleId.L_BOT:
        _require(isinstance(a, Bottom), "principal must be bot")
        _require(not ctx_l and not ctx_r, "L-bot conclusion must be exactly 'bot |-'")
    elif rule is RuleId.R_ONE:
        _require(isinstance(a, One), "principal must be 1")
        _require(not ctx_l and not ctx_r, "R1 conclusion must be exactly '|- 1'")
    elif rule is RuleId.L_ONE:
        _require(isinstance(a, One), "principal must be 1")
        expect(0, ctx_l, ctx_r)
    elif rule is RuleId.R_BOT:
        _require(isinstance(a, Bottom), "principal must be bot")
        expect(0, ctx_l, ctx_r)
    elif rule is RuleId.L_TENSOR:
        _require(isinstance(a, Tensor), "principal must be a tensor")
        expect(0, _plus(ctx_l, a.left, a.right), ctx_r)
    elif rule is RuleId.R_PAR:
        _require(isinstance(a, Par), "principal must be a par")
        expect(0, ctx_l, _plus(ctx_r, a.left, a.right))
    elif rule is RuleId.R_IMP:
        _require(isinstance(a, Lollipop), "principal must be an implication")
        expect(0, _plus(ctx_l, a.antecedent), _plus(ctx_r, a.consequent))
    elif rule in (RuleId.L_WITH1, RuleId.L_WITH2):
        _require(isinstance(a, With), "principal must be a with")
        picked = a.left if rule is RuleId.L_WITH1 else a.right
        expect(0, _plus(ctx_l, picked), ctx_r)
    elif rule in (RuleId.R_PLUS1, RuleId.R_PLUS2):
        _require(isinstance(a, Plus), "principal must be a plus")
        picked = a.left if rule is RuleId.R_PLUS1 else a.right
        expect(0, ctx_l, _plus(ctx_r, picked))
    elif rule is RuleId.R_WITH:
        _require(isinstance(a, With), "principal must be a with")
        expect(0, ctx_l, _plus(ctx_r, a.left))
        expect(1, ctx_l, _plus(ctx_r, a.right))
    elif rule is RuleId.L_PLUS:
        _require(isinstance(a, Plus), "principal must be a plus")
        expect(0, _plus(ctx_l, a.left), ctx_r)
        expect(1, _plus(ctx_l, a.right), ctx_r)
    elif rule is RuleId.R_TENSOR:
        _require(isinstance(a, Tensor), "principal must be a tensor")
        (l1, r1), (l2, r2) = prem
        split(l1, r1, l2, r2, add_r1=[a.left], add_r2=[a.right])
    elif rule is RuleId.L_PAR:
        _require(isinstance(a, Par), "principal must be a par")
        (l1, r1), (l2, r2) = prem
        split(l1, r1, l2, r2, add_l1=[a.left], add_l2=[a.right])
    elif rule is RuleId.L_IMP:
        _require(isinstance(a, Lollipop), "principal must be an implication")
        (l1, r1), (l2, r2) = prem
        split(l1, r1, l2, r2, add_r1=[a.antecedent], add_l2=[a.consequent])
    elif rule is RuleId.L_BANG:
        _require(isinstance(a, Bang), "principal must be !-prefixed")
        expect(0, _plus(ctx_l, a.body), ctx_r)
    elif rule is RuleId.W_BANG:
        _require(isinstance(a, Bang), "principal must be !-prefixed")
        expect(0, ctx_l, ctx_r)
    elif rule is RuleId.C_BANG:
        _require(isinstance(a, Bang), "principal must be !-prefixed")
        expect(0, _plus(ctx_l, a, a), ctx_r)
    elif rule is RuleId.R_BANG:
        _require(isinstance(a, Bang), "principal must be !-prefixed")
        _require(not ctx_r, "R! needs a single formula on the right")
        _require(all(isinstance(f, Bang) for f in concl.lhs), "R! needs every left formula !-prefixed")
        expect(0, ctx_l, Counter([a.body]))
    else:  # pragma: no cover
        raise _Bad(f"unhandled rule {rule}")


def check_proof(p: Proof) -> Optional[Violation]:
    """Return None when every node is an instance of its rule, else the first violation."""
    stack: list[tuple[Proof, tuple[int, ...]]] = [(p, ())]
    while stack:
        q, path = stack.pop()
        try:
            _check_node(q)
        except _Bad as exc:
            return Violation(path, str(q.rule), q.conclusion.text, str(exc))
        for i in reversed(range(len(q.premises))):
            stack.append((q.premises[i], path + (i,)))
    return None


# ---------------------------------------------------------------------------
# Serialization


def proof_to_sexpr(p: Proof) -> str:
    lines: list[str] = []

    def emit(q: Proof, depth: int) -> None:
        pad = "  " * depth
        head = f"{pad}(rule {q.rule.value} (seq {quote(q.conclusion.text)})"
        if q.principal is not None:
            head += f" (principal {q.principal[0]} {q.principal[1]})"
        if not q.premises:
            lines.append(head + ")")
            return
        lines.append(head)
        for sub in q.premises:
            emit(sub, depth + 1)
        lines[-1] += ")"

    emit(p, 0)
    return "\n".join(lines) + "\n"


class ProofFormatError(ValueError):
    pass


def _proof_from(tree) -> Proof:
    if not isinstance(tree, list) or len(tree) < 3 or tree[0] != "rule":
        raise ProofFormatError("expected (rule <id> (seq ...) ...)")
    try:
        rule = RuleId(tree[1])
    except ValueError:
        raise ProofFormatError(f"unknown rule id {tree[1]!r}") from None
    seq_part = tree[2]
    if not (isinstance(seq_part, list) and len(seq_part) == 2 and seq_part[0] == "seq"
            and isinstance(seq_part[1], Str)):
        raise ProofFormatError("expected (seq \"...\")")
    seq = parse_sequent(seq_part[1])
    rest = tree[3:]
    principal = None
    if rest and isinstance(rest[0], list) and rest[0] and rest[0][0] == "principal":
        item = rest[0]
        if len(item) != 3 or item[1] not in ("lhs", "rhs") or not str(item[2]).isdigit():
            raise ProofFormatError("expected (principal lhs|rhs <index>)")
        principal = (str(item[1]), int(item[2]))
        rest = rest[1:]
    return Proof(seq, rule, principal, tuple(_proof_from(t) for t in rest))


def proof_from_sexpr(text: str) -> Proof:
    try:
        return _proof_from(read_one(text))
    except SexprError as exc:
        raise ProofFormatError(str(exc)) from None


def proofs_from_sexpr(text: str) -> list[Proof]:
    """Every top-level proof in `text`."""
    try:
        return [_proof_from(t) for t in read_all(text)]
    except SexprError as exc:
        raise ProofFormatError(str(exc)) from None


# ---------------------------------------------------------------------------
# Construction helpers shared by the builders


def axiom(a: Formula) -> Proof:
    return Proof(Sequent((a,), (a,)), RuleId.I, None, ())


def weaken(top: Proof, bangs: Iterable[Formula]) -> Proof:
    """Add the given !-formulas to the left of `top` by W! steps."""
    current = top
    for b in bangs:
        lhs = current.conclusion.lhs + (b,)
        current = node(RuleId.W_BANG, lhs, current.conclusion.rhs, [current], b)
    return current


def contract(top: Proof, bangs: Iterable[Formula]) -> Proof:
    """Merge one duplicated copy of each given !-formula by C! steps."""
    current = top
    for b in bangs:
        lhs = list(current.conclusion.lhs)
        lhs.remove(b)
        current = node(RuleId.C_BANG, lhs, current.conclusion.rhs, [current], b)
    return current


def tensor_right(leaves: Sequence[Formula], goal: Formula) -> Proof:
    """Prove leaves |- goal, where the leaves are the tensor leaves of goal in order."""
    items = list(leaves)

    def go(g: Formula) -> Proof:
        if isinstance(g, Tensor):
            a = go(g.left)
            b = go(g.right)
            return node(RuleId.R_TENSOR, a.conclusion.lhs + b.conclusion.lhs, [g], [a, b], g)
        if not items or items[0] != g:
            raise ValueError(f"leaf {g} not available")
        items.pop(0)
        return axiom(g)

    out = go(goal)
    if items:
        raise ValueError("unused leaves")
    return out


tensor_leaves = tensor_leaves_of
par_leaves = par_leaves_of


def left_tensor_intro(top: Proof, f: Formula, lhs_rest: Sequence[Formula],
                      rhs: Sequence[Formula]) -> Proof:
    """From a proof of lhs_rest, leaves(f) |- rhs build lhs_rest, f |- rhs by L* steps."""
    lhs_rest, rhs = list(lhs_rest), list(rhs)
    if not isinstance(f, Tensor):
        return top
    inner = left_tensor_intro(top, f.left, lhs_rest + tensor_leaves(f.right), rhs)
    inner = left_tensor_intro(inner, f.right, lhs_rest + [f.left], rhs)
    return node(RuleId.L_TENSOR, lhs_rest + [f], rhs, [inner], f)


def right_par_intro(top: Proof, f: Formula, lhs: Sequence[Formula],
                    rhs_rest: Sequence[Formula]) -> Proof:
    """From a proof of lhs |- rhs_rest, leaves(f) build lhs |- rhs_rest, f by R@ steps."""
    lhs, rhs_rest = list(lhs), list(rhs_rest)
    if not isinstance(f, Par):
        return top
    inner = right_par_intro(top, f.left, lhs, rhs_rest + par_leaves(f.right))
    inner = right_par_intro(inner, f.right, lhs, rhs_rest + [f.left])
    return node(RuleId.R_PAR, lhs, rhs_rest + [f], [inner], f)


def par_left(f: Formula) -> Proof:
    """f |- leaves(f) by L@ steps over axioms."""
    if not isinstance(f, Par):
        return axiom(f)
    a, b = par_left(f.left), par_left(f.right)
    return node(RuleId.L_PAR, [f], a.conclusion.rhs + b.conclusion.rhs, [a, b], f)


def _active_lhs(q: Proof, i: int) -> list[Formula]:
    """Formulas that rule q introduces into the left side of premise i."""
    a = q.principal_formula
    r = q.rule
    if r is RuleId.L_TENSOR:
        return [a.left, a.right]
    if r in (RuleId.L_PAR, RuleId.L_PLUS):
        return [a.left if i == 0 else a.right]
    if r is RuleId.L_WITH1:
        return [a.left]
    if r is RuleId.L_WITH2:
        return [a.right]
    if r is RuleId.L_BANG:
        return [a.body]
    if r is RuleId.C_BANG:
        return [a]
    if r is RuleId.L_IMP:
        return [a.consequent] if i == 1 else []
    if r is RuleId.R_IMP:
        return [a.antecedent]
    return []


def project_left(p: Proof, f: Formula, branch: int) -> Proof:
    """Replace one left occurrence of the sum `f` by its `branch` summand.

    The occurrence is followed up to the L+ step that decomposes it, which is
    then replaced by the chosen premise.
    """
    if not isinstance(f, Plus):
        raise ValueError("can only project a sum")
    picked = f.left if branch == 0 else f.right

    def go(q: Proof) -> Proof:
        if q.rule is RuleId.L_PLUS and q.principal_formula == f:
            return q.premises[branch]
        if q.principal is not None and q.principal[0] == "lhs" and q.principal_formula == f:
            raise ValueError(f"sum {f} is principal of {q.rule}")
        for i, sub in enumerate(q.premises):
            carried = Counter(sub.conclusion.lhs)
            for g in _active_lhs(q, i):
                carried[g] -= 1
            if carried[f] > 0:
                new_subs = list(q.premises)
                new_subs[i] = go(sub)
                lhs = list(q.conclusion.lhs)
                lhs.remove(f)
                lhs.append(picked)
                return node(q.rule, lhs, q.conclusion.rhs, new_subs, q.principal_formula)
        raise ValueError(f"lost track of {f} at rule {q.rule}")

    return go(p)
