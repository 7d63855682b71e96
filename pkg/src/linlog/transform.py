"""Moving derivations between a normalized sequent and its encodings.

`ttobot_transform` turns a source derivation into a derivation of the encoded
sequent, `extract_program` reads a program back off a bot-only derivation and
`fairness_check` compares derivability across all encodings.
"""

from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

from .balance import Balance, balance_check
from .encoding import (
    EncodingParams,
    Target,
    _encode_nf,
    bot_decoder,
    c01,
    d_literal,
    d_literal_tilde,
    encode_goal,
    encode_sequent,
    g_literal,
)
from .formula import (
    BOT,
    Bang,
    Formula,
    Literal,
    Lollipop,
    NormalizedSequent,
    Plus,
    Sequent,
    SimpleProduct,
    With,
    WithHorn,
    par_leaves_of,
    power_tensor,
    substitute_literal,
    tensor_leaves_of,
)
from .programs import (
    HornLabel,
    NotAStrongSolution,
    Plan,
    PopLabel,
    Program,
    PushLabel,
    Use,
    _Frag,
    _graft,
    _graft_frag,
    build_plan,
    check_strong_solution,
    program_from_proof,
)
from .proof import (
    Proof,
    RuleId,
    axiom,
    check_proof,
    contract,
    left_tensor_intro,
    node,
    par_left,
    project_left,
    right_par_intro,
    tensor_right,
    weaken,
)
from .prover import BudgetExhausted, Proved, Refuted, SearchBudget, prove

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class TransformError(ValueError):
    """The transformer could not produce a checked derivation."""


class RegularityViolation(ValueError):
    def __init__(self, assertion: str, sequent: Optional[Sequent] = None):
        where = f" at '{sequent.text}'" if sequent is not None else ""
        super().__init__(f"{assertion}{where}")
        self.assertion = assertion
        self.sequent = sequent


# ---------------------------------------------------------------------------
# Source derivation -> encoded derivation


def _with_p(b, p: int) -> SimpleProduct:
    return SimpleProduct(tuple(sorted(tuple(b) + (p,))))


class _Builder:
    """Shared plumbing: encoded formulas for uses and the context wrappers."""

    def __init__(self, s: NormalizedSequent, params: EncodingParams):
        self.s = s
        self.params = params
        self.p = params.p_index
        self.N = params.N
        self.bangs = [Bang(self.enc(a)) for a in s.gamma]

    def enc(self, a) -> Formula:
        return _encode_nf(a, self.params)

    def E(self, b) -> Formula:
        """Encoding of p*b for a literal bag b (possibly empty)."""
        return encode_goal(SimpleProduct(tuple(b)) if b else None, self.params)

    def ctx(self, plan: Plan) -> list[Formula]:
        return [self.enc(a) for a in plan.delta] + self.bangs

    def used(self, use: Use) -> tuple[Formula, Formula]:
        whole = self.enc(use.formula)
        if isinstance(use.formula, WithHorn):
            return whole, (whole.left if use.branch == 0 else whole.right)
        return whole, whole

    def take(self, top: Proof, use: Use) -> Proof:
        whole, used = self.used(use)
        current = top
        rhs = current.conclusion.rhs
        if whole != used:
            lhs = list(current.conclusion.lhs)
            lhs.remove(used)
            rule = RuleId.L_WITH1 if use.branch == 0 else RuleId.L_WITH2
            current = node(rule, lhs + [whole], rhs, [current], whole)
        if use.from_gamma:
            b = Bang(whole)
            lhs = list(current.conclusion.lhs)
            lhs.remove(whole)
            current = node(RuleId.L_BANG, lhs + [b], rhs, [current], b)
            current = contract(current, [b])
        return current

    def finish(self, top: Proof) -> Proof:
        return weaken(top, self.bangs)


class _BotOnly(_Builder):
    """State: the tensor leaves of E_{p*V} on the left; goal E_{p*Z} on the right."""

    def atoms(self, b) -> list[Formula]:
        return [d_literal(m, self.N) for m in b]

    def leaves(self, b) -> list[Formula]:
        return tensor_leaves_of(self.E(b))

    def build(self, plan: Plan) -> Proof:
        goal = self.E(plan.goal.literals)
        if plan.kind == "finish":
            return self.finish(tensor_right(self.leaves(plan.goal.literals), goal))
        _, used = self.used(plan.use)
        if plan.kind == "horn":
            (nxt,) = plan.subs
            rest = self.atoms(plan.rest) + self.ctx(nxt)
            ey, ex = self.E(plan.y.literals), self.E(plan.x)
            right = left_tensor_intro(self.build(nxt), ey, rest, [goal])
            left = tensor_right(self.leaves(plan.x), ex)
            top = node(RuleId.L_IMP, self.leaves(plan.x) + rest + [used], [goal], [left, right], used)
            return self.take(top, plan.use)
        if plan.kind == "fork":
            first, second = plan.subs
            rest = self.atoms(plan.rest) + self.ctx(first)
            summ = used.consequent
            r1 = left_tensor_intro(self.build(first), summ.left, rest, [goal])
            r2 = left_tensor_intro(self.build(second), summ.right, rest, [goal])
            right = node(RuleId.L_PLUS, rest + [summ], [goal], [r1, r2], summ)
            left = tensor_right(self.leaves(plan.x), self.E(plan.x))
            top = node(RuleId.L_IMP, self.leaves(plan.x) + rest + [used], [goal], [left, right], used)
            return self.take(top, plan.use)
        block, cont = plan.subs
        f_uv, f_y = used.antecedent, used.consequent
        ev = self.E(plan.v.literals)
        bctx = self.atoms(plan.rest) + self.ctx(block)
        inner = left_tensor_intro(self.build(block), self.E(plan.u.literals), bctx, [ev])
        left = node(RuleId.R_IMP, bctx, [f_uv], [inner], f_uv)
        cctx = self.atoms(plan.x) + self.ctx(cont)
        c1 = left_tensor_intro(self.build(cont), self.E(plan.y.literals), cctx, [goal])
        c0 = tensor_right(self.leaves(()), self.E(()))
        right = node(RuleId.L_IMP, self.leaves(()) + cctx + [f_y], [goal], [c0, c1], f_y)
        top = node(RuleId.L_IMP, bctx + self.leaves(()) + cctx + [used], [goal], [left, right], used)
        return self.take(contract(top, self.bangs), plan.use)

    def root(self, plan: Plan) -> Proof:
        rest = [self.enc(a) for a in self.s.delta] + self.bangs
        return left_tensor_intro(self.build(plan), self.E(self.s.w.literals), rest,
                                 [self.E(self.s.z.literals)])


class _OneLiteral(_Builder):
    """State: the arguments of E~_{p*V} on the left beside the continuation K = E~_{p*Z}; p on the right."""

    def __init__(self, s, params):
        super().__init__(s, params)
        self.q = Literal(self.p)

    def atoms(self, b) -> list[Formula]:
        return [d_literal_tilde(m, self.N, self.p) for m in b]

    def args(self, e: Formula) -> list[Formula]:
        out = []
        while isinstance(e, Lollipop):
            out.append(e.antecedent)
            e = e.consequent
        return out

    def open(self, top: Proof, e: Formula, rest: list[Formula]) -> Proof:
        """From rest + args(e) |- p derive rest |- e by R-o steps."""
        if not isinstance(e, Lollipop):
            return top
        inner = self.open(top, e.consequent, rest + [e.antecedent])
        return node(RuleId.R_IMP, rest, [e], [inner], e)

    def consume(self, e: Formula) -> Proof:
        """args(e), e |- p."""
        if not isinstance(e, Lollipop):
            return axiom(e)
        sub = self.consume(e.consequent)
        rest = list(sub.conclusion.lhs)
        rest.remove(e.consequent)
        return node(RuleId.L_IMP, [e.antecedent] + rest + [e], [self.q],
                    [axiom(e.antecedent), sub], e)

    def build(self, plan: Plan) -> Proof:
        q = self.q
        k = self.E(plan.goal.literals)
        if plan.kind == "finish":
            return self.finish(self.consume(k))
        _, used = self.used(plan.use)
        ex = self.E(plan.x)
        if plan.kind == "horn":
            (nxt,) = plan.subs
            base = self.atoms(plan.rest) + [k] + self.ctx(nxt)
            left = self.open(self.build(nxt), self.E(plan.y.literals), base)
            right = self.consume(ex)
            top = node(RuleId.L_IMP, base + self.args(ex) + [used], [q], [left, right], used)
            return self.take(top, plan.use)
        if plan.kind == "fork":
            first, second = plan.subs
            base = self.atoms(plan.rest) + [k] + self.ctx(first)
            both = used.antecedent
            left = node(RuleId.R_WITH, base, [both],
                        [self.open(self.build(first), both.left, base),
                         self.open(self.build(second), both.right, base)], both)
            top = node(RuleId.L_IMP, base + self.args(ex) + [used], [q], [left, self.consume(ex)], used)
            return self.take(top, plan.use)
        block, cont = plan.subs
        a, b = used.antecedent, used.consequent  # (F_Y -o p), (F_UV -o p)
        f_y, f_uv = a.antecedent, b.antecedent
        ev, ep = self.E(plan.v.literals), self.E(())
        bctx = self.atoms(plan.rest) + self.ctx(block)
        b1 = self.open(self.build(block), self.E(plan.u.literals), bctx + [ev])
        b2 = node(RuleId.R_IMP, bctx, [f_uv], [b1], f_uv)
        b3 = node(RuleId.L_IMP, bctx + [b], [q], [b2, axiom(q)], b)
        cctx = self.atoms(plan.x) + [k] + self.ctx(cont)
        c1 = self.open(self.build(cont), self.E(plan.y.literals), cctx)
        c2 = node(RuleId.L_IMP, cctx + self.args(ep) + [f_y], [q], [c1, self.consume(ep)], f_y)
        c3 = node(RuleId.R_IMP, cctx + self.args(ep), [a], [c2], a)
        top = node(RuleId.L_IMP, list(c3.conclusion.lhs) + bctx + [used], [q], [c3, b3], used)
        return self.take(contract(top, self.bangs), plan.use)

    def root(self, plan: Plan) -> Proof:
        rest = [self.E(self.s.z.literals)] + [self.enc(a) for a in self.s.delta] + self.bangs
        return self.open(self.build(plan), self.E(self.s.w.literals), rest)


class _UnitOnly(_Builder):
    """State: C01 x6 and K on the left; the par leaves of G_{p*V} on the right."""

    def __init__(self, s, params):
        super().__init__(s, params)
        self.c6 = power_tensor(c01(self.N), 6)
        self.cs = tensor_leaves_of(self.c6)

    def gs(self, b) -> list[Formula]:
        return [g_literal(m, self.N) for m in b]

    def open(self, top: Proof, e: Formula, lhs: list[Formula], rhs: list[Formula]) -> Proof:
        """From lhs + C01 x6 |- rhs + leaves(G) derive lhs |- rhs, e."""
        g = e.consequent
        s1 = right_par_intro(top, g, lhs + self.cs, rhs)
        s2 = left_tensor_intro(s1, self.c6, lhs, rhs + [g])
        return node(RuleId.R_IMP, lhs, rhs + [e], [s2], e)

    def consume(self, e: Formula) -> Proof:
        g = e.consequent
        return node(RuleId.L_IMP, self.cs + [e], par_leaves_of(g),
                    [tensor_right(self.cs, self.c6), par_left(g)], e)

    def build(self, plan: Plan) -> Proof:
        k = self.E(plan.goal.literals)
        if plan.kind == "finish":
            return self.finish(self.consume(k))
        _, used = self.used(plan.use)
        ex = self.E(plan.x)
        gx = par_leaves_of(ex.consequent)
        if plan.kind == "horn":
            (nxt,) = plan.subs
            base = [k] + self.ctx(nxt)
            gr = self.gs(plan.rest)
            left = self.open(self.build(nxt), self.E(plan.y.literals), base, gr)
            top = node(RuleId.L_IMP, base + self.cs + [used], gr + gx, [left, self.consume(ex)], used)
            return self.take(top, plan.use)
        if plan.kind == "fork":
            first, second = plan.subs
            base = [k] + self.ctx(first)
            gr = self.gs(plan.rest)
            both = used.antecedent
            left = node(RuleId.R_WITH, base, gr + [both],
                        [self.open(self.build(first), both.left, base, gr),
                         self.open(self.build(second), both.right, base, gr)], both)
            top = node(RuleId.L_IMP, base + self.cs + [used], gr + gx, [left, self.consume(ex)], used)
            return self.take(top, plan.use)
        block, cont = plan.subs
        f_uv, f_y = used.antecedent, used.consequent
        ev, ep = self.E(plan.v.literals), self.E(())
        bctx = self.ctx(block)
        g2 = self.gs(plan.rest)
        b1 = self.open(self.build(block), self.E(plan.u.literals), [ev] + bctx, g2)
        b2 = node(RuleId.R_IMP, bctx, g2 + [f_uv], [b1], f_uv)
        cctx = [k] + self.ctx(cont)
        g1 = self.gs(plan.x)
        gp = par_leaves_of(ep.consequent)
        c1 = self.open(self.build(cont), self.E(plan.y.literals), cctx, g1)
        c2 = node(RuleId.L_IMP, cctx + self.cs + [f_y], g1 + gp, [c1, self.consume(ep)], f_y)
        top = node(RuleId.L_IMP, bctx + cctx + self.cs + [used], g2 + g1 + gp, [b2, c2], used)
        return self.take(contract(top, self.bangs), plan.use)

    def root(self, plan: Plan) -> Proof:
        lhs = [self.E(self.s.z.literals)] + [self.enc(a) for a in self.s.delta] + self.bangs
        return self.open(self.build(plan), self.E(self.s.w.literals), lhs, [])


_BUILDERS = {Target.BOT_ONLY: _BotOnly, Target.ONE_LITERAL: _OneLiteral, Target.UNIT_ONLY: _UnitOnly}


def transform_program(program: Program, s: NormalizedSequent, params: EncodingParams) -> Proof:
    """Derivation of encode_sequent(s) driven by a strong solution of s."""
    try:
        plan = build_plan(program, s)
    except NotAStrongSolution as exc:
        raise TransformError(f"program cannot drive the encoded derivation: {exc}") from None
    d = _BUILDERS[params.target](s, params).root(plan)
    bad = check_proof(d)
    if bad is not None:
        raise TransformError(f"assembled derivation fails the checker: {bad}")
    if d.conclusion != encode_sequent(s, params):
        raise TransformError("assembled derivation has the wrong conclusion")
    return d


def ttobot_transform(d: Proof, params: EncodingParams) -> Proof:
    """Derivation of the encoded sequent from a derivation of a normalized sequent."""
    bad = check_proof(d)
    if bad is not None:
        raise TransformError(f"input derivation is not valid: {bad}")
    s = NormalizedSequent.from_sequent(d.conclusion)
    try:
        program = program_from_proof(d)
    except ValueError as exc:
        raise TransformError(f"cannot read the derivation as a program: {exc}") from None
    return transform_program(program, s, params)


def substitute_proof(d: Proof, index: int, replacement: Formula) -> Proof:
    """Replace literal p_index by `replacement` throughout a derivation."""
    memo: dict[int, Proof] = {}

    def sub(f: Formula) -> Formula:
        return substitute_literal(f, index, replacement)

    def go(q: Proof) -> Proof:
        key = id(q)
        if key not in memo:
            prem = [go(x) for x in q.premises]
            principal = q.principal_formula
            memo[key] = node(q.rule, [sub(f) for f in q.conclusion.lhs],
                             [sub(f) for f in q.conclusion.rhs], prem,
                             None if principal is None else sub(principal))
        return memo[key]

    return go(d)


# ---------------------------------------------------------------------------
# Bot-only derivation -> program


_PASS = {RuleId.L_TENSOR, RuleId.L_BANG, RuleId.W_BANG, RuleId.C_BANG,
         RuleId.L_WITH1, RuleId.L_WITH2, RuleId.R_IMP}


class _Extractor:
    def __init__(self, params: EncodingParams):
        self.params = params
        self.p = params.p_index
        self.dec = bot_decoder(params.N)

    def strip(self, lits, q: Proof) -> Optional[SimpleProduct]:
        c = Counter(lits)
        if c[self.p] != 1:
            raise RegularityViolation(f"encoded product without exactly one leading literal p{self.p}",
                                      q.conclusion)
        c[self.p] -= 1
        rest = tuple(sorted(c.elements()))
        return SimpleProduct(rest) if rest else None

    def resources(self, lhs) -> tuple[int, ...]:
        out: list[int] = []
        for f in lhs:
            m = self.dec.d_index(f)
            if m is not None:
                out.append(m)
                continue
            e = self.dec.decode_e(f)
            if e is not None:
                out.extend(e)
        return tuple(sorted(out))

    def check_balance(self, q: Proof) -> None:
        for sub in q.premises:
            if balance_check(sub.conclusion, self.params.N) is Balance.VIOLATED:
                raise RegularityViolation("branch premise violates the bot-count congruence",
                                          sub.conclusion)

    def horn_label(self, a, b, q: Proof) -> Optional[HornLabel]:
        x, y = self.strip(a, q), self.strip(b, q)
        if y is None:
            raise RegularityViolation("Horn step with an empty consequent", q.conclusion)
        return None if x is None else HornLabel(x, y)

    def go(self, q: Proof) -> _Frag:
        rule = q.rule
        if rule in (RuleId.L_BOT, RuleId.R_BOT, RuleId.L_ONE, RuleId.R_ONE, RuleId.R_BANG,
                    RuleId.L_PAR, RuleId.R_PAR, RuleId.R_WITH, RuleId.R_PLUS1, RuleId.R_PLUS2):
            raise RegularityViolation(f"rule {rule.value} does not occur in a regular derivation",
                                      q.conclusion)
        if rule is RuleId.I:
            a = q.conclusion.rhs[0]
            m = self.dec.match_f(a)
            if m is not None and m[0] == "horn":
                label = self.horn_label(m[1], m[2], q)
                return _Frag([(label, _Frag())]) if label else _Frag()
            if m is not None:
                raise RegularityViolation("identity on a compound encoded formula", q.conclusion)
            return _Frag()
        if rule in _PASS:
            return self.go(q.premises[0])
        if rule is RuleId.L_PLUS:
            raise RegularityViolation("sum decomposed apart from its Horn step", q.conclusion)
        self.check_balance(q)
        if rule is RuleId.R_TENSOR:
            return _graft_frag(self.go(q.premises[0]), self.go(q.premises[1]))
        # L-o
        a = q.principal_formula
        m = self.dec.match_f(a)
        left, right = q.premises
        if m is None:
            raise RegularityViolation(f"implication {a.text[:60]}... is not an encoded formula",
                                      q.conclusion)
        if m[0] == "horn":
            label = self.horn_label(m[1], m[2], q)
            cont = self.go(right)
            if label is None:  # F_Y released by a pop
                return _graft_frag(self.go(left), cont)
            return _graft(self.go(left), [(label, cont)])
        if m[0] == "plus":
            x = self.strip(m[1], q)
            y1, y2 = self.strip(m[2], q), self.strip(m[3], q)
            if x is None or y1 is None or y2 is None:
                raise RegularityViolation("forking step with an empty product", q.conclusion)
            summ = a.consequent
            try:
                f1 = self.go(project_left(right, summ, 0))
                f2 = self.go(project_left(right, summ, 1))
            except ValueError as exc:
                raise RegularityViolation(f"sum is not decomposed by L+: {exc}", q.conclusion) from None
            return _graft(self.go(left), [(HornLabel(x, y1), f1), (HornLabel(x, y2), f2)])
        if m[0] == "emb":
            u, v = self.strip(m[1], q), self.strip(m[2], q)
            if self.strip(m[3], q) is not None:
                raise RegularityViolation("embedded implication with a non-empty K antecedent",
                                          q.conclusion)
            y = self.strip(m[4], q)
            if u is None or v is None or y is None:
                raise RegularityViolation("embedded implication with an empty product", q.conclusion)
            x2 = self.resources(left.conclusion.lhs)
            if self.p in x2:
                raise RegularityViolation("leading literal handed to a stack block", left.conclusion)
            block = _graft(self.go(left), [(PopLabel(v), self.go(right))])
            return _Frag([(PushLabel(y, SimpleProduct(x2) if x2 else None, u), block)])
        raise RegularityViolation("additive conjunction used without projection", q.conclusion)


def extract_program(d: Proof, s: NormalizedSequent, params: EncodingParams) -> Program:
    """Read a program off a derivation of the bot-only encoding of s."""
    params = params.with_target(Target.BOT_ONLY)
    if d.conclusion != encode_sequent(s, params):
        raise ValueError("derivation does not conclude the bot-only encoding of the sequent")
    bad = check_proof(d)
    if bad is not None:
        raise ValueError(f"derivation is not valid: {bad}")
    frag = _Extractor(params).go(d)
    program = Program.of(frag.to_vertex())
    if not check_strong_solution(program, s):
        raise RegularityViolation("extracted program is not a strong solution")
    return program


# ---------------------------------------------------------------------------
# Fairness


@dataclass
class FairnessEntry:
    label: str
    sequent: Sequent
    status: str  # proved | refuted | exhausted | error
    how: str = ""


@dataclass
class FairnessReport:
    source: NormalizedSequent
    params: EncodingParams
    entries: list[FairnessEntry] = field(default_factory=list)

    @property
    def decided(self) -> dict[str, str]:
        return {e.label: e.status for e in self.entries if e.status in ("proved", "refuted")}

    @property
    def violation(self) -> bool:
        return len(set(self.decided.values())) > 1

    def status(self, label: str) -> str:
        for e in self.entries:
            if e.label == label:
                return e.status
        raise KeyError(label)

    def __str__(self) -> str:
        lines = [f"source: {self.source.text}", f"N={self.params.N} p=p{self.params.p_index}"]
        for e in self.entries:
            lines.append(f"  ({e.label}) {e.status}" + (f" [{e.how}]" if e.how else ""))
        lines.append("FAIRNESS VIOLATION" if self.violation else "consistent")
        return "\n".join(lines)


def _status(result) -> str:
    if isinstance(result, Proved):
        return "proved"
    if isinstance(result, Refuted):
        return "refuted"
    return "exhausted"


def fairness_check(s: NormalizedSequent, params: EncodingParams,
                   budget: Optional[SearchBudget] = None,
                   encoded_budget: Optional[SearchBudget] = None) -> FairnessReport:
    """Derivability of the source and its encodings, compared entry by entry.

    Entries: (a) source, (b) one-literal, (c) one-literal with p := bot,
    (d) unit-only, and (aux) the bot-only auxiliary sequent.
    """
    budget = budget or SearchBudget()
    encoded_budget = encoded_budget or SearchBudget(max_depth=budget.max_depth,
                                                    max_contractions_per_bang_formula=2,
                                                    max_nodes=20_000,
                                                    modulus_N=params.N)
    report = FairnessReport(s, params)
    src = prove(s.to_sequent(), budget)
    report.entries.append(FairnessEntry("a", s.to_sequent(), _status(src), "search"))

    program = None
    if isinstance(src, Proved):
        try:
            program = program_from_proof(src.proof)
        except ValueError:
            program = None

    def entry(label: str, target: Target, post: Callable[[Proof], Proof] = lambda d: d,
              seq_post: Callable[[Sequent], Sequent] = lambda q: q) -> None:
        tp = params.with_target(target)
        seq = seq_post(encode_sequent(s, tp))
        if program is not None:
            try:
                d = post(transform_program(program, s, tp))
                if check_proof(d) is None and d.conclusion == seq:
                    report.entries.append(FairnessEntry(label, seq, "proved", "witness"))
                    return
            except TransformError:
                pass
        res = prove(seq, encoded_budget)
        report.entries.append(FairnessEntry(label, seq, _status(res), "search"))

    p = params.p_index

    def to_bot(q: Sequent) -> Sequent:
        return Sequent(tuple(substitute_literal(f, p, BOT) for f in q.lhs),
                       tuple(substitute_literal(f, p, BOT) for f in q.rhs))

    entry("b", Target.ONE_LITERAL)
    entry("c", Target.ONE_LITERAL, lambda d: substitute_proof(d, p, BOT), to_bot)
    entry("d", Target.UNIT_ONLY)
    entry("aux", Target.BOT_ONLY)
    return report
