"""Bounded cut-free proof search producing explicit, checkable proofs.

Search runs on a compact state: a linear multiset, a set of !-formulas that
every branch may reuse, and the right-hand side. Every move still emits the
literal rule instances (C! before splits, C!/L! for reuse, W! at the leaves),
so the resulting trees pass `check_proof` unchanged.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple, Optional, Union

from .balance import Balance, balance_check
from .formula import (
    Bang,
    Bottom,
    Formula,
    Literal,
    Lollipop,
    One,
    Par,
    Plus,
    Sequent,
    Tensor,
    With,
    subformulas,
)
from .encoding import bot_power
from .proof import Proof, RuleId, axiom, contract, node, weaken


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 15
    max_contractions_per_bang_formula: int = 4
    balance_pruning: bool = True
    max_nodes: int = 200_000
    modulus_N: Optional[int] = None

    def __post_init__(self) -> None:
        if min(self.max_depth, self.max_contractions_per_bang_formula, self.max_nodes) < 0:
            raise ValueError("budget bounds must be non-negative")


@dataclass(frozen=True)
class Proved:
    proof: Proof


@dataclass(frozen=True)
class Refuted:
    pass


@dataclass(frozen=True)
class BudgetExhausted:
    reason: str = ""


SearchResult = Union[Proved, Refuted, BudgetExhausted]

PROVED, REFUTED, EXHAUSTED, LOOP = "proved", "refuted", "exhausted", "loop"


class _State(NamedTuple):
    linear: tuple[Formula, ...]
    bangs: tuple[Formula, ...]  # bodies, each once
    copies: tuple[int, ...]
    rhs: tuple[Formula, ...]


def _key(f: Formula):
    return f.sort_key


def _make_state(linear: list[Formula], bangs: dict[Formula, int],
                rhs: list[Formula]) -> tuple[_State, list[Formula]]:
    """Move !-formulas out of the linear part; duplicates are weakened away."""
    bangs = dict(bangs)
    lin, dups = [], []
    for f in linear:
        if isinstance(f, Bang):
            if f.body in bangs:
                dups.append(f)
            else:
                bangs[f.body] = 0
        else:
            lin.append(f)
    order = sorted(bangs, key=_key)
    st = _State(tuple(sorted(lin, key=_key)), tuple(order),
                tuple(bangs[b] for b in order), tuple(sorted(rhs, key=_key)))
    return st, dups


def _bang_list(st: _State) -> list[Formula]:
    return [Bang(b) for b in st.bangs]


def _explicit_lhs(st: _State) -> list[Formula]:
    return list(st.linear) + _bang_list(st)


def _remove(items, f, count: int = 1) -> list[Formula]:
    out = list(items)
    for _ in range(count):
        out.remove(f)
    return out


@lru_cache(maxsize=100_000)
def _formula_facts(f: Formula) -> tuple[bool, bool, tuple]:
    """(has additive or !, contains bot, signed literal counts for a left occurrence)."""
    loose = False
    has_bot = False
    counts: Counter = Counter()
    stack = [(f, -1)]
    while stack:
        g, sign = stack.pop()
        if isinstance(g, (With, Plus, Bang)):
            loose = True
        if isinstance(g, Bottom):
            has_bot = True
        if isinstance(g, Literal):
            counts[g.index] += sign
        elif isinstance(g, Lollipop):
            stack.append((g.antecedent, -sign))
            stack.append((g.consequent, sign))
        else:
            for c in g.children():
                stack.append((c, sign))
    return loose, has_bot, tuple(sorted(counts.items()))


@lru_cache(maxsize=100_000)
def _classical(f: Formula) -> bool:
    """Contains par or bot.  Without them a derivable sequent has exactly one
    right-hand formula (every rule preserves this, read top-down)."""
    return any(isinstance(g, (Par, Bottom)) for g in subformulas(f))


def _single_conclusion(st: "_State") -> bool:
    return not any(_classical(f) for f in itertools.chain(st.linear, st.bangs, st.rhs))


_INF = float("inf")


def _add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, (lo, hi) in b.items():
        lo0, hi0 = out.get(k, (0, 0))
        out[k] = (lo0 + lo, hi0 + hi)
    return out


def _hull(a: dict, b: dict) -> dict:
    out = {}
    for k in a.keys() | b.keys():
        (l1, h1), (l2, h2) = a.get(k, (0, 0)), b.get(k, (0, 0))
        out[k] = (min(l1, l2), max(h1, h2))
    return out


def _ranges(f: Formula, side: int) -> dict:
    if isinstance(f, Literal):
        k = f.index
        return {("l", k): (side, side), "s": (side, side), "i": (side * k, side * k),
                "q": (side * k * k, side * k * k)}
    if isinstance(f, (Tensor, Par)):
        return _add(_ranges(f.left, side), _ranges(f.right, side))
    if isinstance(f, Lollipop):
        return _add(_ranges(f.antecedent, -side), _ranges(f.consequent, side))
    if isinstance(f, (With, Plus)):
        return _hull(_ranges(f.left, side), _ranges(f.right, side))
    if isinstance(f, Bang):
        body = _ranges(f.body, side)
        if side < 0:
            return body
        return {k: (-_INF if lo < 0 else 0, _INF if hi > 0 else 0) for k, (lo, hi) in body.items()}
    return {}


@lru_cache(maxsize=100_000)
def _occurrence_range(f: Formula, side: int) -> tuple:
    """Net weighted literal occurrences a formula can contribute, as ranges.

    Each slice of a cut-free proof pairs literal occurrences in axioms, so for
    any weighting the net sum over a provable sequent is zero.  An additive
    may contribute either component and a `!` on the left any number of
    copies.  Weightings: each literal alone, size, index, squared index.
    """
    return tuple(_ranges(f, side).items())


def occurrences_refute(lhs, bangs, rhs) -> bool:
    """True when some weighting cannot balance, so the sequent is unprovable."""
    total: dict = {}
    items = itertools.chain(((g, 1) for g in lhs), ((Bang(g), 1) for g in bangs),
                            ((g, -1) for g in rhs))
    for f, side in items:
        for k, (lo, hi) in _occurrence_range(f, side):
            lo0, hi0 = total.get(k, (0, 0))
            total[k] = (lo0 + lo, hi0 + hi)
    return any(lo > 0 or hi < 0 for lo, hi in total.values())


def infer_modulus_N(formulas) -> Optional[int]:
    """Find N from an occurrence of bot^(N+2) -o bot^2."""
    two = bot_power(2)
    for f in formulas:
        for g in subformulas(f):
            if isinstance(g, Lollipop) and g.consequent == two:
                a = g.antecedent
                k = 0
                while isinstance(a, Tensor) and isinstance(a.left, Bottom):
                    k += 1
                    a = a.right
                if isinstance(a, Bottom):
                    k += 1
                    if k >= 11 and g.antecedent == bot_power(k):
                        return k - 2
    return None


class _Search:
    def __init__(self, budget: SearchBudget, modulus_N: Optional[int]):
        self.budget = budget
        self.N = modulus_N
        self.memo: dict = {}
        self.nodes = 0
        self.aborted = False

    # -- pruning -----------------------------------------------------------

    def quick_refute(self, st: _State) -> bool:
        loose = bool(st.bangs)
        has_bot = False
        total: Counter = Counter()
        for f in st.linear:
            l, b, c = _formula_facts(f)
            loose |= l
            has_bot |= b
            for k, v in c:
                total[k] += v
        for f in st.bangs:
            has_bot |= _formula_facts(f)[1]
        if not st.rhs and not has_bot:
            return True
        for f in st.rhs:
            l, _, c = _formula_facts(f)
            loose |= l
            for k, v in c:
                total[k] -= v
        if not loose and any(total.values()):
            return True
        if len(st.rhs) != 1 and _single_conclusion(st):
            return True
        if loose and occurrences_refute(st.linear, st.bangs, st.rhs):
            return True
        if self.budget.balance_pruning:
            seq = Sequent(tuple(_explicit_lhs(st)), st.rhs)
            if balance_check(seq, self.N) is Balance.VIOLATED:
                return True
        return False

    # -- closures ----------------------------------------------------------

    def closure(self, st: _State) -> Optional[Proof]:
        lin, rhs = st.linear, st.rhs
        bangs = _bang_list(st)
        if len(lin) == 1 and len(rhs) == 1 and lin[0] == rhs[0]:
            return weaken(axiom(lin[0]), bangs)
        if len(lin) == 1 and not rhs and isinstance(lin[0], Bottom):
            return weaken(node(RuleId.L_BOT, [lin[0]], [], principal=lin[0]), bangs)
        if lin:
            return None
        if len(rhs) == 1 and isinstance(rhs[0], One):
            return weaken(node(RuleId.R_ONE, [], [rhs[0]], principal=rhs[0]), bangs)
        if len(rhs) == 1 and isinstance(rhs[0], Bang) and rhs[0].body in st.bangs:
            return weaken(axiom(rhs[0]), [b for b in bangs if b != rhs[0]])
        # dereliction straight into an axiom
        if len(rhs) == 1 and rhs[0] in st.bangs:
            a = rhs[0]
            top = node(RuleId.L_BANG, [Bang(a)], [a], [axiom(a)], Bang(a))
            return weaken(top, [b for b in bangs if b.body != a])
        if not rhs and any(isinstance(b, Bottom) for b in st.bangs):
            bot = next(b for b in st.bangs if isinstance(b, Bottom))
            leaf = node(RuleId.L_BOT, [bot], [], principal=bot)
            top = node(RuleId.L_BANG, [Bang(bot)], [], [leaf], Bang(bot))
            return weaken(top, [b for b in bangs if b.body != bot])
        return None

    # -- moves -------------------------------------------------------------

    def invertible(self, st: _State):
        copies = dict(zip(st.bangs, st.copies))
        lin, rhs = list(st.linear), list(st.rhs)
        for f in st.linear:
            if isinstance(f, (Tensor, One)):
                return next(_left_moves(lin, copies, rhs, f))
        for f in st.rhs:
            if isinstance(f, Par):
                return "single", RuleId.R_PAR, f, [(lin, copies, _remove(rhs, f) + [f.left, f.right])]
            if isinstance(f, Lollipop):
                return "single", RuleId.R_IMP, f, [(lin + [f.antecedent], copies, _remove(rhs, f) + [f.consequent])]
            if isinstance(f, Bottom):
                return "single", RuleId.R_BOT, f, [(lin, copies, _remove(rhs, f))]
        for f in st.linear:
            if isinstance(f, Plus):
                return next(_left_moves(lin, copies, rhs, f))
        for f in st.rhs:
            if isinstance(f, With):
                rest = _remove(rhs, f)
                return "additive", RuleId.R_WITH, f, [(lin, copies, rest + [f.left]), (lin, copies, rest + [f.right])]
        if not lin and len(rhs) == 1 and isinstance(rhs[0], Bang):
            return "single", RuleId.R_BANG, rhs[0], [([], copies, [rhs[0].body])]
        return None

    def alternatives(self, st: _State) -> Iterator[tuple]:
        """Yield (kind, rule, principal, raw premises, copied) in canonical order.

        A copied !-formula is decomposed at once; delaying the decomposition
        never helps because every branch keeps access to the !-formula.
        """
        copies = dict(zip(st.bangs, st.copies))
        lin, rhs = list(st.linear), list(st.rhs)
        cap = self.budget.max_contractions_per_bang_formula
        single = _single_conclusion(st)
        seen: set = set()
        for f in st.linear:
            if isinstance(f, With) and f not in seen:
                seen.add(f)
                for move in _left_moves(lin, copies, rhs, f):
                    yield move + (False,)
        for f in st.rhs:
            if isinstance(f, Plus) and f not in seen:
                seen.add(f)
                rest = _remove(rhs, f)
                yield "single", RuleId.R_PLUS1, f, [(lin, copies, rest + [f.left])], False
                yield "single", RuleId.R_PLUS2, f, [(lin, copies, rest + [f.right])], False
        usable = []
        for b in st.bangs:
            if isinstance(b, (Literal, Bottom)):
                continue
            if copies[b] >= cap:
                yield "capped", None, b, [], False
                continue
            more = dict(copies)
            more[b] += 1
            usable.append((b, more))
        for b, more in usable:
            if isinstance(b, (With, Tensor, One, Bang)):
                for move in _left_moves(lin + [b], more, rhs, b):
                    yield move + (True,)
        seen = set()
        for f in st.linear:
            if isinstance(f, (Lollipop, Par)) and f not in seen:
                seen.add(f)
                for move in _left_moves(lin, copies, rhs, f, single):
                    yield move + (False,)
        for f in st.rhs:
            if isinstance(f, Tensor) and f not in seen:
                seen.add(f)
                rest = _remove(rhs, f)
                for s1, s2, r1, r2 in _splits(lin, rest):
                    yield "split", RuleId.R_TENSOR, f, [(s1, copies, r1 + [f.left]), (s2, copies, r2 + [f.right])], False
        for b, more in usable:
            if isinstance(b, (Lollipop, Par, Plus)):
                for move in _left_moves(lin + [b], more, rhs, b, single):
                    yield move + (True,)

    # -- core --------------------------------------------------------------

    def solve_raw(self, raw, depth: int, path: set):
        linear, copies, rhs = raw
        st, dups = _make_state(linear, copies, rhs)
        status, proof, moves = self.solve(st, depth, path)
        if status == PROVED and dups:
            proof = weaken(proof, dups)
        return status, proof, moves

    def solve(self, st: _State, depth: int, path: set):
        key = (st.linear, st.bangs, st.rhs)
        hit = self.memo.get(key)
        if hit is not None:
            if hit[0] == PROVED and hit[2] <= depth:
                return PROVED, hit[1], hit[2]
            if hit[0] == REFUTED:
                return REFUTED, None, 0
            if hit[0] == EXHAUSTED and depth <= hit[1] and all(
                    c >= c0 for c, c0 in zip(st.copies, hit[2])):
                return EXHAUSTED, None, 0
        if key in path:
            return LOOP, None, 0
        if self.quick_refute(st):
            self.memo[key] = (REFUTED,)
            return REFUTED, None, 0
        closed = self.closure(st)
        if closed is not None:
            self.memo[key] = (PROVED, closed, 0)
            return PROVED, closed, 0
        if self.aborted:
            return EXHAUSTED, None, 0
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            self.aborted = True
            return EXHAUSTED, None, 0
        path.add(key)
        try:
            status, proof, moves = self.expand(st, depth, path)
        finally:
            path.discard(key)
        if status == PROVED:
            self.memo[key] = (PROVED, proof, moves)
        elif status == REFUTED:
            self.memo[key] = (REFUTED,)
        elif status == EXHAUSTED and not self.aborted:
            old = self.memo.get(key)
            if old is None or old[0] == EXHAUSTED:
                self.memo[key] = (EXHAUSTED, depth, st.copies)
        return status, proof, moves

    def run_premises(self, premises, depth: int, path: set):
        proofs, moves = [], 0
        for raw in premises:
            status, proof, m = self.solve_raw(raw, depth - 1, path)
            if status != PROVED:
                return status, None, 0
            proofs.append(proof)
            moves = max(moves, m)
        return PROVED, proofs, moves + 1

    def expand(self, st: _State, depth: int, path: set):
        inv = self.invertible(st)
        if inv is not None:
            if depth <= 0:
                return EXHAUSTED, None, 0
            kind, rule, f, premises = inv
            status, proofs, moves = self.run_premises(premises, depth, path)
            if status != PROVED:
                return status, None, 0
            return PROVED, self.build(st, kind, rule, f, proofs, False), moves

        outcome = REFUTED
        for kind, rule, f, premises, copied in self.alternatives(st):
            if kind == "capped":
                outcome = EXHAUSTED
                continue
            if depth <= 0:
                return EXHAUSTED, None, 0
            status, proofs, moves = self.run_premises(premises, depth, path)
            if status == PROVED:
                return PROVED, self.build(st, kind, rule, f, proofs, copied), moves
            if status == EXHAUSTED:
                outcome = EXHAUSTED
            elif status == LOOP and outcome == REFUTED:
                outcome = LOOP
            if self.aborted:
                return EXHAUSTED, None, 0
        return outcome, None, 0

    def build(self, st: _State, kind: str, rule: RuleId, f: Formula,
              proofs: list[Proof], copied: bool) -> Proof:
        lhs = _explicit_lhs(st)
        rhs = list(st.rhs)
        bangs = _bang_list(st)
        if copied:
            # C! then L! put a fresh copy of f next to the untouched context
            b = Bang(f)
            inner = self.build_plain(lhs + [f], bangs, rhs, kind, rule, f, proofs)
            deref = node(RuleId.L_BANG, lhs + [b], rhs, [inner], b)
            return node(RuleId.C_BANG, lhs, rhs, [deref], b)
        return self.build_plain(lhs, bangs, rhs, kind, rule, f, proofs)

    @staticmethod
    def build_plain(lhs, bangs, rhs, kind, rule, f, proofs) -> Proof:
        if kind == "split":
            top = node(rule, lhs + bangs, rhs, proofs, f)
            return contract(top, bangs)
        return node(rule, lhs, rhs, proofs, f)


def _left_moves(lin: list[Formula], copies: dict, rhs: list[Formula], f: Formula,
                single: bool = False):
    """Left rules with principal formula f (which must occur in lin).

    With `single`, the antecedent premise of L-o gets no right-hand context.
    """
    rest = _remove(lin, f)
    if isinstance(f, Tensor):
        yield "single", RuleId.L_TENSOR, f, [(rest + [f.left, f.right], copies, rhs)]
    elif isinstance(f, One):
        yield "single", RuleId.L_ONE, f, [(rest, copies, rhs)]
    elif isinstance(f, Bang):
        yield "single", RuleId.L_BANG, f, [(rest + [f.body], copies, rhs)]
    elif isinstance(f, Plus):
        yield "additive", RuleId.L_PLUS, f, [(rest + [f.left], copies, rhs), (rest + [f.right], copies, rhs)]
    elif isinstance(f, With):
        yield "single", RuleId.L_WITH1, f, [(rest + [f.left], copies, rhs)]
        yield "single", RuleId.L_WITH2, f, [(rest + [f.right], copies, rhs)]
    elif isinstance(f, Lollipop):
        for s1, s2, r1, r2 in _splits(rest, [] if single else rhs):
            if single:
                r2 = list(rhs)
            yield "split", RuleId.L_IMP, f, [(s1, copies, r1 + [f.antecedent]), (s2 + [f.consequent], copies, r2)]
    elif isinstance(f, Par):
        for s1, s2, r1, r2 in _splits(rest, rhs):
            yield "split", RuleId.L_PAR, f, [(s1 + [f.left], copies, r1), (s2 + [f.right], copies, r2)]


def _splits(ctx: list[Formula], rhs: list[Formula]):
    """All ways to distribute two multisets over two premises, without repeats."""
    lc = Counter(ctx)
    rc = Counter(rhs)
    litems = sorted(lc, key=_key)
    ritems = sorted(rc, key=_key)
    lranges = [range(lc[f] + 1) for f in litems]
    rranges = [range(rc[f] + 1) for f in ritems]
    for lpick in itertools.product(*lranges):
        s1, s2 = [], []
        for f, k in zip(litems, lpick):
            s1 += [f] * k
            s2 += [f] * (lc[f] - k)
        for rpick in itertools.product(*rranges):
            r1, r2 = [], []
            for f, k in zip(ritems, rpick):
                r1 += [f] * k
                r2 += [f] * (rc[f] - k)
            yield s1, s2, r1, r2


def prove(s: Sequent, budget: SearchBudget = SearchBudget()) -> SearchResult:
    N = budget.modulus_N
    if N is None and budget.balance_pruning:
        N = infer_modulus_N(s.formulas())
    search = _Search(budget, N)
    st, dups = _make_state(list(s.lhs), {}, list(s.rhs))
    status, proof, _ = search.solve(st, budget.max_depth, set())
    if status == PROVED:
        if dups:
            proof = weaken(proof, dups)
        return Proved(proof)
    if status in (REFUTED, LOOP):
        return Refuted()
    if search.aborted:
        return BudgetExhausted(f"node limit {budget.max_nodes} reached")
    return BudgetExhausted("depth or contraction bound reached")
