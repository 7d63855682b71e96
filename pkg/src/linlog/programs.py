"""Acyclic programs with a stack: structure, strong computation, usage and proofs."""

from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .formula import (
    Bang,
    Embedded,
    Formula,
    Horn,
    Literal,
    Lollipop,
    NormalizedFormula,
    NormalizedSequent,
    Plus,
    PlusHorn,
    SimpleProduct,
    WithHorn,
    is_simple_product,
    tensor_leaves_of,
)
from .proof import (
    Proof,
    RuleId,
    contract,
    left_tensor_intro,
    node,
    project_left,
    tensor_right,
    weaken,
)
from .sexpr import SexprError, read_one

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class ProgramError(ValueError):
    pass


class NoAssignment(ValueError):
    pass


class NotAStrongSolution(ValueError):
    pass


class ExtractionError(ValueError):
    pass


Bag = tuple[int, ...]  # sorted literal indices, possibly empty


def _bag(x: Optional[SimpleProduct]) -> Bag:
    return () if x is None else x.literals


def _bag_minus(whole: Bag, part: Bag) -> Optional[Bag]:
    c = Counter(whole)
    c.subtract(part)
    if any(v < 0 for v in c.values()):
        return None
    return tuple(sorted(c.elements()))


def _bag_plus(a: Bag, b: Bag) -> Bag:
    return tuple(sorted(a + b))


def _product(b: Bag) -> Optional[SimpleProduct]:
    return SimpleProduct(b) if b else None


# ---------------------------------------------------------------------------
# Structure


@dataclass(frozen=True)
class HornLabel:
    x: SimpleProduct
    y: SimpleProduct


@dataclass(frozen=True)
class PushLabel:
    """PUSH(Y1; X2, Y2); X2 may be empty (None)."""

    y1: SimpleProduct
    x2: Optional[SimpleProduct]
    y2: SimpleProduct


@dataclass(frozen=True)
class PopLabel:
    v: SimpleProduct


EdgeLabel = Union[HornLabel, PushLabel, PopLabel]


@dataclass(frozen=True)
class Edge:
    label: EdgeLabel
    target: "Vertex"


@dataclass(frozen=True)
class Vertex:
    id: int
    edges: tuple[Edge, ...] = ()


def vertex(*edges: Edge) -> Vertex:
    """Vertex with a placeholder id; use Program.of to number the tree."""
    return Vertex(-1, tuple(edges))


def edge(label: EdgeLabel, target: Optional[Vertex] = None) -> Edge:
    return Edge(label, target if target is not None else vertex())


def horn(x: SimpleProduct, y: SimpleProduct) -> HornLabel:
    return HornLabel(x, y)


class Program:
    """A rooted tree of labeled edges, validated on construction."""

    def __init__(self, root: Vertex):
        self.root = root
        self.vertices: dict[int, Vertex] = {}
        self.parent: dict[int, tuple[int, Edge]] = {}
        self.partners: dict[int, list[int]] = {}  # push target id -> partner pop target ids
        self._validate()

    @classmethod
    def of(cls, root: Vertex) -> "Program":
        counter = iter(range(10 ** 9))

        def renumber(v: Vertex) -> Vertex:
            vid = next(counter)
            return Vertex(vid, tuple(Edge(e.label, renumber(e.target)) for e in v.edges))

        return cls(renumber(root))

    @classmethod
    def chain(cls, *labels: EdgeLabel) -> "Program":
        v = vertex()
        for label in reversed(labels):
            v = vertex(edge(label, v))
        return cls.of(v)

    def _validate(self) -> None:
        stack = [(self.root, ())]
        while stack:
            v, open_pushes = stack.pop()
            if v.id in self.vertices:
                raise ProgramError(f"duplicate vertex id {v.id}")
            self.vertices[v.id] = v
            if len(v.edges) > 2:
                raise ProgramError(f"vertex {v.id} has {len(v.edges)} outgoing edges")
            if len(v.edges) == 2:
                a, b = v.edges
                if not (isinstance(a.label, HornLabel) and isinstance(b.label, HornLabel)
                        and a.label.x == b.label.x):
                    raise ProgramError(f"divergent vertex {v.id} needs two Horn edges with one antecedent")
            if not v.edges and open_pushes:
                raise ProgramError(f"push without a partner pop on the path to leaf {v.id}")
            for e in v.edges:
                self.parent[e.target.id] = (v.id, e)
                pushes = open_pushes
                if isinstance(e.label, PushLabel):
                    self.partners.setdefault(e.target.id, [])
                    pushes = pushes + (e.target.id,)
                elif isinstance(e.label, PopLabel) and pushes:
                    self.partners[pushes[-1]].append(e.target.id)
                    pushes = pushes[:-1]
                stack.append((e.target, pushes))

    def leaves(self) -> list[int]:
        return [vid for vid, v in self.vertices.items() if not v.edges]

    def edge_count(self) -> int:
        return len(self.parent)

    def push_count(self) -> int:
        return len(self.partners)

    def partner_labels(self, push_target: int) -> list[PopLabel]:
        return [self.parent[t][1].label for t in self.partners[push_target]]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Program) and self.root == other.root

    def __hash__(self) -> int:
        return hash(self.root)

    def to_sexpr(self) -> str:
        return program_to_sexpr(self)


# ---------------------------------------------------------------------------
# Serialization


def _lits(b: Bag) -> str:
    return "(" + " ".join(f"p{i}" for i in b) + ")"


def _label_text(label: EdgeLabel) -> str:
    if isinstance(label, HornLabel):
        return f"(horn {_lits(label.x.literals)} {_lits(label.y.literals)})"
    if isinstance(label, PushLabel):
        return f"(push {_lits(label.y1.literals)} {_lits(_bag(label.x2))} {_lits(label.y2.literals)})"
    return f"(pop {_lits(label.v.literals)})"


def program_to_sexpr(p: Program) -> str:
    lines: list[str] = []

    def emit(v: Vertex, depth: int, prefix: str) -> None:
        pad = "  " * depth
        if not v.edges:
            lines.append(f"{pad}{prefix}(vertex {v.id})")
            return
        lines.append(f"{pad}{prefix}(vertex {v.id}")
        for e in v.edges:
            emit(e.target, depth + 1, f"(edge {_label_text(e.label)} ")
            lines[-1] += ")"
        lines[-1] += ")"

    emit(p.root, 0, "")
    return "\n".join(lines) + "\n"


def _parse_bag(item) -> Bag:
    if not isinstance(item, list):
        raise ProgramError("expected a literal list")
    out = []
    for tok in item:
        if not (isinstance(tok, str) and tok.startswith("p") and tok[1:].isdigit() and int(tok[1:]) >= 1):
            raise ProgramError(f"bad literal {tok!r}")
        out.append(int(tok[1:]))
    return tuple(sorted(out))


def _nonempty(item) -> SimpleProduct:
    b = _parse_bag(item)
    if not b:
        raise ProgramError("empty product where a simple product is required")
    return SimpleProduct(b)


def _parse_label(item) -> EdgeLabel:
    if not isinstance(item, list) or not item:
        raise ProgramError("expected an edge label")
    kind, args = item[0], item[1:]
    if kind == "horn" and len(args) == 2:
        return HornLabel(_nonempty(args[0]), _nonempty(args[1]))
    if kind == "push" and len(args) == 3:
        return PushLabel(_nonempty(args[0]), _product(_parse_bag(args[1])), _nonempty(args[2]))
    if kind == "pop" and len(args) == 1:
        return PopLabel(_nonempty(args[0]))
    raise ProgramError(f"bad edge label {item!r}")


def _parse_vertex(item) -> Vertex:
    if not (isinstance(item, list) and len(item) >= 2 and item[0] == "vertex" and str(item[1]).isdigit()):
        raise ProgramError("expected (vertex <id> ...)")
    edges = []
    for e in item[2:]:
        if not (isinstance(e, list) and len(e) == 3 and e[0] == "edge"):
            raise ProgramError("expected (edge <label> <vertex>)")
        edges.append(Edge(_parse_label(e[1]), _parse_vertex(e[2])))
    return Vertex(int(item[1]), tuple(edges))


def program_from_sexpr(text: str) -> Program:
    try:
        return Program(_parse_vertex(read_one(text)))
    except SexprError as exc:
        raise ProgramError(str(exc)) from None


# ---------------------------------------------------------------------------
# Strong computation


@dataclass(frozen=True)
class ExecutionTrace:
    out: dict[int, Optional[SimpleProduct]]
    stack: dict[int, Optional[tuple[SimpleProduct, ...]]]


def run_strong(p: Program, w: SimpleProduct) -> ExecutionTrace:
    out: dict[int, Optional[SimpleProduct]] = {}
    stk: dict[int, Optional[tuple[SimpleProduct, ...]]] = {}
    todo = [(p.root, w, ())]
    while todo:
        v, value, stack = todo.pop()
        out[v.id] = value
        stk[v.id] = None if value is None else stack
        for e in v.edges:
            nvalue, nstack = None, None
            if value is not None:
                label = e.label
                if isinstance(label, HornLabel):
                    rest = _bag_minus(value.literals, label.x.literals)
                    if rest is not None:
                        nvalue, nstack = SimpleProduct(_bag_plus(label.y.literals, rest)), stack
                elif isinstance(label, PushLabel):
                    x1 = _bag_minus(value.literals, _bag(label.x2))
                    if x1 is not None:
                        pushed = SimpleProduct(_bag_plus(x1, label.y1.literals))
                        nvalue = SimpleProduct(_bag_plus(_bag(label.x2), label.y2.literals))
                        nstack = stack + (pushed,)
                else:
                    if value == label.v and stack:
                        nvalue, nstack = stack[-1], stack[:-1]
            todo.append((e.target, nvalue, nstack))
    return ExecutionTrace(out, stk)


def evaluate(p: Program, w: SimpleProduct, z: SimpleProduct) -> bool:
    trace = run_strong(p, w)
    for leaf in p.leaves():
        if trace.out[leaf] is None or trace.stack[leaf] or trace.out[leaf] != z:
            return False
    return True


# ---------------------------------------------------------------------------
# Usage


@dataclass(frozen=True)
class Use:
    formula: NormalizedFormula
    from_gamma: bool
    branch: Optional[int] = None  # WithHorn projection, or PlusHorn disjunct


UsageAssignment = dict[int, Use]  # keyed by the target vertex id of the edge


def _horn_covers(a: NormalizedFormula, label: HornLabel) -> Iterator[Optional[int]]:
    if isinstance(a, Horn) and a.x == label.x and a.y == label.y:
        yield None
    elif isinstance(a, WithHorn):
        for i, h in enumerate(a.branches):
            if h.x == label.x and h.y == label.y:
                yield i


def assign_usage(p: Program, delta, gamma) -> UsageAssignment:
    delta = list(delta)
    gamma = list(gamma)
    distinct_delta = list(dict.fromkeys(delta))
    distinct_gamma = list(dict.fromkeys(gamma))

    def candidates(remaining: Counter):
        for a in distinct_delta:
            if remaining[a] > 0:
                yield a, False
        for a in distinct_gamma:
            yield a, True

    def take(remaining: Counter, a, from_gamma: bool) -> Counter:
        if from_gamma:
            return remaining
        out = Counter(remaining)
        out[a] -= 1
        return out

    def solve(v: Vertex, remaining: Counter) -> Optional[UsageAssignment]:
        if not v.edges:
            return {} if not +remaining else None
        if len(v.edges) == 2:
            e1, e2 = v.edges
            for a, g in candidates(remaining):
                if not isinstance(a, PlusHorn) or a.x != e1.label.x:
                    continue
                for b1, b2 in ((0, 1), (1, 0)):
                    ys = (a.y1, a.y2)
                    if ys[b1] != e1.label.y or ys[b2] != e2.label.y:
                        continue
                    rest = take(remaining, a, g)
                    s1 = solve(e1.target, rest)
                    if s1 is None:
                        continue
                    s2 = solve(e2.target, rest)
                    if s2 is None:
                        continue
                    out = {e1.target.id: Use(a, g, b1), e2.target.id: Use(a, g, b2)}
                    out.update(s1)
                    out.update(s2)
                    return out
            return None
        (e,) = v.edges
        label = e.label
        if isinstance(label, PopLabel):
            return solve(e.target, remaining)
        for a, g in candidates(remaining):
            if isinstance(label, HornLabel):
                branches = list(_horn_covers(a, label))
            elif isinstance(a, Embedded) and a.u == label.y2 and a.y == label.y1 and all(
                    pl.v == a.v for pl in p.partner_labels(e.target.id)):
                branches = [None]
            else:
                branches = []
            for br in branches:
                sub = solve(e.target, take(remaining, a, g))
                if sub is not None:
                    sub[e.target.id] = Use(a, g, br)
                    return sub
        return None

    result = solve(p.root, Counter(delta))
    if result is None:
        raise NoAssignment("no usage assignment covers this program")
    return result


def check_strong_solution(p: Program, s: NormalizedSequent) -> bool:
    if not evaluate(p, s.w, s.z):
        return False
    try:
        assign_usage(p, s.delta, s.gamma)
    except NoAssignment:
        return False
    return True


# ---------------------------------------------------------------------------
# Plans: a program read as nested scopes, shared by every proof builder


@dataclass
class Plan:
    kind: str  # finish | horn | fork | push
    value: SimpleProduct
    goal: SimpleProduct
    delta: tuple  # Delta formulas still to be used inside this scope
    use: Optional[Use] = None
    x: Bag = ()
    y: Optional[SimpleProduct] = None
    y2: Optional[SimpleProduct] = None
    rest: Bag = ()
    u: Optional[SimpleProduct] = None
    v: Optional[SimpleProduct] = None
    subs: tuple["Plan", ...] = ()


def _nf_sorted(items) -> tuple:
    return tuple(sorted(items, key=lambda a: a.formula.text))


def build_plan(p: Program, s: NormalizedSequent) -> Plan:
    if not evaluate(p, s.w, s.z):
        raise NotAStrongSolution("the program does not compute Z from W")
    try:
        usage = assign_usage(p, s.delta, s.gamma)
    except NoAssignment as exc:
        raise NotAStrongSolution(str(exc)) from None
    trace = run_strong(p, s.w)

    def mine(use: Use) -> tuple:
        return () if use.from_gamma else (use.formula,)

    def build(v: Vertex, goal: SimpleProduct) -> Plan:
        value = trace.out[v.id]
        if not v.edges or isinstance(v.edges[0].label, PopLabel):
            if value != goal:
                raise NotAStrongSolution(f"vertex {v.id} ends its scope with {value}, expected {goal}")
            return Plan("finish", value, goal, ())
        if len(v.edges) == 2:
            e1, e2 = v.edges
            use = usage[e1.target.id]
            if use.branch == 1:
                e1, e2 = e2, e1
            a: PlusHorn = use.formula
            first, second = build(e1.target, goal), build(e2.target, goal)
            if Counter(first.delta) != Counter(second.delta):
                raise NotAStrongSolution(f"fork at {v.id} uses different formulas in its branches")
            rest = _bag_minus(value.literals, a.x.literals)
            return Plan("fork", value, goal, _nf_sorted(mine(use) + first.delta), use,
                        x=a.x.literals, y=a.y1, y2=a.y2, rest=rest, subs=(first, second))
        (e,) = v.edges
        use = usage[e.target.id]
        label = e.label
        if isinstance(label, HornLabel):
            nxt = build(e.target, goal)
            rest = _bag_minus(value.literals, label.x.literals)
            return Plan("horn", value, goal, _nf_sorted(mine(use) + nxt.delta), use,
                        x=label.x.literals, y=label.y, rest=rest, subs=(nxt,))
        a: Embedded = use.formula
        block = build(e.target, a.v)
        conts = [build(p.vertices[t], goal) for t in p.partners[e.target.id]]
        for c in conts[1:]:
            if Counter(c.delta) != Counter(conts[0].delta):
                raise NotAStrongSolution(f"push at {v.id}: continuations use different formulas")
        x2 = _bag(label.x2)
        x1 = _bag_minus(value.literals, x2)
        return Plan("push", value, goal, _nf_sorted(mine(use) + block.delta + conts[0].delta), use,
                    x=x1, y=a.y, rest=x2, u=a.u, v=a.v, subs=(block, conts[0]))

    root = build(p.root, s.z)
    if Counter(root.delta) != Counter(s.delta):
        raise NotAStrongSolution("usage does not consume Delta exactly")
    return root


# ---------------------------------------------------------------------------
# Program -> derivation


def _lits_of(b: Bag) -> list[Formula]:
    return [Literal(i) for i in b]


def _use_formula(use: Use) -> tuple[Formula, Formula]:
    """(formula as it sits in the sequent, formula after any & projection)."""
    a = use.formula
    if isinstance(a, WithHorn):
        return a.formula, a.branches[use.branch].formula
    return a.formula, a.formula


def _take_from_context(top: Proof, use: Use, bangs: list[Formula]) -> Proof:
    """Wrap `top` (which has the used formula, projected, on its left) with L&, L!, C!."""
    whole, used = _use_formula(use)
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


def _source_proof(plan: Plan, bangs: list[Formula]) -> Proof:
    """Proof of value-literals, plan.delta, bangs |- goal."""
    goal = plan.goal.formula
    deltas = [a.formula for a in plan.delta]
    if plan.kind == "finish":
        return weaken(tensor_right(_lits_of(plan.value.literals), goal), bangs)
    use = plan.use
    _, used = _use_formula(use)
    if plan.kind == "horn":
        (nxt,) = plan.subs
        ctx = _lits_of(plan.rest) + [a.formula for a in nxt.delta] + bangs
        right = left_tensor_intro(_source_proof(nxt, bangs), plan.y.formula, ctx, [goal])
        left = tensor_right(_lits_of(plan.x), used.antecedent)
        top = node(RuleId.L_IMP, _lits_of(plan.x) + ctx + [used], [goal], [left, right], used)
        return _take_from_context(top, use, bangs)
    if plan.kind == "fork":
        first, second = plan.subs
        ctx = _lits_of(plan.rest) + [a.formula for a in first.delta] + bangs
        r1 = left_tensor_intro(_source_proof(first, bangs), plan.y.formula, ctx, [goal])
        r2 = left_tensor_intro(_source_proof(second, bangs), plan.y2.formula, ctx, [goal])
        summ = used.consequent
        right = node(RuleId.L_PLUS, ctx + [summ], [goal], [r1, r2], summ)
        left = tensor_right(_lits_of(plan.x), used.antecedent)
        top = node(RuleId.L_IMP, _lits_of(plan.x) + ctx + [used], [goal], [left, right], used)
        return _take_from_context(top, use, bangs)
    # push: the block proves U -o V, the continuation receives Y
    block, cont = plan.subs
    uv = used.antecedent
    bctx = _lits_of(plan.rest) + [a.formula for a in block.delta] + bangs
    inner = left_tensor_intro(_source_proof(block, bangs), plan.u.formula, bctx, [plan.v.formula])
    left = node(RuleId.R_IMP, bctx, [uv], [inner], uv)
    cctx = _lits_of(plan.x) + [a.formula for a in cont.delta] + bangs
    right = left_tensor_intro(_source_proof(cont, bangs), plan.y.formula, cctx, [goal])
    top = node(RuleId.L_IMP, bctx + cctx + [used], [goal], [left, right], used)
    top = contract(top, bangs)
    return _take_from_context(top, use, bangs)


def program_to_proof(p: Program, s: NormalizedSequent) -> Proof:
    plan = build_plan(p, s)
    bangs = [Bang(a.formula) for a in s.gamma]
    inner = _source_proof(plan, bangs)
    rest = [a.formula for a in s.delta] + bangs
    out = left_tensor_intro(inner, s.w.formula, rest, [s.z.formula])
    if out.conclusion != s.to_sequent():
        raise NotAStrongSolution("assembled proof has the wrong conclusion")
    return out


# ---------------------------------------------------------------------------
# Derivation -> program (source side)


class _Frag:
    __slots__ = ("edges",)

    def __init__(self, edges=None):
        self.edges: list[tuple[EdgeLabel, "_Frag"]] = edges or []

    def copy(self) -> "_Frag":
        return _Frag([(label, t.copy()) for label, t in self.edges])

    def leaves(self) -> list["_Frag"]:
        if not self.edges:
            return [self]
        out = []
        for _, t in self.edges:
            out.extend(t.leaves())
        return out

    def to_vertex(self) -> Vertex:
        return vertex(*(Edge(label, t.to_vertex()) for label, t in self.edges))


def _graft(first: _Frag, then_edges) -> _Frag:
    """Attach fresh copies of `then_edges` (label, fragment) to every leaf of `first`."""
    for leaf in first.leaves():
        leaf.edges = [(label, t.copy()) for label, t in then_edges]
    return first


def _graft_frag(first: _Frag, second: _Frag) -> _Frag:
    for leaf in first.leaves():
        leaf.edges = second.copy().edges
    return first


def _resources(lhs) -> Bag:
    out: list[int] = []
    for f in lhs:
        if is_simple_product(f):
            out.extend(g.index for g in tensor_leaves_of(f))
    return tuple(sorted(out))


_PASS_THROUGH = {RuleId.L_TENSOR, RuleId.L_BANG, RuleId.W_BANG, RuleId.C_BANG,
                 RuleId.L_WITH1, RuleId.L_WITH2, RuleId.R_IMP, RuleId.L_ONE}


def _extract_source(q: Proof) -> _Frag:
    rhs = q.conclusion.rhs
    if len(rhs) != 1:
        raise ExtractionError(f"{q.rule} node has {len(rhs)} formulas on the right")
    if q.rule is RuleId.I:
        a = rhs[0]
        if is_simple_product(a):
            return _Frag()
        if isinstance(a, Lollipop) and is_simple_product(a.antecedent) and is_simple_product(a.consequent):
            h = HornLabel(SimpleProduct.from_formula(a.antecedent), SimpleProduct.from_formula(a.consequent))
            return _Frag([(h, _Frag())])
        raise ExtractionError(f"axiom on {a} has no program reading")
    if q.rule in _PASS_THROUGH:
        return _extract_source(q.premises[0])
    if q.rule is RuleId.R_TENSOR:
        return _graft_frag(_extract_source(q.premises[0]), _extract_source(q.premises[1]))
    if q.rule is RuleId.L_IMP:
        a = q.principal_formula
        left, right = q.premises
        ant, cons = a.antecedent, a.consequent
        if is_simple_product(ant) and is_simple_product(cons):
            h = HornLabel(SimpleProduct.from_formula(ant), SimpleProduct.from_formula(cons))
            return _graft(_extract_source(left), [(h, _extract_source(right))])
        if is_simple_product(ant) and isinstance(cons, Plus):
            x = SimpleProduct.from_formula(ant)
            y1, y2 = SimpleProduct.from_formula(cons.left), SimpleProduct.from_formula(cons.right)
            f1 = _extract_source(project_left(right, cons, 0))
            f2 = _extract_source(project_left(right, cons, 1))
            return _graft(_extract_source(left), [(HornLabel(x, y1), f1), (HornLabel(x, y2), f2)])
        if isinstance(ant, Lollipop) and is_simple_product(cons):
            u = SimpleProduct.from_formula(ant.antecedent)
            v = SimpleProduct.from_formula(ant.consequent)
            y = SimpleProduct.from_formula(cons)
            x2 = _product(_resources(left.conclusion.lhs))
            block = _graft(_extract_source(left), [(PopLabel(v), _extract_source(right))])
            return _Frag([(PushLabel(y, x2, u), block)])
    raise ExtractionError(f"rule {q.rule} at '{q.conclusion.text}' has no program reading")


def program_from_proof(d: Proof) -> Program:
    """Read a derivation of a normalized sequent as a program."""
    return Program.of(_extract_source(d).to_vertex())


# ---------------------------------------------------------------------------
# Bounded enumeration of strong solutions


def find_strong_solution(s: NormalizedSequent, max_edges: int = 6,
                         max_pushes: int = 1) -> Optional[Program]:
    """Smallest program (by edge count) solving s within the bounds, or None."""
    delta = list(s.delta)
    gamma = list(dict.fromkeys(s.gamma))
    z = s.z.literals
    memo: dict = {}

    def best(value: Bag, stack: tuple, remaining: tuple, pushes: int, budget: int):
        key = (value, stack, remaining, pushes, budget)
        if key in memo:
            return memo[key]
        memo[key] = None
        result = None

        def offer(cand):
            nonlocal result
            if cand is not None and (result is None or cand[0] < result[0]):
                result = cand

        if not stack and not remaining and value == z:
            result = (0, 0, _Frag())
        rem = Counter(remaining)
        pool = [(a, False) for a in dict.fromkeys(remaining)] + [(a, True) for a in gamma]

        def after(a, g) -> tuple:
            if g:
                return remaining
            c = Counter(rem)
            c[a] -= 1
            return tuple(sorted(c.elements(), key=lambda f: f.formula.text))

        if budget >= 1 and stack and value == stack[-1][1]:
            sub = best(stack[-1][0], stack[:-1], remaining, pushes, budget - 1)
            if sub:
                offer((sub[0] + 1, sub[1], _Frag([(PopLabel(SimpleProduct(value)), sub[2])])))
        for a, g in pool:
            if result is not None and result[0] <= 1:
                break
            if isinstance(a, (Horn, WithHorn)) and budget >= 1:
                hs = [a] if isinstance(a, Horn) else list(a.branches)
                for h in dict.fromkeys(hs):
                    rest = _bag_minus(value, h.x.literals)
                    if rest is None:
                        continue
                    sub = best(_bag_plus(rest, h.y.literals), stack, after(a, g), pushes, budget - 1)
                    if sub:
                        offer((sub[0] + 1, sub[1], _Frag([(HornLabel(h.x, h.y), sub[2])])))
            elif isinstance(a, PlusHorn) and budget >= 2:
                rest = _bag_minus(value, a.x.literals)
                if rest is None:
                    continue
                nxt = after(a, g)
                for p1 in range(pushes + 1):
                    s1 = best(_bag_plus(rest, a.y1.literals), stack, nxt, p1, budget - 2)
                    if not s1:
                        continue
                    s2 = best(_bag_plus(rest, a.y2.literals), stack, nxt, pushes - s1[1],
                              budget - 2 - s1[0])
                    if s2:
                        offer((s1[0] + s2[0] + 2, s1[1] + s2[1],
                               _Frag([(HornLabel(a.x, a.y1), s1[2]), (HornLabel(a.x, a.y2), s2[2])])))
            elif isinstance(a, Embedded) and pushes >= 1 and budget >= 2:
                for x2 in _sub_bags(value):
                    x1 = _bag_minus(value, x2)
                    frame = (_bag_plus(x1, a.y.literals), a.v.literals)
                    sub = best(_bag_plus(x2, a.u.literals), stack + (frame,), after(a, g),
                               pushes - 1, budget - 1)
                    if sub:
                        label = PushLabel(a.y, _product(x2), a.u)
                        offer((sub[0] + 1, sub[1] + 1, _Frag([(label, sub[2])])))
        memo[key] = result
        return result

    start = tuple(sorted(delta, key=lambda f: f.formula.text))
    found = best(s.w.literals, (), start, max_pushes, max_edges)
    if found is None:
        return None
    return Program.of(found[2].to_vertex())


def _sub_bags(b: Bag) -> list[Bag]:
    c = Counter(b)
    items = sorted(c)
    out = [()]
    for i in items:
        out = [o + (i,) * k for o in out for k in range(c[i] + 1)]
    return [tuple(sorted(o)) for o in out]
