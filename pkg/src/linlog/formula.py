"""Formulas, sequents, simple products and normalized formulas."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Union


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class NotNormalized(ValueError):
    pass


# ---------------------------------------------------------------------------
# Formula tree


@dataclass(frozen=True, eq=False)
class Formula:
    """Base class. Equality and hashing go through the canonical text."""

    def __post_init__(self) -> None:
        text = self._render()
        object.__setattr__(self, "text", text)
        object.__setattr__(self, "_hash", hash(text))

    def _render(self) -> str:
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Formula):
            return NotImplemented
        return self._hash == other._hash and self.text == other.text

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return self.text

    @property
    def sort_key(self) -> tuple:
        return (1, 0, self.text)

    def children(self) -> tuple["Formula", ...]:
        return ()


@dataclass(frozen=True, eq=False)
class Literal(Formula):
    index: int

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or self.index < 1:
            raise ValueError(f"literal index must be >= 1, got {self.index!r}")
        super().__post_init__()

    def _render(self) -> str:
        return f"p{self.index}"

    @property
    def sort_key(self) -> tuple:
        return (0, self.index, "")


@dataclass(frozen=True, eq=False)
class Bottom(Formula):
    def _render(self) -> str:
        return "bot"


@dataclass(frozen=True, eq=False)
class One(Formula):
    def _render(self) -> str:
        return "1"


@dataclass(frozen=True, eq=False)
class _Binary(Formula):
    left: Formula
    right: Formula
    symbol = "?"

    def _render(self) -> str:
        return f"({self.left.text} {self.symbol} {self.right.text})"

    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Tensor(_Binary):
    symbol = "*"


@dataclass(frozen=True, eq=False)
class Par(_Binary):
    symbol = "@"


@dataclass(frozen=True, eq=False)
class With(_Binary):
    symbol = "&"


@dataclass(frozen=True, eq=False)
class Plus(_Binary):
    symbol = "+"


@dataclass(frozen=True, eq=False)
class Lollipop(Formula):
    antecedent: Formula
    consequent: Formula

    def _render(self) -> str:
        return f"({self.antecedent.text} -o {self.consequent.text})"

    def children(self) -> tuple[Formula, ...]:
        return (self.antecedent, self.consequent)


@dataclass(frozen=True, eq=False)
class Bang(Formula):
    body: Formula

    def _render(self) -> str:
        return f"!{self.body.text}"

    def children(self) -> tuple[Formula, ...]:
        return (self.body,)


BOT = Bottom()
ONE = One()

_BINARY_BY_SYMBOL = {"*": Tensor, "@": Par, "&": With, "+": Plus}


def print_formula(f: Formula) -> str:
    return f.text


def subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(g.children())


def tensor_leaves_of(f: Formula) -> list[Formula]:
    out, stack = [], [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Tensor):
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


def par_leaves_of(f: Formula) -> list[Formula]:
    out, stack = [], [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Par):
            stack.append(g.right)
            stack.append(g.left)
        else:
            out.append(g)
    return out


def literal_indices(f: Formula) -> set[int]:
    return {g.index for g in subformulas(f) if isinstance(g, Literal)}


def substitute_literal(f: Formula, index: int, replacement: Formula) -> Formula:
    """Replace every occurrence of literal `index` by `replacement`."""
    cache: dict[Formula, Formula] = {}

    def go(g: Formula) -> Formula:
        if g in cache:
            return cache[g]
        if isinstance(g, Literal):
            out = replacement if g.index == index else g
        elif isinstance(g, (Bottom, One)):
            out = g
        elif isinstance(g, Bang):
            out = Bang(go(g.body))
        elif isinstance(g, Lollipop):
            out = Lollipop(go(g.antecedent), go(g.consequent))
        else:
            out = type(g)(go(g.left), go(g.right))
        cache[g] = out
        return out

    return go(f)


# ---------------------------------------------------------------------------
# Parsing

_SINGLE = {"(": "(", ")": ")", "!": "!", "*": "*", "@": "@", "&": "&", "+": "+", ",": ","}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in _SINGLE:
            tokens.append((_SINGLE[c], c, i))
            i += 1
        elif text.startswith("-o", i):
            tokens.append(("-o", "-o", i))
            i += 2
        elif text.startswith("|-", i):
            tokens.append(("|-", "|-", i))
            i += 2
        elif c.isalnum():
            j = i
            while j < n and text[j].isalnum():
                j += 1
            word = text[i:j]
            if word == "bot":
                tokens.append(("bot", word, i))
            elif word == "1":
                tokens.append(("1", word, i))
            elif word[0] == "p" and word[1:].isdigit() and int(word[1:]) >= 1:
                tokens.append(("lit", word, i))
            else:
                raise FormulaSyntaxError(f"unknown atom {word!r}", text, i)
            i = j
        else:
            raise FormulaSyntaxError(f"unexpected character {c!r}", text, i)
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> str:
        return self.tokens[self.pos][0]

    def take(self, kind: str) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        if tok[0] != kind:
            self.fail(f"expected {kind!r}")
        self.pos += 1
        return tok

    def fail(self, message: str):
        kind, value, at = self.tokens[self.pos]
        found = "end of input" if kind == "eof" else repr(value)
        raise FormulaSyntaxError(f"{message}, found {found}", self.text, at)

    def formula(self) -> Formula:
        kind = self.peek()
        if kind == "bot":
            self.pos += 1
            return BOT
        if kind == "1":
            self.pos += 1
            return ONE
        if kind == "lit":
            _, value, _ = self.take("lit")
            return Literal(int(value[1:]))
        if kind == "!":
            self.pos += 1
            return Bang(self.formula())
        if kind == "(":
            self.pos += 1
            left = self.formula()
            op = self.peek()
            if op not in ("*", "@", "&", "+", "-o"):
                self.fail("expected a binary connective")
            self.pos += 1
            right = self.formula()
            self.take(")")
            if op == "-o":
                return Lollipop(left, right)
            return _BINARY_BY_SYMBOL[op](left, right)
        self.fail("expected a formula")

    def formula_list(self, stop: tuple[str, ...]) -> list[Formula]:
        out: list[Formula] = []
        if self.peek() in stop:
            return out
        out.append(self.formula())
        while self.peek() == ",":
            self.pos += 1
            out.append(self.formula())
        return out


def parse_formula(text: str) -> Formula:
    parser = _Parser(text)
    f = parser.formula()
    parser.take("eof")
    return f


def parse_sequent(text: str) -> "Sequent":
    parser = _Parser(text)
    lhs = parser.formula_list(("|-",))
    parser.take("|-")
    rhs = parser.formula_list(("eof",))
    parser.take("eof")
    return Sequent(lhs, rhs)


# ---------------------------------------------------------------------------
# Sequents


def _sorted(formulas: Iterable[Formula]) -> tuple[Formula, ...]:
    return tuple(sorted(formulas, key=lambda f: f.sort_key))


@dataclass(frozen=True)
class Sequent:
    """A two-sided sequent; both sides are multisets kept in canonical order."""

    lhs: tuple[Formula, ...]
    rhs: tuple[Formula, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lhs", _sorted(self.lhs))
        object.__setattr__(self, "rhs", _sorted(self.rhs))

    @property
    def text(self) -> str:
        left = ", ".join(f.text for f in self.lhs)
        right = ", ".join(f.text for f in self.rhs)
        return f"{left} |- {right}".strip()

    def __str__(self) -> str:
        return self.text

    def formulas(self) -> Iterator[Formula]:
        yield from self.lhs
        yield from self.rhs


# ---------------------------------------------------------------------------
# Simple products


@dataclass(frozen=True, order=True)
class SimpleProduct:
    """A non-empty multiset of literal indices, kept sorted."""

    literals: tuple[int, ...]

    def __post_init__(self) -> None:
        lits = tuple(sorted(self.literals))
        if not lits:
            raise ValueError("a simple product needs at least one literal")
        if any(not isinstance(i, int) or i < 1 for i in lits):
            raise ValueError(f"bad literal indices {lits}")
        object.__setattr__(self, "literals", lits)

    @classmethod
    def of(cls, *indices: int) -> "SimpleProduct":
        return cls(tuple(indices))

    @classmethod
    def from_formula(cls, f: Formula) -> "SimpleProduct":
        lits = _product_literals(f)
        if lits is None:
            raise ValueError(f"not a simple product: {f.text}")
        return cls(tuple(lits))

    @property
    def formula(self) -> Formula:
        out: Formula = Literal(self.literals[-1])
        for i in reversed(self.literals[:-1]):
            out = Tensor(Literal(i), out)
        return out

    @property
    def counter(self) -> Counter:
        return Counter(self.literals)

    def __add__(self, other: "SimpleProduct") -> "SimpleProduct":
        return SimpleProduct(self.literals + other.literals)

    def __len__(self) -> int:
        return len(self.literals)

    @property
    def text(self) -> str:
        return self.formula.text

    def __str__(self) -> str:
        return self.text


def _product_literals(f: Formula) -> list[int] | None:
    if isinstance(f, Literal):
        return [f.index]
    if isinstance(f, Tensor):
        a = _product_literals(f.left)
        b = _product_literals(f.right)
        if a is None or b is None:
            return None
        return a + b
    return None


def is_simple_product(f: Formula) -> bool:
    return _product_literals(f) is not None


def product_of_multiset(m: Iterable[int]) -> tuple[SimpleProduct, Formula]:
    prod = SimpleProduct(tuple(m))
    return prod, prod.formula


def product_equiv(x: SimpleProduct, y: SimpleProduct) -> bool:
    return x.literals == y.literals


def power_tensor(a: Formula, n: int) -> Formula:
    if n < 0:
        raise ValueError("negative power")
    if n == 0:
        return ONE
    out = a
    for _ in range(n - 1):
        out = Tensor(a, out)
    return out


def power_par(a: Formula, n: int) -> Formula:
    if n < 0:
        raise ValueError("negative power")
    if n == 0:
        return BOT
    out = a
    for _ in range(n - 1):
        out = Par(a, out)
    return out


def nested_impl(a: Formula, n: int, b: Formula) -> Formula:
    if n < 0:
        raise ValueError("negative power")
    out = b
    for _ in range(n):
        out = Lollipop(a, out)
    return out


# ---------------------------------------------------------------------------
# Normalized formulas


@dataclass(frozen=True)
class Horn:
    x: SimpleProduct
    y: SimpleProduct

    @property
    def formula(self) -> Formula:
        return Lollipop(self.x.formula, self.y.formula)


@dataclass(frozen=True)
class PlusHorn:
    x: SimpleProduct
    y1: SimpleProduct
    y2: SimpleProduct

    @property
    def formula(self) -> Formula:
        return Lollipop(self.x.formula, Plus(self.y1.formula, self.y2.formula))


@dataclass(frozen=True)
class WithHorn:
    x1: SimpleProduct
    y1: SimpleProduct
    x2: SimpleProduct
    y2: SimpleProduct

    @property
    def branches(self) -> tuple[Horn, Horn]:
        return Horn(self.x1, self.y1), Horn(self.x2, self.y2)

    @property
    def formula(self) -> Formula:
        a, b = self.branches
        return With(a.formula, b.formula)


@dataclass(frozen=True)
class Embedded:
    """(U -o V) -o Y."""

    u: SimpleProduct
    v: SimpleProduct
    y: SimpleProduct

    @property
    def formula(self) -> Formula:
        return Lollipop(Lollipop(self.u.formula, self.v.formula), self.y.formula)


NormalizedFormula = Union[Horn, PlusHorn, WithHorn, Embedded]


def _horn_parts(f: Formula) -> tuple[SimpleProduct, SimpleProduct] | None:
    if isinstance(f, Lollipop) and is_simple_product(f.antecedent) and is_simple_product(f.consequent):
        return SimpleProduct.from_formula(f.antecedent), SimpleProduct.from_formula(f.consequent)
    return None


def classify_normalized(f: Formula) -> NormalizedFormula:
    horn = _horn_parts(f)
    if horn is not None:
        return Horn(*horn)
    if isinstance(f, Lollipop):
        a, c = f.antecedent, f.consequent
        if is_simple_product(a) and isinstance(c, Plus) and is_simple_product(c.left) and is_simple_product(c.right):
            return PlusHorn(
                SimpleProduct.from_formula(a),
                SimpleProduct.from_formula(c.left),
                SimpleProduct.from_formula(c.right),
            )
        inner = _horn_parts(a)
        if inner is not None and is_simple_product(c):
            return Embedded(inner[0], inner[1], SimpleProduct.from_formula(c))
    if isinstance(f, With):
        left, right = _horn_parts(f.left), _horn_parts(f.right)
        if left is not None and right is not None:
            return WithHorn(left[0], left[1], right[0], right[1])
    raise NotNormalized(f"not a normalized formula: {f.text}")


def normalized_literals(a: NormalizedFormula) -> set[int]:
    return literal_indices(a.formula)


def _nf_key(a: NormalizedFormula) -> str:
    return a.formula.text


@dataclass(frozen=True)
class NormalizedSequent:
    """W, Delta, !Gamma |- Z."""

    w: SimpleProduct
    delta: tuple[NormalizedFormula, ...]
    gamma: tuple[NormalizedFormula, ...]
    z: SimpleProduct

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", tuple(sorted(self.delta, key=_nf_key)))
        object.__setattr__(self, "gamma", tuple(sorted(self.gamma, key=_nf_key)))

    def to_sequent(self) -> Sequent:
        lhs = [self.w.formula]
        lhs += [a.formula for a in self.delta]
        lhs += [Bang(a.formula) for a in self.gamma]
        return Sequent(tuple(lhs), (self.z.formula,))

    @classmethod
    def from_sequent(cls, s: Sequent) -> "NormalizedSequent":
        """Accepts any number of product inputs; they are tensored into W."""
        if len(s.rhs) != 1 or not is_simple_product(s.rhs[0]):
            raise NotNormalized("right-hand side must be one simple product")
        inputs: list[int] = []
        delta: list[NormalizedFormula] = []
        gamma: list[NormalizedFormula] = []
        for f in s.lhs:
            if is_simple_product(f):
                inputs.extend(_product_literals(f))
            elif isinstance(f, Bang):
                gamma.append(classify_normalized(f.body))
            else:
                delta.append(classify_normalized(f))
        if not inputs:
            raise NotNormalized("no input product on the left-hand side")
        return cls(SimpleProduct(tuple(inputs)), tuple(delta), tuple(gamma),
                   SimpleProduct.from_formula(s.rhs[0]))

    @classmethod
    def parse(cls, text: str) -> "NormalizedSequent":
        return cls.from_sequent(parse_sequent(text))

    @property
    def text(self) -> str:
        return self.to_sequent().text

    def __str__(self) -> str:
        return self.text

    def literal_indices(self) -> set[int]:
        out = set(self.w.literals) | set(self.z.literals)
        for a in self.delta + self.gamma:
            out |= normalized_literals(a)
        return out
