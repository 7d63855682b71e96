"""Encodings of normalized sequents into the one-literal, bot-only and unit-only fragments."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Optional, Union

from .formula import (
    BOT,
    ONE,
    Bang,
    Embedded,
    Formula,
    Horn,
    Literal,
    Lollipop,
    NormalizedFormula,
    NormalizedSequent,
    Par,
    Plus,
    PlusHorn,
    Sequent,
    SimpleProduct,
    Tensor,
    With,
    WithHorn,
    nested_impl,
    normalized_literals,
    power_par,
    power_tensor,
    tensor_leaves_of,
)


class Target(str, Enum):
    ONE_LITERAL = "one-literal"
    BOT_ONLY = "bot-only"
    UNIT_ONLY = "unit-only"


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class EncodingParams:
    N: int
    p_index: int
    target: Target = Target.BOT_ONLY

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", Target(self.target))
        if self.N < 9:
            raise EncodingError(f"N must be at least 9, got {self.N}")
        if not 1 <= self.p_index <= self.max_literal:
            raise EncodingError(f"leading literal p{self.p_index} outside p1..p{self.max_literal}")

    @property
    def max_literal(self) -> int:
        return self.N - 7

    def with_target(self, target: Target) -> "EncodingParams":
        return EncodingParams(self.N, self.p_index, target)


def default_params(s: NormalizedSequent, target: Target = Target.BOT_ONLY,
                   N: Optional[int] = None, p_index: Optional[int] = None) -> EncodingParams:
    """Pick N and p for a sequent.

    p defaults to one above the highest source literal; if an explicit N leaves
    no room there, the lowest unused index is taken instead.
    """
    used = s.literal_indices()
    top = max(used)
    if p_index is None:
        p_index = top + 1
        if N is not None and p_index > N - 7:
            free = [i for i in range(1, N - 6) if i not in used]
            if not free:
                raise EncodingError(f"no fresh literal index fits under N={N}")
            p_index = free[0]
    if N is None:
        N = max(9, max(top, p_index) + 7)
    params = EncodingParams(N, p_index, target)
    check_sequent_params(s, params)
    return params


def check_sequent_params(s: NormalizedSequent, params: EncodingParams) -> None:
    used = s.literal_indices()
    if params.p_index in used:
        raise EncodingError(f"leading literal p{params.p_index} occurs in the sequent")
    bad = sorted(i for i in used if i > params.max_literal)
    if bad:
        raise EncodingError(f"literals {bad} exceed p{params.max_literal} for N={params.N}")


def _check_literals(lits, params: EncodingParams) -> None:
    for m in lits:
        if not 1 <= m <= params.max_literal:
            raise EncodingError(f"literal p{m} outside p1..p{params.max_literal} for N={params.N}")


def _with_p(lits: tuple[int, ...], p: int) -> tuple[int, ...]:
    return tuple(sorted(lits + (p,)))


# ---------------------------------------------------------------------------
# Basic formulas


@lru_cache(maxsize=None)
def bot_power(n: int) -> Formula:
    return power_tensor(BOT, n)


@lru_cache(maxsize=None)
def h00(N: int) -> Formula:
    return Lollipop(bot_power(N + 2), bot_power(2))


@lru_cache(maxsize=None)
def c00(N: int) -> Formula:
    return Lollipop(Lollipop(power_tensor(h00(N), 2), bot_power(3)), bot_power(3))


@lru_cache(maxsize=None)
def h1(N: int) -> Formula:
    return Lollipop(power_tensor(c00(N), 4), bot_power(N))


@lru_cache(maxsize=None)
def lit_power(p: int, k: int) -> Formula:
    """Standalone p^<k>: the implicational stand-in for a k-fold tensor of p.

    Read as (p^<k> -o p) -o p, which becomes equivalent to bot^k when p := bot.
    """
    q = Literal(p)
    return Lollipop(nested_impl(q, k, q), q)


@lru_cache(maxsize=None)
def h0_tilde(N: int, p: int) -> Formula:
    return nested_impl(Literal(p), N + 2, lit_power(p, 2))


@lru_cache(maxsize=None)
def c0_tilde(N: int, p: int) -> Formula:
    return Lollipop(nested_impl(h0_tilde(N, p), 2, lit_power(p, 3)), lit_power(p, 3))


@lru_cache(maxsize=None)
def h1_tilde(N: int, p: int) -> Formula:
    return nested_impl(c0_tilde(N, p), 4, lit_power(p, N))


@lru_cache(maxsize=None)
def one_par(n: int) -> Formula:
    return power_par(ONE, n)


@lru_cache(maxsize=None)
def h01(N: int) -> Formula:
    return Lollipop(one_par(2), one_par(N + 2))


@lru_cache(maxsize=None)
def c01(N: int) -> Formula:
    return Lollipop(one_par(3), Tensor(one_par(3), Tensor(h01(N), h01(N))))


@dataclass(frozen=True)
class BasicFormulaTable:
    target: Target
    formulas: dict[str, Formula]

    def __getitem__(self, name: str) -> Formula:
        return self.formulas[name]


def basic_formulas(params: EncodingParams) -> BasicFormulaTable:
    N, p = params.N, params.p_index
    if params.target is Target.BOT_ONLY:
        table = {"H00": h00(N), "C00": c00(N), "H1": h1(N)}
    elif params.target is Target.ONE_LITERAL:
        table = {"H0": h0_tilde(N, p), "C0": c0_tilde(N, p), "H1": h1_tilde(N, p)}
    else:
        table = {"H01": h01(N), "C01": c01(N)}
    return BasicFormulaTable(params.target, table)


# ---------------------------------------------------------------------------
# Literals and products


@lru_cache(maxsize=None)
def d_literal(m: int, N: int) -> Formula:
    return Lollipop(Lollipop(h1(N), bot_power(m + 4)), bot_power(m + 4))


@lru_cache(maxsize=None)
def d_literal_tilde(m: int, N: int, p: int) -> Formula:
    return Lollipop(Lollipop(h1_tilde(N, p), lit_power(p, m + 4)), lit_power(p, m + 4))


@lru_cache(maxsize=None)
def g_literal(m: int, N: int) -> Formula:
    k = one_par(m + 4)
    return Tensor(k, Lollipop(k, Tensor(one_par(N), power_tensor(c01(N), 4))))


def _chain(items: list[Formula], ctor) -> Formula:
    out = items[-1]
    for f in reversed(items[:-1]):
        out = ctor(f, out)
    return out


@lru_cache(maxsize=None)
def d_product(lits: tuple[int, ...], N: int) -> Formula:
    return _chain([d_literal(m, N) for m in lits], Tensor)


@lru_cache(maxsize=None)
def g_product(lits: tuple[int, ...], N: int) -> Formula:
    return _chain([g_literal(m, N) for m in lits], Par)


@lru_cache(maxsize=None)
def g_product_tilde(lits: tuple[int, ...], N: int, p: int) -> Formula:
    out: Formula = Literal(p)
    for m in reversed(lits):
        out = Lollipop(d_literal_tilde(m, N, p), out)
    return out


def encode_product(x: SimpleProduct, params: EncodingParams) -> Formula:
    _check_literals(x.literals, params)
    N, p = params.N, params.p_index
    if params.target is Target.BOT_ONLY:
        return d_product(x.literals, N)
    if params.target is Target.ONE_LITERAL:
        return g_product_tilde(x.literals, N, p)
    return g_product(x.literals, N)


# ---------------------------------------------------------------------------
# E and F formulas; `lits` below always already contains p


@lru_cache(maxsize=None)
def e_bot(lits: tuple[int, ...], N: int) -> Formula:
    return Tensor(power_tensor(c00(N), 6), d_product(lits, N))


@lru_cache(maxsize=None)
def e_tilde(lits: tuple[int, ...], N: int, p: int) -> Formula:
    return nested_impl(c0_tilde(N, p), 6, g_product_tilde(lits, N, p))


@lru_cache(maxsize=None)
def e_unit(lits: tuple[int, ...], N: int) -> Formula:
    return Lollipop(power_tensor(c01(N), 6), g_product(lits, N))


def _e(lits: tuple[int, ...], params: EncodingParams) -> Formula:
    N, p = params.N, params.p_index
    if params.target is Target.BOT_ONLY:
        return e_bot(lits, N)
    if params.target is Target.ONE_LITERAL:
        return e_tilde(lits, N, p)
    return e_unit(lits, N)


def encode_goal(x: Optional[SimpleProduct], params: EncodingParams) -> Formula:
    """E_{p*X}; with x=None this is E_p, the encoding of an empty goal."""
    lits = () if x is None else x.literals
    _check_literals(lits, params)
    return _e(_with_p(lits, params.p_index), params)


def _horn(x: tuple[int, ...], y: tuple[int, ...], params: EncodingParams) -> Formula:
    p = params.p_index
    ex, ey = _e(_with_p(x, p), params), _e(_with_p(y, p), params)
    if params.target is Target.BOT_ONLY:
        return Lollipop(ex, ey)
    return Lollipop(ey, ex)


def encode_k(y: SimpleProduct, params: EncodingParams) -> Formula:
    """F_Y, the encoding of a bare product Y read as 1 -o Y."""
    _check_literals(y.literals, params)
    return _horn((), y.literals, params)


def encode_formula(a: Union[NormalizedFormula, SimpleProduct], params: EncodingParams) -> Formula:
    if isinstance(a, SimpleProduct):
        return encode_goal(a, params)
    lits = normalized_literals(a)
    _check_literals(lits, params)
    if params.p_index in lits:
        raise EncodingError(f"leading literal p{params.p_index} occurs in {a.formula}")
    return _encode_nf(a, params)


def _encode_nf(a: NormalizedFormula, params: EncodingParams) -> Formula:
    p = params.p_index
    t = params.target
    if isinstance(a, Horn):
        return _horn(a.x.literals, a.y.literals, params)
    if isinstance(a, WithHorn):
        f1, f2 = (_horn(h.x.literals, h.y.literals, params) for h in a.branches)
        return With(f1, f2)
    if isinstance(a, PlusHorn):
        ex = _e(_with_p(a.x.literals, p), params)
        e1 = _e(_with_p(a.y1.literals, p), params)
        e2 = _e(_with_p(a.y2.literals, p), params)
        if t is Target.BOT_ONLY:
            return Lollipop(ex, Plus(e1, e2))
        return Lollipop(With(e1, e2), ex)
    if isinstance(a, Embedded):
        f_uv = _horn(a.u.literals, a.v.literals, params)
        f_y = _horn((), a.y.literals, params)
        if t is Target.ONE_LITERAL:
            q = Literal(p)
            return Lollipop(Lollipop(f_y, q), Lollipop(f_uv, q))
        return Lollipop(f_uv, f_y)
    raise TypeError(f"not a normalized formula: {a!r}")


def encode_sequent(s: NormalizedSequent, params: EncodingParams) -> Sequent:
    check_sequent_params(s, params)
    f_delta = [_encode_nf(a, params) for a in s.delta]
    f_gamma = [Bang(_encode_nf(a, params)) for a in s.gamma]
    w = encode_goal(s.w, params)
    z = encode_goal(s.z, params)
    if params.target is Target.BOT_ONLY:
        return Sequent(tuple([w] + f_delta + f_gamma), (z,))
    return Sequent(tuple([z] + f_delta + f_gamma), (w,))


# ---------------------------------------------------------------------------
# Decoding of bot-only shapes


class BotDecoder:
    """Recognizes bot-only E, D and F formulas for a fixed N."""

    def __init__(self, N: int):
        self.N = N
        self.c00 = c00(N)
        self.c00_6 = power_tensor(self.c00, 6)
        self._d = {d_literal(m, N): m for m in range(1, N - 6)}
        self._e_cache: dict[Formula, Optional[tuple[int, ...]]] = {}
        self._f_cache: dict[Formula, Optional[tuple]] = {}

    def d_index(self, f: Formula) -> Optional[int]:
        return self._d.get(f)

    def decode_e(self, f: Formula) -> Optional[tuple[int, ...]]:
        """Literal multiset X (p included) when f is E_X, else None."""
        if f in self._e_cache:
            return self._e_cache[f]
        out = None
        if isinstance(f, Tensor) and f.left == self.c00_6:
            ms = [self._d.get(g) for g in tensor_leaves_of(f.right)]
            if all(m is not None for m in ms):
                lits = tuple(ms)
                if e_bot(tuple(sorted(lits)), self.N) == f:
                    out = tuple(sorted(lits))
        self._e_cache[f] = out
        return out

    def match_f(self, f: Formula) -> Optional[tuple]:
        """Classify an encoded formula.

        Returns ("horn", A, B) for E_A -o E_B, ("plus", A, B1, B2),
        ("emb", (U, V), B) for (E_U -o E_V) -o (E_A -o E_B) with the K-part
        flattened as ("emb", U, V, A, B), ("with", F1, F2), or None.
        """
        if f in self._f_cache:
            return self._f_cache[f]
        out = None
        if isinstance(f, Lollipop):
            a, c = f.antecedent, f.consequent
            ea = self.decode_e(a)
            if ea is not None:
                ec = self.decode_e(c)
                if ec is not None:
                    out = ("horn", ea, ec)
                elif isinstance(c, Plus):
                    e1, e2 = self.decode_e(c.left), self.decode_e(c.right)
                    if e1 is not None and e2 is not None:
                        out = ("plus", ea, e1, e2)
            elif isinstance(a, Lollipop) and isinstance(c, Lollipop):
                inner, outer = self.match_f(a), self.match_f(c)
                if inner and outer and inner[0] == "horn" and outer[0] == "horn":
                    out = ("emb", inner[1], inner[2], outer[1], outer[2])
        elif isinstance(f, With):
            f1, f2 = self.match_f(f.left), self.match_f(f.right)
            if f1 and f2 and f1[0] == "horn" and f2[0] == "horn":
                out = ("with", f1, f2)
        self._f_cache[f] = out
        return out


@lru_cache(maxsize=None)
def bot_decoder(N: int) -> BotDecoder:
    return BotDecoder(N)
