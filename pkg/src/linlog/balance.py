"""The signed bot count and the congruence filter built on it."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional

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
)
from .encoding import bot_decoder, c00, e_bot, h00, h1, d_product


class BangUnsupported(ValueError):
    pass


@lru_cache(maxsize=200_000)
def bot_count(f: Formula) -> int:
    if isinstance(f, Bottom):
        return 1
    if isinstance(f, (Literal, One)):
        return 0
    if isinstance(f, Tensor):
        return bot_count(f.left) + bot_count(f.right)
    if isinstance(f, Par):
        return bot_count(f.left) + bot_count(f.right) - 1
    if isinstance(f, Lollipop):
        return bot_count(f.consequent) - bot_count(f.antecedent)
    if isinstance(f, With):
        return min(bot_count(f.left), bot_count(f.right))
    if isinstance(f, Plus):
        return max(bot_count(f.left), bot_count(f.right))
    if isinstance(f, Bang):
        raise BangUnsupported(f"no bot count is defined for !-formulas: {f.text}")
    raise TypeError(f"unknown formula {f!r}")


@dataclass(frozen=True)
class BotCount:
    value: int
    modulus: Optional[int] = None

    @property
    def residue(self) -> int:
        return self.value if self.modulus is None else self.value % self.modulus


# ---------------------------------------------------------------------------
# Shape recognition


@lru_cache(maxsize=200_000)
def _is_bot_multiplicative(f: Formula) -> bool:
    """Built from bot by tensor and linear implication only."""
    if isinstance(f, Bottom):
        return True
    if isinstance(f, Tensor):
        return _is_bot_multiplicative(f.left) and _is_bot_multiplicative(f.right)
    if isinstance(f, Lollipop):
        return _is_bot_multiplicative(f.antecedent) and _is_bot_multiplicative(f.consequent)
    return False


class Balance(str, Enum):
    HOLDS = "holds"
    VIOLATED = "violated"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class BalanceReport:
    verdict: Balance
    modulus: Optional[int]
    lhs_counts: tuple[Optional[int], ...] = ()
    rhs_counts: tuple[Optional[int], ...] = ()
    lhs_total: int = 0
    rhs_side: int = 0
    reason: str = ""

    def residues(self) -> tuple[int, int]:
        if self.modulus is None:
            return self.lhs_total, self.rhs_side
        return self.lhs_total % self.modulus, self.rhs_side % self.modulus


def _encoded_f(f: Formula, N: int) -> bool:
    return bot_decoder(N).match_f(f) is not None


def _plus_of_e(f: Formula, N: int) -> bool:
    if not isinstance(f, Plus):
        return False
    dec = bot_decoder(N)
    return dec.decode_e(f.left) is not None and dec.decode_e(f.right) is not None


def balance_report(s: Sequent, N: Optional[int]) -> BalanceReport:
    """Check the congruence  sum #A_i = 1 - m + sum #B_j  (mod 9N).

    With N=None only pure bot-multiplicative sequents are accepted and the
    equality is checked exactly.
    """
    modulus = None if N is None else 9 * N
    lhs_counts: list[Optional[int]] = []
    plus_seen = 0
    for f in s.lhs:
        if _is_bot_multiplicative(f):
            lhs_counts.append(bot_count(f))
        elif N is None:
            return BalanceReport(Balance.NOT_APPLICABLE, modulus, reason=f"not bot-built: {f.text}")
        elif isinstance(f, Bang) and _encoded_f(f.body, N):
            lhs_counts.append(None)
        elif _encoded_f(f, N):
            lhs_counts.append(bot_count(f))
        elif _plus_of_e(f, N) and plus_seen == 0:
            plus_seen += 1
            lhs_counts.append(bot_count(f))
        else:
            return BalanceReport(Balance.NOT_APPLICABLE, modulus, reason=f"unrecognized: {f.text}")
    rhs_counts = []
    for f in s.rhs:
        if not _is_bot_multiplicative(f):
            return BalanceReport(Balance.NOT_APPLICABLE, modulus, reason=f"not bot-built: {f.text}")
        rhs_counts.append(bot_count(f))
    lhs_total = sum(c for c in lhs_counts if c is not None)
    rhs_side = 1 - len(s.rhs) + sum(rhs_counts)
    if modulus is None:
        ok = lhs_total == rhs_side
    else:
        ok = (lhs_total - rhs_side) % modulus == 0
    return BalanceReport(Balance.HOLDS if ok else Balance.VIOLATED, modulus,
                         tuple(lhs_counts), tuple(rhs_counts), lhs_total, rhs_side)


def balance_check(s: Sequent, N: Optional[int]) -> Balance:
    return balance_report(s, N).verdict


# ---------------------------------------------------------------------------
# Value table


@dataclass
class LcostReport:
    N: int
    entries: list[tuple[str, int, int, bool]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e[3] for e in self.entries)

    def failures(self) -> list[str]:
        return [e[0] for e in self.entries if not e[3]]

    def __str__(self) -> str:
        lines = [f"N={self.N} modulus={9 * self.N}"]
        for name, got, want, ok in self.entries:
            lines.append(f"  {name}: {got} (expected {want}) {'ok' if ok else 'MISMATCH'}")
        return "\n".join(lines)


def lcost_verify(N: int, samples: int = 40, seed: int = 0) -> LcostReport:
    """Recompute the value table; exact for the basic formulas, mod 9N otherwise."""
    from .encoding import EncodingParams, Target, _encode_nf, encode_k
    from .formula import SimpleProduct

    M = 9 * N
    rep = LcostReport(N)

    def exact(name: str, got: int, want: int) -> None:
        rep.entries.append((name, got, want, got == want))

    def mod(name: str, got: int, want: int) -> None:
        rep.entries.append((name, got, want, (got - want) % M == 0))

    exact("H00", bot_count(h00(N)), -N)
    exact("C00", bot_count(c00(N)), -2 * N)
    exact("H1", bot_count(h1(N)), 9 * N)
    rng = random.Random(seed)
    top = N - 7
    params = EncodingParams(N, top, Target.BOT_ONLY)
    for i in range(samples):
        x = _random_lits(rng, top - 1 if top > 1 else 1)
        mod(f"D{x}", bot_count(d_product(x, N)), 0)
        mod(f"E{x}", bot_count(e_bot(x, N)), 6 * N)
        y1, y2 = _random_lits(rng, top), _random_lits(rng, top)
        mod(f"E{y1}+E{y2}", bot_count(Plus(e_bot(y1, N), e_bot(y2, N))), 6 * N)
        if top > 1:
            from .formula import Horn
            y = SimpleProduct(_random_lits(rng, top - 1))
            mod(f"F_Y{y.literals}", bot_count(encode_k(y, params)), 0)
            a = random_normalized(rng, top - 1)
            mod(f"F[{a.formula.text}]", bot_count(_encode_nf(a, params)), 0)
    return rep


def _random_lits(rng: random.Random, top: int, max_size: int = 3) -> tuple[int, ...]:
    n = rng.randint(1, max_size)
    return tuple(sorted(rng.randint(1, top) for _ in range(n)))


def random_normalized(rng: random.Random, top: int, max_size: int = 3):
    from .formula import Embedded, Horn, PlusHorn, SimpleProduct, WithHorn

    def prod() -> SimpleProduct:
        return SimpleProduct(_random_lits(rng, top, max_size))

    kind = rng.randrange(4)
    if kind == 0:
        return Horn(prod(), prod())
    if kind == 1:
        return PlusHorn(prod(), prod(), prod())
    if kind == 2:
        return WithHorn(prod(), prod(), prod(), prod())
    return Embedded(prod(), prod(), prod())
