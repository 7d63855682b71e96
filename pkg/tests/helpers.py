"""Random generators shared by the test modules."""

from __future__ import annotations

import random
from typing import Optional

from linlog.formula import Embedded, Horn, NormalizedSequent, PlusHorn, SimpleProduct, WithHorn


def rand_product(rng: random.Random, top: int = 3, max_size: int = 2) -> SimpleProduct:
    return SimpleProduct(tuple(rng.randint(1, top) for _ in range(rng.randint(1, max_size))))


def rand_formula(rng: random.Random, top: int = 3, max_size: int = 2):
    def prod():
        return rand_product(rng, top, max_size)

    kind = rng.randrange(4)
    if kind == 0:
        return Horn(prod(), prod())
    if kind == 1:
        return PlusHorn(prod(), prod(), prod())
    if kind == 2:
        return WithHorn(prod(), prod(), prod(), prod())
    return Embedded(prod(), prod(), prod())


def rand_sequent(rng: random.Random, top: int = 3, max_size: int = 2,
                 max_delta: int = 2, max_gamma: int = 1) -> NormalizedSequent:
    delta = [rand_formula(rng, top, max_size) for _ in range(rng.randint(0, max_delta))]
    gamma = [rand_formula(rng, top, max_size) for _ in range(rng.randint(0, max_gamma))]
    return NormalizedSequent(rand_product(rng, top, max_size), tuple(delta), tuple(gamma),
                             rand_product(rng, top, max_size))


def _sub(rng: random.Random, value: tuple[int, ...], max_size: int) -> Optional[tuple[int, ...]]:
    if not value:
        return None
    k = rng.randint(1, min(max_size, len(value)))
    return tuple(sorted(rng.sample(list(value), k)))


def planted_sequent(rng: random.Random, top: int = 3, max_size: int = 2,
                    max_delta: int = 2, max_gamma: int = 1) -> NormalizedSequent:
    """A sequent built by running a few random steps forward, so it is often derivable."""
    w = rand_product(rng, top, max_size)
    value = list(w.literals)
    delta, gamma = [], []
    for _ in range(rng.randint(0, max_delta)):
        x = _sub(rng, tuple(value), max_size)
        if x is None:
            break
        y = rand_product(rng, top, max_size)
        kind = rng.randrange(4)
        if kind == 0:
            a = Horn(SimpleProduct(x), y)
        elif kind == 1:
            a = PlusHorn(SimpleProduct(x), y, y)
        elif kind == 2:
            a = WithHorn(SimpleProduct(x), y, rand_product(rng, top, max_size), rand_product(rng, top, max_size))
        else:
            u = rand_product(rng, top, max_size)
            a = Embedded(u, u, y)
            x = ()
        for i in x:
            value.remove(i)
        value.extend(y.literals)
        (gamma if rng.random() < 0.2 and len(gamma) < max_gamma else delta).append(a)
    if rng.random() < 0.3 and len(gamma) < max_gamma:
        gamma.append(rand_formula(rng, top, max_size))
    if len(value) > max_size or not value:
        value = list(rand_product(rng, top, max_size).literals)
    return NormalizedSequent(w, tuple(delta), tuple(gamma), SimpleProduct(tuple(value)))
