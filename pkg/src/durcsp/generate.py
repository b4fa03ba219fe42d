"""Seeded random loop-free processes."""

from __future__ import annotations

import random
from fractions import Fraction

from . import syntax as S

ACTIONS = ("a", "b", "c")


def random_process(rng: random.Random, ops: int = 6, actions=ACTIONS) -> S.Process:
    """A term with between 1 and ``ops`` operators, built top-down."""

    def bound():
        return None if rng.random() < 0.5 else Fraction(rng.randint(0, 3))

    def go(budget):
        if budget <= 0:
            return rng.choice([S.Stop(), S.Skip(bound()), S.Prefix(rng.choice(actions), bound(), S.Stop())])
        k = rng.randrange(7)
        if k <= 1:
            return S.Prefix(rng.choice(actions), bound(), go(budget - 1))
        if k == 2:
            return S.Delay(Fraction(rng.randint(1, 3)), go(budget - 1))
        if k == 6:
            return S.Hide(go(budget - 1), frozenset(rng.sample(actions, 1)))
        left = rng.randint(0, budget - 1)
        lhs, rhs = go(left), go(budget - 1 - left)
        if k == 3:
            return S.Choice(lhs, rhs)
        if k == 4:
            return S.Par(lhs, frozenset(a for a in actions if rng.random() < 0.3), rhs)
        return S.Interrupt(lhs, rhs)

    return go(rng.randint(1, ops))


def random_durations(rng: random.Random, actions=ACTIONS) -> dict:
    return {a: Fraction(rng.randint(1, 4)) for a in actions}


def random_spec(rng: random.Random, ops: int = 6) -> S.Spec:
    return S.make_spec(random_process(rng, ops), random_durations(rng))


def random_specs(seed: int, n: int, ops: int = 6) -> list:
    rng = random.Random(seed)
    return [random_spec(rng, ops) for _ in range(n)]
