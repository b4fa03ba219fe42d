"""Clock constraints over per-event clocks.

Atoms compare one clock with a rational constant; ``And``/``Or`` are n-ary
and always flattened, so structurally equal guards render identically.
Clocks are named by their event id.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import portion as P


class ConstraintError(ValueError):
    pass


class MissingClock(ConstraintError, KeyError):
    pass


@dataclass(frozen=True)
class LowerBound:
    """``bound <= c`` (or ``<`` when strict)."""

    clock: int
    bound: Fraction
    strict: bool = False


@dataclass(frozen=True)
class UpperBound:
    """``c <= bound`` (or ``<`` when strict)."""

    clock: int
    bound: Fraction
    strict: bool = False


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


TRUE = And(())
FALSE = Or(())


def conj(*parts):
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, And) else (p,))
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*parts):
    flat = []
    for p in parts:
        flat.extend(p.parts if isinstance(p, Or) else (p,))
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


# -- constructors used by the compiler ---------------------------------------

def _dur(durations, action):
    from .syntax import DELTA

    if action == DELTA:
        return Fraction(0)
    return Fraction(durations[action])


def make_window(u, E, durations):
    """All causes finished, and the step within ``u`` of the last of them.

    ``E`` holds ``(event, action)`` pairs (or objects with ``event`` and
    ``action``).  ``u=None`` drops the upper part.
    """
    pairs = sorted(_pairs(E))
    if not pairs:
        raise ConstraintError("make_window needs a non-empty cause set; use empty_window")
    lows = [LowerBound(x, _dur(durations, a)) for x, a in pairs]
    if u is None:
        return conj(*lows)
    u = Fraction(u)
    highs = [UpperBound(x, _dur(durations, a) + u) for x, a in pairs]
    return conj(*lows, disj(*highs))


def empty_window(x: int, u):
    """``0 <= c_x <= u`` for a step with no causes."""
    if u is None:
        return LowerBound(x, Fraction(0))
    return conj(LowerBound(x, Fraction(0)), UpperBound(x, Fraction(u)))


def _pairs(E):
    out = []
    for e in E:
        if isinstance(e, tuple):
            out.append((int(e[0]), e[1]))
        else:
            out.append((e.event, e.action))
    return out


# -- transformations ---------------------------------------------------------

def shift(phi, d):
    """The delay function: every constant grows by ``d``."""
    d = Fraction(d)
    if d < 0:
        raise ConstraintError("negative shift")
    if d == 0:
        return phi
    if isinstance(phi, LowerBound):
        return LowerBound(phi.clock, phi.bound + d, phi.strict)
    if isinstance(phi, UpperBound):
        return UpperBound(phi.clock, phi.bound + d, phi.strict)
    if isinstance(phi, And):
        return And(tuple(shift(p, d) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(shift(p, d) for p in phi.parts))
    raise TypeError(phi)


def rename_clock(phi, to: int, frm: int):
    """``phi[c_to / c_frm]``."""
    if isinstance(phi, (LowerBound, UpperBound)):
        return type(phi)(to if phi.clock == frm else phi.clock, phi.bound, phi.strict)
    if isinstance(phi, And):
        return And(tuple(rename_clock(p, to, frm) for p in phi.parts))
    if isinstance(phi, Or):
        return Or(tuple(rename_clock(p, to, frm) for p in phi.parts))
    raise TypeError(phi)


def clocks(phi) -> frozenset:
    if isinstance(phi, (LowerBound, UpperBound)):
        return frozenset({phi.clock})
    out = frozenset()
    for p in phi.parts:
        out |= clocks(p)
    return out


def constants(phi) -> set:
    if isinstance(phi, (LowerBound, UpperBound)):
        return {phi.bound}
    out = set()
    for p in phi.parts:
        out |= constants(p)
    return out


# -- evaluation --------------------------------------------------------------

def evaluate(phi, nu: Mapping) -> bool:
    if isinstance(phi, (LowerBound, UpperBound)):
        try:
            v = nu[phi.clock]
        except KeyError:
            raise MissingClock(f"valuation has no value for c_e{phi.clock}") from None
        if isinstance(phi, LowerBound):
            return phi.bound < v if phi.strict else phi.bound <= v
        return v < phi.bound if phi.strict else v <= phi.bound
    if isinstance(phi, And):
        return all(evaluate(p, nu) for p in phi.parts)
    if isinstance(phi, Or):
        return any(evaluate(p, nu) for p in phi.parts)
    raise TypeError(phi)


def _atoms(phi):
    if isinstance(phi, (LowerBound, UpperBound)):
        yield phi
    else:
        for p in phi.parts:
            yield from _atoms(p)


def is_normal_form(phi) -> bool:
    """Conjunction of lower bounds and disjunctions of upper bounds, where
    every upper bound ``c <= b`` has a lower bound ``a <= c`` with ``a <= b``.
    """
    items = phi.parts if isinstance(phi, And) else (phi,)
    lows = {}
    uppers = []
    for it in items:
        if isinstance(it, LowerBound):
            lows.setdefault(it.clock, []).append(it.bound)
        elif isinstance(it, UpperBound):
            uppers.append(it)
        elif isinstance(it, Or) and it.parts and all(isinstance(p, UpperBound) for p in it.parts):
            uppers.extend(it.parts)
        else:
            return False
    for ub in uppers:
        if not any(a <= ub.bound for a in lows.get(ub.clock, ())):
            return False
    return True


def _interval(atom, nu0):
    base = nu0[atom.clock]
    edge = atom.bound - base
    if isinstance(atom, LowerBound):
        return P.openclosed(edge, P.inf) if atom.strict else P.closed(edge, P.inf)
    return P.open(-P.inf, edge) if atom.strict else P.openclosed(-P.inf, edge)


def _window(phi, nu0):
    if isinstance(phi, (LowerBound, UpperBound)):
        try:
            return _interval(phi, nu0)
        except KeyError:
            raise MissingClock(f"valuation has no value for c_e{phi.clock}") from None
    if isinstance(phi, And):
        out = P.open(-P.inf, P.inf)
        for p in phi.parts:
            out &= _window(p, nu0)
        return out
    out = P.empty()
    for p in phi.parts:
        out |= _window(p, nu0)
    return out


def enabling_window(phi, nu0: Mapping):
    """Delays ``t >= 0`` after which ``phi`` holds, as a ``portion`` interval."""
    if not is_normal_form(phi):
        raise ConstraintError("constraint is not in normal form")
    return _window(phi, nu0) & P.closedopen(Fraction(0), P.inf)


def boundaries(phi, nu) -> set:
    """Positive delays at which some atom of ``phi`` changes truth value."""
    out = set()
    for a in _atoms(phi):
        if a.clock in nu:
            t = a.bound - nu[a.clock]
            if t > 0:
                out.add(t)
    return out


# -- text --------------------------------------------------------------------

def _num(q) -> str:
    return str(Fraction(q))


def _cl(x) -> str:
    return f"c_e{x}"


def render(phi, unicode: bool = False) -> str:
    le, lt = ("≤", "<") if unicode else ("<=", "<")
    land, lor = (" ∧ ", " ∨ ") if unicode else (" && ", " || ")

    def op(strict):
        return lt if strict else le

    def atom(a):
        if isinstance(a, LowerBound):
            return f"{_num(a.bound)} {op(a.strict)} {_cl(a.clock)}"
        return f"{_cl(a.clock)} {op(a.strict)} {_num(a.bound)}"

    def go(p, top):
        if isinstance(p, (LowerBound, UpperBound)):
            return atom(p)
        if isinstance(p, And):
            if not p.parts:
                return "true"
            chunks, i = [], 0
            parts = p.parts
            while i < len(parts):
                a = parts[i]
                b = parts[i + 1] if i + 1 < len(parts) else None
                if isinstance(a, LowerBound) and isinstance(b, UpperBound) and a.clock == b.clock:
                    chunks.append(f"{_num(a.bound)} {op(a.strict)} {_cl(a.clock)} {op(b.strict)} {_num(b.bound)}")
                    i += 2
                else:
                    chunks.append(go(a, False))
                    i += 1
            s = land.join(chunks)
            return s if top or len(chunks) == 1 else f"({s})"
        if not p.parts:
            return "false"
        s = lor.join(go(q, False) for q in p.parts)
        return s if top else f"({s})"

    return go(phi, True)


_TOK = re.compile(r"\s*(<=|<|≤|&&|\|\||∧|∨|\(|\)|true|false|c_e\d+|\d+(?:/\d+)?)")


def parse(text: str):
    """Inverse of :func:`render` (ASCII or Unicode)."""
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOK.match(text, pos)
        if not m:
            raise ConstraintError(f"bad constraint text at {pos}: {text[pos:]!r}")
        toks.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    toks.append(None)
    i = 0

    def peek():
        return toks[i]

    def take():
        nonlocal i
        t = toks[i]
        i += 1
        return t

    def cmp():
        t = take()
        if t in ("<=", "≤"):
            return False
        if t == "<":
            return True
        raise ConstraintError(f"expected comparison, got {t!r}")

    def primary():
        t = peek()
        if t == "(":
            take()
            p = disjunction()
            if take() != ")":
                raise ConstraintError("expected ')'")
            return p
        if t == "true":
            take()
            return TRUE
        if t == "false":
            take()
            return FALSE
        if t and t.startswith("c_e"):
            x = int(take()[3:])
            strict = cmp()
            return UpperBound(x, Fraction(take()), strict)
        if t and t[0].isdigit():
            a = Fraction(take())
            s1 = cmp()
            c = take()
            if not c or not c.startswith("c_e"):
                raise ConstraintError("expected clock")
            x = int(c[3:])
            lo = LowerBound(x, a, s1)
            if peek() in ("<=", "<", "≤"):
                s2 = cmp()
                return And((lo, UpperBound(x, Fraction(take()), s2)))
            return lo
        raise ConstraintError(f"unexpected token {t!r}")

    def conjunction():
        parts = [primary()]
        while peek() in ("&&", "∧"):
            take()
            parts.append(primary())
        return conj(*parts) if len(parts) > 1 else parts[0]

    def disjunction():
        parts = [conjunction()]
        while peek() in ("||", "∨"):
            take()
            parts.append(conjunction())
        return disj(*parts) if len(parts) > 1 else parts[0]

    out = disjunction()
    if peek() is not None:
        raise ConstraintError(f"trailing tokens in constraint: {toks[i:-1]}")
    return out
