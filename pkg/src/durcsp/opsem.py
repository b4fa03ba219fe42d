"""Operational timed causal semantics.

One successor function serves two purposes: in ``op`` mode it executes
timed configurations (stamps present, ``Finish`` checked, delay wrappers
block), in ``den`` mode it is the compiler's transition relation over
symbolic configurations (guards built and shifted instead).
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import gcd
from typing import Optional

from . import constraints as K
from . import syntax as S
from .config import (
    CChoice,
    CDelay,
    CHide,
    CInterrupt,
    CPar,
    CRefine,
    Leaf,
    PartialSeq,
    TimedEvent,
    _wrap_delay,
    canonicalize,
    fresh_event,
    ids,
    is_finished,
    leaves,
    psi,
    psi_ids,
    substitute_event,
)


class SemanticsError(ValueError):
    pass


class ScheduleError(SemanticsError):
    pass


class MakespanError(SemanticsError):
    pass


@dataclass(frozen=True)
class ActionStep:
    causes: frozenset
    action: str
    event: int

    def __str__(self):
        cs = ",".join(str(e) for e in sorted(self.causes))
        return f"{{{cs}}} {self.action} e{self.event}"


@dataclass(frozen=True)
class Move:
    """A derivation: the step, its target and (in ``den`` mode) guard/resets."""

    causes: frozenset
    label: str
    event: int
    target: object
    guard: object = None
    resets: frozenset = frozenset()

    @property
    def step(self) -> ActionStep:
        return ActionStep(self.causes, self.label, self.event)

    def renamed(self, y: int, target) -> "Move":
        x = self.event
        guard = None if self.guard is None else K.rename_clock(self.guard, y, x)
        resets = frozenset(y if r == x else r for r in self.resets)
        return Move(self.causes, self.label, y, target, guard, resets)


@dataclass(frozen=True)
class Ctx:
    durations: dict
    defs: Optional[dict] = None
    mode: str = "op"
    reserved: frozenset = frozenset()

    def duration(self, a) -> Fraction:
        if a == S.DELTA:
            return Fraction(0)
        try:
            return Fraction(self.durations[a])
        except KeyError:
            raise SemanticsError(f"no duration for action {a!r}") from None

    def fresh(self, *excluded) -> int:
        ex = set(self.reserved)
        for s in excluded:
            ex |= set(s)
        return fresh_event(ex)


def ctx_for(spec, mode="op", reserved=frozenset()) -> Ctx:
    if isinstance(spec, Ctx):
        return replace(spec, mode=mode, reserved=reserved)
    return Ctx(spec.durations, spec.definitions, mode, reserved)


# -- action derivations ------------------------------------------------------

def _leaf_moves(c: Leaf, ctx: Ctx):
    E, p = c.events, c.proc
    if isinstance(p, S.Stop):
        return []
    if isinstance(p, S.Ref):
        return derive(canonicalize(c, ctx.defs), ctx)
    timed = ctx.mode == "op"
    if timed and not is_finished(E, _Durs(ctx)):
        return []
    x = ctx.fresh(ids(E))
    stamp = Fraction(0) if timed else None
    if isinstance(p, S.Skip):
        label, target = S.DELTA, Leaf(frozenset({TimedEvent(x, S.DELTA, stamp)}), S.Stop())
    else:
        label = p.action
        target = canonicalize(Leaf(frozenset({TimedEvent(x, label, stamp)}), p.cont), ctx.defs)
    guard = None
    if not timed:
        guard = K.empty_window(x, p.bound) if not E else K.make_window(p.bound, E, _Durs(ctx))
    return [Move(E, label, x, target, guard, frozenset({x}))]


class _Durs(dict):
    """Duration lookup that knows δ and reports missing actions."""

    def __init__(self, ctx):
        super().__init__()
        self.ctx = ctx

    def __getitem__(self, a):
        return self.ctx.duration(a)


def derive(c, ctx: Ctx) -> list:
    """All one-step action derivations of ``c`` (a list of :class:`Move`)."""
    if isinstance(c, Leaf):
        return _leaf_moves(c, ctx)

    if isinstance(c, CDelay):
        if ctx.mode == "op":
            return []  # only delay{0} is transparent, and it is normalised away
        return [replace(m, guard=K.shift(m.guard, c.d)) for m in derive(c.c, ctx)]

    if isinstance(c, CChoice):
        return derive(c.left, ctx) + derive(c.right, ctx)

    if isinstance(c, CHide):
        out = []
        for m in derive(c.c, ctx):
            label = S.INTERNAL if m.label in c.hidden else m.label
            out.append(replace(m, label=label, target=CHide(m.target, c.hidden)))
        return out

    if isinstance(c, CPar):
        L = c.sync
        lm, rm = derive(c.left, ctx), derive(c.right, ctx)
        out = []
        for m in lm:
            if m.label in L or m.label == S.DELTA:
                continue
            y = ctx.fresh(psi_ids(m.target) - {m.event}, psi_ids(c.right), ids(m.causes))
            out.append(m.renamed(y, CPar(substitute_event(m.target, y, m.event), L, c.right)))
        for m in rm:
            if m.label in L or m.label == S.DELTA:
                continue
            y = ctx.fresh(psi_ids(m.target) - {m.event}, psi_ids(c.left), ids(m.causes))
            out.append(m.renamed(y, CPar(c.left, L, substitute_event(m.target, y, m.event))))
        for m1 in lm:
            if not (m1.label in L or m1.label == S.DELTA):
                continue
            for m2 in rm:
                if m2.label != m1.label:
                    continue
                causes = m1.causes | m2.causes
                z = ctx.fresh(
                    psi_ids(m1.target) - {m1.event}, psi_ids(m2.target) - {m2.event}, ids(causes)
                )
                target = CPar(
                    substitute_event(m1.target, z, m1.event), L, substitute_event(m2.target, z, m2.event)
                )
                guard = None
                if ctx.mode != "op":
                    guard = K.conj(
                        K.rename_clock(m1.guard, z, m1.event), K.rename_clock(m2.guard, z, m2.event)
                    )
                resets = frozenset(z if r == m1.event else r for r in m1.resets)
                resets |= frozenset(z if r == m2.event else r for r in m2.resets)
                out.append(Move(causes, m1.label, z, target, guard, resets))
        return out

    if isinstance(c, CInterrupt):
        out = []
        for m in derive(c.left, ctx):
            if m.label == S.DELTA:
                out.append(m)
                continue
            y = ctx.fresh(psi_ids(m.target) - {m.event}, psi_ids(c.right), ids(m.causes))
            out.append(m.renamed(y, CInterrupt(substitute_event(m.target, y, m.event), c.right)))
        out.extend(derive(c.right, ctx))
        return out

    if isinstance(c, CRefine):
        if ctx.mode != "op":
            raise SemanticsError("refinement has no denotational rule; use the operational engine")
        out = []
        for m in derive(c.c, ctx):
            if m.label != c.action:
                out.append(replace(m, target=CRefine(c.action, c.by, m.target)))
                continue
            x = m.event
            body = canonicalize(Leaf(m.causes, c.by), ctx.defs)
            for pm in derive(body, ctx):
                y = pm.event
                z = ctx.fresh(psi_ids(pm.target) - {y}, psi_ids(m.target) - {x}, {x}, ids(pm.causes))
                target = PartialSeq(substitute_event(pm.target, z, y), x, CRefine(c.action, c.by, m.target))
                out.append(Move(pm.causes, pm.label, z, target))
        return out

    if isinstance(c, PartialSeq):
        x = c.anchor
        out = []
        for m in derive(c.left, ctx):
            if m.label == S.DELTA:
                z = ctx.fresh(psi_ids(c.right) - {x}, ids(m.causes))
                out.append(Move(m.causes, S.INTERNAL, z, substitute_event(c.right, z, x)))
            else:
                y = m.event
                z = ctx.fresh(psi_ids(m.target) - {y}, psi_ids(c.right) - {x}, {x}, ids(m.causes))
                out.append(Move(m.causes, m.label, z, PartialSeq(substitute_event(m.target, z, y), x, c.right)))
        for m in derive(c.right, ctx):
            if x in ids(m.causes):
                continue
            y = m.event
            z = ctx.fresh(psi_ids(c.left), psi_ids(m.target) - {y}, {x}, ids(m.causes))
            out.append(Move(m.causes, m.label, z, PartialSeq(c.left, x, substitute_event(m.target, z, y))))
        return out

    raise TypeError(f"not a configuration: {c!r}")


def enabled_actions(c, spec) -> list:
    """``[(ActionStep, target), ...]`` in deterministic left-to-right order."""
    return [(m.step, m.target) for m in derive(c, ctx_for(spec))]


# -- time passage ------------------------------------------------------------

class DelayRefused(SemanticsError):
    def __init__(self, rule, where):
        self.rule = rule
        super().__init__(f"delay refused by rule {rule}: {where}")


def _time_to_finish(E, ctx) -> Fraction:
    """Delay until every event in ``E`` reaches its duration (0 if already)."""
    if not E:
        return Fraction(0)
    return max(Fraction(0), max(ctx.duration(e.action) - e.elapsed for e in E))


def _adv(E, d):
    return frozenset(TimedEvent(e.event, e.action, e.elapsed + d) for e in E)


def _leaf_delay(D: Fraction, leaf: Leaf, d: Fraction, ctx: Ctx, expiry: bool):
    E, p = leaf.events, leaf.proc
    E2 = _adv(E, d)
    if isinstance(p, S.Stop):
        return Leaf(E2, p)
    if isinstance(p, S.Ref):
        return _delay(canonicalize(leaf, ctx.defs), d, ctx, expiry) if not D else _delay(
            _wrap_delay(D, canonicalize(leaf, ctx.defs)), d, ctx, expiry
        )
    r = d - _time_to_finish(E, ctx)  # VIII covers the part before Finish
    if r <= 0:
        return _wrap_delay(D, Leaf(E2, p))
    D2 = max(Fraction(0), D - r)  # VII.τ
    r2 = max(Fraction(0), r - D)  # I.τ / II.τ consume the window
    if r2 and p.bound is not None:
        nb = p.bound - r2
        if nb < 0:
            if expiry:
                return Leaf(E2, S.Stop())
            rule = "I.τ" if isinstance(p, S.Skip) else "II.τ"
            raise DelayRefused(rule, f"window of {S.render(p)} closes after {d - (r2 - p.bound)}")
        p = S.Skip(nb) if isinstance(p, S.Skip) else S.Prefix(p.action, nb, p.cont)
    return _wrap_delay(D2, Leaf(E2, p))


def _delay(c, d: Fraction, ctx: Ctx, expiry: bool):
    if isinstance(c, Leaf):
        return _leaf_delay(Fraction(0), c, d, ctx, expiry)
    if isinstance(c, CDelay):
        if isinstance(c.c, Leaf):
            return _leaf_delay(c.d, c.c, d, ctx, expiry)
        if d <= c.d:
            return _wrap_delay(c.d - d, _advance_any(c.c, d))
        return _delay(_advance_any(c.c, c.d), d - c.d, ctx, expiry)
    if isinstance(c, CChoice):
        return CChoice(_delay(c.left, d, ctx, expiry), _delay(c.right, d, ctx, expiry))
    if isinstance(c, CPar):
        return CPar(_delay(c.left, d, ctx, expiry), c.sync, _delay(c.right, d, ctx, expiry))
    if isinstance(c, CInterrupt):
        return CInterrupt(_delay(c.left, d, ctx, expiry), _delay(c.right, d, ctx, expiry))
    if isinstance(c, CHide):
        return CHide(_delay(c.c, d, ctx, expiry), c.hidden)
    if isinstance(c, CRefine):
        return CRefine(c.action, c.by, _delay(c.c, d, ctx, expiry))
    if isinstance(c, PartialSeq):
        left = _delay(c.left, d, ctx, expiry)
        if c.anchor in psi_ids(c.right):  # R.τ.1: the right side waits on the anchor
            return PartialSeq(left, c.anchor, c.right)
        return PartialSeq(left, c.anchor, _delay(c.right, d, ctx, expiry))  # R.τ.2
    raise TypeError(f"not a configuration: {c!r}")


def _advance_any(c, d):
    from .config import advance

    return advance(c, d)


def apply_delay(c, d, spec, allow_expiry: bool = True):
    """Let ``d > 0`` time units pass; ``None`` if no delay derivation exists.

    With ``allow_expiry`` a skip/prefix leaf whose window has closed turns
    into ``stop``; without it the window bounds the delay.
    """
    d = Fraction(d)
    if d <= 0:
        raise SemanticsError("delay must be positive")
    try:
        return _delay(c, d, ctx_for(spec), allow_expiry)
    except DelayRefused:
        return None


@dataclass(frozen=True)
class Bound:
    value: Fraction
    closed: bool = True

    def __str__(self):
        if self.value < 0:
            return "unbounded"
        return f"{self.value} ({'closed' if self.closed else 'open'})"


UNBOUNDED = Bound(Fraction(-1), False)


def _min_bound(a, b):
    if a is UNBOUNDED:
        return b
    if b is UNBOUNDED:
        return a
    if a.value != b.value:
        return a if a.value < b.value else b
    return Bound(a.value, a.closed and b.closed)


def _max_delay(c, ctx):
    if isinstance(c, PartialSeq):
        left = _max_delay(c.left, ctx)
        if c.anchor in psi_ids(c.right):
            return left
        return _min_bound(left, _max_delay(c.right, ctx))
    if isinstance(c, (CHide, CRefine)):
        return _max_delay(c.c, ctx)
    if isinstance(c, CDelay) and not isinstance(c.c, Leaf):
        return _max_delay(c.c, ctx)
    if isinstance(c, (CDelay, Leaf)):
        D, leaf = (c.d, c.c) if isinstance(c, CDelay) else (Fraction(0), c)
        p = leaf.proc
        if isinstance(p, S.Ref):
            return _max_delay(_wrap_delay(D, canonicalize(leaf, ctx.defs)), ctx)
        if isinstance(p, S.Stop) or p.bound is None:
            return UNBOUNDED
        return Bound(_time_to_finish(leaf.events, ctx) + D + p.bound, True)
    return _min_bound(_max_delay(c.left, ctx), _max_delay(c.right, ctx))


def max_delay(c, spec):
    """Supremum of admissible delays when windows bound time.

    Returns a :class:`Bound`, :data:`UNBOUNDED`, or ``None`` when no
    positive delay is admissible.
    """
    b = _max_delay(c, ctx_for(spec))
    if b is not UNBOUNDED and b.value == 0:
        return None
    return b


def boundaries(c, spec) -> set:
    """Positive delays at which some leaf's enabledness or window changes."""
    return _boundaries(c, ctx_for(spec))


def _boundaries(c, ctx) -> set:
    out = set()
    for D, leaf in leaves(c):
        p = leaf.proc
        if isinstance(p, S.Stop):
            continue
        stamped = all(e.elapsed is not None for e in leaf.events)
        m = _time_to_finish(leaf.events, ctx) if stamped else Fraction(0)
        pts = [m, m + D]
        if isinstance(p, (S.Skip, S.Prefix)) and p.bound is not None:
            pts.append(m + D + p.bound)
        out.update(t for t in pts if t > 0)
    return out


# -- schedules and traces ----------------------------------------------------

@dataclass
class Trace:
    start: object
    steps: list = field(default_factory=list)  # [(ActionStep | Fraction, config)]

    @property
    def final(self):
        return self.steps[-1][1] if self.steps else self.start


TRACE_HEADER = "# durcsp-trace v1"


def run(c, schedule, spec, allow_expiry: bool = True) -> Trace:
    """Replay ``schedule`` (``('pick', i)`` / ``('wait', d)`` items)."""
    ctx = ctx_for(spec)
    tr = Trace(c)
    cur = c
    for n, (kind, arg) in enumerate(schedule):
        if kind == "pick":
            moves = derive(cur, ctx)
            if not 0 <= arg < len(moves):
                raise ScheduleError(f"step {n}: pick {arg} out of range ({len(moves)} enabled)")
            m = moves[arg]
            cur = m.target
            tr.steps.append((m.step, cur))
        elif kind == "wait":
            d = Fraction(arg)
            if d <= 0:
                raise ScheduleError(f"step {n}: wait must be positive")
            try:
                cur = _delay(cur, d, ctx, allow_expiry)
            except DelayRefused as exc:
                raise ScheduleError(f"step {n}: {exc}") from None
            tr.steps.append((d, cur))
        else:
            raise ScheduleError(f"step {n}: unknown schedule item {kind!r}")
    return tr


def format_trace(tr: Trace) -> str:
    lines = [TRACE_HEADER]
    for item, _ in tr.steps:
        if isinstance(item, ActionStep):
            lines.append(f"ACT {item}")
        else:
            lines.append(f"DELAY {item}")
    return "\n".join(lines) + "\n"


def pick_action(c, spec, label: str, index: int = 0) -> int:
    """Index of the ``index``-th enabled step labelled ``label``."""
    hits = [i for i, m in enumerate(derive(c, ctx_for(spec))) if m.label == label]
    if len(hits) <= index:
        raise ScheduleError(f"no enabled {label!r} step")
    return hits[index]


# -- causal trees ------------------------------------------------------------

def _probe_delays(c, spec):
    pts = sorted(boundaries(c, spec))
    cands, prev = [], Fraction(0)
    for p in pts:
        cands.append((prev + p) / 2)
        cands.append(p)
        prev = p
    cands.append(prev + 1)
    return cands


def causal_tree(c, spec, depth: int = 8):
    """Action-step tree, letting time pass just far enough to enable steps.

    Each node is ``(ActionStep, children)``.
    """
    if depth == 0:
        return []
    moves = enabled_actions(c, spec)
    if not moves:
        for d in _probe_delays(c, spec):
            c2 = apply_delay(c, d, spec, allow_expiry=False)
            if c2 is not None and enabled_actions(c2, spec):
                moves = enabled_actions(c2, spec)
                break
    return [(step, causal_tree(t, spec, depth - 1)) for step, t in moves]


def untimed_tree(tree):
    """Strip stamps: nodes become ``((cause ids, label, event), children)``."""
    return [
        ((tuple(sorted(e.event for e in s.causes)), s.action, s.event), untimed_tree(ch)) for s, ch in tree
    ]


# -- makespan ----------------------------------------------------------------

@dataclass(frozen=True)
class Makespan:
    infimum: Fraction
    open: bool
    samples: tuple  # ((grid, value), ...)

    def __str__(self):
        return f"infimum {self.infimum} ({'open' if self.open else 'attained'})"


def _spec_constants(spec) -> set:
    out = {Fraction(v) for v in spec.durations.values()}
    for body in spec.definitions.values():
        for q in S.walk(body):
            if isinstance(q, (S.Skip, S.Prefix)) and q.bound is not None:
                out.add(q.bound)
            if isinstance(q, S.Delay):
                out.add(q.d)
    return {q for q in out if q > 0}


def _frac_gcd(qs) -> Fraction:
    g = Fraction(0)
    for q in qs:
        if g == 0:
            g = Fraction(q)
        else:
            num = gcd(g.numerator * q.denominator, q.numerator * g.denominator)
            g = Fraction(num, g.denominator * q.denominator)
    return g


def default_grid(spec) -> Fraction:
    g = _frac_gcd(_spec_constants(spec))
    return g / 2 if g else Fraction(1, 2)


def _settled(c, ctx) -> bool:
    if any(m.label != S.INTERNAL for m in derive(c, ctx)):
        return False
    E = psi(c)
    return is_finished(E, _Durs(ctx))


def _delay_steps(c, ctx, g: Fraction):
    """Grid delays landing on and just past the next boundary.

    Between boundaries no step changes enabledness, so idling there only
    postpones moves that are already available.
    """
    bs = _boundaries(c, ctx)
    fin = _time_to_finish(psi(c), ctx) if all(e.elapsed is not None for e in psi(c)) else Fraction(0)
    if fin > 0:
        bs.add(fin)
    if not bs:
        return (g,)
    b = min(bs)
    below = (b // g) * g
    above = below + g
    return (below, above) if below > 0 else (above,)


def _makespan_at(c, ctx, g: Fraction, max_states: int, max_steps=None, jump=True) -> Fraction:
    counter = itertools.count()
    heap = [(Fraction(0), next(counter), c, 0)]
    best = {c: Fraction(0)}
    popped = 0
    while heap:
        t, _, cur, n = heapq.heappop(heap)
        if best.get(cur, None) != t:
            continue
        if _settled(cur, ctx):
            return t
        popped += 1
        if popped > max_states:
            raise MakespanError(f"state bound {max_states} exceeded at grid {g}")
        succ = []
        if max_steps is None or n < max_steps:
            succ = [(t, m.target, n + 1) for m in derive(cur, ctx)]
        for d in _delay_steps(cur, ctx, g) if jump else (g,):
            try:
                succ.append((t + d, _delay(cur, d, ctx, False), n))
            except DelayRefused:
                pass
        for t2, c2, n2 in succ:
            if c2 not in best or t2 < best[c2]:
                best[c2] = t2
                heapq.heappush(heap, (t2, next(counter), c2, n2))
    raise MakespanError("no schedule settles the configuration")


def min_makespan(c, spec, grid=None, max_states: int = 200_000, max_steps=None) -> Makespan:
    """Least time for ``c`` to settle, over schedules quantised to ``grid``.

    Settled: no visible step enabled and every event finished.  Runs at
    ``g``, ``g/2`` and ``g/4``; an exact infimum is read off the linear
    trend that strict termination imposes.  ``max_steps`` caps the
    number of action steps on a schedule.
    """
    ctx = ctx_for(spec)
    g = Fraction(grid) if grid is not None else default_grid(spec)
    if g <= 0:
        raise MakespanError("grid must be positive")
    v1 = _makespan_at(c, ctx, g, max_states, max_steps)
    v2 = _makespan_at(c, ctx, g / 2, max_states, max_steps)
    v4 = _makespan_at(c, ctx, g / 4, max_states, max_steps)
    inf = 2 * v2 - v1
    if v4 - inf != (v1 - inf) / 4 or inf < 0:
        inf = min(v1, v2, v4)
    return Makespan(inf, v1 > inf, ((g, v1), (g / 2, v2), (g / 4, v4)))
