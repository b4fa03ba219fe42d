"""Bounded bisimulation checking with event bijections.

Two transition spaces are explored in lock-step as a game.  Action moves
must be answered by a move with the same label whose causes correspond
through the current bijection ``f``; after a matched step ``f`` keeps only
pairs still alive on both sides and gains the new pair.  Delay moves must
be answered by the same delay.  Dense time is sampled at the critical
instants of both sides, the midpoints between them, and one grid step
beyond the last.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import constraints as K
from . import syntax as S
from .config import (
    CDelay,
    CHide,
    CRefine,
    Leaf,
    canonicalize,
    ids,
    initial_config,
    leaves,
    psi,
)
from .opsem import Ctx, DelayRefused, _delay, _frac_gcd, boundaries, derive
from .tcts import can_fire, initial_run, run_boundaries, step_action, step_delay


class ParamsError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class SynchronizationError(AssertionError):
    pass


@dataclass(frozen=True)
class CheckParams:
    max_depth: int = 6
    delay_grid: Optional[Fraction] = None  # None: half the gcd of all constants
    durations: Optional[dict] = None
    definitions: Optional[dict] = None
    node_budget: int = 500_000


# -- verdicts ----------------------------------------------------------------

@dataclass(frozen=True)
class Failure:
    side: int  # 1 or 2: the side whose move is unanswered (0 for synch)
    kind: str  # "act", "delay" or "synch"
    move: object  # (causes, label, event) or a delay
    clause: str
    reason: str


@dataclass(frozen=True)
class Counterexample:
    path: tuple  # ("act", move1, move2) | ("delay", d)
    failure: Failure

    def lines(self):
        out = []
        for p in self.path:
            if p[0] == "delay":
                out.append(f"DELAY {p[1]}")
            else:
                out.append(f"ACT {_fmt_move(p[1])} ~ {_fmt_move(p[2])}")
        f = self.failure
        mv = {"delay": f"DELAY {f.move}", "synch": "SYNCH"}.get(f.kind) or f"ACT {_fmt_move(f.move)}"
        out.append(f"FAIL side={f.side} clause={f.clause} {mv}: {f.reason}")
        return out


def _fmt_move(m):
    causes, label, ev = m
    cs = ",".join(str(e) for e in sorted(causes))
    return f"{{{cs}}} {label} e{ev}"


@dataclass(frozen=True)
class Bisimilar:
    within_bounds: bool
    depth: int
    grid: Fraction
    nodes: int = field(default=0, compare=False)

    def __str__(self):
        tag = "within bounds" if self.within_bounds else "bound hit"
        return f"Bisimilar ({tag}: depth={self.depth}, grid={self.grid})"


@dataclass(frozen=True)
class NotBisimilar:
    counterexample: Counterexample
    depth: int
    grid: Fraction

    def __str__(self):
        return "NotBisimilar\n" + "\n".join("  " + ln for ln in self.counterexample.lines())


@dataclass(frozen=True)
class Inconclusive:
    reason: str

    def __str__(self):
        return f"Inconclusive ({self.reason})"


# -- spaces ------------------------------------------------------------------

class ConfigSpace:
    """Timed configurations under the operational rules."""

    stamped = True

    def __init__(self, durations, defs=None):
        self.ctx = Ctx(dict(durations), defs, "op")

    def actions(self, c):
        return [((m.causes, m.label, m.event), m.target) for m in derive(c, self.ctx)]

    def delay(self, c, d):
        try:
            return _delay(c, d, self.ctx, True)
        except DelayRefused:
            return None

    def boundaries(self, c):
        return boundaries(c, self.ctx)

    def psi(self, c):
        return psi(c)

    def truncated(self, c):
        return False


class CtsSpace:
    """Runs ``<state, valuation>`` of a timed-CTS."""

    stamped = False

    def __init__(self, model):
        self.m = model

    def actions(self, rc):
        out = []
        for t in self.m.outgoing(rc.state):
            if can_fire(rc, t, self.m.durations) is None:
                out.append(((t.causes, t.label, t.event), step_action(rc, t, self.m.durations)))
        return out

    def delay(self, rc, d):
        return step_delay(rc, d)

    def boundaries(self, rc):
        return run_boundaries(self.m, rc)

    def psi(self, rc):
        return self.m.state(rc.state).events

    def truncated(self, rc):
        return self.m.state(rc.state).truncated


# -- the game ----------------------------------------------------------------

class _Budget(Exception):
    pass


def _causes_match(E, F, f: dict, stamps: bool) -> bool:
    """``z:b(:t) in E`` iff ``f(z):b(:t) in F``."""
    if len(E) != len(F):
        return False
    if stamps:
        want = set()
        for e in E:
            if e.event not in f:
                return False
            want.add((f[e.event], e.action, e.elapsed))
        return want == {(e.event, e.action, e.elapsed) for e in F}
    want = set()
    for e in E:
        if e.event not in f:
            return False
        want.add((f[e.event], e.action))
    return want == {(e.event, e.action) for e in F}


def update_bijection(f: dict, psi1, x: int, psi2, y: int) -> dict:
    """Keep pairs alive on both sides (minus the new events), add ``(x, y)``."""
    keep1, keep2 = ids(psi1) - {x}, ids(psi2) - {y}
    out = {p: q for p, q in f.items() if p in keep1 and q in keep2}
    out[x] = y
    return out


class _Game:
    def __init__(self, sp1, sp2, params: CheckParams, grid: Fraction, synch=None):
        self.s1, self.s2 = sp1, sp2
        self.params = params
        self.grid = grid
        self.stamps = sp1.stamped and sp2.stamped
        self.synch = synch
        self.memo = {}
        self.nodes = 0
        self.bound_hit = False

    def delays(self, a, b):
        pts = sorted(self.s1.boundaries(a) | self.s2.boundaries(b))
        out, prev = [], Fraction(0)
        for p in pts:
            out.append((prev + p) / 2)
            out.append(p)
            prev = p
        out.append(prev + self.grid)
        return sorted(set(out))

    def play(self, a, b, f: dict, depth: int, just_delayed: bool):
        key = (a, b, frozenset(f.items()), depth, just_delayed)
        if key in self.memo:
            return self.memo[key]
        self.nodes += 1
        if self.nodes > self.params.node_budget:
            raise _Budget()
        res = self._play(a, b, f, depth, just_delayed)
        self.memo[key] = res
        return res

    def _play(self, a, b, f, depth, just_delayed):
        if self.synch is not None and not self.synch(a, b, f):
            return Counterexample((), Failure(0, "synch", None, "SYNCH1", "states are not synchronized"))
        if self.s1.truncated(a) or self.s2.truncated(b):
            self.bound_hit = True
            return None
        A, B = self.s1.actions(a), self.s2.actions(b)
        if depth == 0:
            if A or B:
                self.bound_hit = True
            return None
        for side, mine, theirs in ((1, A, B), (2, B, A)):
            for mv, tgt in mine:
                cex = self._answer(side, mv, tgt, theirs, a, b, f, depth)
                if cex is not None:
                    return cex
        if just_delayed:
            return None
        for d in self.delays(a, b):
            a2, b2 = self.s1.delay(a, d), self.s2.delay(b, d)
            if a2 is None and b2 is None:
                continue
            if a2 is None or b2 is None:
                side = 1 if b2 is None else 2
                clause = "1.2" if side == 1 else "2.2"
                return Counterexample((), Failure(side, "delay", d, clause, "the other side cannot let this time pass"))
            cex = self.play(a2, b2, f, depth, True)
            if cex is not None:
                return Counterexample((("delay", d),) + cex.path, cex.failure)
        return None

    def _answer(self, side, mv, tgt, theirs, a, b, f, depth):
        causes, label, ev = mv
        inv = {q: p for p, q in f.items()}
        first = None
        candidates = 0
        for mv2, tgt2 in theirs:
            c2, l2, e2 = mv2
            if l2 != label:
                continue
            if side == 1:
                ok = _causes_match(causes, c2, f, self.stamps)
            else:
                ok = _causes_match(c2, causes, f, self.stamps) and _causes_match(causes, c2, inv, self.stamps)
            if not ok:
                continue
            candidates += 1
            if side == 1:
                a2, b2, m1, m2 = tgt, tgt2, mv, mv2
            else:
                a2, b2, m1, m2 = tgt2, tgt, mv2, mv
            f2 = update_bijection(f, self.s1.psi(a2), m1[2], self.s2.psi(b2), m2[2])
            cex = self.play(a2, b2, f2, depth - 1, False)
            if cex is None:
                return None
            if first is None:
                first = Counterexample((("act", m1, m2),) + cex.path, cex.failure)
        if candidates:
            return first
        clause = "1.1" if side == 1 else "2.1"
        return Counterexample((), Failure(side, "act", mv, clause, "no step with this label and matching causes"))


def _run_game(sp1, sp2, s1, s2, f0, params, grid, synch=None):
    g = _Game(sp1, sp2, params, grid, synch)
    try:
        cex = g.play(s1, s2, dict(f0), params.max_depth, False)
        if cex is None:
            return Bisimilar(not g.bound_hit, params.max_depth, grid, g.nodes)
        # shortest counterexample first: retry at increasing depth
        for k in range(params.max_depth):
            short = g.play(s1, s2, dict(f0), k, False)
            if short is not None:
                cex = short
                break
    except _Budget:
        return Inconclusive(f"node budget {params.node_budget} exhausted")
    return NotBisimilar(cex, params.max_depth, grid)


# -- constants and grids -----------------------------------------------------

def _process_constants(p) -> set:
    out = set()
    for q in S.walk(p):
        if isinstance(q, (S.Skip, S.Prefix)) and q.bound is not None:
            out.add(q.bound)
        if isinstance(q, S.Delay):
            out.add(q.d)
    return out


def _config_constants(c) -> set:
    out = set()
    for D, leaf in leaves(c):
        out.add(D)
        out |= _process_constants(leaf.proc)
        out |= {e.elapsed for e in leaf.events if e.elapsed is not None}
    stack = [c]
    while stack:
        x = stack.pop()
        if isinstance(x, CRefine):
            out |= _process_constants(x.by)
        if isinstance(x, (CDelay, CRefine, CHide)):
            stack.append(x.c)
        elif not isinstance(x, Leaf):
            stack += [x.left, x.right]
    return out


def _grid(params: CheckParams, consts) -> Fraction:
    consts = {Fraction(q) for q in consts if q}
    if params.delay_grid is None:
        g = _frac_gcd(consts)
        return g / 2 if g else Fraction(1, 2)
    g = Fraction(params.delay_grid)
    if g <= 0:
        raise ParamsError("delay grid must be positive")
    bad = sorted(q for q in consts if (q / g).denominator != 1)
    if bad:
        raise ParamsError(f"delay grid {g} does not divide {', '.join(map(str, bad))}")
    return g


def _model_constants(m) -> set:
    out = {Fraction(v) for v in m.durations.values()}
    for t in m.transitions:
        out |= K.constants(t.guard)
    return out


# -- public checkers ---------------------------------------------------------

def check_synchronized(rc, c, f: dict, model) -> bool:
    """``z:b:t`` is in the configuration iff ``f^-1(z):b`` is in the state
    and the state's clock reads ``t``."""
    st = {(e.event, e.action) for e in model.state(rc.state).events}
    conf = {(e.event, e.action, e.elapsed) for e in psi(c)}
    nu = rc.valuation
    image = set()
    for z, b in st:
        if z not in f:
            return False
        image.add((f[z], b, nu[z]))
    return image == conf


def tau_bisimilar(model, spec, params: CheckParams = CheckParams()):
    """Timed-CTS runs against the operational configurations of ``spec``."""
    consts = _model_constants(model) | {Fraction(v) for v in spec.durations.values()}
    for body in spec.definitions.values():
        consts |= _process_constants(body)
    grid = _grid(params, consts)
    sp1, sp2 = CtsSpace(model), ConfigSpace(spec.durations, spec.definitions)

    def synch(rc, c, f):
        return check_synchronized(rc, c, f, model)

    v = _run_game(sp1, sp2, initial_run(model), initial_config(spec.process, spec.definitions),
                  {}, params, grid, synch)
    # a pairing that is unsynchronized is only rejected; it is an error when
    # no synchronized alternative exists
    if isinstance(v, NotBisimilar) and v.counterexample.failure.kind == "synch":
        raise SynchronizationError("\n".join(v.counterexample.lines()))
    return v


def _initial_bijection(E1, E2, stamps=True) -> dict:
    key = (lambda e: (e.action, e.elapsed)) if stamps else (lambda e: (e.action,))
    if ids(E1) == ids(E2) and {(e.event,) + key(e) for e in E1} == {(e.event,) + key(e) for e in E2}:
        return {e.event: e.event for e in E1}
    a, b = sorted(E1, key=lambda e: key(e) + (e.event,)), sorted(E2, key=lambda e: key(e) + (e.event,))
    if [key(e) for e in a] != [key(e) for e in b]:
        raise PreconditionError("event sets admit no label-consistent bijection")
    return {x.event: y.event for x, y in zip(a, b)}


def config_bisimilar(a, b, params: CheckParams, f0: Optional[dict] = None):
    if params.durations is None:
        raise ParamsError("CheckParams.durations is required")
    defs = params.definitions
    a, b = canonicalize(a, defs), canonicalize(b, defs)
    consts = _config_constants(a) | _config_constants(b) | {Fraction(v) for v in params.durations.values()}
    grid = _grid(params, consts)
    sp = ConfigSpace(params.durations, defs)
    f = f0 if f0 is not None else _initial_bijection(psi(a), psi(b))
    return _run_game(sp, sp, a, b, f, params, grid)


def cts_run_bisimilar(m1, m2, params: CheckParams = CheckParams()):
    durs = dict(m1.durations)
    for k, v in m2.durations.items():
        if k in durs and Fraction(durs[k]) != Fraction(v):
            raise ParamsError(f"models disagree on the duration of {k!r}")
        durs[k] = v
    grid = _grid(params, _model_constants(m1) | _model_constants(m2))
    return _run_game(CtsSpace(m1), CtsSpace(m2), initial_run(m1), initial_run(m2), {}, params, grid)


def refinement_preserved(by, action: str, p, q, params: CheckParams):
    """Refine ``action`` by ``by`` on both sides of a bisimilar pair."""
    pre = config_bisimilar(p, q, params)
    if not isinstance(pre, Bisimilar):
        raise PreconditionError(f"inputs are not bisimilar: {pre}")
    return config_bisimilar(CRefine(action, by, p), CRefine(action, by, q), params)


# -- counterexample replay ---------------------------------------------------

def replay(cex: Counterexample, sp1, sp2, s1, s2, f0=None, stamps=None, synch=None) -> bool:
    """Follow the path on both spaces and confirm the final mismatch."""
    stamps = (sp1.stamped and sp2.stamped) if stamps is None else stamps
    f = dict(f0 or {})
    a, b = s1, s2
    for step in cex.path:
        if step[0] == "delay":
            a, b = sp1.delay(a, step[1]), sp2.delay(b, step[1])
            if a is None or b is None:
                return False
            continue
        _, m1, m2 = step
        t1 = dict(sp1.actions(a)).get(m1)
        t2 = dict(sp2.actions(b)).get(m2)
        if t1 is None or t2 is None:
            return False
        a, b = t1, t2
        f = update_bijection(f, sp1.psi(a), m1[2], sp2.psi(b), m2[2])
    fl = cex.failure
    if fl.kind == "synch":
        return synch is not None and not synch(a, b, f)
    if fl.kind == "delay":
        d1, d2 = sp1.delay(a, fl.move), sp2.delay(b, fl.move)
        return (d1 is None) != (d2 is None)
    mine = sp1.actions(a) if fl.side == 1 else sp2.actions(b)
    theirs = sp2.actions(b) if fl.side == 1 else sp1.actions(a)
    if fl.move not in dict(mine):
        return False
    inv = {q: p for p, q in f.items()}
    causes, label, _ = fl.move
    for (c2, l2, _), _t in theirs:
        if l2 != label:
            continue
        if fl.side == 1 and _causes_match(causes, c2, f, stamps):
            return False
        if fl.side == 2 and _causes_match(causes, c2, inv, stamps):
            return False
    return True
