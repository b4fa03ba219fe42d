"""Timed causal transition systems: data model, compiler, checks and runs."""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import constraints as K
from . import syntax as S
from .config import TimedEvent, event_name, ids, initial_config, leaves, psi
from .opsem import Ctx, derive
from .syntax import Diagnostic


class CompileError(ValueError):
    pass


class RunError(ValueError):
    code = "run-error"


class GuardUnsatisfied(RunError):
    code = "guard-unsatisfied"


class CauseUnterminated(RunError):
    code = "cause-unterminated"


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class CtsState:
    id: int
    events: frozenset  # TimedEvent with elapsed None
    config: object = None
    reserved: frozenset = frozenset()
    truncated: bool = False


@dataclass(frozen=True)
class CtsTransition:
    source: int
    target: int
    label: str
    causes: frozenset
    event: int
    guard: object
    resets: frozenset

    def describe(self, unicode=False) -> str:
        cs = ",".join(str(e) for e in sorted(self.causes))
        rs = ",".join(f"c_{event_name(r)}" for r in sorted(self.resets))
        return f"_{{{cs}}} {self.label}_{event_name(self.event)} [{K.render(self.guard, unicode)}] {{{rs}}}"


@dataclass
class TimedCTS:
    states: list
    transitions: list
    initial: int = 0
    durations: dict = field(default_factory=dict)
    truncated: bool = False
    _out: dict = field(default=None, repr=False, compare=False)

    def outgoing(self, sid: int) -> list:
        if self._out is None:
            self._out = {}
            for t in self.transitions:
                self._out.setdefault(t.source, []).append(t)
        return self._out.get(sid, [])

    def state(self, sid: int) -> CtsState:
        return self.states[sid]


# -- compiler ----------------------------------------------------------------

def _has_fresh_leaf(c) -> bool:
    """Some skip/prefix leaf still has an empty cause set."""
    return any(not leaf.events and not isinstance(leaf.proc, S.Stop) for _, leaf in leaves(c))


def _uses_refinement(spec) -> bool:
    return any(isinstance(q, S.Refine) for body in spec.definitions.values() for q in S.walk(body))


def compile_spec(spec, max_states: int = 5000, max_depth: int = 64) -> TimedCTS:
    """Build the timed-CTS of ``spec`` by breadth-first closure.

    States are symbolic configurations paired with the ids already spent
    while some leaf can still fire with no causes (the guard of such a leaf
    reads a clock that must never have been reset).
    """
    if _uses_refinement(spec):
        raise CompileError("refinement has no denotational rule; use the operational engine")
    c0 = initial_config(spec.process, spec.definitions)
    key0 = (c0, frozenset())
    index = {key0: 0}
    states = [CtsState(0, frozenset(), c0)]
    depth = {0: 0}
    trans = []
    truncated = False
    queue = deque([0])
    while queue:
        sid = queue.popleft()
        st = states[sid]
        ctx = Ctx(spec.durations, spec.definitions, "den", st.reserved)
        moves = derive(st.config, ctx)
        if moves and depth[sid] >= max_depth:
            states[sid] = CtsState(sid, st.events, st.config, st.reserved, True)
            truncated = True
            continue
        for m in moves:
            reserved = st.reserved | {m.event} if _has_fresh_leaf(m.target) else frozenset()
            key = (m.target, reserved)
            tid = index.get(key)
            if tid is None:
                if len(states) >= max_states:
                    states[sid] = CtsState(sid, st.events, st.config, st.reserved, True)
                    truncated = True
                    continue
                tid = len(states)
                index[key] = tid
                states.append(CtsState(tid, psi(m.target), m.target, reserved))
                depth[tid] = depth[sid] + 1
                queue.append(tid)
            trans.append(CtsTransition(sid, tid, m.label, m.causes, m.event, m.guard, m.resets))
    return TimedCTS(states, trans, 0, dict(spec.durations), truncated)


# alias matching the operation name
compile = compile_spec


def longest_path(m: TimedCTS) -> int:
    """Length of the longest transition path from the initial state (loops count once)."""
    memo = {}

    def go(s):
        if s not in memo:
            memo[s] = 0
            memo[s] = max((1 + go(t.target) for t in m.outgoing(s)), default=0)
        return memo[s]

    return go(m.initial)


def validate_cts(m: TimedCTS) -> list:
    diags = []
    n = len(m.states)
    if not 0 <= m.initial < n:
        return [Diagnostic("MissingInitial", f"initial state {m.initial} does not exist")]
    if m.states[m.initial].events:
        diags.append(Diagnostic("InitialNotEmpty", f"psi(s{m.initial}) is not empty"))
    for k, t in enumerate(m.transitions):
        where = f"t{k}: s{t.source} -> s{t.target} {t.describe()}"
        if not (0 <= t.source < n and 0 <= t.target < n):
            diags.append(Diagnostic("DanglingTransition", where))
            continue
        src, dst = ids(m.states[t.source].events), ids(m.states[t.target].events)
        causes = ids(t.causes)
        if t.event not in dst:
            diags.append(Diagnostic("ViolatesCondI", where))
        if causes & (dst - {t.event}):
            diags.append(Diagnostic("ViolatesCondII", where))
        if not causes <= src or not (dst - {t.event}) <= src:
            diags.append(Diagnostic("ViolatesCondIII", where))
        if not K.is_normal_form(t.guard):
            diags.append(Diagnostic("GuardNotNormal", where))
    return diags


# -- runs --------------------------------------------------------------------

class Valuation:
    """Clock values: explicit entries for reset clocks, ``now`` otherwise."""

    def __init__(self, clocks, now):
        self.clocks = dict(clocks)
        self.now = now

    def __getitem__(self, x):
        return self.clocks.get(x, self.now)

    def __contains__(self, x):
        return True


@dataclass(frozen=True)
class RunConfig:
    state: int
    clocks: tuple = ()  # sorted (event, value) pairs of reset clocks
    now: Fraction = Fraction(0)

    @property
    def valuation(self) -> Valuation:
        return Valuation(self.clocks, self.now)

    def clock(self, x) -> Fraction:
        return dict(self.clocks).get(x, self.now)


def initial_run(m: TimedCTS) -> RunConfig:
    return RunConfig(m.initial)


def step_delay(rc: RunConfig, d) -> RunConfig:
    d = Fraction(d)
    if d < 0:
        raise RunError("negative delay")
    if d == 0:
        return rc
    return RunConfig(rc.state, tuple((x, v + d) for x, v in rc.clocks), rc.now + d)


def _dur(durations, a):
    return Fraction(0) if a == S.DELTA else Fraction(durations[a])


def can_fire(rc: RunConfig, t: CtsTransition, durations) -> Optional[RunError]:
    if t.source != rc.state:
        return RunError(f"transition leaves s{t.source}, run is at s{rc.state}")
    nu = rc.valuation
    if not K.evaluate(t.guard, nu):
        return GuardUnsatisfied(f"guard {K.render(t.guard)} fails")
    for e in sorted(t.causes):
        if not nu[e.event] > _dur(durations, e.action):
            return CauseUnterminated(f"cause {e} has not terminated (c_{event_name(e.event)} = {nu[e.event]})")
    return None


def step_action(rc: RunConfig, t: CtsTransition, durations) -> RunConfig:
    err = can_fire(rc, t, durations)
    if err is not None:
        raise err
    clocks = dict(rc.clocks)
    for r in t.resets:
        clocks[r] = Fraction(0)
    return RunConfig(t.target, tuple(sorted(clocks.items())), rc.now)


def run_boundaries(m: TimedCTS, rc: RunConfig) -> set:
    """Positive delays at which an outgoing guard or cause check can flip."""
    nu = rc.valuation
    out = set()
    for t in m.outgoing(rc.state):
        out |= K.boundaries(t.guard, {c: nu[c] for c in K.clocks(t.guard)})
        for e in t.causes:
            b = _dur(m.durations, e.action) - nu[e.event]
            if b > 0:
                out.add(b)
    return out


# -- export ------------------------------------------------------------------

def _evset(E) -> str:
    return "{" + ", ".join(f"{event_name(e.event)}:{e.action}" for e in sorted(E)) + "}"


def to_dot(m: TimedCTS) -> str:
    lines = ["digraph tcts {", "  rankdir=TB;", '  node [shape=ellipse, fontname="monospace"];']
    for s in m.states:
        label = _evset(s.events) if s.events else "∅"
        extra = ", style=dashed" if s.truncated else ""
        shape = ", peripheries=2" if s.id == m.initial else ""
        lines.append(f'  s{s.id} [label="{label}"{shape}{extra}];')
    for t in m.transitions:
        lab = t.describe().replace('"', '\\"')
        lines.append(f'  s{t.source} -> s{t.target} [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


MODEL_HEADER = "# durcsp-model v1"


def to_text(m: TimedCTS) -> str:
    lines = [MODEL_HEADER]
    for a, d in sorted(m.durations.items()):
        lines.append(f"duration {a} {Fraction(d)}")
    lines.append(f"initial {m.initial}")
    if m.truncated:
        lines.append("truncated")
    for s in m.states:
        flag = " truncated" if s.truncated else ""
        lines.append(f"state {s.id} {_evset(s.events)}{flag}")
    for t in m.transitions:
        rs = "{" + ", ".join(f"e{r}" for r in sorted(t.resets)) + "}"
        lines.append(
            f"trans {t.source} {t.target} {_evset(t.causes)} {t.label} e{t.event} "
            f"guard {K.render(t.guard)} resets {rs}"
        )
    return "\n".join(lines) + "\n"


_EV = re.compile(r"e(\d+):([^,\s}]+)")
_STATE = re.compile(r"state (\d+) (\{[^}]*\})( truncated)?$")
_TRANS = re.compile(r"trans (\d+) (\d+) (\{[^}]*\}) (\S+) e(\d+) guard (.*) resets \{([^}]*)\}$")


def _parse_evset(text):
    return frozenset(TimedEvent(int(x), a) for x, a in _EV.findall(text))


def from_text(text: str) -> TimedCTS:
    lines = [ln.strip() for ln in text.splitlines()]
    if not lines or lines[0] != MODEL_HEADER:
        raise ModelFormatError(f"missing header {MODEL_HEADER!r}")
    durations, states, trans = {}, {}, []
    initial, truncated = 0, False
    for n, ln in enumerate(lines[1:], start=2):
        if not ln or ln.startswith("#"):
            continue
        try:
            if ln.startswith("duration "):
                _, a, d = ln.split()
                durations[a] = Fraction(d)
            elif ln.startswith("initial "):
                initial = int(ln.split()[1])
            elif ln == "truncated":
                truncated = True
            elif ln.startswith("state "):
                mm = _STATE.match(ln)
                if not mm:
                    raise ModelFormatError("bad state line")
                sid = int(mm.group(1))
                states[sid] = CtsState(sid, _parse_evset(mm.group(2)), truncated=bool(mm.group(3)))
            elif ln.startswith("trans "):
                mm = _TRANS.match(ln)
                if not mm:
                    raise ModelFormatError("bad transition line")
                src, dst, cs, lab, ev, g, rs = mm.groups()
                resets = frozenset(int(r.strip()[1:]) for r in rs.split(",") if r.strip())
                trans.append(
                    CtsTransition(int(src), int(dst), lab, _parse_evset(cs), int(ev), K.parse(g), resets)
                )
            else:
                raise ModelFormatError("unknown line")
        except (ValueError, K.ConstraintError) as exc:
            raise ModelFormatError(f"line {n}: {exc}: {ln!r}") from None
    if sorted(states) != list(range(len(states))):
        raise ModelFormatError("state ids must be 0..n-1")
    return TimedCTS([states[i] for i in range(len(states))], trans, initial, durations, truncated)
