"""Timed causal configurations.

A configuration is a process term whose leaves carry the set of in-flight
events ``x:a:t`` the leaf causally depends on.  The same classes double as
the symbolic states of the compiled transition system, where the elapsed
stamp of every event is ``None``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from . import syntax as S


@dataclass(frozen=True, order=True)
class TimedEvent:
    event: int
    action: str
    elapsed: Optional[Fraction] = None

    def __str__(self):
        if self.elapsed is None:
            return f"{event_name(self.event)}:{self.action}"
        return f"{event_name(self.event)}:{self.action}:{self.elapsed}"


def event_name(i: int) -> str:
    return f"e{i}"


def events(*triples) -> frozenset:
    """``events((0, 'a', 1), (1, 'b'))`` -> frozenset of TimedEvent."""
    out = []
    for t in triples:
        x, a, *rest = t
        out.append(TimedEvent(x, a, Fraction(rest[0]) if rest and rest[0] is not None else None))
    return frozenset(out)


@dataclass(frozen=True)
class Leaf:
    events: frozenset
    proc: S.Process


@dataclass(frozen=True)
class CDelay:
    d: Fraction
    c: "Config"


@dataclass(frozen=True)
class CChoice:
    left: "Config"
    right: "Config"


@dataclass(frozen=True)
class CPar:
    left: "Config"
    sync: frozenset
    right: "Config"


@dataclass(frozen=True)
class CHide:
    c: "Config"
    hidden: frozenset


@dataclass(frozen=True)
class CInterrupt:
    left: "Config"
    right: "Config"


@dataclass(frozen=True)
class CRefine:
    action: str
    by: S.Process
    c: "Config"


@dataclass(frozen=True)
class PartialSeq:
    left: "Config"
    anchor: int
    right: "Config"


Config = Union[Leaf, CDelay, CChoice, CPar, CHide, CInterrupt, CRefine, PartialSeq]


# -- canonical form ----------------------------------------------------------

def _wrap_delay(d: Fraction, c: Config) -> Config:
    """Push ``delay{d}`` down to the leaves of a canonical configuration."""
    if d == 0:
        return c
    if isinstance(c, Leaf):
        return c if isinstance(c.proc, S.Stop) else CDelay(d, c)
    if isinstance(c, CDelay):
        return CDelay(c.d + d, c.c)
    if isinstance(c, CChoice):
        return CChoice(_wrap_delay(d, c.left), _wrap_delay(d, c.right))
    if isinstance(c, CPar):
        return CPar(_wrap_delay(d, c.left), c.sync, _wrap_delay(d, c.right))
    if isinstance(c, CInterrupt):
        return CInterrupt(_wrap_delay(d, c.left), _wrap_delay(d, c.right))
    if isinstance(c, CHide):
        return CHide(_wrap_delay(d, c.c), c.hidden)
    if isinstance(c, CRefine):
        return CRefine(c.action, c.by, _wrap_delay(d, c.c))
    return CDelay(d, c)


def canonicalize(c: Config, defs: Optional[dict] = None) -> Config:
    """Distribute event sets (and delays) over the operators.

    With ``defs`` given, named references are unfolded; recursion is
    guarded so unfolding stops at the first prefix.
    """
    if isinstance(c, Leaf):
        E, p = c.events, c.proc
        if isinstance(p, (S.Stop, S.Skip, S.Prefix)):
            return c
        if isinstance(p, S.Choice):
            return CChoice(canonicalize(Leaf(E, p.left), defs), canonicalize(Leaf(E, p.right), defs))
        if isinstance(p, S.Par):
            return CPar(canonicalize(Leaf(E, p.left), defs), p.sync, canonicalize(Leaf(E, p.right), defs))
        if isinstance(p, S.Interrupt):
            return CInterrupt(canonicalize(Leaf(E, p.left), defs), canonicalize(Leaf(E, p.right), defs))
        if isinstance(p, S.Hide):
            return CHide(canonicalize(Leaf(E, p.body), defs), p.hidden)
        if isinstance(p, S.Delay):
            return _wrap_delay(p.d, canonicalize(Leaf(E, p.body), defs))
        if isinstance(p, S.Refine):
            return CRefine(p.action, p.by, canonicalize(Leaf(E, p.body), defs))
        if isinstance(p, S.Ref):
            if defs is None:
                return c
            if p.name not in defs:
                raise KeyError(f"unresolved reference {p.name!r}")
            return canonicalize(Leaf(E, defs[p.name]), defs)
        raise TypeError(f"not a process: {p!r}")
    if isinstance(c, CDelay):
        return _wrap_delay(c.d, canonicalize(c.c, defs))
    if isinstance(c, CChoice):
        return CChoice(canonicalize(c.left, defs), canonicalize(c.right, defs))
    if isinstance(c, CPar):
        return CPar(canonicalize(c.left, defs), c.sync, canonicalize(c.right, defs))
    if isinstance(c, CInterrupt):
        return CInterrupt(canonicalize(c.left, defs), canonicalize(c.right, defs))
    if isinstance(c, CHide):
        return CHide(canonicalize(c.c, defs), c.hidden)
    if isinstance(c, CRefine):
        return CRefine(c.action, c.by, canonicalize(c.c, defs))
    if isinstance(c, PartialSeq):
        return PartialSeq(canonicalize(c.left, defs), c.anchor, canonicalize(c.right, defs))
    raise TypeError(f"not a configuration: {c!r}")


def initial_config(root: S.Process, defs: Optional[dict] = None) -> Config:
    return canonicalize(Leaf(frozenset(), root), defs)


def is_canonical(c: Config) -> bool:
    if isinstance(c, Leaf):
        return isinstance(c.proc, (S.Stop, S.Skip, S.Prefix))
    if isinstance(c, CDelay):
        return c.d > 0 and is_canonical(c.c)
    if isinstance(c, (CChoice, CPar, CInterrupt, PartialSeq)):
        return is_canonical(c.left) and is_canonical(c.right)
    if isinstance(c, (CHide, CRefine)):
        return is_canonical(c.c)
    return False


# -- event sets --------------------------------------------------------------

def psi(c: Config) -> frozenset:
    if isinstance(c, Leaf):
        return c.events
    if isinstance(c, (CDelay, CHide, CRefine)):
        return psi(c.c)
    if isinstance(c, PartialSeq):
        return psi(c.left) | frozenset(e for e in psi(c.right) if e.event != c.anchor)
    return psi(c.left) | psi(c.right)


def ids(E) -> frozenset:
    return frozenset(e.event for e in E)


def psi_ids(c: Config) -> frozenset:
    return ids(psi(c))


def _sub_set(E: frozenset, y: int, x: int) -> frozenset:
    return frozenset(TimedEvent(y, e.action, e.elapsed) if e.event == x else e for e in E)


def substitute_event(c: Config, y: int, x: int) -> Config:
    """``c[y/x]``: rename event ``x`` to ``y`` everywhere, anchors included."""
    if x == y:
        return c
    if isinstance(c, Leaf):
        return Leaf(_sub_set(c.events, y, x), c.proc)
    if isinstance(c, CDelay):
        return CDelay(c.d, substitute_event(c.c, y, x))
    if isinstance(c, CChoice):
        return CChoice(substitute_event(c.left, y, x), substitute_event(c.right, y, x))
    if isinstance(c, CPar):
        return CPar(substitute_event(c.left, y, x), c.sync, substitute_event(c.right, y, x))
    if isinstance(c, CInterrupt):
        return CInterrupt(substitute_event(c.left, y, x), substitute_event(c.right, y, x))
    if isinstance(c, CHide):
        return CHide(substitute_event(c.c, y, x), c.hidden)
    if isinstance(c, CRefine):
        return CRefine(c.action, c.by, substitute_event(c.c, y, x))
    if isinstance(c, PartialSeq):
        anchor = y if c.anchor == x else c.anchor
        return PartialSeq(substitute_event(c.left, y, x), anchor, substitute_event(c.right, y, x))
    raise TypeError(f"not a configuration: {c!r}")


def _adv_set(E: frozenset, d: Fraction) -> frozenset:
    return frozenset(TimedEvent(e.event, e.action, e.elapsed + d) for e in E)


def advance(c: Config, d) -> Config:
    """``c + d``: every stamp grows by ``d``; structure is untouched."""
    d = Fraction(d)
    if d < 0:
        raise ValueError("negative delay")
    if d == 0:
        return c
    return map_leaves(c, lambda leaf: Leaf(_adv_set(leaf.events, d), leaf.proc))


def map_leaves(c: Config, fn) -> Config:
    if isinstance(c, Leaf):
        return fn(c)
    if isinstance(c, CDelay):
        return CDelay(c.d, map_leaves(c.c, fn))
    if isinstance(c, CChoice):
        return CChoice(map_leaves(c.left, fn), map_leaves(c.right, fn))
    if isinstance(c, CPar):
        return CPar(map_leaves(c.left, fn), c.sync, map_leaves(c.right, fn))
    if isinstance(c, CInterrupt):
        return CInterrupt(map_leaves(c.left, fn), map_leaves(c.right, fn))
    if isinstance(c, CHide):
        return CHide(map_leaves(c.c, fn), c.hidden)
    if isinstance(c, CRefine):
        return CRefine(c.action, c.by, map_leaves(c.c, fn))
    if isinstance(c, PartialSeq):
        return PartialSeq(map_leaves(c.left, fn), c.anchor, map_leaves(c.right, fn))
    raise TypeError(f"not a configuration: {c!r}")


def leaves(c: Config):
    """Yield ``(delay, leaf)`` pairs; ``delay`` is the wrapper amount or 0."""
    if isinstance(c, Leaf):
        yield Fraction(0), c
    elif isinstance(c, CDelay):
        for d, leaf in leaves(c.c):
            yield c.d + d, leaf
    elif isinstance(c, (CHide, CRefine)):
        yield from leaves(c.c)
    else:
        yield from leaves(c.left)
        yield from leaves(c.right)


def strip_stamps(c: Config) -> Config:
    return map_leaves(
        c, lambda leaf: Leaf(frozenset(TimedEvent(e.event, e.action) for e in leaf.events), leaf.proc)
    )


def is_finished(E, durations) -> bool:
    """Every event in ``E`` has run strictly longer than its action lasts."""
    for e in E:
        d = Fraction(0) if e.action == S.DELTA else durations[e.action]
        if not e.elapsed > d:
            return False
    return True


def fresh_event(excluded) -> int:
    """Least event id not in ``excluded``."""
    excluded = set(excluded)
    i = 0
    while i in excluded:
        i += 1
    return i


# -- rendering ---------------------------------------------------------------

def _render_set(E) -> str:
    if not E:
        return "∅"
    return ",".join(str(e) for e in sorted(E))


def render_config(c: Config) -> str:
    if isinstance(c, Leaf):
        return f"_{{{_render_set(c.events)}}}[{S.render(c.proc)}]"
    if isinstance(c, CDelay):
        return f"delay{{{c.d}}}({render_config(c.c)})"
    if isinstance(c, CChoice):
        return f"({render_config(c.left)} + {render_config(c.right)})"
    if isinstance(c, CPar):
        inner = " ".join(sorted(c.sync))
        return f"({render_config(c.left)} |[{inner or ' '}]| {render_config(c.right)})"
    if isinstance(c, CInterrupt):
        return f"({render_config(c.left)} △ {render_config(c.right)})"
    if isinstance(c, CHide):
        return f"({render_config(c.c)} \\ {{{','.join(sorted(c.hidden))}}})"
    if isinstance(c, CRefine):
        return f"ρ_{c.action}({S.render(c.by)}, {render_config(c.c)})"
    if isinstance(c, PartialSeq):
        return f"({render_config(c.left)} ≫^{event_name(c.anchor)} {render_config(c.right)})"
    raise TypeError(f"not a configuration: {c!r}")
