"""Abstract syntax, parser and pretty-printer for duration-CSP with refinement.

Surface grammar (see README for the EBNF)::

    durations a=2 b=3;
    main P;
    process P := a{2};b{3};stop + b{3};a{2};stop endproc

Numbers are exact rationals (``3``, ``0.1``, ``1/2``).  An action written
without ``{u}`` has an unbounded firing window.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Union

DELTA = "δ"
INTERNAL = "i"
RESERVED_ACTIONS = frozenset({DELTA, INTERNAL, "delta", "tau"})
KEYWORDS = frozenset(
    {"stop", "skip", "delay", "rho", "in", "process", "endproc", "durations", "main"}
)


class ParseError(ValueError):
    """Syntax error with a source location and the expected tokens."""

    def __init__(self, message, line=0, col=0, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        loc = f"{line}:{col}: " if line else ""
        exp = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{loc}{message}{exp}")


class SpecError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Diagnostic:
    category: str
    message: str
    loc: Optional[tuple] = None

    def __str__(self):
        where = f"{self.loc[0]}:{self.loc[1]}: " if self.loc else ""
        return f"{where}{self.category}: {self.message}"


# -- process terms -----------------------------------------------------------

_LOC = dict(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Stop:
    loc: Optional[tuple] = field(**_LOC)


@dataclass(frozen=True)
class Skip:
    bound: Optional[Fraction] = None
    loc: Optional[tuple] = field(**_LOC)


@dataclass(frozen=True)
class Delay:
    d: Fraction
    body: "Process"
    loc: Optional[tuple] = field(**_LOC)


@dataclass(frozen=True)
class Prefix:
    action: str
    bound: Optional[Fraction]
    cont: "Process"
    loc: Optional[tuple] = field(**_LOC)


@dataclass(frozen=True)
class Choice:
    left: "Process"
    right: "Process"
    loc: Optional[tuple] = field(**_LOC)


@dataclass(frozen=True)
class Par:
    left: "Process"
    sync: frozenset
    right: "Process"
    loc: Optional[tuple] = field(**_LOC)


@dataclass(frozen=True)
class Hide:
    body: "Process"
    hidden: frozenset
    loc: Optional[tuple] = field(**_LOC)


@dataclass(frozen=True)
class Interrupt:
    left: "Process"
    right: "Process"
    loc: Optional[tuple] = field(**_LOC)


@dataclass(frozen=True)
class Refine:
    action: str
    by: "Process"
    body: "Process"
    loc: Optional[tuple] = field(**_LOC)


@dataclass(frozen=True)
class Ref:
    name: str
    loc: Optional[tuple] = field(**_LOC)


Process = Union[Stop, Skip, Delay, Prefix, Choice, Par, Hide, Interrupt, Refine, Ref]


@dataclass(frozen=True)
class Spec:
    definitions: dict
    durations: dict
    root: str

    @property
    def process(self) -> Process:
        return self.definitions[self.root]

    def duration(self, action: str) -> Fraction:
        if action == DELTA:
            return Fraction(0)
        try:
            return self.durations[action]
        except KeyError:
            raise KeyError(f"no duration for action {action!r}") from None

    def __hash__(self):
        return hash((self.root, frozenset(self.durations.items())))


def make_spec(process: Process, durations: dict, definitions=None, root="main") -> Spec:
    """Wrap a bare term as a Spec with ``root`` bound to it."""
    defs = dict(definitions or {})
    defs[root] = process
    durs = {a: Fraction(v) for a, v in durations.items()}
    return Spec(defs, durs, root)


def children(p: Process) -> Iterator[Process]:
    if isinstance(p, (Delay, Hide)):
        yield p.body
    elif isinstance(p, Prefix):
        yield p.cont
    elif isinstance(p, (Choice, Par, Interrupt)):
        yield p.left
        yield p.right
    elif isinstance(p, Refine):
        yield p.by
        yield p.body


def walk(p: Process) -> Iterator[Process]:
    stack = [p]
    while stack:
        q = stack.pop()
        yield q
        stack.extend(reversed(list(children(q))))


def actions_of(p: Process) -> set:
    """Actions occurring in prefixes or refinements of ``p``."""
    out = set()
    for q in walk(p):
        if isinstance(q, (Prefix, Refine)):
            out.add(q.action)
    return out


def size(p: Process) -> int:
    return sum(1 for _ in walk(p))


# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*|\#[^\n]*)
  | (?P<num>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<op>\|\|\||\|\[|\]\||:=|\[>|\\|[{}();+=\[\],])
  | (?P<name>[A-Za-z_δ][A-Za-z0-9_\-']*)
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    toks = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            toks.append(Token(kind, chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, text):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def at(self, *texts):
        return self.tok.text in texts and self.tok.kind in ("op", "name")

    def error(self, msg, *expected):
        t = self.tok
        got = t.text or "end of input"
        raise ParseError(f"{msg}, got {got!r}", t.line, t.col, expected)

    def expect(self, text):
        if not self.at(text):
            self.error("unexpected token", repr(text))
        t = self.tok
        self.i += 1
        return t

    def name(self, what="identifier"):
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            self.error(f"expected {what}", what)
        self.i += 1
        return t

    def number(self):
        t = self.tok
        if t.kind != "num":
            self.error("expected number", "number")
        self.i += 1
        return Fraction(t.text)

    def action_name(self):
        t = self.name("action")
        if t.text in RESERVED_ACTIONS:
            raise ParseError(f"reserved name {t.text!r} used as an action", t.line, t.col)
        return t.text

    def action_set(self, close):
        names = []
        while not self.at(close):
            names.append(self.action_name())
            if not self.at(close):
                self.expect(",")
        self.expect(close)
        return frozenset(names)

    # spec := (durations | main | process)*
    def spec(self):
        durations, defs, root, locs = {}, {}, None, {}
        while self.tok.kind != "eof":
            if self.at("durations"):
                self.i += 1
                while not self.at(";"):
                    a = self.action_name()
                    self.expect("=")
                    durations[a] = self.number()
                    if self.at(","):
                        self.i += 1
                self.expect(";")
            elif self.at("main"):
                self.i += 1
                root = self.name("process name").text
                self.expect(";")
            elif self.at("process"):
                self.i += 1
                t = self.name("process name")
                if self.at("["):
                    self.i += 1
                    self.action_set("]")
                self.expect(":=")
                body = self.proc()
                self.expect("endproc")
                if t.text in defs:
                    raise ParseError(f"duplicate definition {t.text!r}", t.line, t.col)
                defs[t.text] = body
                locs[t.text] = (t.line, t.col)
            else:
                self.error("unexpected token", "'durations'", "'main'", "'process'")
        if root is None:
            if len(defs) != 1:
                self.error("missing 'main' declaration", "'main'")
            root = next(iter(defs))
        return Spec(defs, durations, root)

    def proc(self):
        return self.choice()

    def choice(self):
        left = self.interrupt()
        while self.at("+"):
            t = self.tok
            self.i += 1
            left = Choice(left, self.interrupt(), loc=(t.line, t.col))
        return left

    def interrupt(self):
        left = self.par()
        while self.at("[>"):
            t = self.tok
            self.i += 1
            left = Interrupt(left, self.par(), loc=(t.line, t.col))
        return left

    def par(self):
        left = self.hide()
        while self.at("|||", "|["):
            t = self.tok
            self.i += 1
            sync = frozenset() if t.text == "|||" else self.action_set("]|")
            left = Par(left, sync, self.hide(), loc=(t.line, t.col))
        return left

    def hide(self):
        body = self.prefix()
        while self.at("\\"):
            t = self.tok
            self.i += 1
            self.expect("{")
            body = Hide(body, self.action_set("}"), loc=(t.line, t.col))
        return body

    def bound(self):
        if self.at("{"):
            self.i += 1
            n = self.number()
            self.expect("}")
            return n
        return None

    def prefix(self):
        t = self.tok
        loc = (t.line, t.col)
        if self.at("delay"):
            self.i += 1
            self.expect("{")
            d = self.number()
            self.expect("}")
            return Delay(d, self.prefix(), loc=loc)
        if self.at("stop"):
            self.i += 1
            return Stop(loc=loc)
        if self.at("skip"):
            self.i += 1
            return Skip(self.bound(), loc=loc)
        if self.at("("):
            self.i += 1
            p = self.proc()
            self.expect(")")
            return p
        if self.at("rho"):
            self.i += 1
            a = self.action_name()
            self.expect(":=")
            by = self.proc()
            self.expect("in")
            body = self.proc()
            return Refine(a, by, body, loc=loc)
        if t.kind == "name" and t.text not in KEYWORDS:
            nxt = self.toks[self.i + 1]
            if nxt.text in ("{", ";"):
                a = self.action_name()
                b = self.bound()
                self.expect(";")
                return Prefix(a, b, self.prefix(), loc=loc)
            self.i += 1
            if self.at("["):
                self.i += 1
                while not self.at("]"):
                    self.i += 1
                self.expect("]")
            return Ref(t.text, loc=loc)
        self.error("expected a process", "'stop'", "'skip'", "'delay'", "'('", "'rho'", "action", "process name")


def parse_process(text: str) -> Process:
    p = _Parser(text)
    out = p.proc()
    if p.tok.kind != "eof":
        p.error("trailing input", "end of input")
    return out


def parse_spec(text: str) -> Spec:
    """Parse and validate a ``.dcsp`` source; raise on any diagnostic."""
    spec = _Parser(text).spec()
    diags = validate(spec)
    if diags:
        raise SpecError(diags)
    return spec


# -- rendering ---------------------------------------------------------------

def _num(q: Fraction) -> str:
    return str(q)


def _names(s) -> str:
    return ",".join(sorted(s))


# precedence: 0 choice, 1 interrupt, 2 par, 3 hide, 4 prefix/atom
def _prec(p) -> int:
    if isinstance(p, Choice):
        return 0
    if isinstance(p, Interrupt):
        return 1
    if isinstance(p, Par):
        return 2
    if isinstance(p, Hide):
        return 3
    return 4


def _wrap(p, level):
    s = render(p)
    return f"({s})" if _prec(p) < level else s


def render(p: Process) -> str:
    """Source text for ``p``; ``parse_process(render(p)) == p``."""
    if isinstance(p, Stop):
        return "stop"
    if isinstance(p, Skip):
        return "skip" if p.bound is None else f"skip{{{_num(p.bound)}}}"
    if isinstance(p, Delay):
        return f"delay{{{_num(p.d)}}} {_wrap(p.body, 4)}"
    if isinstance(p, Prefix):
        b = "" if p.bound is None else f"{{{_num(p.bound)}}}"
        return f"{p.action}{b};{_wrap(p.cont, 4)}"
    if isinstance(p, Choice):
        return f"{_wrap(p.left, 0)} + {_wrap(p.right, 1)}"
    if isinstance(p, Interrupt):
        return f"{_wrap(p.left, 1)} [> {_wrap(p.right, 2)}"
    if isinstance(p, Par):
        op = "|||" if not p.sync else f"|[{_names(p.sync)}]|"
        return f"{_wrap(p.left, 2)} {op} {_wrap(p.right, 3)}"
    if isinstance(p, Hide):
        return f"{_wrap(p.body, 3)} \\{{{_names(p.hidden)}}}"
    if isinstance(p, Refine):
        return f"(rho {p.action} := {render(p.by)} in {render(p.body)})"
    if isinstance(p, Ref):
        return p.name
    raise TypeError(f"not a process: {p!r}")


def render_spec(spec: Spec) -> str:
    durs = " ".join(f"{a}={_num(d)}" for a, d in sorted(spec.durations.items()))
    lines = [f"durations {durs};", f"main {spec.root};"]
    for name, body in spec.definitions.items():
        lines.append(f"process {name} := {render(body)} endproc")
    return "\n".join(lines) + "\n"


# -- validation --------------------------------------------------------------

def _unguarded_refs(p: Process) -> set:
    """Names reachable from ``p`` without passing through a prefix."""
    if isinstance(p, Ref):
        return {p.name}
    if isinstance(p, Prefix):
        return set()
    out = set()
    for c in children(p):
        out |= _unguarded_refs(c)
    return out


def validate(spec: Spec) -> list:
    diags = []
    defs = spec.definitions
    if spec.root not in defs:
        diags.append(Diagnostic("MissingRoot", f"main process {spec.root!r} is not defined"))
    for name, body in defs.items():
        for q in walk(body):
            if isinstance(q, Ref) and q.name not in defs:
                diags.append(Diagnostic("UnresolvedRef", f"{q.name!r} in {name!r}", q.loc))
            if isinstance(q, (Prefix, Refine)) and q.action in RESERVED_ACTIONS:
                diags.append(Diagnostic("ReservedName", f"{q.action!r} is reserved", q.loc))
            if isinstance(q, Prefix) and q.action not in spec.durations and q.action not in RESERVED_ACTIONS:
                diags.append(Diagnostic("MissingDuration", q.action, q.loc))
            if isinstance(q, Par) and q.sync & RESERVED_ACTIONS:
                diags.append(Diagnostic("ReservedName", "δ/i in synchronisation set", q.loc))
            if isinstance(q, Hide) and q.hidden & RESERVED_ACTIONS:
                diags.append(Diagnostic("ReservedName", "δ/i in hiding set", q.loc))
            if isinstance(q, Refine) and _contains_refine(q.by, defs):
                diags.append(Diagnostic("NestedRefinementBody", f"refinement of {q.action!r}", q.loc))
    for a, d in spec.durations.items():
        if d < 0:
            diags.append(Diagnostic("NegativeDuration", a))
    # unguarded recursion: a cycle in the "reachable without a prefix" graph
    graph = {n: _unguarded_refs(b) & defs.keys() for n, b in defs.items()}
    state = {}

    def visit(n, path):
        state[n] = 1
        for m in sorted(graph[n]):
            if state.get(m) == 1:
                cyc = path[path.index(m):] + [m]
                diags.append(Diagnostic("UnguardedRecursion", " -> ".join(cyc)))
            elif m not in state:
                visit(m, path + [m])
        state[n] = 2

    for n in defs:
        if n not in state:
            visit(n, [n])
    return diags


def _contains_refine(p, defs, seen=None) -> bool:
    seen = set() if seen is None else seen
    for q in walk(p):
        if isinstance(q, Refine):
            return True
        if isinstance(q, Ref) and q.name in defs and q.name not in seen:
            seen.add(q.name)
            if _contains_refine(defs[q.name], defs, seen):
                return True
    return False
