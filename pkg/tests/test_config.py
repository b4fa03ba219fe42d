import random
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from durcsp import syntax as S
from durcsp.config import (
    CChoice,
    CDelay,
    CPar,
    CRefine,
    Leaf,
    PartialSeq,
    TimedEvent,
    advance,
    canonicalize,
    events,
    fresh_event,
    initial_config,
    is_canonical,
    is_finished,
    psi,
    render_config,
    substitute_event,
)
from durcsp.generate import random_process

from gen import processes

P = S.parse_process
STOP = S.Stop()


def test_initial_choice_distributes():
    c = initial_config(P("a;b;stop + b;a;stop"))
    assert c == CChoice(Leaf(frozenset(), P("a;b;stop")), Leaf(frozenset(), P("b;a;stop")))


def test_initial_stop():
    assert initial_config(STOP) == Leaf(frozenset(), STOP)


def test_initial_refine():
    q = P("a;stop")
    by = P("c;skip")
    assert initial_config(S.Refine("a", by, q)) == CRefine("a", by, Leaf(frozenset(), q))


def test_canonicalize_choice_and_delay():
    E = events((0, "a", 1))
    assert canonicalize(Leaf(E, P("a;stop + b;stop"))) == CChoice(Leaf(E, P("a;stop")), Leaf(E, P("b;stop")))
    assert canonicalize(Leaf(E, P("delay{2} b;stop"))) == CDelay(Fraction(2), Leaf(E, P("b;stop")))


def test_psi_cases():
    assert psi(Leaf(events((0, "a", 0)), P("b;stop"))) == events((0, "a", 0))
    par = CPar(Leaf(events((0, "a", 1)), STOP), frozenset(), Leaf(events((1, "b", 1)), STOP))
    assert psi(par) == events((0, "a", 1), (1, "b", 1))
    # anchor x=0 is dropped from the right side
    seq = PartialSeq(Leaf(events((2, "c", 0)), STOP), 0, Leaf(events((0, "a", 0), (1, "b", 0)), STOP))
    assert psi(seq) == events((2, "c", 0), (1, "b", 0))


def test_substitution():
    assert substitute_event(Leaf(events((0, "a", 2)), STOP), 1, 0) == Leaf(events((1, "a", 2)), STOP)
    c = CChoice(Leaf(events((3, "a", 0)), STOP), Leaf(events((0, "b", 0)), STOP))
    assert substitute_event(c, 5, 7) == c
    assert substitute_event(c, 5, 0) == CChoice(c.left, Leaf(events((5, "b", 0)), STOP))
    seq = PartialSeq(Leaf(frozenset(), STOP), 0, Leaf(events((0, "a", 0)), STOP))
    assert substitute_event(seq, 4, 0).anchor == 4


def test_advance():
    assert advance(Leaf(events((0, "a", 1)), STOP), 2) == Leaf(events((0, "a", 3)), STOP)
    c = Leaf(events((0, "a", 1)), STOP)
    assert advance(c, 0) is c


def test_is_finished():
    durs = {"a": Fraction(2), "b": Fraction(3)}
    assert is_finished(frozenset(), durs)
    assert not is_finished(events((0, "a", 2)), durs)
    assert is_finished(events((0, "a", Fraction(5, 2)), (1, "b", 4)), durs)
    assert is_finished(events((0, S.DELTA, Fraction(1, 100))), durs)


def test_fresh_event():
    assert fresh_event(set()) == 0
    assert fresh_event({0, 1}) == 2
    assert fresh_event({0, 2}) == 1


def test_render_config():
    c = CPar(Leaf(events((0, "a", Fraction(3, 2))), P("b{2};stop")), frozenset(), Leaf(frozenset(), P("c{1};stop")))
    assert render_config(c) == "(_{e0:a:3/2}[b{2};stop] |[ ]| _{∅}[c{1};stop])"


# -- properties --------------------------------------------------------------

event_sets = st.lists(
    st.tuples(st.integers(0, 6), st.sampled_from("abc"), st.fractions(0, 10)), max_size=4, unique_by=lambda t: t[0]
).map(lambda ts: events(*ts))


@settings(max_examples=150, deadline=None)
@given(processes(ops=6), event_sets)
def test_canonicalize_idempotent_and_psi_preserved(p, E):
    c = canonicalize(Leaf(E, p))
    assert is_canonical(c)
    assert canonicalize(c) == c
    if not isinstance(p, S.Stop):
        assert psi(c) == E or (psi(c) == frozenset() and not E)


@settings(max_examples=150, deadline=None)
@given(processes(ops=5), event_sets, st.fractions(0, 5), st.fractions(0, 5))
def test_advance_additive_and_finish_monotone(p, E, d1, d2):
    c = canonicalize(Leaf(E, p))
    assert advance(advance(c, d1), d2) == advance(c, d1 + d2)
    durs = {"a": Fraction(1), "b": Fraction(2), "c": Fraction(3)}
    if is_finished(psi(c), durs):
        assert is_finished(psi(advance(c, d1)), durs)


@settings(max_examples=100, deadline=None)
@given(processes(ops=5), event_sets, st.integers(7, 20))
def test_substitution_renames_psi(p, E, y):
    c = canonicalize(Leaf(E, p))
    for e in E:
        renamed = substitute_event(c, y, e.event)
        expect = frozenset(TimedEvent(y, x.action, x.elapsed) if x.event == e.event else x for x in psi(c))
        assert psi(renamed) == expect


@given(st.sets(st.integers(0, 30), max_size=20))
def test_fresh_event_is_fresh(S_):
    assert fresh_event(S_) not in S_


def test_random_terms_canonical_with_seeded_generator():
    rng = random.Random(0)
    for _ in range(50):
        assert is_canonical(initial_config(random_process(rng)))
