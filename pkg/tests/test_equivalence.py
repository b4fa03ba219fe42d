import dataclasses
from fractions import Fraction

import pytest
from hypothesis import given, settings

from durcsp import constraints as K
from durcsp import syntax as S
from durcsp import tcts as T
from durcsp.config import Leaf, events, initial_config
from durcsp.corpus import load
from durcsp.equivalence import (
    Bisimilar,
    CheckParams,
    ConfigSpace,
    CtsSpace,
    Inconclusive,
    NotBisimilar,
    ParamsError,
    PreconditionError,
    check_synchronized,
    config_bisimilar,
    cts_run_bisimilar,
    refinement_preserved,
    replay,
    tau_bisimilar,
    update_bijection,
)

from gen import processes, specs

F = Fraction
P = S.parse_process


def spec(text, **durs):
    return S.make_spec(P(text), {k: F(v) for k, v in durs.items()})


def cfg(text):
    return initial_config(P(text))


# -- tau_bisimilar -----------------------------------------------------------

def test_delay_example_matches_semantics():
    s = load("fig31")
    v = tau_bisimilar(T.compile(s), s)
    assert isinstance(v, Bisimilar) and v.within_bounds
    assert str(v).startswith("Bisimilar (within bounds: depth=")


def test_wider_window_is_detected():
    m = T.compile(spec("a{2};stop", a=1))
    v = tau_bisimilar(m, spec("a{3};stop", a=1))
    assert isinstance(v, NotBisimilar)
    f = v.counterexample.failure
    assert f.kind == "delay" or f.move[1] == "a"


def test_stop_vs_stop():
    s = spec("stop")
    assert tau_bisimilar(T.compile(s), s) == Bisimilar(True, 6, F(1, 2), 1)


def test_grid_must_divide_constants():
    s = load("fig31")
    with pytest.raises(ParamsError):
        tau_bisimilar(T.compile(s), s, CheckParams(delay_grid=F(3)))
    v = tau_bisimilar(T.compile(s), s, CheckParams(delay_grid=F(1)))
    assert v.grid == 1


# -- config_bisimilar --------------------------------------------------------

AB = CheckParams(durations={"a": F(2), "b": F(3)})


def test_identical_configs():
    c = cfg("a;b;stop + b;a;stop")
    assert isinstance(config_bisimilar(c, c, AB), Bisimilar)


def test_parallel_symmetry():
    v = config_bisimilar(cfg("a{2};stop ||| b{3};stop"), cfg("b{3};stop ||| a{2};stop"), AB)
    assert isinstance(v, Bisimilar) and v.within_bounds


def test_sequential_vs_parallel():
    p, q = cfg("a;b;stop + b;a;stop"), cfg("a;stop ||| b;stop")
    v = config_bisimilar(p, q, AB)
    assert isinstance(v, NotBisimilar)
    lines = v.counterexample.lines()
    assert lines == [
        "ACT {} a e0 ~ {} a e0",
        "FAIL side=2 clause=2.1 ACT {} b e1: no step with this label and matching causes",
    ]
    space = ConfigSpace(AB.durations)
    assert replay(v.counterexample, space, space, p, q)


def test_node_budget():
    v = config_bisimilar(cfg("a;stop ||| b;stop"), cfg("b;stop ||| a;stop"), dataclasses.replace(AB, node_budget=2))
    assert isinstance(v, Inconclusive)


def test_initial_bijection_from_labels():
    a = Leaf(events((3, "a", 1)), P("b;stop"))
    b = Leaf(events((7, "a", 1)), P("b;stop"))
    assert isinstance(config_bisimilar(a, b, AB), Bisimilar)
    c = Leaf(events((7, "b", 1)), P("b;stop"))
    with pytest.raises(PreconditionError):
        config_bisimilar(a, c, AB)


def test_durations_required():
    with pytest.raises(ParamsError):
        config_bisimilar(cfg("stop"), cfg("stop"), CheckParams())


# -- cts_run_bisimilar -------------------------------------------------------

def test_models_of_same_spec():
    m = T.compile(load("intro_P"))
    assert isinstance(cts_run_bisimilar(m, m), Bisimilar)


def test_choice_idempotence_on_models():
    m1 = T.compile(spec("a{2};stop", a=1))
    m2 = T.compile(spec("a{2};stop + a{2};stop", a=1))
    assert isinstance(cts_run_bisimilar(m1, m2), Bisimilar)


def shifted(m, k, by):
    t = m.transitions[k]
    ts = list(m.transitions)
    lowered = K.conj(*(dataclasses.replace(p, bound=p.bound - by) for p in t.guard.parts))
    ts[k] = dataclasses.replace(t, guard=lowered)
    return T.TimedCTS(m.states, ts, m.initial, m.durations)


def test_guard_shifted_model():
    m = T.compile(load("fig31"))
    m2 = shifted(m, 1, 1)  # b at c_e0 = 103
    v = cts_run_bisimilar(m, m2)
    assert isinstance(v, NotBisimilar)
    assert v.counterexample.lines()[1] == "DELAY 103"
    assert replay(v.counterexample, CtsSpace(m), CtsSpace(m2), T.initial_run(m), T.initial_run(m2))


# -- synchronisation ---------------------------------------------------------

def test_check_synchronized():
    s = spec("a{2};stop", a=1)
    m = T.compile(s)
    space = ConfigSpace(s.durations)
    rc0, c0 = T.initial_run(m), initial_config(s.process)
    assert check_synchronized(rc0, c0, {}, m)
    rc = T.step_delay(T.step_action(rc0, m.transitions[0], m.durations), 1)
    c = space.delay(space.actions(c0)[0][1], 1)
    assert check_synchronized(rc, c, {0: 0}, m)
    assert not check_synchronized(T.step_delay(rc, 1), c, {0: 0}, m)


def test_bijection_update():
    psi1 = events((0, "a"), (1, "b"), (2, "c"))
    psi2 = events((5, "a"), (6, "c"), (7, "d"))
    f = {0: 5, 1: 9, 2: 6, 3: 8}
    assert update_bijection(f, psi1, 1, psi2, 7) == {0: 5, 2: 6, 1: 7}


# -- refinement ----------------------------------------------------------------

ABC = CheckParams(durations={"a": F(1), "b": F(1), "c": F(1)})


def test_refine_identical():
    c = cfg("a{1};stop")
    v = refinement_preserved(P("c{1};skip{0}"), "a", c, c, ABC)
    assert isinstance(v, Bisimilar) and v.within_bounds


def test_refine_choice_idempotence():
    v = refinement_preserved(P("b;skip{0}"), "a", cfg("a;stop + a;stop"), cfg("a;stop"), ABC)
    assert isinstance(v, Bisimilar) and v.within_bounds


def test_refine_precondition():
    with pytest.raises(PreconditionError):
        refinement_preserved(P("c;skip"), "a", cfg("a;b;stop + b;a;stop"), cfg("a;stop ||| b;stop"), ABC)


# -- properties --------------------------------------------------------------

DURS = CheckParams(max_depth=5, durations={"a": F(1), "b": F(2), "c": F(3)})


@settings(max_examples=40, deadline=None)
@given(processes(ops=4), processes(ops=4))
def test_config_bisim_symmetric_and_reflexive(p, q):
    a, b = initial_config(p), initial_config(q)
    assert isinstance(config_bisimilar(a, a, DURS), Bisimilar)
    ab, ba = config_bisimilar(a, b, DURS), config_bisimilar(b, a, DURS)
    assert type(ab) is type(ba)
    if isinstance(ab, NotBisimilar):
        space = ConfigSpace(DURS.durations)
        assert replay(ab.counterexample, space, space, a, b)
        assert replay(ba.counterexample, space, space, b, a)


@settings(max_examples=40, deadline=None)
@given(specs(ops=4))
def test_compiled_random_specs_match_semantics(s):
    v = tau_bisimilar(T.compile(s), s, CheckParams(max_depth=12))
    assert isinstance(v, Bisimilar) and v.within_bounds
