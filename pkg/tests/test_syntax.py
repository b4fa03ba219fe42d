from fractions import Fraction

import pytest
from hypothesis import given, settings

from durcsp import syntax as S
from durcsp.corpus import load

from gen import processes

F = Fraction


def test_parse_choice_spec():
    spec = S.parse_spec("durations a=2 b=3; main P; process P := a;b;stop + b;a;stop endproc")
    assert spec.root == "P"
    assert spec.durations == {"a": 2, "b": 3}
    p = spec.process
    assert isinstance(p, S.Choice)
    assert p.left == S.Prefix("a", None, S.Prefix("b", None, S.Stop()))
    assert p.right.action == "b"


def test_parse_fig31_term():
    spec = S.parse_spec("durations a=4 b=1; main R; process R := a{4}; delay{100} b{0}; stop endproc")
    assert spec.process == S.Prefix("a", F(4), S.Delay(F(100), S.Prefix("b", F(0), S.Stop())))


def test_unguarded_recursion_rejected():
    with pytest.raises(S.SpecError) as info:
        S.parse_spec("main X; process X := X endproc")
    assert [d.category for d in info.value.diagnostics] == ["UnguardedRecursion"]


def test_guarded_recursion_accepted():
    spec = S.parse_spec("durations a=1; main X; process X := a; X endproc")
    assert spec.process == S.Prefix("a", None, S.Ref("X"))


@pytest.mark.parametrize(
    "p, text",
    [
        (S.Stop(), "stop"),
        (S.Choice(S.Prefix("a", F(2), S.Stop()), S.Prefix("b", F(3), S.Stop())), "a{2};stop + b{3};stop"),
        (S.Skip(F(1, 2)), "skip{1/2}"),
    ],
)
def test_render(p, text):
    assert S.render(p) == text


def test_ticktock_service_round_trips():
    spec = load("ticktock")
    again = S.parse_spec(S.render_spec(spec))
    assert again.definitions == spec.definitions
    assert again.durations == spec.durations


def test_validate_clean():
    spec = S.make_spec(S.parse_process("a;b;stop + b;a;stop"), {"a": 2, "b": 3})
    assert S.validate(spec) == []


def test_validate_missing_duration():
    spec = S.make_spec(S.parse_process("a;stop"), {})
    assert [(d.category, d.message) for d in S.validate(spec)] == [("MissingDuration", "a")]


def test_validate_nested_refinement():
    inner = S.Refine("b", S.Prefix("c", None, S.Skip()), S.Prefix("b", None, S.Skip()))
    spec = S.make_spec(S.Refine("a", inner, S.Prefix("a", None, S.Stop())), {"a": 1, "b": 1, "c": 1})
    assert "NestedRefinementBody" in [d.category for d in S.validate(spec)]


def test_rationals_are_exact():
    total = S.parse_process("delay{0.1} delay{0.2} stop")
    assert total.d + total.body.d == S.parse_process("delay{0.3} stop").d == F(3, 10)


@pytest.mark.parametrize("src", ["durations δ=1; main P; process P := δ;stop endproc", "durations i=1; main P; process P := i;stop endproc"])
def test_reserved_names_rejected(src):
    with pytest.raises((S.SpecError, S.ParseError)):
        S.parse_spec(src)


def test_parse_error_location():
    with pytest.raises(S.ParseError) as info:
        S.parse_process("a;\n  + b")
    err = info.value
    assert (err.line, err.col) == (2, 3)
    assert err.expected


def test_operator_precedence():
    p = S.parse_process("a;stop + b;stop [> c;stop ||| d;stop \\ {d}")
    assert isinstance(p, S.Choice)
    assert isinstance(p.right, S.Interrupt)
    assert isinstance(p.right.right, S.Par)
    assert isinstance(p.right.right.right, S.Hide)


def test_refinement_syntax():
    p = S.parse_process("rho a := c;skip in a;b;stop")
    assert p == S.Refine("a", S.Prefix("c", None, S.Skip()), S.Prefix("a", None, S.Prefix("b", None, S.Stop())))
    assert S.parse_process(S.render(p)) == p


@settings(max_examples=200, deadline=None)
@given(processes(ops=6))
def test_render_parse_round_trip(p):
    assert S.parse_process(S.render(p)) == p
