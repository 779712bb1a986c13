import pytest
from hypothesis import given, settings

from conftest import fixture_text
from model_gen import model_text
from surgecheck.besw.config import default_config, single_failure_configs
from surgecheck.besw.model import generate_model
from surgecheck.signature import DuplicateName, ModelTypeError, UnknownName
from surgecheck.speclang import (
    Call, Choice, Cond, Seq, Skip, load_model, parse_model, pretty_print, typecheck,
)
from surgecheck.syntax import ParseError


def test_traffic_light_shape():
    m = parse_model(fixture_text("traffic_light.sbm"))
    assert len(m.sort_decls) == 1
    assert m.action_names == ["red_button", "green_button", "set_red", "set_green"]
    assert len(m.procs) == 1
    assert isinstance(m.init, Call) and m.init.name == "P"
    assert m.init.args[0].name == "red"


def test_traffic_light_precedence():
    # `.` binds tighter than `+`, and `-> <>` sits in between
    body = parse_model(fixture_text("traffic_light.sbm")).procs[0].body
    assert isinstance(body, Choice)
    left = body.left
    assert isinstance(left, Seq) and isinstance(left.right, Cond)
    assert left.right.orelse is not None


def test_dispatch_fragment():
    m = parse_model(fixture_text("open_door_fragment.sbm"))
    assert len(m.procs) == 1
    assert len(m.procs[0].params) == 2
    typecheck(m)


def test_comments_and_skip():
    m = parse_model("% nothing\nact a; % trailing\ninit skip . a;")
    assert isinstance(m.init, Seq) and isinstance(m.init.left, Skip)


def test_empty_input():
    with pytest.raises(ParseError, match="missing init"):
        parse_model("")


def test_error_position():
    with pytest.raises(ParseError) as exc:
        parse_model("act a;\ninit a . ;", "m.sbm")
    assert str(exc.value).startswith("m.sbm:2:")
    assert exc.value.line == 2


def test_two_init_clauses():
    with pytest.raises(ParseError):
        parse_model("act a;\ninit a;\ninit a;")


@pytest.mark.parametrize("src,exc", [
    ("sort C = struct red | green;\nact a;\nproc P(c: C) = (c == 3) -> a . P(c);\ninit P(red);",
     ModelTypeError),
    ("sort C = struct red | green;\nact a;\nproc P(c: C) = a . P(c);\ninit P(red, red);",
     ModelTypeError),
    ("act a;\ninit Q;", UnknownName),
    ("act a; act a;\ninit a;", DuplicateName),
    ("sort C = struct red | red;\ninit skip;", ParseError),
    ("act a;\nproc P = a . P;\nproc Q = P . a;\ninit Q;", ModelTypeError),
    ("act a;\nproc P = P + a;\ninit P;", ModelTypeError),
    ("act a: Bool;\ninit a(3);", ModelTypeError),
    ("act a;\nglob g: Bool = false;\ninit g := 1;", ModelTypeError),
    ("act a;\ninit (1) -> a;", ModelTypeError),
])
def test_type_errors(src, exc):
    with pytest.raises(exc):
        load_model(src)


def test_choice_after_call_is_not_arithmetic():
    tm = load_model("act a, b;\nproc P = b . P + (true) -> a . P;\n"
                    "proc Q = P + (true) -> b . Q;\ninit Q;")
    assert set(tm.procs) == {"P", "Q"}


def test_named_arguments():
    tm = load_model("act a: Bool;\nproc P(x: Bool, y: Bool) = a(x) . a(y);\n"
                    "init P(y=true, x=false);")
    assert tm.init is not None


def _round_trip(text):
    m = parse_model(text)
    again = parse_model(pretty_print(m))
    assert again == m
    return again


def test_round_trip_fixtures():
    for name in ("traffic_light.sbm", "traffic_light_mutant.sbm", "open_door_fragment.sbm"):
        _round_trip(fixture_text(name))


def test_round_trip_nested_conditions():
    _round_trip("act a, b, c;\nproc P(x: Bool) = (x) -> ((x) -> a <> b) <> c . P(!x) + a . P(x);\n"
                "init P(true);")
    _round_trip("act a, b;\ninit ((true) -> a) . b + (false) -> (a + b) . a;")


def test_round_trip_generated_controller():
    _round_trip(generate_model(default_config()))


@pytest.mark.parametrize("cid,cfg", single_failure_configs()[::4])
def test_generated_models_typecheck(cid, cfg):
    tm = load_model(generate_model(cfg), cid)
    assert "Cycle" in tm.procs


@settings(max_examples=120, deadline=None)
@given(model_text())
def test_round_trip_random(text):
    _round_trip(text)
    load_model(text)
