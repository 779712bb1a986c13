"""Expanded fixpoint form against the direct regular-path reference."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import fixture_text
from surgecheck.checker import check, check_naive
from surgecheck.mucalc import expand_regular, parse_formula, to_core
from surgecheck.oracles import (
    random_lts, random_regular, random_star_formula, regular_denotation, regular_holds,
    regular_reach,
)
from surgecheck.lts import import_lts


def agree(lts, f) -> bool:
    core = to_core(f, None, lts.labels)
    return check_naive(lts, core) == regular_denotation(lts, f)


def test_reach_star_includes_start():
    lts = import_lts('lts 0 1 2\n0 "a" 1\n')
    f = parse_formula("[a*]false", resolve=False)
    assert regular_reach(lts, f.reg, {}, 0) == {0, 1}


def test_fixture_formulas(traffic, traffic_mutant):
    for tm, lts in (traffic, traffic_mutant):
        for name in ("safety.mcf", "liveness.mcf"):
            f = parse_formula(fixture_text(name), tm.signature)
            assert check_naive(lts, to_core(f, tm.signature, lts.labels)) == \
                regular_denotation(lts, f, tm.signature)


@pytest.mark.parametrize("seed", range(4))
def test_random_star_formulas(seed):
    rng = random.Random(1000 + seed)
    for _ in range(25):
        lts = random_lts(rng, 20)
        assert agree(lts, random_star_formula(rng, 4))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_box_diamond_duality(seed):
    rng = random.Random(seed)
    lts = random_lts(rng, 15)
    from surgecheck.mucalc import Box, Diamond, FFalse, FTrue
    reg = random_regular(rng, 3)
    box = check(lts, Box(reg, FFalse())).holds
    dia = check(lts, Diamond(reg, FTrue())).holds
    assert box == (not dia)
    assert box == regular_holds(lts, Box(reg, FFalse()))


def test_expansion_removes_all_regular_operators():
    rng = random.Random(5)
    from surgecheck.mucalc import render_formula
    for _ in range(50):
        text = render_formula(expand_regular(random_star_formula(rng, 4)))
        assert "*" not in text and "." not in text.replace(". ", "")
