"""Barrier controller: scenario files, table logic, generator switches, corpus."""

import pytest
from hypothesis import given, settings, strategies as st

from surgecheck.besw.config import (
    BALLAST_PUMPS, DOCK_PUMPS, VALVES, InvalidConfig, ScenarioConfig, default_config,
    parse_scenario, render_scenario, single_failure_configs, validate_config,
)
from surgecheck.besw.corpus import (
    PREDICATES, grid_audit, property_corpus, witness_queries,
)
from surgecheck.besw.model import (
    NUM_COMPARTMENTS, ballast_row, ballast_table, generate_model,
)
from surgecheck.besw.suite import features, run_suite, variant_config
from surgecheck.checker import check
from surgecheck.data import Rat
from surgecheck.mucalc import parse_formula, parse_predicates
from surgecheck.speclang import load_model

from conftest import fixture_text


# -- config validation --------------------------------------------------------

def test_default_is_valid():
    c = default_config()
    assert c.pumpBudget == 2
    assert c.failedPumps == frozenset()
    assert validate_config(c) == c


@pytest.mark.parametrize("changes, fragment", [
    (dict(failedPumps=frozenset(DOCK_PUMPS[:2])), "dock"),
    (dict(failedPumps=frozenset(BALLAST_PUMPS[:3])), "ballast"),
    (dict(failedValves=frozenset(VALVES[:2])), "valve"),
    (dict(failedPumps=frozenset({"pump9"})), "unknown pump"),
    (dict(failedValves=frozenset({"valve7"})), "unknown valve"),
    (dict(dockLevelList=(Rat(0), Rat(-100))), "sorted"),
    (dict(riverLevelList=(Rat(0), Rat(0))), "sorted"),
    (dict(wallSlitList=()), "empty"),
    (dict(pumpBudget=0), "pumpBudget"),
    (dict(pumpBudget=99), "pumpBudget"),
    (dict(phases=frozenset({"rest"})), "operational"),
    (dict(commandSources=frozenset({"das"})), "bos"),
    (dict(ballastTable="other"), "ballastTable"),
    (dict(mutation="nope"), "mutation"),
])
def test_invalid_configs(changes, fragment):
    with pytest.raises(InvalidConfig, match=fragment):
        validate_config(ScenarioConfig().with_(**changes))


def test_all_three_dock_pumps_down_rejected():
    with pytest.raises(InvalidConfig):
        validate_config(ScenarioConfig(failedPumps=frozenset(DOCK_PUMPS)))


def test_single_failure_sweep_covers_every_component():
    cfgs = single_failure_configs()
    names = [n for n, _ in cfgs]
    assert names == list(DOCK_PUMPS + BALLAST_PUMPS + VALVES)
    assert len(cfgs) == 17


# -- scenario files -----------------------------------------------------------

def test_default_fixture_matches_default():
    assert parse_scenario(fixture_text("default.scn")) == default_config()


def test_ballast_failure_fixture():
    c = parse_scenario(fixture_text("ballast_failure.scn"))
    assert c.failedPumps == {"ballast0", "ballast1"}
    assert c.ballastTable == "corrected"


def test_scenario_round_trip_fixtures():
    for name in ("default.scn", "ballast_failure.scn"):
        c = parse_scenario(fixture_text(name))
        assert parse_scenario(render_scenario(c)) == c


@pytest.mark.parametrize("text, fragment", [
    ("colour = red\n", "unknown key"),
    ("pumpBudget = two\n", "integer"),
    ("dockLevelList = 1/3\n", "rational"),
    ("dockLevelList = abc\n", "rational"),
    ("this is not a key value line\n", "malformed"),
])
def test_bad_scenario_files(text, fragment):
    with pytest.raises(InvalidConfig, match=fragment):
        parse_scenario(text)


_fail_sets = st.tuples(
    st.sets(st.sampled_from(DOCK_PUMPS), max_size=1),
    st.sets(st.sampled_from(BALLAST_PUMPS), max_size=2),
    st.sets(st.sampled_from(VALVES), max_size=1),
)


@given(_fail_sets, st.integers(1, 4), st.sampled_from(["corrected", "dso"]),
       st.lists(st.integers(-400, 600), min_size=1, max_size=5, unique=True))
@settings(max_examples=60, deadline=None)
def test_scenario_round_trip_random(fails, budget, table, levels):
    dock, ballast, valves = fails
    c = validate_config(ScenarioConfig(
        failedPumps=frozenset(dock | ballast), failedValves=frozenset(valves),
        pumpBudget=budget, ballastTable=table,
        dockLevelList=tuple(Rat(n) for n in sorted(levels))))
    assert parse_scenario(render_scenario(c)) == c


# -- ballast table ------------------------------------------------------------

def _on(row):
    return sum(row[0])


def test_corrected_table_respects_budget_under_every_admissible_failure():
    base = default_config()
    failure_sets = [frozenset()] + [frozenset({p}) for p in BALLAST_PUMPS]
    failure_sets += [frozenset({a, b}) for i, a in enumerate(BALLAST_PUMPS)
                     for b in BALLAST_PUMPS[i + 1:]]
    for fs in failure_sets:
        cfg = validate_config(base.with_(failedPumps=fs))
        for key, row in ballast_table(cfg).items():
            assert _on(row) <= cfg.pumpBudget, (fs, key, row)
            # a failed pump is never switched on
            pumps = row[0]
            for i, name in enumerate(BALLAST_PUMPS):
                if name in fs:
                    assert not pumps[i]


def test_dso_table_exceeds_budget_with_a_failure():
    cfg = variant_config(default_config(), "dso")
    assert cfg.ballastTable == "dso" and "ballast0" in cfg.failedPumps
    worst = max(_on(r) for r in ballast_table(cfg).values())
    assert worst > cfg.pumpBudget


def test_dso_without_failure_is_within_budget():
    cfg = validate_config(default_config().with_(ballastTable="dso"))
    assert all(_on(r) <= cfg.pumpBudget for r in ballast_table(cfg).values())


def test_two_failed_ballast_pumps_fall_back_to_rest_pumps():
    cfg = parse_scenario(fixture_text("ballast_failure.scn"))
    pumps, valves = ballast_row("closing", "tiltNorthLow", "high", cfg)
    assert pumps[:NUM_COMPARTMENTS] == (False,) * NUM_COMPARTMENTS
    assert pumps[NUM_COMPARTMENTS:] == (True, True)
    assert valves[:2] == (True, True)


def test_failed_valve_blocks_its_compartment():
    base = default_config()
    for (cl, tilt, band), (pumps, valves) in ballast_table(base).items():
        for c in range(NUM_COMPARTMENTS):
            if not valves[c]:
                continue
            cfg = validate_config(base.with_(failedValves=frozenset({f"valve{c}"})))
            p2, v2 = ballast_row(cl, tilt, band, cfg)
            assert not p2[c] and not v2[c]


# -- generator ----------------------------------------------------------------

def test_generated_model_parses():
    tm = load_model(generate_model(default_config()), "<barrier>")
    assert "Dock" in tm.procs


def test_operational_only_drops_other_phases():
    full = generate_model(default_config())
    reduced = generate_model(validate_config(default_config().with_(phases=frozenset({"operational"}))))
    # the action stays declared; only the branches go
    assert "(ph == ito)" in full and "(ph == ito)" not in reduced
    assert "das_functionTest ." in full and "das_functionTest ." not in reduced
    load_model(reduced, "<reduced>")


def test_ito_needs_das():
    cfg = validate_config(default_config().with_(commandSources=frozenset({"bos", "hi"})))
    assert "ito" not in features(cfg)
    assert "das_functionTest ." not in generate_model(cfg)
    assert "ito" in features(default_config())


def test_generation_is_deterministic():
    assert generate_model(default_config()) == generate_model(default_config())


# -- corpus -------------------------------------------------------------------

def test_corpus_shape():
    corpus = property_corpus()
    ids = [p.id for p in corpus]
    assert len(corpus) >= 11
    assert len(set(ids)) == len(ids)
    expected = {p.id: p.expected for p in corpus}
    assert expected["P6-naive"] is False
    assert expected["P9-dso"] is False
    for p in corpus:
        parse_formula(p.text, resolve=False)


def test_predicates_parse():
    assert parse_predicates(PREDICATES)


def test_grid_audit_both_sides():
    for thr, below, above in grid_audit(default_config()):
        assert below and above, thr


def test_grid_audit_flags_one_sided_grid():
    cfg = validate_config(default_config().with_(wallSlitList=(Rat(0), Rat(100))))
    rows = {t: (b, a) for t, b, a in grid_audit(cfg)}
    assert rows["350/100"][1] == []


def test_witness_queries_hold(besw_default):
    tm, lts = besw_default
    preds = parse_predicates(PREDICATES)
    qs = witness_queries()
    assert {(t, s) for t, s, _ in qs} >= {("350/100", "below"), ("350/100", "above"),
                                          ("-240/100", "below"), ("-240/100", "above"),
                                          ("70/100", "below"), ("70/100", "above"),
                                          ("100/100", "below"), ("100/100", "above")}
    for thr, side, text in qs:
        assert check(lts, text, tm.signature, preds).holds, (thr, side)


# -- suite behaviour ----------------------------------------------------------

def test_lifecycle_properties_hold():
    report = run_suite(default_config(), only=["P12", "P13", "P14"], want_trace=False)
    assert [p.id for p in report.properties] == ["P12", "P13", "P14"]
    assert report.all_match


def test_mutation_breaks_trim_property():
    cfg = validate_config(default_config().with_(mutation="trim_in_moveout"))
    report = run_suite(cfg, only=["P2"])
    p2 = report.get("P2")
    assert p2.verdict is False
    assert p2.trace, "expected a counterexample"
    assert not report.all_match


def test_ito_property_skipped_without_phase():
    cfg = validate_config(default_config().with_(phases=frozenset({"operational"})))
    report = run_suite(cfg, only=["P11-ito", "P1"], want_trace=False)
    ito = report.get("P11-ito")
    assert ito.verdict is None and ito.match is None
    assert "ito" in ito.note
    assert report.get("P1").match
    assert report.all_match


def test_report_json_fields():
    report = run_suite(default_config(), only=["P10"], want_trace=False)
    rec = report.properties[0].as_json()
    for key in ("id", "expected", "verdict", "states", "transitions", "equations"):
        assert key in rec
    assert rec["id"] == "P10" and rec["verdict"] is True
