"""Acceptance run: one PASS/FAIL line per criterion.

The lines are printed with capture disabled so they show up in a plain
`pytest -v` run as well as with `-s`.  Criterion 6 is the slow one (a few
minutes on one core); run `pytest -m "not slow"` to leave this file out.
"""

import random
import re
import time

import pytest

from conftest import fixture_text, load_fixture
from oracle_helpers import variable_mismatches
from surgecheck.besw.config import default_config, single_failure_configs
from surgecheck.besw.corpus import PREDICATES, grid_audit, property_corpus, witness_queries
from surgecheck.besw.suite import build_lts, run_suite, variant_config
from surgecheck.checker import check, replay
from surgecheck.lts import explore, export_lts
from surgecheck.mucalc import alternation_depth, parse_formula, parse_predicates, to_core
from surgecheck.oracles import (
    random_formula, random_lts, random_star_formula, regular_denotation, regular_holds,
)

pytestmark = pytest.mark.slow

EXPECTED = {"P1": True, "P2": True, "P3": True, "P4": True, "P5": True, "P6": True,
            "P6-naive": False, "P7": False, "P8": True, "P9": True, "P9-dso": False,
            "P10": True}
SWEEP_IDS = ["P1", "P2", "P3", "P4", "P5", "P6", "P8", "P9", "P10"]


@pytest.fixture
def report_line(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    return emit


@pytest.fixture(scope="module")
def default_suite():
    t0 = time.perf_counter()
    report = run_suite(default_config())
    return report, time.perf_counter() - t0


def test_1_traffic_light(report_line):
    t0 = time.perf_counter()
    tm = load_fixture("traffic_light.sbm")
    lts = explore(tm)
    safety, liveness = fixture_text("safety.mcf"), fixture_text("liveness.mcf")
    s_ok = check(lts, safety, tm.signature).holds
    l_ok = check(lts, liveness, tm.signature).holds
    mtm = load_fixture("traffic_light_mutant.sbm")
    mlts = explore(mtm)
    res = check(mlts, safety, mtm.signature)
    trace = res.trace_text()
    word = " ".join(trace)
    replayable = bool(trace) and bool(replay(mlts, res.counterexample)[-1])
    shaped = re.search(r"set_red( (?!set_green)\S+)* set_red$", word) is not None
    secs = time.perf_counter() - t0
    ok = ((lts.num_states, lts.num_transitions) == (4, 6) and s_ok and l_ok
          and not res.holds and replayable and shaped and secs < 1.0)
    report_line(1, ok, f"{lts.num_states} states/{lts.num_transitions} transitions, "
                       f"safety={s_ok} liveness={l_ok}, mutant trace [{word}], {secs:.3f}s")
    assert ok


def test_2_verdict_reproduction(default_suite, report_line):
    report, secs = default_suite
    got = {p.id: p.verdict for p in report.properties}
    wrong = sorted(k for k, v in EXPECTED.items() if got.get(k) is not v)
    extra_bad = [p.id for p in report.properties if p.match is False]
    ok = not wrong and not extra_bad and secs < 600
    report_line(2, ok, f"{len(report.properties)} properties on {report.states} states, "
                       f"mismatches={wrong + extra_bad or 'none'}, {secs:.1f}s")
    assert ok


def test_3_oracle_equivalence(report_line):
    rng = random.Random(20240601)
    done = alternating = bad = 0
    t0 = time.perf_counter()
    while done < 1000:
        lts = random_lts(rng, 50)
        core = to_core(random_formula(rng, 6), None, lts.labels)
        ad = alternation_depth(core)
        if ad > 2:
            continue
        alternating += ad == 2
        bad += variable_mismatches(lts, core)
        done += 1
    ok = bad == 0
    report_line(3, ok, f"{done} instances ({alternating} with alternation 2), "
                       f"{bad} variable mismatches, {time.perf_counter() - t0:.1f}s")
    assert ok


def test_4_regular_expansion(default_suite, report_line):
    report, _ = default_suite
    cfg = default_config()
    preds = parse_predicates(PREDICATES)
    models = {}
    corpus_bad = []
    for prop in property_corpus(cfg.pumpBudget):
        verdict = report.get(prop.id).verdict
        if verdict is None:
            continue
        if prop.variant not in models:
            models[prop.variant] = build_lts(variant_config(cfg, prop.variant))
        tm, lts = models[prop.variant]
        f = parse_formula(prop.text, tm.signature, preds)
        if regular_holds(lts, f, tm.signature) != verdict:
            corpus_bad.append(prop.id)
    rng = random.Random(4242)
    random_bad = 0
    for _ in range(200):
        lts = random_lts(rng, 20)
        f = random_star_formula(rng, 4)
        core = to_core(f, None, lts.labels)
        expanded = check(lts, core, all_states=True, want_trace=False).satisfying
        if expanded != regular_denotation(lts, f):
            random_bad += 1
    ok = not corpus_bad and random_bad == 0
    report_line(4, ok, f"corpus disagreements={corpus_bad or 'none'}, "
                       f"random star formulas 200 with {random_bad} disagreements")
    assert ok


def test_5_determinism(report_line):
    tm = load_fixture("traffic_light.sbm")
    same_tl = export_lts(explore(tm, workers=1)) == export_lts(explore(tm, workers=8))
    _, one = build_lts(default_config(), workers=1)
    _, eight = build_lts(default_config(), workers=8)
    same_besw = export_lts(one) == export_lts(eight)
    ok = same_tl and same_besw
    report_line(5, ok, f"traffic light identical={same_tl}, "
                       f"default model identical={same_besw} ({one.num_states} states)")
    assert ok


def test_6_fault_sweep(report_line):
    t0 = time.perf_counter()
    changed = []
    configs = single_failure_configs()
    for name, cfg in configs:
        rep = run_suite(cfg, only=SWEEP_IDS, want_trace=False)
        for p in rep.properties:
            if p.verdict is not EXPECTED[p.id]:
                changed.append(f"{name}:{p.id}")
    secs = time.perf_counter() - t0
    ok = not changed and secs < 1800
    report_line(6, ok, f"{len(configs)} single-failure configs, "
                       f"changed verdicts={changed or 'none'}, {secs:.1f}s")
    assert ok


def test_7_thresholds(report_line):
    cfg = default_config()
    one_sided = [t for t, below, above in grid_audit(cfg) if not (below and above)]
    tm, lts = build_lts(cfg)
    preds = parse_predicates(PREDICATES)
    vacuous = [f"{thr} {side}" for thr, side, text in witness_queries()
               if not check(lts, text, tm.signature, preds, want_trace=False).holds]
    ok = not one_sided and not vacuous
    report_line(7, ok, f"one-sided thresholds={one_sided or 'none'}, "
                       f"failed witnesses={vacuous or 'none'}")
    assert ok
