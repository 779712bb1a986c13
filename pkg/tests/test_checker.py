import random

import pytest

from conftest import fixture_text
from oracle_helpers import variable_mismatches
from surgecheck.besw.corpus import P2, P12, P14
from surgecheck.checker import (
    CapacityExceeded, NotSafetyFragment, check, check_naive, extract_counterexample,
    generate_bes, replay, solve_bes,
)
from surgecheck.lts import Lts, TransitionLabel, import_lts
from surgecheck.mucalc import parse_formula, to_core
from surgecheck.oracles import random_formula, random_lts

SAFETY = fixture_text("safety.mcf")
LIVENESS = fixture_text("liveness.mcf")


def core_of(text, lts, sig=None):
    return to_core(parse_formula(text, sig, resolve=sig is not None), sig, lts.labels)


class TestNaive:
    def test_safety_everywhere(self, traffic):
        tm, lts = traffic
        assert check_naive(lts, core_of(SAFETY, lts, tm.signature)) == frozenset(range(4))

    def test_no_deadlocks(self, traffic):
        _, lts = traffic
        assert check_naive(lts, core_of("<true>true", lts)) == frozenset(range(4))

    def test_box_over_nothing(self):
        lts = Lts(0, 1, [], [])
        assert check_naive(lts, core_of("[true]false", lts)) == {0}


class TestBes:
    def test_safety_golden(self, traffic):
        tm, lts = traffic
        bes = generate_bes(lts, core_of(SAFETY, lts, tm.signature), all_states=True)
        assert len(bes) == 32 and bes.num_blocks == 2

    def test_alternation_two_blocks(self):
        lts = import_lts('lts 0 2 2\n0 "a" 1\n1 "b" 0\n')
        res = check(lts, "nu X. mu Y. (<a>Y || <b>X)")
        assert res.holds and res.stats["blocks"] == 2

    def test_trivial_fixpoints(self):
        lts = import_lts('lts 0 1 1\n0 "a" 0\n')
        assert check(lts, "nu X. [a]X").holds
        assert not check(lts, "mu X. [a]X").holds
        assert check(lts, "nu X. <a>X").holds
        assert not check(lts, "mu X. <a>X").holds

    def test_bes_solution_raw(self):
        lts = import_lts('lts 0 1 1\n0 "a" 0\n')
        bes = generate_bes(lts, core_of("nu X. <a>X", lts))
        assert solve_bes(bes)[bes.root] is True
        # a least fixpoint of a diamond is false before any equation is needed
        bes = generate_bes(lts, core_of("mu X. <a>X", lts))
        assert bes.root is None and bes.root_value is False

    def test_capacity(self, traffic):
        tm, lts = traffic
        with pytest.raises(CapacityExceeded):
            generate_bes(lts, core_of(SAFETY, lts, tm.signature), cap=5)

    def test_per_variable_agreement_fixture(self, traffic):
        tm, lts = traffic
        for text in (SAFETY, LIVENESS, "nu X. mu Y. (<red_button>Y || <green_button>X)"):
            assert variable_mismatches(lts, core_of(text, lts, tm.signature)) == 0

    def test_random_instances(self):
        rng = random.Random(7)
        for _ in range(150):
            lts = random_lts(rng, 30)
            assert variable_mismatches(lts, to_core(random_formula(rng, 6), None, lts.labels)) == 0


class TestCheck:
    def test_traffic_light(self, traffic):
        tm, lts = traffic
        assert check(lts, SAFETY, tm.signature).holds
        assert check(lts, LIVENESS, tm.signature).holds

    def test_mutant_trace(self, traffic_mutant):
        tm, lts = traffic_mutant
        res = check(lts, SAFETY, tm.signature)
        assert not res.holds
        names = res.trace_text()
        assert names == ["red_button", "set_red", "red_button", "set_red"]
        assert replay(lts, res.counterexample)[-1]

    def test_trace_violates_formula(self, traffic_mutant):
        tm, lts = traffic_mutant
        names = check(lts, SAFETY, tm.signature).trace_text()
        reds = [i for i, n in enumerate(names) if n == "set_red"]
        assert len(reds) >= 2 and "set_green" not in names[reds[-2]:reds[-1]]
        assert names[-1] == "set_red"

    def test_shortest_by_brute_force(self, traffic_mutant):
        tm, lts = traffic_mutant
        # BFS over (state, automaton phase) for the two-set_red pattern
        from collections import deque
        start = (lts.initial, 0)
        dist = {start: 0}
        q = deque([start])
        best = None
        while q:
            s, ph = q.popleft()
            for a, t in lts.out[s]:
                name = lts.labels[a].name
                nph = ph
                if ph == 0 and name == "set_red":
                    nph = 1
                elif ph == 1 and name == "set_green":
                    nph = 0
                elif ph == 1 and name == "set_red":
                    best = dist[(s, ph)] + 1
                    break
                if (t, nph) not in dist:
                    dist[(t, nph)] = dist[(s, ph)] + 1
                    q.append((t, nph))
            if best:
                break
        res = check(lts, SAFETY, tm.signature)
        assert len(res.counterexample) == best == 4

    def test_liveness_has_no_trace(self, traffic_mutant):
        _, lts = traffic_mutant
        res = check(lts, "<true*.set_green>true && [true*]<true*.set_green>true")
        if not res.holds:
            assert res.counterexample is None and res.note
        core = core_of("[true*]<set_green>true", lts)
        from surgecheck.checker import generate_bes as gb
        bes = gb(lts, core)
        with pytest.raises(NotSafetyFragment):
            extract_counterexample(lts, core, bes, solve_bes(bes))

    def test_violation_at_initial_state(self, traffic):
        _, lts = traffic
        res = check(lts, "val(1 > 2)")
        assert not res.holds and res.counterexample == []

    def test_stats(self, traffic):
        tm, lts = traffic
        st = check(lts, SAFETY, tm.signature).stats
        for key in ("equations", "blocks", "components", "iterations", "seconds"):
            assert key in st

    def test_satisfying_set(self, traffic):
        _, lts = traffic
        res = check(lts, "<set_red>true", all_states=True)
        assert res.satisfying == {s for s in range(4) if any(
            lts.labels[a].name == "set_red" for a, _ in lts.out[s])}

    @pytest.mark.parametrize("reg", [P2, P12, P14])
    def test_duality_on_controller(self, besw_default, reg):
        tm, lts = besw_default
        body = reg.split("[", 1)[1].rsplit("]", 1)[0]
        box = check(lts, f"[{body}]false", tm.signature).holds
        dia = check(lts, f"<{body}>true", tm.signature).holds
        assert box == (not dia)

    def test_duality_traffic(self, traffic_mutant):
        tm, lts = traffic_mutant
        for reg in ("true*.set_red.(!set_green)*.set_red", "set_red", "true*.green_button"):
            assert check(lts, f"[{reg}]false").holds == (not check(lts, f"<{reg}>true").holds)

    def test_replay_rejects_bogus_trace(self, traffic):
        _, lts = traffic
        assert replay(lts, [TransitionLabel("set_red")])[-1] == frozenset()
