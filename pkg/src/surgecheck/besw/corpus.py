"""Property corpus for the barrier controller, with expected verdicts."""

from __future__ import annotations

from dataclasses import dataclass

from .model import NUM_COMPARTMENTS, REST_PUMPS

PREDICATES = """\
% levels count as equalised within 10 cm
pred dockLevelEqualised(a: Rat, b: Rat) = a - b <= 10/100 && b - a <= 10/100;
"""


@dataclass(frozen=True)
class Property:
    id: str
    text: str
    expected: bool
    description: str
    requires: frozenset = frozenset()   # config features, e.g. {"ito"}
    variant: str = ""                   # "" = the scenario itself, "dso" = uncorrected table


P1 = """\
[ true*.
  internal_controlStart(operational, processOpenDoor, active).
  (!internal_controlEnd)*
]
(forall doorOpenedSensors: List(List(Bool)). val(#doorOpenedSensors == 3 &&
     (forall i: Nat. i < 3 => #(doorOpenedSensors.i) == 2)) =>
  [
    input_dockDoorOpened(doorOpenedSensors) .
    (!internal_controlEnd)* .
    internal_controlEnd .
    (!internal_controlEnd)*
  ]
  (forall processMode: ProcessMode.
    [internal_controlStart(operational, processOpenDoor, processMode)]
    val(
      (processMode == finished)
      ==
      (exists i,j,i',j': Nat. (i < 3 && j < 2 && i' < 3 && j' < 2 && i != i' && doorOpenedSensors.i.j && doorOpenedSensors.i'.j'))
) ) )
"""

P2 = """\
[
  true* .
  internal_controlStart(operational, processMoveOut, active) .
  (!internal_controlEnd)* .
  internal_trimmingActive
]
false
"""

P3 = """\
[
  true* .
  internal_controlStart(operational, processSubmerge, active) .
  (!internal_controlEnd)*
]
(forall wallSlitIndex: Nat. val(wallSlitIndex < #wallSlitList) =>
  [
    input_wallSlit(wallSlitList.wallSlitIndex) .
    (!internal_controlEnd)*
  ]
  (forall springSetting: SpringSetting.
    [output_beslSpringSetting(springSetting)]
    val(wallSlitList.wallSlitIndex < 350/100 => (springSetting == K2))
) )
"""

P4 = """\
[ true* .
  internal_controlStart(operational, processReachRestLevel, active) .
  (!internal_controlEnd)*
]
(forall gatesOpened: List(Bool). val(#gatesOpened == 4) =>
  [
    input_dockGatesOpened(gatesOpened) .
    (!internal_controlEnd)*
  ]
  (forall dockLevelIndex: Nat. val(dockLevelIndex < #dockLevelList) =>
    [
      input_dockLevel(dockLevelList.dockLevelIndex) .
      (!internal_controlEnd)*
    ]
    (forall jackZero: Bool.
      [
        input_jointJackZero(jackZero) .
        (!internal_controlEnd)*
      ]
      (forall gatesOpen: List(Bool). val(#gatesOpen == 4) =>
        [output_dockGatesOpen(gatesOpen)]
        val(dockLevelList.dockLevelIndex <= -240/100 => (forall g: Nat. g < 4
            => (jackZero && !(gatesOpened.g) => gatesOpen.g)
) ) ) ) ) )
"""

P5 = """\
[
  true* .
  internal_controlStart(operational, processEqualiseLevel, active) .
  (!internal_controlEnd)*
]
(forall riverLevelIndex: Nat. val(riverLevelIndex < #riverLevelList) =>
  [
    internal_riverLevel(riverLevelList.riverLevelIndex) .
    (!internal_controlEnd)*
  ]
  (forall dockLevelIndex: Nat. val(dockLevelIndex < #dockLevelList) =>
    [
      input_dockLevel(dockLevelList.dockLevelIndex) .
      (!internal_controlEnd)*
    ]
    (forall stateTimerEqualiseLevel: TimerState.
      [
        state''(timer_equalise, stateTimerEqualiseLevel) .
        (!internal_controlEnd)* .
        internal_controlEnd .
        (!internal_controlEnd)*
      ]
      (forall processMode: ProcessMode.
        [internal_controlStart(operational, processEqualiseLevel, processMode)]
        val(
          (processMode == finished)
          ==
          (stateTimerEqualiseLevel == expired || dockLevelEqualised(dockLevelList.dockLevelIndex, riverLevelList.riverLevelIndex))
) ) ) ) )
"""

_CATCH = """\
[true*]
(forall process: Process, processMode: ProcessMode.
  [
    internal_controlStart(operational, process, processMode) .
    (!internal_controlEnd)*
  ]
  (forall riverLevelIndex: Nat. val(riverLevelIndex < #riverLevelList) =>
    [
      internal_riverLevel(riverLevelList.riverLevelIndex) .
      (!internal_controlEnd)*
    ]
    (forall dc: List(Bool). val(#dc == 2) =>
      [
        input_dockDoorClosed(dc) .
        (!internal_controlEnd)*
      ]
      (forall dockLevelIndex: Nat. val(dockLevelIndex < #dockLevelList) =>
        [
          input_dockLevel(dockLevelList.dockLevelIndex) .
          (!internal_controlEnd)*
        ]
        (forall catchFasten: Bool.
          [output_dockCatchFasten(catchFasten)]
          val(
            (
              process == processEqualiseLevel ||
              process == processReachRestLevel ||
              (process == processCloseDoor && processMode == finished)
            )
            =>
            (
              {door}(riverLevelList.riverLevelIndex - dockLevelList.dockLevelIndex < 70/100)
              =>
              catchFasten
            )
            &&
            (
              (riverLevelList.riverLevelIndex - dockLevelList.dockLevelIndex > 100/100)
              =>
              !catchFasten
) ) ) ) ) ) )
"""

P6 = _CATCH.replace("{door}", "(dc.0 || dc.1)\n              &&\n              ")
P6_NAIVE = _CATCH.replace("{door}", "")

P7 = """\
[true*]
(forall process: Process, processMode: ProcessMode.
  [
    internal_controlStart(operational, process, processMode) .
    (!internal_controlEnd)* .
    input_beslFinePositioned(false) .
    (!internal_controlEnd)*
  ]
  (forall p: Nat. val(p < 3) =>
    [output_dockPumpEnable(p, true)] false
  )
)
"""

P8 = """\
% while a process is active no other process becomes active
[true*]
(forall p, q: Process. val(p != q) =>
  [
    internal_controlStart(_, p, active) .
    (!(internal_controlStart(_, p, finished) || internal_controlStart(_, p, stopped)))* .
    internal_controlStart(_, q, active)
  ] false
)
"""


def budget_formula(budget: int, slots: int = NUM_COMPARTMENTS + REST_PUMPS) -> str:
    """No pump vector switches on more than `budget` pumps."""
    idx = [f"i{k}" for k in range(budget + 1)]
    bounds = " && ".join(f"{i} < #pumps" for i in idx)
    order = " && ".join(f"{a} < {b}" for a, b in zip(idx, idx[1:]))
    on = " && ".join(f"pumps.{i}" for i in idx)
    guard = " && ".join(x for x in (bounds, order, on) if x)
    return (f"% at most {budget} of the {slots} ballast pumps run at once\n"
            "[true*]\n"
            "(forall pumps: List(Bool).\n"
            "  [internal_ballastPumps(pumps)]\n"
            f"  val(!(exists {', '.join(idx)}: Nat. {guard}))\n"
            ")\n")


P10 = """\
% every reachable state has a successor
[true*]<true>true
"""

P11_ITO = """\
% the test mode can be entered
<true*.internal_controlStart(ito, _, _)>true
"""

P12 = """\
% every cycle start is closed by an end before the next start
[true*.internal_controlStart(_, _, _).(!internal_controlEnd)*.internal_controlStart(_, _, _)]false
"""

P13 = """\
% a finished process is never reported stopped next, and a stopped one never finished
[true*]
(forall p: Process.
  [internal_controlStart(_, p, finished).(!internal_controlStart(_, p, _))*.internal_controlStart(_, p, stopped)] false
  &&
  [internal_controlStart(_, p, stopped).(!internal_controlStart(_, p, _))*.internal_controlStart(_, p, finished)] false
)
"""

P14 = """\
% the wall only moves out after the door opened during this closure
[true*.
  internal_controlStart(_, processFloodDock, active).
  (!internal_controlStart(_, processOpenDoor, finished))*.
  internal_controlStart(_, processMoveOut, active)
] false
"""


def property_corpus(budget: int = 2) -> list:
    return [
        Property("P1", P1, True, "OpenDoor finishes iff two switch groups report open"),
        Property("P2", P2, True, "no trimming while MoveOut is active"),
        Property("P3", P3, True, "Submerge selects spring K2 below 350/100 wall slit"),
        Property("P4", P4, True, "ReachRestLevel opens unopened gates when low and jacks at zero"),
        Property("P5", P5, True, "EqualiseLevel finishes iff timer expired or levels equalised"),
        Property("P6", P6, True, "catch fastening with door-closed condition"),
        Property("P6-naive", P6_NAIVE, False, "catch fastening without door-closed condition"),
        Property("P7", P7, False, "no dock pumps when wall not fine positioned (deprecated)"),
        Property("P8", P8, True, "one active process at a time"),
        Property("P9", budget_formula(budget), True, "pump budget respected"),
        Property("P9-dso", budget_formula(budget), False,
                 "pump budget with the uncorrected table and a failed pump", variant="dso"),
        Property("P10", P10, True, "deadlock freedom"),
        Property("P11-ito", P11_ITO, True, "test mode reachable", requires=frozenset({"ito"})),
        Property("P12", P12, True, "scan cycle bracketing"),
        Property("P13", P13, True, "process mode lifecycle"),
        Property("P14", P14, True, "MoveOut only after OpenDoor finished"),
    ]


def witness_queries() -> list:
    """Diamond formulas showing both sides of every threshold are exercised.

    Each entry is (threshold, side, formula text); all must hold on the
    default scenario.
    """
    within = "(!internal_controlEnd)*"
    start = "true*.internal_controlStart(operational, {p}, active)." + within
    out = []
    # wall slit against 350/100
    for side, slit, spring in (("below", "340/100", "K2"), ("above", "500/100", "K1"),
                               ("equal", "350/100", "K1")):
        out.append(("350/100", side,
                    f"<{start.format(p='processSubmerge')}.input_wallSlit({slit}).{within}"
                    f".output_beslSpringSetting({spring})>true"))
    # dock level against -240/100: the gates open only on the low side
    for side, level, gate in (("below", "-300/100", "true"), ("above", "-200/100", "false")):
        out.append(("-240/100", side,
                    f"<{start.format(p='processReachRestLevel')}"
                    f".input_dockGatesOpened([false, false, false, false]).{within}"
                    f".input_dockLevel({level}).{within}.input_jointJackZero(true).{within}"
                    f".output_dockGatesOpen([{gate}, {gate}, {gate}, {gate}])>true"))
    # positive head (river minus dock) against 70/100 and 100/100; `_` only
    # asks that the branch is reached, the band in between is left free
    for thr, side, river, dock, fasten in (("70/100", "below", "0/100", "0/100", "true"),
                                           ("70/100", "above", "100/100", "0/100", "_"),
                                           ("100/100", "below", "100/100", "0/100", "_"),
                                           ("100/100", "above", "0/100", "-170/100", "false")):
        out.append((thr, side,
                    f"<{start.format(p='processEqualiseLevel')}.internal_riverLevel({river}).{within}"
                    f".input_dockDoorClosed([true, true]).{within}.input_dockLevel({dock}).{within}"
                    f".output_dockCatchFasten({fasten})>true"))
    return out


# comparison constants used by the corpus, and which grid values they meet
THRESHOLDS = (
    ("-240/100", "dock"),
    ("350/100", "wallSlit"),
    ("70/100", "head"),
    ("100/100", "head"),
)


def _grid_values(cfg, kind: str) -> list:
    if kind == "dock":
        return [r.num for r in cfg.dockLevelList]
    if kind == "wallSlit":
        return [r.num for r in cfg.wallSlitList]
    return sorted({r.num - d.num for r in cfg.riverLevelList for d in cfg.dockLevelList})


def grid_audit(cfg) -> list:
    """(threshold, values below, values above) for every corpus constant."""
    out = []
    for text, kind in THRESHOLDS:
        n, d = text.split("/")
        limit = int(n) * (100 // int(d))
        vals = _grid_values(cfg, kind)
        out.append((text, [v for v in vals if v < limit], [v for v in vals if v > limit]))
    return out
