"""Text generator for the desk-scale barrier controller model.

The controller runs a scan cycle.  Every cycle reports the current phase,
process and mode, lets each subsystem (dock, besl, joint, ballast) act once,
closes with `internal_controlEnd` and then accepts at most one command.
Sensor values are free inputs drawn from the configured grids.
"""

from __future__ import annotations

from ..data import Rat
from .config import PHASES, SOURCES, ScenarioConfig, validate_config

PROCESSES = ("FloodDock", "OpenDoor", "MoveOut", "Submerge", "Emerge", "MoveIn",
             "EqualiseLevel", "ReachRestLevel", "CloseDoor")
# closing then opening; the last process hands over to the first again
SEQUENCE = ("FloodDock", "OpenDoor", "MoveOut", "Submerge",
            "Emerge", "MoveIn", "EqualiseLevel", "CloseDoor", "ReachRestLevel")
CLOSING = ("FloodDock", "OpenDoor", "MoveOut", "Submerge")
TILTS = ("level", "tiltNorthLow", "tiltSouthLow")
BANDS = ("low", "mid", "high")
NUM_COMPARTMENTS = 6
REST_PUMPS = 2
CATCH_FASTEN_HEAD = Rat(70)
REST_LEVEL = Rat(-240)
SPRING_K2_SLIT = Rat(350)
EQUALISED_TOLERANCE = Rat(10)


def pid(name: str) -> str:
    return "process" + name


def predecessor(name: str) -> str:
    i = SEQUENCE.index(name)
    return SEQUENCE[i - 1]


# ---------------------------------------------------------------------------
# ballast tables

# compartments 0..2 are on the north side, 3..5 on the south side
_PRIMARY = {
    ("closing", "level"): ((), (2,), (2, 5)),
    ("closing", "tiltNorthLow"): ((0,), (0, 1), (0, 1)),
    ("closing", "tiltSouthLow"): ((3,), (3, 4), (3, 4)),
    ("opening", "level"): ((), (1, 4), (2, 5)),
    ("opening", "tiltNorthLow"): ((0,), (0, 2), (0, 1)),
    ("opening", "tiltSouthLow"): ((3,), (3, 5), (3, 4)),
}


def ballast_row(closure: str, tilt: str, band: str, cfg: ScenarioConfig) -> tuple:
    """(pump vector, valve vector) for one table row after fault handling.

    Pump vector: primary pumps of the compartments, then the rest pumps.
    A compartment with a failed valve cannot be pumped.  A failed primary
    pump is replaced by the rest pump of its side; the uncorrected table
    instead switches on every rest pump.
    """
    wanted = [c for c in _PRIMARY[(closure, tilt)][BANDS.index(band)]][: cfg.pumpBudget]
    pumps = [False] * (NUM_COMPARTMENTS + REST_PUMPS)
    valves = [False] * NUM_COMPARTMENTS
    failed = set(cfg.failedPumps)
    any_failed = False
    for c in wanted:
        if f"valve{c}" in cfg.failedValves:
            continue
        if f"ballast{c}" not in failed:
            pumps[c] = True
            valves[c] = True
            continue
        any_failed = True
        if cfg.ballastTable == "dso":
            continue
        rest = c // 3
        for r in (rest, 1 - rest):
            slot = NUM_COMPARTMENTS + r
            if f"rest{r}" not in failed and not pumps[slot]:
                pumps[slot] = True
                valves[c] = True
                break
    if cfg.ballastTable == "dso" and any_failed:
        for r in range(REST_PUMPS):
            if f"rest{r}" not in failed:
                pumps[NUM_COMPARTMENTS + r] = True
        for c in wanted:
            if f"valve{c}" not in cfg.failedValves:
                valves[c] = True
    return tuple(pumps), tuple(valves)


def ballast_table(cfg: ScenarioConfig) -> dict:
    return {(cl, t, b): ballast_row(cl, t, b, cfg)
            for cl in ("closing", "opening") for t in TILTS for b in BANDS}


# ---------------------------------------------------------------------------
# text helpers

def _bools(xs) -> str:
    return "[" + ", ".join("true" if x else "false" for x in xs) + "]"


def _rats(xs) -> str:
    return ", ".join(str(x) for x in xs)


def _either(conds: list) -> str:
    return "(" + " || ".join(conds) + ")" if len(conds) > 1 else conds[0]


def _chain(cases: list, default: str, indent: str = "  ") -> str:
    """if/else-if chain of (condition, term) pairs ending in `default`."""
    out = []
    for cond, term in cases:
        out.append(f"{indent}({cond}) -> ({term})\n{indent}<> ")
    return "".join(out) + default


NOP = "mode := mode"


def generate_model(cfg: ScenarioConfig) -> str:
    cfg = validate_config(cfg)
    phases = [p for p in PHASES if p in cfg.phases]
    sources = [s for s in SOURCES if s in cfg.commandSources]
    start_phase = "rest" if "rest" in cfg.phases else "operational"
    failed = set(cfg.failedPumps)
    L = []
    add = L.append

    add("% barrier main controller, desk-scale reconstruction (generated)")
    add(f"% failed pumps: {', '.join(sorted(failed)) or 'none'}; "
        f"failed valves: {', '.join(sorted(cfg.failedValves)) or 'none'}; "
        f"pump budget {cfg.pumpBudget}; ballast table {cfg.ballastTable}")
    add("")
    add("sort Phase = struct " + " | ".join(PHASES) + ";")
    add("sort Process = struct " + " | ".join(pid(p) for p in PROCESSES) + ";")
    add("sort ProcessMode = struct active | stopped | finished;")
    add("sort TimerState = struct running | expired;")
    add("sort Timer = struct timer_equalise | timer_flood;")
    add("sort SpringSetting = struct K1 | K2;")
    add("sort Source = struct " + " | ".join(SOURCES) + ";")
    add("sort JackCommand = struct raise | lower | hold;")
    add("sort BeslPosition = struct inDock | moving | outside;")
    add("sort BeslMove = struct moveOut | moveIn;")
    add("sort Tilt = struct " + " | ".join(TILTS) + ";")
    add("sort Band = struct " + " | ".join(BANDS) + ";")
    add(f"sort DockLevel = Rat{{{_rats(cfg.dockLevelList)}}};")
    add(f"sort RiverLevel = Rat{{{_rats(cfg.riverLevelList)}}};")
    add(f"sort WallSlit = Rat{{{_rats(cfg.wallSlitList)}}};")
    add("")
    add(f"const dockLevelList: List(Rat, {len(cfg.dockLevelList)}) = [{_rats(cfg.dockLevelList)}];")
    add(f"const riverLevelList: List(Rat, {len(cfg.riverLevelList)}) = [{_rats(cfg.riverLevelList)}];")
    add(f"const wallSlitList: List(Rat, {len(cfg.wallSlitList)}) = [{_rats(cfg.wallSlitList)}];")
    add("")
    add("act internal_controlStart: Phase # Process # ProcessMode;")
    add("act internal_controlEnd;")
    add("act input_dockDoorOpened: List(List(Bool, 2), 3);")
    add("act input_dockDoorClosed: List(Bool, 2);")
    add("act input_dockGatesOpened: List(Bool, 4);")
    add("act input_dockLevel, internal_riverLevel, input_wallSlit: Rat;")
    add("act input_jointJackZero, input_beslFinePositioned: Bool;")
    add("act input_wallSubmerged, input_wallFloating: Bool;")
    add("act state'': Timer # TimerState;")
    add("act output_dockGatesOpen: List(Bool, 4);")
    add("act output_dockCatchFasten: Bool;")
    add("act output_dockDoorStop;")
    add("act output_dockPumpEnable: Nat(2) # Bool;")
    add("act output_beslSpringSetting: SpringSetting;")
    add("act output_beslMove: BeslMove;")
    add("act input_beslPosition: BeslPosition;")
    add("act output_jointJacks: JackCommand;")
    add("act input_ballastTilt: Tilt;")
    add("act input_ballastLevel: Band;")
    add(f"act internal_ballastPumps: List(Bool, {NUM_COMPARTMENTS + REST_PUMPS});")
    add(f"act output_ballastValves: List(Bool, {NUM_COMPARTMENTS});")
    add("act internal_trimmingActive;")
    add("act command_start: Source # Process;")
    add("act command_stop: Source;")
    add("act command_phase: Source # Phase;")
    add("act command_mccPermission: Bool;")
    add("act das_functionTest;")
    add("")
    add(f"glob phase: Phase = {start_phase};")
    add(f"glob curProcess: Process = {pid('ReachRestLevel')};")
    add("glob mode: ProcessMode = finished;")
    add("glob mccAllowed: Bool = false;")
    add("")

    # -- cycle -------------------------------------------------------------
    add("proc Cycle =")
    add("  read phase as ph . read curProcess as p . read mode as m .")
    add("  internal_controlStart(ph, p, m) .")
    add("  ((ph == operational) -> (")
    add("      sum fp: Bool . input_beslFinePositioned(fp) .")
    add("      Dock(p = p, m = m) . Besl(p = p, m = m) . Joint(p = p, m = m) .")
    add("      Ballast(p = p, m = m) . internal_controlEnd . Commands(m0 = m))")
    if "ito" in cfg.phases and "das" in cfg.commandSources:
        add("   <> (ph == ito) -> (das_functionTest . internal_controlEnd . Commands(m0 = m))")
    add("   <> (internal_controlEnd . Commands(m0 = m)));")
    add("")

    # -- dock --------------------------------------------------------------
    def active(p):
        return f"p == {pid(p)} && m == active"

    pumps_on = " . ".join(
        f"output_dockPumpEnable({i}, {'false' if f'dock{i}' in failed else 'true'})"
        for i in range(3))
    dock_cases = [
        (active("FloodDock"), "Dock_FloodDock"),
        (active("OpenDoor"), "Dock_OpenDoor"),
        (f"p == {pid('OpenDoor')} && m == stopped", "output_dockDoorStop"),
        (active("EqualiseLevel"), "Dock_EqualiseLevel"),
        (active("ReachRestLevel"), "Dock_ReachRestLevel"),
        (f"p == {pid('CloseDoor')}", "Dock_CloseDoor(m = m)"),
    ]
    add("proc Dock(p: Process, m: ProcessMode) =")
    add(_chain(dock_cases, "skip") + ";")
    add("")
    add("proc Finish(done: Bool) = done -> mode := finished <> " + NOP + ";")
    add("")
    add("proc Dock_FloodDock =")
    add("  sum r: RiverLevel . internal_riverLevel(r) .")
    add("  sum d: DockLevel . input_dockLevel(d) .")
    add(f"  Finish(done = d - r <= {EQUALISED_TOLERANCE} && r - d <= {EQUALISED_TOLERANCE});")
    add("")
    add("% finished once limit switches of two different groups report open")
    add("proc Dock_OpenDoor =")
    add("  sum d: List(List(Bool, 2), 3) . input_dockDoorOpened(d) .")
    add("  Finish(done = DoorGroups(g0 = d.0.0 || d.0.1, g1 = d.1.0 || d.1.1, g2 = d.2.0 || d.2.1));")
    add("proc DoorGroups(g0: Bool, g1: Bool, g2: Bool) = " + NOP + ";")
    L.pop()       # helper above is replaced by the inline expression below
    L[-1] = ("  Finish(done = (d.0.0 || d.0.1) && (d.1.0 || d.1.1)"
             " || (d.0.0 || d.0.1) && (d.2.0 || d.2.1)"
             " || (d.1.0 || d.1.1) && (d.2.0 || d.2.1));")
    add("")
    add("proc Dock_EqualiseLevel =")
    add("  sum r: RiverLevel . internal_riverLevel(r) .")
    add("  sum dc: List(Bool, 2) . input_dockDoorClosed(dc) .")
    add("  sum d: DockLevel . input_dockLevel(d) .")
    add("  Dock_EqualiseLevel_Timer(")
    add(f"    equalised = d - r <= {EQUALISED_TOLERANCE} && r - d <= {EQUALISED_TOLERANCE},")
    add(f"    fasten = (dc.0 || dc.1) && r - d < {CATCH_FASTEN_HEAD});")
    add("proc Dock_EqualiseLevel_Timer(equalised: Bool, fasten: Bool) =")
    add("  sum ts: TimerState . state''(timer_equalise, ts) .")
    add("  output_dockCatchFasten(fasten) .")
    add(f"  {pumps_on} .")
    add("  Finish(done = ts == expired || equalised);")
    add("")
    add("proc Dock_ReachRestLevel =")
    add("  sum r: RiverLevel . internal_riverLevel(r) .")
    add("  sum dc: List(Bool, 2) . input_dockDoorClosed(dc) .")
    add("  Dock_ReachRestLevel_Gates(r = r, closed = dc.0 || dc.1);")
    add("proc Dock_ReachRestLevel_Gates(r: Rat, closed: Bool) =")
    add("  sum go: List(Bool, 4) . input_dockGatesOpened(go) .")
    add("  sum d: DockLevel . input_dockLevel(d) .")
    add(f"  Dock_ReachRestLevel_Jacks(go = go, low = d <= {REST_LEVEL},")
    add(f"    fasten = closed && r - d < {CATCH_FASTEN_HEAD});")
    add("proc Dock_ReachRestLevel_Jacks(go: List(Bool, 4), low: Bool, fasten: Bool) =")
    add("  sum jz: Bool . input_jointJackZero(jz) .")
    add("  output_dockGatesOpen([go.0 || low && jz, go.1 || low && jz, "
        "go.2 || low && jz, go.3 || low && jz]) .")
    add("  output_dockCatchFasten(fasten) .")
    add(f"  {pumps_on} .")
    add("  Finish(done = low);")
    add("")
    add("proc Dock_CloseDoor(m: ProcessMode) =")
    add("  sum r: RiverLevel . internal_riverLevel(r) .")
    add("  sum dc: List(Bool, 2) . input_dockDoorClosed(dc) .")
    add("  Dock_CloseDoor_Level(r = r, dc = dc, m = m);")
    add("proc Dock_CloseDoor_Level(r: Rat, dc: List(Bool, 2), m: ProcessMode) =")
    add("  sum d: DockLevel . input_dockLevel(d) .")
    add(f"  output_dockCatchFasten((dc.0 || dc.1) && r - d < {CATCH_FASTEN_HEAD}) .")
    add("  Finish(done = m == active && dc.0 && dc.1);")
    add("")

    # -- besl --------------------------------------------------------------
    besl_cases = [
        (active("MoveOut"), "output_beslMove(moveOut) . sum pos: BeslPosition . "
                            "input_beslPosition(pos) . Finish(done = pos == outside)"),
        (active("MoveIn"), "output_beslMove(moveIn) . sum pos: BeslPosition . "
                           "input_beslPosition(pos) . Finish(done = pos == inDock)"),
        (active("Submerge"), "Besl_SpringSetting"),
    ]
    add("proc Besl(p: Process, m: ProcessMode) =")
    add(_chain(besl_cases, "skip") + ";")
    add("")
    add("proc Besl_SpringSetting =")
    add("  sum w: WallSlit . input_wallSlit(w) .")
    add(f"  ((w < {SPRING_K2_SLIT}) -> output_beslSpringSetting(K2)"
        " <> output_beslSpringSetting(K1));")
    add("")

    # -- joint ---------------------------------------------------------------
    add("proc Joint(p: Process, m: ProcessMode) =")
    add(_chain([
        (f"m == active && (p == {pid('MoveOut')} || p == {pid('MoveIn')})", "output_jointJacks(raise)"),
        (active("ReachRestLevel"), "output_jointJacks(lower)"),
    ], "output_jointJacks(hold)") + ";")
    add("")

    # -- ballast -------------------------------------------------------------
    closing = _either([f"p == {pid(x)}" for x in CLOSING])
    trim_guard = "t != level"
    if cfg.mutation != "trim_in_moveout":
        trim_guard += f" && !(p == {pid('MoveOut')} && m == active)"
    add("proc Ballast(p: Process, m: ProcessMode) =")
    add(_chain([
        (active("Submerge"), "sum b: Bool . input_wallSubmerged(b) . Finish(done = b)"),
        (active("Emerge"), "sum b: Bool . input_wallFloating(b) . Finish(done = b)"),
    ], NOP) + " .")
    add("  sum t: Tilt . input_ballastTilt(t) .")
    add(f"  (({trim_guard}) -> internal_trimmingActive <> {NOP}) .")
    add(f"  sum b: Band . input_ballastLevel(b) . Ballast_Table(closing = {closing}, t = t, b = b);")
    add("")
    table = ballast_table(cfg)
    rows = []
    for (cl, t, b), (pumps, valves) in table.items():
        cond = ("closing" if cl == "closing" else "!closing") + f" && t == {t} && b == {b}"
        rows.append((cond, f"internal_ballastPumps({_bools(pumps)}) . "
                           f"output_ballastValves({_bools(valves)})"))
    add("proc Ballast_Table(closing: Bool, t: Tilt, b: Band) =")
    last_cond, last_term = rows.pop()
    add(_chain(rows, f"({last_term})") + ";")
    add("")

    # -- commands --------------------------------------------------------------
    add("proc Commands(m0: ProcessMode) =")
    add("  read phase as ph . read curProcess as p . read mode as m . read mccAllowed as ma .")
    alts = []
    normal = [s for s in sources if s in ("bos", "hi", "wsp")]
    for src in sources:
        if src == "das":
            continue
        gate = "ma" if src == "mcc" else "true"
        for q in SEQUENCE:
            allowed = [f"m == finished && p == {pid(predecessor(q))}",
                       f"m == stopped && p == {pid(q)}"]
            if q == "CloseDoor":
                allowed.append(f"m == stopped && p == {pid('OpenDoor')}")
            cond = (f"{gate} && ph == operational && m0 != active && "
                    + _either(["(" + a + ")" for a in allowed]))
            alts.append(f"({cond}) -> (command_start({src}, {pid(q)}) . "
                        f"curProcess := {pid(q)} . mode := active . Cycle)")
        alts.append(f"({gate} && ph == operational && m == active) -> "
                    f"(command_stop({src}) . mode := stopped . Cycle)")
        if src in normal:
            for target in phases:
                alts.append(f"(ph != {target} && m0 != active && m != active) -> "
                            f"(command_phase({src}, {target}) . phase := {target} . Cycle)")
    if "hi" in sources and "mcc" in sources:
        alts.append("command_mccPermission(!ma) . mccAllowed := !ma . Cycle")
    alts.append("Cycle")
    add("  (   " + "\n    + ".join(alts) + ");")
    add("")
    add("init Cycle;")
    return "\n".join(L) + "\n"
