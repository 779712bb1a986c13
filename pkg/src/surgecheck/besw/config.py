"""Scenario configuration: level grids, injected faults and controller options."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

from ..data import Rat, SurgeError

DOCK_PUMPS = tuple(f"dock{i}" for i in range(3))
BALLAST_PUMPS = tuple(f"ballast{i}" for i in range(6)) + ("rest0", "rest1")
VALVES = tuple(f"valve{i}" for i in range(6))
PHASES = ("operational", "rest", "ito")
SOURCES = ("bos", "hi", "wsp", "das", "mcc")
TABLES = ("corrected", "dso")
MUTATIONS = ("none", "trim_in_moveout")

# default grids straddle every threshold the corpus compares against
DEFAULT_LEVELS = tuple(Rat(n) for n in (-300, -240, -200, -170, 0, 100))
DEFAULT_WALL_SLIT = tuple(Rat(n) for n in (0, 100, 340, 350, 500))

FAILURE_CAPS = {"dock": 1, "ballast": 2, "valve": 1}


class InvalidConfig(SurgeError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    dockLevelList: tuple = DEFAULT_LEVELS
    riverLevelList: tuple = DEFAULT_LEVELS
    wallSlitList: tuple = DEFAULT_WALL_SLIT
    failedPumps: frozenset = frozenset()
    failedValves: frozenset = frozenset()
    pumpBudget: int = 2
    phases: frozenset = frozenset(PHASES)
    commandSources: frozenset = frozenset(SOURCES)
    ballastTable: str = "corrected"
    mutation: str = "none"
    failureCaps: dict = field(default_factory=lambda: dict(FAILURE_CAPS), compare=False)

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def failed(self, kind: str) -> list:
        pool = {"dock": DOCK_PUMPS, "ballast": BALLAST_PUMPS, "valve": VALVES}[kind]
        have = self.failedValves if kind == "valve" else self.failedPumps
        return [p for p in pool if p in have]


def validate_config(c: ScenarioConfig) -> ScenarioConfig:
    for name in ("dockLevelList", "riverLevelList", "wallSlitList"):
        grid = getattr(c, name)
        if not grid:
            raise InvalidConfig(f"{name} is empty")
        if any(not isinstance(v, Rat) for v in grid):
            raise InvalidConfig(f"{name} must hold rationals such as -240/100")
        if list(grid) != sorted(set(grid)):
            raise InvalidConfig(f"{name} must be sorted ascending without repeats")
    unknown = set(c.failedPumps) - set(DOCK_PUMPS) - set(BALLAST_PUMPS)
    if unknown:
        raise InvalidConfig(f"unknown pump ids: {', '.join(sorted(unknown))}")
    unknown = set(c.failedValves) - set(VALVES)
    if unknown:
        raise InvalidConfig(f"unknown valve ids: {', '.join(sorted(unknown))}")
    for kind, cap in c.failureCaps.items():
        n = len(c.failed(kind))
        if n > cap:
            raise InvalidConfig(f"{n} failed {kind} {'valves' if kind == 'valve' else 'pumps'}; "
                                f"at most {cap} allowed")
    if not isinstance(c.pumpBudget, int) or c.pumpBudget < 1:
        raise InvalidConfig("pumpBudget must be a positive integer")
    if c.pumpBudget > len(BALLAST_PUMPS):
        raise InvalidConfig(f"pumpBudget above the number of ballast pumps ({len(BALLAST_PUMPS)})")
    if not set(c.phases) <= set(PHASES):
        raise InvalidConfig(f"unknown phases: {', '.join(sorted(set(c.phases) - set(PHASES)))}")
    if "operational" not in c.phases:
        raise InvalidConfig("the operational phase cannot be disabled")
    if not set(c.commandSources) <= set(SOURCES):
        raise InvalidConfig("unknown command sources: "
                            + ", ".join(sorted(set(c.commandSources) - set(SOURCES))))
    if not set(c.commandSources) & {"bos", "hi", "wsp"}:
        raise InvalidConfig("at least one of bos, hi, wsp must issue commands")
    if c.ballastTable not in TABLES:
        raise InvalidConfig(f"ballastTable must be one of {', '.join(TABLES)}")
    if c.mutation not in MUTATIONS:
        raise InvalidConfig(f"mutation must be one of {', '.join(MUTATIONS)}")
    return replace(c, failedPumps=frozenset(c.failedPumps), failedValves=frozenset(c.failedValves),
                   phases=frozenset(c.phases), commandSources=frozenset(c.commandSources),
                   dockLevelList=tuple(c.dockLevelList), riverLevelList=tuple(c.riverLevelList),
                   wallSlitList=tuple(c.wallSlitList))


def default_config() -> ScenarioConfig:
    return validate_config(ScenarioConfig())


def single_failure_configs(base: ScenarioConfig = None) -> list:
    """Every admissible config with exactly one failed pump or valve."""
    base = base or default_config()
    out = []
    for p in DOCK_PUMPS + BALLAST_PUMPS:
        out.append((p, validate_config(base.with_(failedPumps=frozenset({p})))))
    for v in VALVES:
        out.append((v, validate_config(base.with_(failedValves=frozenset({v})))))
    return out


# ---------------------------------------------------------------------------
# .scn files

_LISTS = ("dockLevelList", "riverLevelList", "wallSlitList")
_SETS = ("failedPumps", "failedValves", "phases", "commandSources")


def _rat(text: str, key: str) -> Rat:
    t = text.strip()
    try:
        if "/" in t:
            n, d = t.split("/")
            return Rat.parse(int(n), int(d))
        return Rat.parse(int(t), 1)
    except ValueError:
        raise InvalidConfig(f"{key}: `{t}` is not a rational like -240/100") from None


def _items(text: str) -> list:
    return [x.strip() for x in text.replace("\n", ",").split(",") if x.strip()]


def parse_scenario(text: str) -> ScenarioConfig:
    """Read `key = value` lines; lists are comma separated, `#` starts a comment."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string("[scenario]\n" + text)
    except configparser.Error as exc:
        raise InvalidConfig(f"malformed scenario file: {exc}") from None
    kw = {}
    for key, value in cp["scenario"].items():
        if key in _LISTS:
            kw[key] = tuple(_rat(x, key) for x in _items(value))
        elif key in _SETS:
            kw[key] = frozenset(_items(value))
        elif key == "pumpBudget":
            try:
                kw[key] = int(value)
            except ValueError:
                raise InvalidConfig("pumpBudget must be an integer") from None
        elif key in ("ballastTable", "mutation"):
            kw[key] = value.strip()
        else:
            raise InvalidConfig(f"unknown key `{key}`")
    return validate_config(ScenarioConfig(**kw))


def render_scenario(c: ScenarioConfig) -> str:
    def rats(xs):
        return ", ".join(str(x) for x in xs)
    lines = [
        f"dockLevelList = {rats(c.dockLevelList)}",
        f"riverLevelList = {rats(c.riverLevelList)}",
        f"wallSlitList = {rats(c.wallSlitList)}",
        f"failedPumps = {', '.join(sorted(c.failedPumps))}",
        f"failedValves = {', '.join(sorted(c.failedValves))}",
        f"pumpBudget = {c.pumpBudget}",
        f"phases = {', '.join(p for p in PHASES if p in c.phases)}",
        f"commandSources = {', '.join(s for s in SOURCES if s in c.commandSources)}",
        f"ballastTable = {c.ballastTable}",
        f"mutation = {c.mutation}",
    ]
    return "\n".join(lines) + "\n"
