"""Run the property corpus against one scenario."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..checker import check
from ..lts import ExploreLimits, explore
from ..mucalc import parse_predicates
from ..speclang import load_model
from .config import ScenarioConfig, default_config, validate_config
from .corpus import PREDICATES, Property, property_corpus
from .model import generate_model


@dataclass
class PropertyReport:
    id: str
    expected: bool
    verdict: Optional[bool]       # None when skipped
    states: int = 0
    transitions: int = 0
    equations: int = 0
    millis: float = 0.0
    trace: Optional[list] = None
    note: str = ""

    @property
    def match(self) -> Optional[bool]:
        return None if self.verdict is None else self.verdict == self.expected

    def as_json(self) -> dict:
        out = {"id": self.id, "verdict": self.verdict, "expected": self.expected,
               "match": self.match, "states": self.states,
               "transitions": self.transitions, "equations": self.equations,
               "millis": round(self.millis, 3)}
        if self.trace is not None:
            out["trace"] = self.trace
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class SuiteReport:
    config: ScenarioConfig
    states: int
    transitions: int
    explore_millis: float
    properties: list = field(default_factory=list)

    @property
    def all_match(self) -> bool:
        return all(p.match is not False for p in self.properties)

    def get(self, pid: str) -> PropertyReport:
        for p in self.properties:
            if p.id == pid:
                return p
        raise KeyError(pid)


def features(cfg: ScenarioConfig) -> set:
    f = set(cfg.phases)
    if "ito" in cfg.phases and "das" not in cfg.commandSources:
        f.discard("ito")   # nobody can run the function test
    return f


def variant_config(cfg: ScenarioConfig, variant: str) -> ScenarioConfig:
    if not variant:
        return cfg
    if variant == "dso":
        pumps = set(cfg.failedPumps)
        if not cfg.failed("ballast"):
            pumps.add("ballast0")
        return validate_config(cfg.with_(ballastTable="dso", failedPumps=frozenset(pumps)))
    raise ValueError(f"unknown variant {variant!r}")


def build_lts(cfg: ScenarioConfig, workers: int = 1, limits: ExploreLimits = ExploreLimits()):
    tm = load_model(generate_model(cfg), "<barrier>")
    return tm, explore(tm, limits, workers)


def run_suite(cfg: Optional[ScenarioConfig] = None, only=None, workers: int = 1,
              want_trace: bool = True, limits: ExploreLimits = ExploreLimits(),
              corpus: Optional[list] = None) -> SuiteReport:
    cfg = validate_config(cfg or default_config())
    preds = parse_predicates(PREDICATES)
    props: list = corpus if corpus is not None else property_corpus(cfg.pumpBudget)
    if only:
        wanted = set(only)
        props = [p for p in props if p.id in wanted]
    have = features(cfg)
    models = {}

    def model_for(variant):
        if variant not in models:
            t0 = time.perf_counter()
            tm, lts = build_lts(variant_config(cfg, variant), workers, limits)
            models[variant] = (tm, lts, (time.perf_counter() - t0) * 1000)
        return models[variant]

    tm, lts, ms = model_for("")
    report = SuiteReport(cfg, lts.num_states, lts.num_transitions, ms)
    for prop in props:
        report.properties.append(_run_one(prop, have, model_for, preds, want_trace))
    return report


def _run_one(prop: Property, have: set, model_for, preds, want_trace) -> PropertyReport:
    missing = set(prop.requires) - have
    if missing:
        return PropertyReport(prop.id, prop.expected, None,
                              note="skipped: scenario lacks " + ", ".join(sorted(missing)))
    tm, lts, _ = model_for(prop.variant)
    t0 = time.perf_counter()
    res = check(lts, prop.text, tm.signature, preds, want_trace=want_trace)
    ms = (time.perf_counter() - t0) * 1000
    return PropertyReport(prop.id, prop.expected, res.holds, lts.num_states,
                          lts.num_transitions, res.stats["equations"], ms,
                          trace=res.trace_text() if res.counterexample is not None else None,
                          note=res.note)
