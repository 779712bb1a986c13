from pathlib import Path

import pytest

from surgecheck.lts import explore
from surgecheck.speclang import load_model

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text()


def load_fixture(name: str):
    return load_model(fixture_text(name), name)


def triples(lts):
    """(initial, #states, [(src, label, dst)]) for bisimulation checks."""
    return lts.initial, lts.num_states, [(s, lts.labels[a], t) for s, a, t in lts.transitions]


@pytest.fixture(scope="session")
def traffic():
    tm = load_fixture("traffic_light.sbm")
    return tm, explore(tm)


@pytest.fixture(scope="session")
def traffic_mutant():
    tm = load_fixture("traffic_light_mutant.sbm")
    return tm, explore(tm)


@pytest.fixture(scope="session")
def besw_default():
    from surgecheck.besw.config import default_config
    from surgecheck.besw.suite import build_lts
    return build_lts(default_config())
