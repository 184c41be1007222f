import math
import random
import time
from pathlib import Path

import pytest

from cltree.tree import LabeledTree, enumerate_shapes, generate_tree, parse_ltree

FIXTURES = Path(__file__).parent / "fixtures"

ACCEPTANCE_LINES: list[str] = []


def fixture_tree(name: str) -> LabeledTree:
    return parse_ltree((FIXTURES / name).read_text())


def small_trees(max_n: int, sigma: int = 2, seed: int = 0):
    """Every shape up to max_n nodes, one random labeling each."""
    rng = random.Random(seed)
    alphabet = [chr(ord("a") + i) for i in range(sigma)]
    for n in range(1, max_n + 1):
        for deg in enumerate_shapes(n):
            yield LabeledTree.from_degrees(deg, [rng.randrange(sigma) for _ in deg], alphabet)


def random_corpus(count: int, max_n: int, seed: int = 0):
    """Mixed generators with log-uniform sizes."""
    rng = random.Random(seed)
    kinds = ("uniform", "correlated", "degree_dist", "catalog")
    for i in range(count):
        n = max(1, int(10 ** rng.uniform(0, math.log10(max_n))))
        kind = kinds[i % len(kinds)]
        if kind == "uniform":
            spec = {"kind": "uniform", "n": n, "sigma": rng.randint(1, 4)}
        elif kind == "correlated":
            spec = {"kind": "correlated", "n": n, "sigma": rng.randint(2, 5)}
        elif kind == "catalog":
            spec = {"kind": "correlated", "n": n, "rule": "catalog"}
        else:
            spec = {"kind": "degree_dist", "n": n | 1, "dist": {0: 1.0, 2: 1.0}, "sigma": 2}
        yield generate_tree(spec, seed * 100003 + i)


@pytest.fixture
def catalog():
    return fixture_tree("catalog.ltree")


@pytest.fixture
def clustered():
    return fixture_tree("clustered.ltree")


SUITE_BUDGET = 600.0  # seconds, whole suite


def pytest_sessionstart(session):
    session.config._cltree_started = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    took = time.perf_counter() - session.config._cltree_started
    session.config._cltree_took = took
    if ACCEPTANCE_LINES and took >= SUITE_BUDGET and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
        took = getattr(config, "_cltree_took", 0.0)
        verdict = "PASS" if took < SUITE_BUDGET else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE 8 suite runtime {verdict} ({took:.1f}s < {SUITE_BUDGET:.0f}s)")
