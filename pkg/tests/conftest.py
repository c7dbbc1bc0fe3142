from pathlib import Path

import numpy as np
import pytest

from structrev.presets import (JACKSON_STANDARD, jackson, paper_instance,
                               sample_structure_reversible, symmetric_simple_walk)

ROOT = Path(__file__).resolve().parents[1]
CORPUS_SEED = 20240917
CORPUS_SIZE = 50


@pytest.fixture(scope="session")
def preset_dir():
    return ROOT / "presets"


@pytest.fixture(scope="session")
def jackson_model():
    return jackson(JACKSON_STANDARD)


@pytest.fixture(scope="session")
def extra_model():
    return paper_instance("jackson-extra-5.10")


@pytest.fixture(scope="session")
def product_model():
    return paper_instance("appendixD-product-nonreversible")


@pytest.fixture(scope="session")
def singular_model():
    return paper_instance("singular-A-demo")


@pytest.fixture(scope="session")
def simple_walk():
    return symmetric_simple_walk()


@pytest.fixture(scope="session")
def sampled_corpus():
    rng = np.random.default_rng(CORPUS_SEED)
    return [sample_structure_reversible(rng) for _ in range(CORPUS_SIZE)]


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance():
    """Record one PASS/FAIL line per criterion and assert it."""
    def record(number: int, title: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
