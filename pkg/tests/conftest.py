"""Shared fixtures: the worked example tree and a bank of generated datasets.

Session scope keeps the expensive closures and the ten default trees
to a single computation for the whole run.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

SRC = Path(__file__).resolve().parents[1] / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from symtree.reasoner import forward_closure
from symtree.schema import example_tree
from symtree.treegen import TreeConfig, assemble_dataset

DEFAULT_SEEDS = tuple(range(1, 11))


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(number, description): acceptance criterion with a printed verdict",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Print one PASS/FAIL line per acceptance criterion, capture or not."""
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, description = mark.args
    verdict = "PASS" if report.passed else "FAIL"
    reporter = item.config.pluginmanager.get_plugin("terminalreporter")
    if reporter is not None:
        reporter.write_line(f"criterion {number:2d} {verdict}: {description}")


@pytest.fixture(scope="session")
def example_theory():
    return example_tree()


@pytest.fixture(scope="session")
def example_closure(example_theory):
    return forward_closure(example_theory)


@pytest.fixture(scope="session")
def default_datasets():
    """Datasets for seeds 1..10 at default generator settings."""
    return {seed: assemble_dataset(TreeConfig(seed=seed)) for seed in DEFAULT_SEEDS}
