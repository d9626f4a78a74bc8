from __future__ import annotations

import json
from importlib import resources

import pytest
from hypothesis import HealthCheck, settings

from lambekbang import kernel

settings.register_profile("suite", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

GOLDEN_NAMES = ("fig1", "fig2", "fig2-restricted", "fig3", "fig4",
                "cut2015", "cut2018", "cut2015-primed", "cut2018-primed")

# one line per criterion, printed in the terminal summary
CRITERIA: dict[int, tuple[bool, str]] = {}


def golden_text(name: str) -> str:
    return resources.files("lambekbang").joinpath(f"data/golden/{name}.json").read_text()


def load_golden(name: str) -> tuple[kernel.Derivation, str]:
    """(derivation, calculus name stored with it)."""
    obj = json.loads(golden_text(name))
    return kernel.from_json(obj), obj["calculus"]


def data_path(rel: str) -> str:
    return str(resources.files("lambekbang").joinpath("data", rel))


@pytest.fixture(scope="session")
def goldens() -> dict:
    return {n: load_golden(n) for n in GOLDEN_NAMES}


def record_criterion(n: int, ok: bool, detail: str) -> None:
    CRITERIA[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
