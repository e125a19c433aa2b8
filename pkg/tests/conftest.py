import sys
from pathlib import Path

import pytest

from invcap.network import ArrivalModel, CountrySpec, Discipline, NetworkSpec

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def figure3(b_capacity=3.0, a_capacity=10.0, arrival_model=ArrivalModel.DETERMINISTIC,
            discipline=Discipline.NATIONAL_PRIORITY, response_delay=0) -> NetworkSpec:
    """Requestor A leans on partner B, whose national load already fills its capacity."""
    return NetworkSpec(
        countries=(
            CountrySpec("A", a_capacity, national_rate=6, international_fraction=0.5,
                        partner_weights={"B": 1.0}),
            CountrySpec("B", b_capacity, national_rate=3, discipline=discipline),
        ),
        arrival_model=arrival_model,
        response_delay=response_delay,
    )


def single(rate, capacity, model=ArrivalModel.DETERMINISTIC) -> NetworkSpec:
    return NetworkSpec((CountrySpec("X", capacity, national_rate=rate),), arrival_model=model)


@pytest.fixture
def fig3():
    return figure3()


@pytest.fixture
def figure3_text():
    return (SCENARIOS / "figure3.json").read_text()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
