from pathlib import Path

import pytest

from polyfed.workspace import scenario_workspace

TESTS_DIR = Path(__file__).parent
FIXTURE_DIR = TESTS_DIR.parent / "fixtures" / "netherlands"
GOLDEN_DIR = TESTS_DIR / "golden"

# the one row the demo data holds for the Netherlands cube
NETHERLANDS_ROW = (
    651,
    951,
    "http://oilandgas/Well#F03-2",
    "http://oilandgas/Horizon#FS8",
    23031,
)


@pytest.fixture
def scenario():
    """Fully loaded demo workspace: schemas, store rows, one execution."""
    return scenario_workspace()


@pytest.fixture
def bare_scenario():
    """Demo schemas only; stores empty, no provenance."""
    return scenario_workspace(with_data=False, with_provenance=False)
