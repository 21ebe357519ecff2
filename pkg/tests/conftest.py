import json
import pathlib

import pytest

_ORACLE_PATH = pathlib.Path(__file__).parent / "oracles" / "expected.json"


@pytest.fixture(scope="session")
def oracle():
    """Frozen expected values, regenerated by tests/oracles/compute_expected.py."""
    return json.loads(_ORACLE_PATH.read_text())
