import json
import os

import pytest

from core import cache

RUN_SLOW = os.environ.get("LAB_RUN_SLOW") == "1"


def pytest_collection_modifyitems(config, items):
    if RUN_SLOW:
        return
    skip = pytest.mark.skip(reason="set LAB_RUN_SLOW=1 to run acceptance-scale tests")
    for item in items:
        if "slow" in item.keywords or "load" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def fresh_cache():
    """Every test starts without memoised bases, multipliers or initial data"""
    cache.clear_cache()
    yield
    cache.clear_cache()


@pytest.fixture
def write_config(tmp_path):
    """Dump a dict as a JSON config file and return its path"""

    def _write(payload, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return str(path)

    return _write


@pytest.fixture
def transport_payload():
    return {
        "equation": "transport",
        "N": 32,
        "p": 1.5,
        "alpha": 1.5,
        "T": 0.02,
        "dt": 0.005,
        "ell_grid": [0.5, 0.35, 0.25],
        "samples": 4,
        "seed": 7,
        "initial": {"kind": "bump", "radius": 1.0},
    }
