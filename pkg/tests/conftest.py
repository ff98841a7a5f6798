import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from islandsim.config import system_from_config
from islandsim.defaults import reduced_island_config


@pytest.fixture(scope="session")
def reduced_doc():
    return reduced_island_config()


@pytest.fixture(scope="session")
def reduced_system(reduced_doc):
    return system_from_config(reduced_doc)
