import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fbgvib import default_params


@pytest.fixture(scope="session")
def params():
    return default_params()
