from pathlib import Path

import pytest

from fuzmet.covers import CATALOG

DATA = Path(__file__).with_name("data")


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture(params=sorted(CATALOG))
def catalogued(request):
    space, verdict = CATALOG[request.param]
    return request.param, space, verdict
