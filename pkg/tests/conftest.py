import pytest

from g2inst.metrics import coordinate_map


@pytest.fixture(scope="session")
def cmap_bs():
    return coordinate_map("BS")


@pytest.fixture(scope="session")
def cmap_bggg():
    return coordinate_map("BGGG")
