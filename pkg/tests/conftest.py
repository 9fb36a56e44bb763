import pytest

from trigon.curve import PeriodMap, load_example


@pytest.fixture(scope="session")
def pentagon():
    return load_example("pentagon")


@pytest.fixture(scope="session")
def hexagon():
    return load_example("hexagon")


@pytest.fixture(scope="session")
def pentagon_pm(pentagon):
    return PeriodMap.compute(pentagon.curve, pentagon.lattice)


@pytest.fixture(scope="session")
def hexagon_pm(hexagon):
    return PeriodMap.compute(hexagon.curve, hexagon.lattice)
