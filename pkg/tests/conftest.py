import pytest

from qobserver.augmented import build_augmented
from qobserver.observer import ObserverSpec, build_observer
from qobserver.plant import PlantSpec, build_plant

DEFAULT_MUS = (5.0, 500.0, 50000.0)

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def plant():
    return build_plant(PlantSpec(omega_p=1.0, c_p1=(1.0, 0.0)))


@pytest.fixture(scope="session")
def make_obs(plant):
    def _make(mu):
        return build_observer(ObserverSpec(mu), plant)
    return _make


@pytest.fixture(scope="session")
def make_aug(plant, make_obs):
    def _make(mu):
        return build_augmented(plant, make_obs(mu))
    return _make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
