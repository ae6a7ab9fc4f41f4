import pytest

from fieldatlas.fixture import MayaFixture, maya_fixture


@pytest.fixture(scope="session")
def maya() -> MayaFixture:
    return maya_fixture()
