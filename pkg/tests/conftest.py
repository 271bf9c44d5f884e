import pytest

from sewkit.generators import carpet_with_disks
from sewkit.sewing import sew

from _factories import random_bundle, toy_bundle


@pytest.fixture(scope="session")
def toy_sewn():
    return sew(toy_bundle())


@pytest.fixture(scope="session")
def sewn_level1():
    return sew(carpet_with_disks(1))


@pytest.fixture(scope="session")
def sewn_level2():
    return sew(carpet_with_disks(2))


@pytest.fixture(scope="session")
def sewn_level3():
    # the large certification scenario; built once, shared by the slow tests
    return sew(carpet_with_disks(3))


@pytest.fixture(scope="session")
def random_bundles():
    return [random_bundle(seed) for seed in range(20)]
