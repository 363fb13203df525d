import os
from pathlib import Path

import pytest

from novadet.synthetic import (write_synthetic_cifar10, write_synthetic_coil100,
                               write_synthetic_mnist)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run tests marked slow (full-protocol training runs)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow suite; use --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def real_data_root():
    """Directory holding the real datasets (mnist/, cifar10/, coil100/), if any."""
    root = os.environ.get("NOVADET_DATA_ROOT")
    if root and Path(root).is_dir():
        return Path(root)
    return None


@pytest.fixture(scope="session")
def mnist_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("mnist")
    write_synthetic_mnist(root, per_class_train=40, per_class_test=10, seed=11)
    return root


@pytest.fixture(scope="session")
def cifar_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("cifar10")
    write_synthetic_cifar10(root, per_class_train=30, per_class_test=8, seed=12)
    return root


@pytest.fixture(scope="session")
def coil_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("coil100")
    write_synthetic_coil100(root, num_classes=100, views=10, seed=13, image_size=64)
    return root
