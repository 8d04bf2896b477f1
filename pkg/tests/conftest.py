"""Shared fixtures: cached level measures and spatial indices."""

import pytest

from gasketdensity import (
    build_index,
    default_cell_size,
    gasket_preset,
    generate_support,
)


@pytest.fixture(scope="session")
def system():
    return gasket_preset()


@pytest.fixture(scope="session")
def level_measure(system):
    cache = {}

    def get(k):
        if k not in cache:
            cache[k] = generate_support(system, k)
        return cache[k]

    return get


@pytest.fixture(scope="session")
def level_index(level_measure):
    cache = {}

    def get(k):
        if k not in cache:
            cache[k] = build_index(level_measure(k), default_cell_size(k))
        return cache[k]

    return get
