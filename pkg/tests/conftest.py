"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from rsr.model import ComponentDistribution, SystemModel
from rsr.sysfn import Graph, k_out_of_n


def fig_space_phi(x) -> int:
    """The two-component, five-state monotone function used in worked examples.

    State 1 iff x dominates (1,4), (4,0), or (3,2); a monotone completion
    consistent with one lower and two upper reference states at (1,2),
    (1,4), (4,0).
    """
    return int(
        (x[0] >= 1 and x[1] >= 4) or (x[0] >= 4) or (x[0] >= 3 and x[1] >= 2)
    )


@pytest.fixture
def fig_space_model() -> SystemModel:
    return SystemModel(2, 5, 2, fig_space_phi)


@pytest.fixture
def triangle() -> Graph:
    return Graph(3, ((0, 1), (1, 2), (0, 2)))


@pytest.fixture
def series3() -> tuple[SystemModel, ComponentDistribution]:
    model = SystemModel(3, 2, 2, k_out_of_n(3, 3))
    dist = ComponentDistribution.iid(3, [0.1, 0.9])
    return model, dist


@pytest.fixture
def parallel3() -> tuple[SystemModel, ComponentDistribution]:
    model = SystemModel(3, 2, 2, k_out_of_n(1, 3))
    dist = ComponentDistribution.iid(3, [0.1, 0.9])
    return model, dist


def random_upper_cones(rng: np.random.Generator, n: int, m: int, count: int) -> list[tuple[int, ...]]:
    """Random vectors kept as-is; redundancy is fine for building test systems."""
    return [tuple(int(v) for v in rng.integers(0, m, size=n)) for v in range(count)]


def random_monotone_model(
    rng: np.random.Generator, n: int, m: int, m_s: int
) -> SystemModel:
    """A random coherent system: a sum of indicator functions of upper cones.

    Each level contributes 1 when the vector dominates any of its anchor
    vectors; a sum of monotone indicators is monotone, so the result is
    coherent by construction for any anchors.
    """
    levels = []
    for _ in range(m_s - 1):
        count = int(rng.integers(1, 4))
        anchors = [rng.integers(0, m, size=n) for _ in range(count)]
        levels.append([tuple(int(v) for v in a) for a in anchors])

    def phi(x) -> int:
        s = 0
        for anchors in levels:
            if any(all(x[i] >= a[i] for i in range(n)) for a in anchors):
                s += 1
        return s

    return SystemModel(n, m, m_s, phi)


def random_distribution(rng: np.random.Generator, n: int, m: int) -> ComponentDistribution:
    raw = rng.random((n, m)) + 0.05
    return ComponentDistribution(raw / raw.sum(axis=1, keepdims=True))
