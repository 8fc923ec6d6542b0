import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsr.boundary import ReferenceSet, ReferenceState, Side, boundary_search
from rsr.model import SystemModel
from rsr.oracle import dominates
from rsr.sysfn import k_out_of_n


def test_worked_lower_trajectory(fig_space_model):
    ref = boundary_search(fig_space_model, (2, 0), 0)
    assert ref.side == Side.LOWER
    assert ref.vector == (3, 1)
    assert fig_space_model.evaluation_count <= 2 * 4 + 1


def test_worked_upper_trajectory(fig_space_model):
    ref = boundary_search(fig_space_model, (4, 4), 0)
    assert ref.side == Side.UPPER
    assert ref.vector == (1, 4)


def test_fixed_point_when_already_on_boundary(fig_space_model):
    ref = boundary_search(fig_space_model, (3, 1), 0)
    assert ref.vector == (3, 1)
    ref_up = boundary_search(fig_space_model, (1, 4), 0)
    assert ref_up.vector == (1, 4)


def test_invalid_threshold_rejected(fig_space_model):
    with pytest.raises(ValueError):
        boundary_search(fig_space_model, (0, 0), 1)
    with pytest.raises(ValueError):
        boundary_search(fig_space_model, (0, 0), -1)


@given(st.integers(0, 2**31), st.integers(2, 6), st.integers(2, 4))
@settings(max_examples=60, deadline=None)
def test_boundary_maximality_and_budget(seed, n, m):
    from conftest import random_monotone_model

    rng = np.random.default_rng(seed)
    model = random_monotone_model(rng, n, m, 2)
    x0 = rng.integers(0, m, size=n)
    model.reset_evaluation_count()
    ref = boundary_search(model, x0, 0)
    evals = model.evaluation_count
    assert evals <= n * (m - 1) + 1

    x = np.array(ref.vector)
    s = model.evaluate(x)
    if ref.side == Side.LOWER:
        assert s <= 0
        for i in range(n):
            if x[i] < m - 1:
                probe = x.copy()
                probe[i] += 1
                assert model.evaluate(probe) > 0
        assert dominates(x0, x)  # search only ascends
    else:
        assert s >= 1
        for i in range(n):
            if x[i] > 0:
                probe = x.copy()
                probe[i] -= 1
                assert model.evaluate(probe) <= 0
        assert dominates(x, x0)  # search only descends


def test_search_determinism(fig_space_model):
    a = boundary_search(fig_space_model, (2, 0), 0)
    b = boundary_search(fig_space_model, (2, 0), 0)
    assert a == b


def test_insert_nondominated_examples():
    s = ReferenceSet(Side.LOWER, 0, [(1, 2)])
    assert s.insert(ReferenceState((3, 1), Side.LOWER, 0)) == "inserted"
    assert sorted(s.members) == [(1, 2), (3, 1)]

    s2 = ReferenceSet(Side.LOWER, 0, [(3, 1)])
    assert s2.insert(ReferenceState((2, 1), Side.LOWER, 0)) == "redundant"
    assert s2.members == [(3, 1)]

    s3 = ReferenceSet(Side.LOWER, 0, [(2, 0), (0, 2)])
    assert s3.insert(ReferenceState((2, 2), Side.LOWER, 0)) == "inserted"
    assert s3.members == [(2, 2)]


def test_insert_duplicate_is_redundant():
    s = ReferenceSet(Side.UPPER, 0, [(1, 1)])
    assert s.insert(ReferenceState((1, 1), Side.UPPER, 0)) == "redundant"


def test_insert_rejects_mismatches():
    s = ReferenceSet(Side.LOWER, 0)
    with pytest.raises(ValueError):
        s.insert(ReferenceState((0, 0), Side.UPPER, 0))
    with pytest.raises(ValueError):
        s.insert(ReferenceState((0, 0), Side.LOWER, 1))


def test_checked_reference_state():
    model = SystemModel(3, 2, 2, k_out_of_n(3, 3))
    ReferenceState.checked(model, (1, 1, 0), Side.LOWER, 0)
    with pytest.raises(ValueError):
        ReferenceState.checked(model, (1, 1, 1), Side.LOWER, 0)
    ReferenceState.checked(model, (1, 1, 1), Side.UPPER, 0)
    with pytest.raises(ValueError):
        ReferenceState.checked(model, (0, 1, 1), Side.UPPER, 0)


class _QuadraticScanSet:
    """Reference oracle for non-dominance maintenance: filter the full history."""

    def __init__(self, side):
        self.side = side
        self.history = []

    def insert(self, vec):
        self.history.append(vec)

    def members(self):
        def redundant(a, b):
            if a == b:
                return False
            if self.side == Side.LOWER:
                return dominates(a, b)
            return dominates(b, a)

        hist = set(self.history)
        return sorted(
            a for a in hist if not any(redundant(a, b) for b in hist if b != a)
        )


@given(st.integers(0, 2**31), st.integers(1, 6), st.integers(2, 4))
@settings(max_examples=60, deadline=None)
def test_nondominance_matches_quadratic_oracle(seed, n, m):
    rng = np.random.default_rng(seed)
    for side in (Side.LOWER, Side.UPPER):
        fast = ReferenceSet(side, 0)
        slow = _QuadraticScanSet(side)
        for _ in range(20):
            vec = tuple(int(v) for v in rng.integers(0, m, size=n))
            fast.insert(ReferenceState(vec, side, 0))
            slow.insert(vec)
        assert sorted(fast.members) == slow.members()
