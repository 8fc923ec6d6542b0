"""Componentwise boundary search and non-dominated reference-set maintenance.

A lower reference state is a vector known to give system state <= m'; an
upper reference state gives state >= m'+1. Sets keep only non-dominated
members: a lower member componentwise <= another is redundant, as is an
upper member componentwise >= another.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import SystemModel, validate_vector

__all__ = ["Side", "ReferenceState", "ReferenceSet", "boundary_search"]


class Side:
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class ReferenceState:
    vector: tuple[int, ...]
    side: str
    threshold: int

    def __post_init__(self) -> None:
        if self.side not in (Side.LOWER, Side.UPPER):
            raise ValueError(f"side must be '{Side.LOWER}' or '{Side.UPPER}'")
        object.__setattr__(self, "vector", tuple(int(v) for v in self.vector))

    @classmethod
    def checked(
        cls, model: SystemModel, vector: Sequence[int], side: str, threshold: int
    ) -> "ReferenceState":
        """Construct after verifying the side condition against the model."""
        s = model.evaluate(vector)
        if side == Side.LOWER and s > threshold:
            raise ValueError(f"lower reference has system state {s} > m'={threshold}")
        if side == Side.UPPER and s <= threshold:
            raise ValueError(f"upper reference has system state {s} <= m'={threshold}")
        return cls(tuple(vector), side, threshold)


def _redundant_under(side: str, a: Sequence[int], b: Sequence[int]) -> bool:
    """True if ``a`` is made redundant by ``b`` in the side's order."""
    if side == Side.LOWER:
        return all(x <= y for x, y in zip(a, b))
    return all(x >= y for x, y in zip(a, b))


class ReferenceSet:
    """Non-dominated set of reference vectors for one side and threshold."""

    def __init__(
        self,
        side: str,
        threshold: int,
        members: Iterable[Sequence[int]] = (),
    ) -> None:
        if side not in (Side.LOWER, Side.UPPER):
            raise ValueError(f"side must be '{Side.LOWER}' or '{Side.UPPER}'")
        self.side = side
        self.threshold = int(threshold)
        self._members: list[tuple[int, ...]] = []
        for m in members:
            self.insert(ReferenceState(tuple(m), side, threshold))

    @property
    def members(self) -> list[tuple[int, ...]]:
        return list(self._members)

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, vector: Sequence[int]) -> bool:
        return tuple(int(v) for v in vector) in self._members

    def as_array(self) -> np.ndarray:
        return np.array(self._members, dtype=np.int64).reshape(len(self._members), -1)

    def insert(self, candidate: ReferenceState) -> str:
        """Insert keeping non-dominance; returns 'inserted' or 'redundant'.

        A redundant candidate leaves the set unchanged; an inserted one
        drops every member it makes redundant. The final set is
        independent of insertion order (up to set equality).
        """
        if candidate.side != self.side:
            raise ValueError(f"candidate side {candidate.side!r} != set side {self.side!r}")
        if candidate.threshold != self.threshold:
            raise ValueError(
                f"candidate threshold {candidate.threshold} != set threshold {self.threshold}"
            )
        vec = candidate.vector
        for member in self._members:
            if _redundant_under(self.side, vec, member):
                return "redundant"
        self._members = [
            m for m in self._members if not _redundant_under(self.side, m, vec)
        ]
        self._members.append(vec)
        return "inserted"

    def copy(self) -> "ReferenceSet":
        new = ReferenceSet(self.side, self.threshold)
        new._members = list(self._members)
        return new


def boundary_search(
    model: SystemModel, x0: Sequence[int], threshold: int
) -> ReferenceState:
    """Walk a vector to the system-state boundary, one component at a time.

    Starting from x0, components are visited in index order. On the lower
    side (initial system state <= m') each component is raised one state
    at a time until the raise pushes the system past m', then the raise is
    reverted; the upper side descends symmetrically. Monotonicity makes
    each rejected move permanent, so the result is componentwise maximal
    (lower) or minimal (upper). Costs at most N*(M-1)+1 evaluations.
    """
    if not 0 <= threshold <= model.n_system_states - 2:
        raise ValueError(
            f"threshold must lie in [0, {model.n_system_states - 2}]"
        )
    x = validate_vector(x0, model.n_components, model.n_component_states).copy()
    s0 = model.evaluate(x)
    if s0 <= threshold:
        side, step, limit = Side.LOWER, 1, model.n_component_states - 1
    else:
        side, step, limit = Side.UPPER, -1, 0

    for n in range(model.n_components):
        while x[n] != limit:
            x[n] += step
            s = model.evaluate(x)
            crossed = s > threshold if side == Side.LOWER else s <= threshold
            if crossed:
                x[n] -= step
                break
    return ReferenceState(tuple(int(v) for v in x), side, threshold)
