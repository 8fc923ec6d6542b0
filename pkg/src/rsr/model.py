"""System abstraction: component-state vectors, performance functions, distributions.

A component-state vector assigns each of N components one of M discrete
states (0 = worst). The system performance function maps such a vector to
one of ``n_system_states`` system states and is assumed coherent, i.e.
componentwise monotone. Coherency is a modelling premise here; it can be
spot-checked with :func:`check_coherency` but not proven (exhaustive
verification costs M**N evaluations).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ComponentDistribution",
    "SystemModel",
    "check_coherency",
    "validate_vector",
]

PerformanceFn = Callable[[np.ndarray], int]

_ROW_SUM_TOL = 1e-12


class _EvalCounter:
    """Thread-safe counter of performance-function calls."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._count = 0

    def add(self, n: int = 1) -> None:
        with self._lock:
            self._count += n

    @property
    def count(self) -> int:
        return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0


def validate_vector(x: Sequence[int] | np.ndarray, n_components: int, n_states: int) -> np.ndarray:
    """Coerce ``x`` to an int array and check length and state ranges."""
    arr = np.asarray(x, dtype=np.int64)
    if arr.ndim != 1 or arr.shape[0] != n_components:
        raise ValueError(
            f"component-state vector has length {arr.shape}, expected ({n_components},)"
        )
    if arr.size and (arr.min() < 0 or arr.max() >= n_states):
        raise ValueError(f"component states must lie in [0, {n_states - 1}]")
    return arr


@dataclass
class SystemModel:
    """A coherent multi-state system of N components.

    ``performance`` must be a deterministic total function from a length-N
    integer vector to a system state in ``[0, n_system_states - 1]``, and
    safe to call concurrently (pure over immutable data). Evaluations are
    counted because performance-function calls are the cost metric of the
    whole method.
    """

    n_components: int
    n_component_states: int
    n_system_states: int
    performance: PerformanceFn
    _evals: _EvalCounter = field(default_factory=_EvalCounter, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n_components < 1:
            raise ValueError("n_components must be positive")
        if self.n_component_states < 2:
            raise ValueError("n_component_states must be >= 2")
        if self.n_system_states < 2:
            raise ValueError("n_system_states must be >= 2")

    def evaluate(self, x: Sequence[int] | np.ndarray) -> int:
        """Evaluate the performance function on a validated vector."""
        arr = validate_vector(x, self.n_components, self.n_component_states)
        self._evals.add()
        s = int(self.performance(arr))
        if not 0 <= s < self.n_system_states:
            raise ValueError(
                f"performance returned {s}, outside [0, {self.n_system_states - 1}]"
            )
        return s

    @property
    def evaluation_count(self) -> int:
        return self._evals.count

    def reset_evaluation_count(self) -> None:
        self._evals.reset()


@dataclass(frozen=True)
class ComponentDistribution:
    """Independent categorical distributions, one row per component.

    Row n gives P(X_n = m) for m = 0..M-1. Rows must sum to 1 within
    1e-12. Dependent models would slot in behind the same sampling
    interface but only the independent case is implemented.
    """

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if probs.ndim != 2:
            raise ValueError("probs must be an N x M table")
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        row_sums = probs.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > _ROW_SUM_TOL):
            bad = int(np.argmax(np.abs(row_sums - 1.0)))
            raise ValueError(f"row {bad} sums to {row_sums[bad]!r}, expected 1")

    @property
    def n_components(self) -> int:
        return self.probs.shape[0]

    @property
    def n_states(self) -> int:
        return self.probs.shape[1]

    @classmethod
    def iid(cls, n_components: int, state_probs: Sequence[float]) -> "ComponentDistribution":
        """All components share the same categorical row."""
        row = np.asarray(state_probs, dtype=np.float64)
        return cls(np.tile(row, (n_components, 1)))


def check_coherency(
    model: SystemModel, trials: int, seed: int
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Randomized spot check of componentwise monotonicity.

    Draws ``trials`` ordered pairs x1 <= x2 (x2 uniform, x1 obtained by
    degrading a random subset of components) and returns every pair with
    performance(x1) > performance(x2). An empty list means no violation
    was found, not a proof of coherency.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    n, m = model.n_components, model.n_component_states
    violations: list[tuple[np.ndarray, np.ndarray]] = []
    for _ in range(trials):
        x2 = rng.integers(0, m, size=n)
        degrade = rng.random(n) < 0.5
        x1 = x2.copy()
        # degraded entries drop uniformly to a state in [0, x2[i]]
        x1[degrade] = rng.integers(0, x2[degrade] + 1)
        if model.evaluate(x1) > model.evaluate(x2):
            violations.append((x1, x2))
    return violations
