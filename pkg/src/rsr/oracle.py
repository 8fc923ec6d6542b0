"""Independent ground-truth engines: enumeration, scalar dominance, crude Monte Carlo.

Everything here is deliberately written with plain scalar loops and shares
no code with the encoding or classification fast paths, so the two routes
can be tested against each other. Single-threaded by design.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import ComponentDistribution, SystemModel
from .sampling import sample_batch

__all__ = [
    "ExactResult",
    "exact_probabilities",
    "dominates",
    "crude_monte_carlo",
    "exact_reference_probability",
    "bfs_connected",
]

MAX_ENUM_VECTORS = 1 << 24


@dataclass(frozen=True)
class ExactResult:
    """Exact cumulative probabilities P(S <= m') and per-state vector counts."""

    cumulative: np.ndarray  # length M_S, non-decreasing, ends at 1
    state_count: np.ndarray  # length M_S, sums to M**N


def _guard_enum(n_components: int, n_states: int) -> None:
    if n_states**n_components > MAX_ENUM_VECTORS:
        raise ValueError(
            f"{n_states}**{n_components} vectors exceed the enumeration guard "
            f"of {MAX_ENUM_VECTORS}"
        )


def exact_probabilities(model: SystemModel, dist: ComponentDistribution) -> ExactResult:
    """Enumerate all M**N vectors and accumulate probability per system state."""
    n, m = model.n_components, model.n_component_states
    _guard_enum(n, m)
    mass = [0.0] * model.n_system_states
    counts = [0] * model.n_system_states
    for x in itertools.product(range(m), repeat=n):
        p = 1.0
        for comp in range(n):
            p *= dist.probs[comp, x[comp]]
        s = model.evaluate(np.array(x, dtype=np.int64))
        mass[s] += p
        counts[s] += 1
    cumulative = np.cumsum(mass)
    return ExactResult(cumulative=cumulative, state_count=np.array(counts))


def dominates(a: Sequence[int], b: Sequence[int]) -> bool:
    """Componentwise partial order: a <= b in every position."""
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def crude_monte_carlo(
    model: SystemModel,
    dist: ComponentDistribution,
    n_samples: int,
    seed: int,
    threshold: int,
) -> tuple[float, float | None]:
    """Plain Monte Carlo estimate of P(S <= m') with its coefficient of variation.

    Uses the same counter-based stream discipline as the sampling module
    (generation index 0), so it is seed-matched with the evaluation stage
    run under empty reference sets.
    """
    batch = sample_batch(dist, n_samples, seed, generation_index=0)
    hits = 0
    for row in batch.states:
        if model.evaluate(row) <= threshold:
            hits += 1
    p_hat = hits / n_samples
    if p_hat == 0.0:
        return 0.0, None
    return p_hat, math.sqrt((1.0 - p_hat) / (n_samples * p_hat))


def exact_reference_probability(
    dist: ComponentDistribution,
    members: Iterable[Sequence[int]],
    side: str,
) -> float:
    """Exact probability of the union of regions dominated by the reference vectors.

    For side 'lower' a vector x is covered when x <= some member; for
    'upper' when x >= some member. Enumeration-based; respects the same
    size guard as exact_probabilities.
    """
    vectors = [tuple(int(v) for v in m) for m in members]
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    if not vectors:
        return 0.0
    n, m = dist.n_components, dist.n_states
    _guard_enum(n, m)
    total = 0.0
    for x in itertools.product(range(m), repeat=n):
        covered = False
        for ref in vectors:
            if side == "lower":
                covered = dominates(x, ref)
            else:
                covered = dominates(ref, x)
            if covered:
                break
        if covered:
            p = 1.0
            for comp in range(n):
                p *= dist.probs[comp, x[comp]]
            total += p
    return total


def bfs_connected(
    n_nodes: int, edges: Sequence[tuple[int, int]], source: int, target: int
) -> bool:
    """Breadth-first reachability check, independent of the sysfn implementation."""
    adj: list[list[int]] = [[] for _ in range(n_nodes)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n_nodes
    seen[source] = True
    q = deque([source])
    while q:
        u = q.popleft()
        if u == target:
            return True
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                q.append(v)
    return seen[target]
