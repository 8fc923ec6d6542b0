"""Two-stage workflow: reference discovery (Stage 1) and probability evaluation (Stage 2).

Stage 1 alternates sample classification with componentwise boundary
searches seeded from unclassified samples, until the unclassified
probability estimate falls below ``eps_u`` or the reference count reaches
``r_max``. Note that ``eps_u`` is checked on each iteration's fresh
sample batch: it is a sample-estimate threshold, not a certified bound.

Stage 2 classifies one batch against the discovered sets and resolves the
remaining unclassified samples by direct performance-function calls, so
every sample ends up on one side of the threshold.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .boundary import ReferenceSet, ReferenceState, Side, boundary_search
from .classify import ClassificationResult, classify, cov
from .model import ComponentDistribution, SystemModel
from .sampling import sample_batch

__all__ = [
    "RunConfig",
    "TraceRecord",
    "Stage1Result",
    "Stage2Report",
    "PmfReport",
    "stage1_find_references",
    "stage2_evaluate",
    "multistate_pmf",
    "assemble_pmf",
]

# Stage 2 always draws generation index 0 so that, with empty reference
# sets, it is seed-matched bit-for-bit with the crude Monte Carlo oracle.
_STAGE2_GENERATION = 0


def _rss_bytes() -> int | None:
    try:
        import resource

        # ru_maxrss is kilobytes on Linux
        return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    except Exception:
        return None


@dataclass(frozen=True)
class RunConfig:
    """Knobs for both stages; defaults follow the method's suggested values."""

    n_samples: int = 1_000_000
    eps_u: float = 1e-5
    r_max: int = 10_000
    chunk_size: int = 65536
    seed: int = 0
    parallel_searches: int = 1
    n_workers: int = 1
    stage2_samples: int | None = None  # defaults to n_samples
    boundary_search_enabled: bool = True  # False inserts raw samples (diagnostic)

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not 0.0 <= self.eps_u <= 1.0:
            raise ValueError("eps_u must lie in [0, 1]")
        if self.r_max < 1:
            raise ValueError("r_max must be >= 1")
        if self.parallel_searches < 1:
            raise ValueError("parallel_searches must be >= 1")


@dataclass(frozen=True)
class TraceRecord:
    """Per-iteration measurements of a Stage-1 run."""

    reference_count: int
    elapsed_seconds: float
    phi_evaluations: int
    p_lower: float
    p_upper: float
    p_unclassified: float
    resident_memory_bytes: int | None = None


@dataclass
class Stage1Result:
    lower: ReferenceSet
    upper: ReferenceSet
    trace: list[TraceRecord]
    iterations: int
    redundant_searches: int
    terminated_by: str  # 'eps_u' or 'r_max'


@dataclass(frozen=True)
class Stage2Report:
    """Final estimates of P(S <= m') and P(S >= m'+1); they sum to one exactly."""

    p_lower: float
    p_upper: float
    cov_lower: float | None
    cov_upper: float | None
    n_samples: int
    unclassified_resolved: int
    threshold: int
    seed: int


def _check_threshold(model: SystemModel, threshold: int) -> None:
    if not 0 <= threshold <= model.n_system_states - 2:
        raise ValueError(
            f"threshold must lie in [0, {model.n_system_states - 2}]"
        )


def stage1_find_references(
    model: SystemModel,
    dist: ComponentDistribution,
    config: RunConfig,
    threshold: int,
) -> Stage1Result:
    """Discover boundary reference sets for one threshold.

    Each iteration draws a fresh batch (keyed by its iteration index),
    classifies it, and, if not yet converged, runs boundary searches from
    up to ``parallel_searches`` randomly selected unclassified samples.
    Redundant (dominated) search results do not count toward ``r_max``.
    """
    _check_threshold(model, threshold)
    lower = ReferenceSet(Side.LOWER, threshold)
    upper = ReferenceSet(Side.UPPER, threshold)
    trace: list[TraceRecord] = []
    redundant = 0
    phi_start = model.evaluation_count
    t_start = time.perf_counter()
    terminated_by = "r_max"

    iteration = 0
    while True:
        batch = sample_batch(dist, config.n_samples, config.seed, generation_index=iteration)
        result = classify(
            batch,
            lower,
            upper,
            chunk_size=config.chunk_size,
            n_workers=config.n_workers,
            n_states=model.n_component_states,
        )
        trace.append(
            TraceRecord(
                reference_count=len(lower) + len(upper),
                elapsed_seconds=time.perf_counter() - t_start,
                phi_evaluations=model.evaluation_count - phi_start,
                p_lower=result.p_lower,
                p_upper=result.p_upper,
                p_unclassified=result.p_unclassified,
                resident_memory_bytes=_rss_bytes(),
            )
        )
        if result.p_unclassified <= config.eps_u:
            terminated_by = "eps_u"
            break
        if len(lower) + len(upper) >= config.r_max:
            break

        rng = np.random.default_rng([config.seed, iteration])
        n_pick = min(config.parallel_searches, result.unclassified_indices.size)
        picks = rng.choice(result.unclassified_indices, size=n_pick, replace=False)
        for idx in picks:
            x0 = batch.states[int(idx)]
            if config.boundary_search_enabled:
                candidate = boundary_search(model, x0, threshold)
            else:
                s = model.evaluate(x0)
                side = Side.LOWER if s <= threshold else Side.UPPER
                candidate = ReferenceState(tuple(int(v) for v in x0), side, threshold)
            target = lower if candidate.side == Side.LOWER else upper
            if target.insert(candidate) == "redundant":
                redundant += 1
        iteration += 1

    return Stage1Result(
        lower=lower,
        upper=upper,
        trace=trace,
        iterations=iteration + 1,
        redundant_searches=redundant,
        terminated_by=terminated_by,
    )


def stage2_evaluate(
    model: SystemModel,
    dist: ComponentDistribution,
    lower: ReferenceSet | None,
    upper: ReferenceSet | None,
    config: RunConfig,
    threshold: int,
) -> Stage2Report:
    """Estimate P(S <= m') and P(S >= m'+1) from one classified batch.

    Unclassified samples are resolved by evaluating the performance
    function directly, so the two probabilities partition the batch.
    """
    _check_threshold(model, threshold)
    for s in (lower, upper):
        if s is not None and s.threshold != threshold:
            raise ValueError(
                f"reference set threshold {s.threshold} != requested m'={threshold}"
            )
    h = config.stage2_samples or config.n_samples
    batch = sample_batch(dist, h, config.seed, generation_index=_STAGE2_GENERATION)
    result = classify(
        batch,
        lower,
        upper,
        chunk_size=config.chunk_size,
        n_workers=config.n_workers,
        n_states=model.n_component_states,
    )
    n_low = result.lower_indices.size
    n_up = result.upper_indices.size
    for idx in result.unclassified_indices:
        if model.evaluate(batch.states[int(idx)]) <= threshold:
            n_low += 1
        else:
            n_up += 1
    p_low = n_low / h
    p_up = n_up / h
    return Stage2Report(
        p_lower=p_low,
        p_upper=p_up,
        cov_lower=cov(p_low, h),
        cov_upper=cov(p_up, h),
        n_samples=h,
        unclassified_resolved=result.unclassified_indices.size,
        threshold=threshold,
        seed=config.seed,
    )


@dataclass(frozen=True)
class PmfReport:
    pmf: np.ndarray  # length M_S, sums to 1
    cumulative_lower: np.ndarray  # P(S <= m') for m' = 0..M_S-2
    stage2_reports: tuple[Stage2Report, ...]
    stage1_results: tuple[Stage1Result, ...]
    max_chain_discrepancy: float
    renormalization_adjustment: float


def assemble_pmf(cumulative: np.ndarray | list[float]) -> tuple[np.ndarray, float]:
    """Turn cumulative P(S <= m'), m' = 0..M_S-2, into a PMF over M_S states.

    Tiny negative mass from sampling noise is clamped to zero and the
    result renormalized; the total absolute adjustment is returned.
    """
    cum = np.asarray(cumulative, dtype=np.float64)
    if cum.size and (cum.min() < 0.0 or cum.max() > 1.0):
        raise ValueError("cumulative probabilities must lie in [0, 1]")
    ext = np.concatenate([[0.0], cum, [1.0]])
    pmf = np.diff(ext)
    clipped = np.clip(pmf, 0.0, None)
    adjustment = float(np.abs(clipped - pmf).sum())
    return clipped / clipped.sum(), adjustment


def multistate_pmf(
    model: SystemModel,
    dist: ComponentDistribution,
    config: RunConfig,
) -> PmfReport:
    """Run both stages for every threshold and compose the system-state PMF.

    The PMF is assembled from the lower-bound chain P(S <= m'); the chain
    of upper probabilities is assembled as a cross-check and the maximum
    discrepancy reported. Non-monotone cumulative estimates beyond four
    combined standard errors raise, signalling insufficient sample size.
    """
    m_s = model.n_system_states
    stage1_results = []
    reports = []
    for threshold in range(m_s - 1):
        s1 = stage1_find_references(model, dist, config, threshold)
        s2 = stage2_evaluate(model, dist, s1.lower, s1.upper, config, threshold)
        stage1_results.append(s1)
        reports.append(s2)

    cum = np.array([r.p_lower for r in reports])
    sigmas = np.array(
        [np.sqrt(r.p_lower * (1.0 - r.p_lower) / r.n_samples) for r in reports]
    )
    for i in range(1, len(cum)):
        tol = 4.0 * (sigmas[i] + sigmas[i - 1])
        if cum[i] < cum[i - 1] - tol:
            raise ValueError(
                f"cumulative estimates non-monotone beyond tolerance at m'={i} "
                f"({cum[i]:.3e} < {cum[i - 1]:.3e} - {tol:.1e}); increase n_samples"
            )

    pmf, adjustment = assemble_pmf(cum)
    # cross-check: the same PMF assembled from the upper-side chain
    surv = np.concatenate([[1.0], [r.p_upper for r in reports], [0.0]])
    pmf_upper = -np.diff(surv)
    pmf_upper_n, _ = assemble_pmf(np.cumsum(pmf_upper)[:-1])
    discrepancy = float(np.max(np.abs(pmf - pmf_upper_n)))

    return PmfReport(
        pmf=pmf,
        cumulative_lower=cum,
        stage2_reports=tuple(reports),
        stage1_results=tuple(stage1_results),
        max_chain_discrepancy=discrepancy,
        renormalization_adjustment=adjustment,
    )
