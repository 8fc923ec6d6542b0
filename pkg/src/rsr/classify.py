"""Batched reference-state sample classification and probability estimation.

Each entry (h, r) of the violation matrix counts the component positions
at which sample h falls outside reference r's dominated region; a zero
entry classifies the sample. The count is the dot product of the
flattened one-hot sample row with the complement of the flattened
reference row, computed here either as popcount-of-AND on bit-packed rows
(the default fast path) or as a plain integer matrix product (the
differential-testing path).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .boundary import ReferenceSet, Side
from .encoding import EncodedBatch, encode_batch
from .sampling import SampleBatch

__all__ = [
    "ClassificationResult",
    "InconsistentReferenceSets",
    "violation_counts",
    "classify",
    "cov",
]

DEFAULT_CHUNK_SIZE = 65536

# bound on chunk * ref_block * bytes_per_row working memory
_BLOCK_BYTES = 1 << 26


class InconsistentReferenceSets(ValueError):
    """A sample matched both a lower and an upper reference in strict mode."""


def _violation_block_packed(sample_packed: np.ndarray, rbar_packed: np.ndarray) -> np.ndarray:
    anded = sample_packed[:, None, :] & rbar_packed[None, :, :]
    return np.bitwise_count(anded).sum(axis=2, dtype=np.int32)


def _violation_block_unpacked(sample_rows: np.ndarray, ref_rows: np.ndarray) -> np.ndarray:
    rbar = (1 - ref_rows).astype(np.int32)
    return sample_rows.astype(np.int32) @ rbar.T


def _ref_block_size(n_refs: int, chunk: int, bytes_per_row: int) -> int:
    block = max(1, _BLOCK_BYTES // max(1, chunk * bytes_per_row))
    return min(n_refs, block)


def violation_counts(
    samples: EncodedBatch,
    refs: EncodedBatch,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    method: str = "packed",
) -> np.ndarray:
    """Full H x R violation matrix, computed in sample chunks.

    The result is independent of ``chunk_size``. Counts fit int32 since
    the maximum violation per pair is N.
    """
    if samples.kind != "sample":
        raise ValueError("samples batch must have kind='sample'")
    if refs.kind not in ("lower_ref", "upper_ref"):
        raise ValueError("refs batch must have kind 'lower_ref' or 'upper_ref'")
    if (samples.n_components, samples.n_states) != (refs.n_components, refs.n_states):
        raise ValueError("samples and refs must share N and M")
    if len(refs) == 0:
        raise ValueError("refs batch is empty")
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    if method not in ("packed", "unpacked"):
        raise ValueError("method must be 'packed' or 'unpacked'")

    h = len(samples)
    out = np.empty((h, len(refs)), dtype=np.int32)
    for start in range(0, h, chunk_size):
        stop = min(start + chunk_size, h)
        if method == "packed":
            sp = samples.packed[start:stop]
            rbp = refs.packed_complement
            block = _ref_block_size(len(refs), stop - start, sp.shape[1])
            for r0 in range(0, len(refs), block):
                r1 = min(r0 + block, len(refs))
                out[start:stop, r0:r1] = _violation_block_packed(sp, rbp[r0:r1])
        else:
            out[start:stop] = _violation_block_unpacked(
                samples.data[start:stop], refs.data
            )
    return out


def _chunk_hits(
    sample_packed: np.ndarray,
    rbar_packed: np.ndarray,
    want_first: bool,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Zero-violation hit mask (and optionally first matching ref index) for one chunk."""
    n_chunk = sample_packed.shape[0]
    hit = np.zeros(n_chunk, dtype=bool)
    first = np.full(n_chunk, -1, dtype=np.int64) if want_first else None
    n_refs = rbar_packed.shape[0]
    block = _ref_block_size(n_refs, n_chunk, sample_packed.shape[1])
    for r0 in range(0, n_refs, block):
        v = _violation_block_packed(sample_packed, rbar_packed[r0 : r0 + block])
        zeros = v == 0
        block_hit = zeros.any(axis=1)
        if want_first:
            fresh = block_hit & ~hit
            first[fresh] = zeros[fresh].argmax(axis=1) + r0
        hit |= block_hit
    return hit, first


def _hits_for(
    samples_enc: EncodedBatch,
    ref_states: np.ndarray,
    kind: str,
    chunk_size: int,
    n_workers: int,
    want_first: bool,
) -> tuple[np.ndarray, np.ndarray | None]:
    h = len(samples_enc)
    if ref_states.shape[0] == 0:
        return np.zeros(h, dtype=bool), (np.full(h, -1) if want_first else None)
    refs_enc = encode_batch(ref_states, samples_enc.n_states, kind)
    rbar = refs_enc.packed_complement
    chunks = [(s, min(s + chunk_size, h)) for s in range(0, h, chunk_size)]

    def work(bounds: tuple[int, int]):
        s, e = bounds
        return _chunk_hits(samples_enc.packed[s:e], rbar, want_first)

    if n_workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(c) for c in chunks]

    hit = np.concatenate([r[0] for r in results])
    first = np.concatenate([r[1] for r in results]) if want_first else None
    return hit, first


@dataclass(frozen=True)
class ClassificationResult:
    """Partition of sample indices plus probability estimates.

    The three index sets are pairwise disjoint and cover 0..H-1, so the
    probability estimates partition unity at the level of integer counts.
    """

    lower_indices: np.ndarray
    upper_indices: np.ndarray
    unclassified_indices: np.ndarray
    n_samples: int
    first_match_lower: np.ndarray | None = field(default=None, compare=False)
    first_match_upper: np.ndarray | None = field(default=None, compare=False)

    @property
    def p_lower(self) -> float:
        return self.lower_indices.size / self.n_samples

    @property
    def p_upper(self) -> float:
        return self.upper_indices.size / self.n_samples

    @property
    def p_unclassified(self) -> float:
        return self.unclassified_indices.size / self.n_samples

    @property
    def cov_lower(self) -> float | None:
        return cov(self.p_lower, self.n_samples)

    @property
    def cov_upper(self) -> float | None:
        return cov(self.p_upper, self.n_samples)


def classify(
    batch: SampleBatch,
    lower_set: ReferenceSet | None,
    upper_set: ReferenceSet | None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    n_workers: int = 1,
    strict: bool = False,
    explain: bool = False,
    n_states: int | None = None,
) -> ClassificationResult:
    """Partition a sample batch against lower and upper reference sets.

    A sample is lower-classified if any lower reference gives zero
    violations; otherwise upper-classified if any upper reference does;
    otherwise unclassified. Lower takes precedence over upper, which with
    consistent reference sets cannot matter; ``strict=True`` raises on
    such an overlap instead. ``explain=True`` records the first matching
    reference index per sample (-1 where none), which is diagnostic only
    and never affects the partition.
    """
    if lower_set is not None and upper_set is not None:
        if lower_set.threshold != upper_set.threshold:
            raise ValueError(
                f"threshold mismatch: lower m'={lower_set.threshold}, "
                f"upper m'={upper_set.threshold}"
            )
    if lower_set is not None and lower_set.side != Side.LOWER:
        raise ValueError("lower_set must have side 'lower'")
    if upper_set is not None and upper_set.side != Side.UPPER:
        raise ValueError("upper_set must have side 'upper'")

    h = batch.n_samples
    if n_states is None:
        n_states = _infer_n_states(batch, lower_set, upper_set)
    samples_enc = encode_batch(batch.states, n_states, "sample")

    lower_vecs = lower_set.as_array() if lower_set is not None and len(lower_set) else np.zeros((0, batch.n_components), dtype=np.int64)
    upper_vecs = upper_set.as_array() if upper_set is not None and len(upper_set) else np.zeros((0, batch.n_components), dtype=np.int64)

    want_first = explain or strict
    lower_hit, lower_first = _hits_for(
        samples_enc, lower_vecs, "lower_ref", chunk_size, n_workers, want_first
    )
    upper_hit, upper_first = _hits_for(
        samples_enc, upper_vecs, "upper_ref", chunk_size, n_workers, want_first
    )

    if strict and bool(np.any(lower_hit & upper_hit)):
        idx = int(np.flatnonzero(lower_hit & upper_hit)[0])
        raise InconsistentReferenceSets(
            f"sample {idx} matches both a lower and an upper reference"
        )

    upper_only = upper_hit & ~lower_hit
    unclassified = ~(lower_hit | upper_hit)
    return ClassificationResult(
        lower_indices=np.flatnonzero(lower_hit),
        upper_indices=np.flatnonzero(upper_only),
        unclassified_indices=np.flatnonzero(unclassified),
        n_samples=h,
        first_match_lower=lower_first if explain else None,
        first_match_upper=upper_first if explain else None,
    )


def _infer_n_states(
    batch: SampleBatch,
    lower_set: ReferenceSet | None,
    upper_set: ReferenceSet | None,
) -> int:
    # the state count must cover every state appearing in samples or refs
    top = int(batch.states.max(initial=0))
    for s in (lower_set, upper_set):
        if s is not None and len(s):
            top = max(top, int(s.as_array().max()))
    return top + 1


def cov(p_hat: float, n_samples: int) -> float | None:
    """Coefficient of variation of a Monte Carlo frequency; None when p=0.

    The value is sqrt((1 - p) / (H * p)). At p = 0 no samples were
    classified and the relative error is undefined rather than numeric.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if not 0.0 <= p_hat <= 1.0:
        raise ValueError("p_hat must lie in [0, 1]")
    if p_hat == 0.0:
        return None
    return math.sqrt((1.0 - p_hat) / (n_samples * p_hat))
