"""Binary N x M encodings of component-state vectors and flattened batch forms.

Three encodings share one layout (row n = component n, column m = state m):

* sample: one-hot, entry (n, m) = 1 iff m equals the sampled state;
* lower reference: prefix of ones, 1 iff m <= the reference state;
* upper reference: suffix of ones, 1 iff m >= the reference state.

A batch flattens each N x M matrix row-major into a length-NM row. The
flattened rows are additionally bit-packed into bytes so the violation
product reduces to popcount-of-AND; the unpacked rows are kept as the
differential-testing path. Encodings are derived data and never
serialized; reference-set files persist raw vectors instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "EncodedBatch",
    "encode_sample",
    "encode_lower_ref",
    "encode_upper_ref",
    "flatten",
    "encode_batch",
]

KINDS = ("sample", "lower_ref", "upper_ref")


def _check_states(states: np.ndarray, n_states: int) -> np.ndarray:
    arr = np.asarray(states, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= n_states):
        raise ValueError(f"states must lie in [0, {n_states - 1}]")
    return arr


def encode_sample(x: Sequence[int] | np.ndarray, n_states: int) -> np.ndarray:
    """One-hot N x M matrix of a sampled vector."""
    arr = _check_states(np.asarray(x), n_states)
    return (np.arange(n_states) == arr[:, None]).astype(np.uint8)


def encode_lower_ref(x: Sequence[int] | np.ndarray, n_states: int) -> np.ndarray:
    """Prefix-of-ones N x M matrix of a lower reference state."""
    arr = _check_states(np.asarray(x), n_states)
    return (np.arange(n_states) <= arr[:, None]).astype(np.uint8)


def encode_upper_ref(x: Sequence[int] | np.ndarray, n_states: int) -> np.ndarray:
    """Suffix-of-ones N x M matrix of an upper reference state."""
    arr = _check_states(np.asarray(x), n_states)
    return (np.arange(n_states) >= arr[:, None]).astype(np.uint8)


@dataclass(frozen=True)
class EncodedBatch:
    """Flattened binary matrices for a batch of samples or reference states.

    ``data`` has one row per item, each the row-major flattening of the
    item's N x M matrix. The bit-packed form is built lazily and cached.
    """

    data: np.ndarray  # K x (N*M) uint8
    kind: str
    n_components: int
    n_states: int

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.data.ndim != 2 or self.data.shape[1] != self.n_components * self.n_states:
            raise ValueError("data must be K x (N*M)")

    def __len__(self) -> int:
        return self.data.shape[0]

    @property
    def packed(self) -> np.ndarray:
        """Rows packed 8 bits per byte (big-endian within bytes, zero padded)."""
        cached = getattr(self, "_packed", None)
        if cached is None:
            cached = np.packbits(self.data, axis=1)
            object.__setattr__(self, "_packed", cached)
        return cached

    @property
    def packed_complement(self) -> np.ndarray:
        """Bit-packed elementwise complement; pad bits stay zero."""
        cached = getattr(self, "_packed_complement", None)
        if cached is None:
            cached = np.packbits(1 - self.data, axis=1)
            object.__setattr__(self, "_packed_complement", cached)
        return cached

    def decode_states(self) -> np.ndarray:
        """Recover the K x N state matrix (argmax per component row for samples)."""
        cube = self.data.reshape(len(self), self.n_components, self.n_states)
        if self.kind == "sample":
            return cube.argmax(axis=2)
        if self.kind == "lower_ref":
            return cube.sum(axis=2) - 1
        return self.n_states - cube.sum(axis=2)


def flatten(
    matrices: Sequence[np.ndarray] | np.ndarray,
    kind: str,
    n_components: int | None = None,
    n_states: int | None = None,
) -> EncodedBatch:
    """Stack per-item N x M matrices into an EncodedBatch.

    An empty batch requires explicit ``n_components`` and ``n_states``.
    """
    items = list(matrices)
    if not items:
        if n_components is None or n_states is None:
            raise ValueError("empty batch needs explicit n_components and n_states")
        data = np.zeros((0, n_components * n_states), dtype=np.uint8)
        return EncodedBatch(data, kind, n_components, n_states)
    shape = items[0].shape
    if any(m.shape != shape for m in items):
        raise ValueError("heterogeneous matrix shapes in batch")
    n, m = shape
    if n_components is not None and n_components != n:
        raise ValueError(f"matrices are {n} x {m}, expected n_components={n_components}")
    if n_states is not None and n_states != m:
        raise ValueError(f"matrices are {n} x {m}, expected n_states={n_states}")
    data = np.stack(items).reshape(len(items), n * m).astype(np.uint8)
    return EncodedBatch(data, kind, n, m)


def encode_batch(states: np.ndarray, n_states: int, kind: str) -> EncodedBatch:
    """Vectorized encoding of a K x N state matrix straight to flattened form."""
    arr = _check_states(np.asarray(states), n_states)
    if arr.ndim != 2:
        raise ValueError("states must be a K x N matrix")
    k, n = arr.shape
    grid = np.arange(n_states)
    if kind == "sample":
        cube = grid == arr[:, :, None]
    elif kind == "lower_ref":
        cube = grid <= arr[:, :, None]
    elif kind == "upper_ref":
        cube = grid >= arr[:, :, None]
    else:
        raise ValueError(f"kind must be one of {KINDS}")
    return EncodedBatch(cube.reshape(k, n * n_states).astype(np.uint8), kind, n, n_states)
