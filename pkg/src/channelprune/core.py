"""Dense matrix primitives and attention reconstruction error.

A `ChannelMatrix` stores tokens in rows and channels in columns. Pruning a
set of channels zeroes those columns in both the query and key matrices;
the resulting change in the pre-softmax attention product Q @ K.T is the
quantity every selection algorithm in this package tries to minimize.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Iterator

import numpy as np

if TYPE_CHECKING:
    from .graph import InteractionGraph

__all__ = [
    "ChannelMatrix",
    "IndexSet",
    "column_dot",
    "decomposed_error_sq",
    "reconstruction_error_sq",
]


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Immutable 2-d float64 matrix with a column-as-channel view.

    The constructor copies and freezes the underlying buffer, so instances
    are safe to share across threads. Entries must be finite.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-d array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"matrix must have at least one row and one column, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            r, c = np.argwhere(~np.isfinite(arr))[0]
            raise ValueError(f"non-finite entry at row {r}, col {c}")
        if arr is self.data:
            arr = arr.copy()  # never alias a caller-owned buffer
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def column(self, j: int) -> np.ndarray:
        """Return a writable copy of channel j."""
        if not 0 <= j < self.cols:
            raise IndexError(f"channel index {j} out of range for {self.cols} columns")
        return self.data[:, j].copy()

    @classmethod
    def from_columns(cls, columns: Iterable[Iterable[float]]) -> "ChannelMatrix":
        """Build a matrix from per-channel column vectors."""
        return cls(np.column_stack([np.asarray(c, dtype=np.float64) for c in columns]))


@dataclass(frozen=True)
class IndexSet:
    """Ordered collection of distinct channel indices."""

    indices: tuple[int, ...]
    _members: frozenset[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise ValueError(f"negative channel index in {idx}")
        members = frozenset(idx)
        if len(members) != len(idx):
            raise ValueError(f"duplicate channel index in {idx}")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "_members", members)

    @classmethod
    def empty(cls) -> "IndexSet":
        return cls(())

    @classmethod
    def of(cls, *indices: int) -> "IndexSet":
        return cls(indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, item: object) -> bool:
        return item in self._members

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    def validate_within(self, dim: int) -> None:
        """Raise IndexError unless every index is in [0, dim)."""
        for i in self.indices:
            if i >= dim:
                raise IndexError(f"channel index {i} out of range for dimension {dim}")


def _check_channel(m: ChannelMatrix, j: int) -> None:
    if not 0 <= j < m.cols:
        raise IndexError(f"channel index {j} out of range for {m.cols} columns")


def column_dot(m: ChannelMatrix, i: int, j: int) -> float:
    """Inner product of channels i and j of the same matrix."""
    _check_channel(m, i)
    _check_channel(m, j)
    return float(m.data[:, i] @ m.data[:, j])


def reconstruction_error_sq(q: ChannelMatrix, k: ChannelMatrix, pruned: IndexSet) -> float:
    """Squared Frobenius error of the attention product after pruning.

    Computes ||Q K^T - Q S K^T||_F^2 directly from the matrices, where S is
    the diagonal selector that zeroes the pruned channels. This is the
    ground-truth evaluation that the graph-based decomposition must match.
    """
    if q.cols != k.cols:
        raise ValueError(f"channel count mismatch: q has {q.cols}, k has {k.cols}")
    pruned.validate_within(q.cols)
    if len(pruned) == 0:
        return 0.0
    full = q.data @ k.data.T
    kept_q = q.data.copy()
    kept_q[:, pruned.as_array()] = 0.0
    diff = full - kept_q @ k.data.T
    return float(np.sum(diff * diff))


def decomposed_error_sq(g: "InteractionGraph", pruned: IndexSet) -> float:
    """Pruning error as self-importance plus pairwise interaction terms.

    Sums W_ii over the pruned set, then adds every cross term W_ij (i != j)
    within the set. Equals `reconstruction_error_sq` on the matrices the
    graph was built from, up to floating-point roundoff.
    """
    pruned.validate_within(g.dim)
    if len(pruned) == 0:
        return 0.0
    idx = pruned.as_array()
    sub = g.w[np.ix_(idx, idx)]
    self_terms = float(np.trace(sub))
    cross = sub.copy()
    np.fill_diagonal(cross, 0.0)
    return self_terms + float(cross.sum())
