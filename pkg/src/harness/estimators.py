"""Empirical space-time correlations from a stream of one-dimensional snapshots.

Snapshots must be equally spaced: one macroscopic time unit apart for the
sequential dynamics, or two half-sweeps apart for the sub-lattice dynamics
(so that snapshot lag ``t`` equals ``t`` update rounds).  Every snapshot is a
time origin; each origin is averaged over all ``L`` sites.

With origin ``s`` (heights ``h^s``) and lag ``t`` the products are::

    g11: (h^s_{i+2} - h^s_i)       * (h^{s+t}_{i+j+2} - h^{s+t}_{i+j})
    g22: (h^{s+1}_i - h^s_i)       * (h^{s+t+1}_{i+j} - h^{s+t}_{i+j})
    g12: (h^{s+1}_i - h^s_i)       * (h^{s+t}_{i+j+1} - h^{s+t}_{i+j-1})
    g21: (h^{s+t}_i - h^{s+t-1}_i) * (h^s_{i+j+1} - h^s_{i+j-1})

Error bars come from batch means.  By default the blocks are contiguous
segments of the ring (each averaged over all origins): equal-time gradients
are independent in space and correlations spread only over ``~sqrt(t)``
sites, so segments of thousands of sites are effectively independent.
Blocks of consecutive origins (``block_axis="time"``) are available too,
but overlapping origins are correlated with a slowly (power-law) decaying
autocorrelation, which makes time blocks underestimate the error.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numba import njit, prange

from .errors import DomainError, InsufficientDataError
from .exact import CorrelationKind

__all__ = [
    "PairCorrelationAccumulator",
    "accumulate",
    "stderr",
    "batch_means_stderr",
    "displacement_variance",
]

MIN_BLOCKS = 8


@njit(parallel=True, cache=True)
def _lagged_block_sums(a, b, shifts, bounds, out):
    # out[m, blk] = sum_{i in block} a[i] * b[(i + shifts[m]) mod n]
    n = a.shape[0]
    n_blk = bounds.shape[0] - 1
    for task in prange(shifts.shape[0] * n_blk):
        m = task // n_blk
        blk = task % n_blk
        s = shifts[m] % n
        acc = 0.0
        for i in range(bounds[blk], bounds[blk + 1]):
            k = i + s
            if k >= n:
                k -= n
            acc += a[i] * b[k]
        out[m, blk] = acc


def _grad2(h):
    return np.roll(h, -2) - h


def _centred(h):
    return np.roll(h, -1) - np.roll(h, 1)


def batch_means_stderr(block_means: np.ndarray, axis: int = -1) -> np.ndarray:
    """Standard error of the grand mean from (equal-weight) block means."""
    nb = block_means.shape[axis]
    if nb < 2:
        raise InsufficientDataError(f"need at least 2 blocks, got {nb}")
    return np.std(block_means, axis=axis, ddof=1) / np.sqrt(nb)


@dataclass
class PairCorrelationAccumulator:
    """Streaming sums for one correlation kind over lags ``t`` and offsets ``j``.

    Feed snapshots in time order with :meth:`push`.  An origin is complete
    once every snapshot it needs has arrived; incomplete trailing origins
    are never counted, so each cell's count is ``L * n_origins``.
    """

    kind: CorrelationKind
    t_max: int
    j_max: int
    lags: np.ndarray = None
    n_blocks: int = 16
    block_axis: str = "space"
    L: int = 0
    n_origins: int = 0
    block_sums: np.ndarray = None  # (n_lags, n_j, n_space_blocks)
    block_counts: np.ndarray = None  # (n_space_blocks,)
    origin_sums: list = field(default_factory=list)  # per origin: (n_lags, n_j)
    _buffer: deque = field(default=None, repr=False)

    def __post_init__(self):
        self.kind = CorrelationKind(self.kind)
        if self.t_max < 0 or self.j_max < 0:
            raise DomainError("t_max and j_max must be >= 0")
        if self.lags is None:
            self.lags = np.arange(self.t_max + 1)
        self.lags = np.asarray(self.lags, dtype=np.int64)
        if self.lags.size == 0 or self.lags.min() < 0 or self.lags.max() > self.t_max:
            raise DomainError(f"lags must lie in [0, {self.t_max}]")
        if self.block_axis not in ("space", "time"):
            raise DomainError(f"block_axis must be 'space' or 'time', got {self.block_axis!r}")
        if self._buffer is None:
            self._buffer = deque(maxlen=self.needed)

    @property
    def js(self) -> np.ndarray:
        return np.arange(-self.j_max, self.j_max + 1, dtype=np.int64)

    @property
    def needed(self) -> int:
        """Snapshots spanned by one origin (origin included)."""
        extra = 1 if self.kind in (CorrelationKind.G22, CorrelationKind.G12) else 0
        return self.t_max + 1 + extra

    def push(self, heights: np.ndarray) -> None:
        h = np.asarray(heights, dtype=np.float64)
        if h.ndim != 1:
            raise DomainError("correlation estimators take one-dimensional snapshots")
        if self.L == 0:
            self.L = h.shape[0]
            if self.L < self.n_blocks:
                raise DomainError(f"L={self.L} smaller than the number of space blocks {self.n_blocks}")
            bounds = np.linspace(0, self.L, self.n_blocks + 1).astype(np.int64)
            self._bounds = bounds
            self.block_counts = np.zeros(self.n_blocks, dtype=np.int64)
            self.block_sums = np.zeros((len(self.lags), len(self.js), self.n_blocks))
        elif h.shape[0] != self.L:
            raise DomainError(f"snapshot length {h.shape[0]} differs from {self.L}")
        self._buffer.append(h)
        if len(self._buffer) == self.needed:
            self._process_origin(list(self._buffer))

    def extend(self, snapshots: Iterable[np.ndarray]) -> "PairCorrelationAccumulator":
        for h in snapshots:
            self.push(h)
        return self

    def _pair(self, buf, t):
        k = self.kind
        if k is CorrelationKind.G11:
            return _grad2(buf[0]), _grad2(buf[t])
        if k is CorrelationKind.G22:
            return buf[1] - buf[0], buf[t + 1] - buf[t]
        if k is CorrelationKind.G12:
            return buf[1] - buf[0], _centred(buf[t])
        if t == 0:
            return None
        return buf[t] - buf[t - 1], _centred(buf[0])

    def _process_origin(self, buf) -> None:
        js = self.js
        sums = np.full((len(self.lags), len(js), self.n_blocks), np.nan)
        out = np.empty((len(js), self.n_blocks))
        for row, t in enumerate(self.lags):
            pair = self._pair(buf, int(t))
            if pair is None:
                continue
            a, b = pair
            _lagged_block_sums(np.ascontiguousarray(a), np.ascontiguousarray(b), js, self._bounds, out)
            sums[row] = out
        self.block_sums += sums
        self.block_counts += np.diff(self._bounds)
        self.origin_sums.append(sums.sum(axis=2))
        self.n_origins += 1

    def counts(self) -> int:
        return int(self.block_counts.sum()) if self.block_counts is not None else 0

    def mean(self) -> np.ndarray:
        """Estimates on the ``(lag, j)`` grid."""
        if self.n_origins == 0:
            raise InsufficientDataError(f"no complete origin: need {self.needed} consecutive snapshots")
        return self.block_sums.sum(axis=2) / self.counts()

    def block_means(self) -> np.ndarray:
        """Per-block estimates, block axis last."""
        if self.n_origins == 0:
            raise InsufficientDataError(f"no complete origin: need {self.needed} consecutive snapshots")
        if self.block_axis == "space":
            return self.block_sums / self.block_counts
        per_origin = np.stack(self.origin_sums)  # (n_origins, n_lags, n_j)
        nb = self.n_blocks
        if self.n_origins < nb:
            raise InsufficientDataError(f"{self.n_origins} origins cannot fill {nb} time blocks")
        size = self.n_origins // nb
        used = per_origin[: nb * size].reshape(nb, size, *per_origin.shape[1:])
        return np.moveaxis(used.sum(axis=1) / (size * self.L), 0, -1)

    def stderr_grid(self) -> np.ndarray:
        bm = self.block_means()
        if bm.shape[-1] < MIN_BLOCKS:
            raise InsufficientDataError(f"need at least {MIN_BLOCKS} blocks, got {bm.shape[-1]}")
        return batch_means_stderr(bm)

    def _cell(self, t: int, j: int) -> tuple[int, int]:
        rows = np.flatnonzero(self.lags == t)
        if rows.size == 0:
            raise DomainError(f"lag t={t} was not accumulated (lags: {self.lags.tolist()})")
        if abs(j) > self.j_max:
            raise DomainError(f"|j|={abs(j)} exceeds j_max={self.j_max}")
        return int(rows[0]), j + self.j_max

    def value(self, t: int, j: int) -> float:
        r, c = self._cell(t, j)
        return float(self.mean()[r, c])

    def stderr(self, t: int, j: int) -> float:
        r, c = self._cell(t, j)
        return float(self.stderr_grid()[r, c])

    def block_info(self) -> dict:
        if self.block_axis == "space":
            n = len(self.block_counts)
            return {"axis": "space", "blocks": n, "block_length": int(self.block_counts.min() // max(self.n_origins, 1))}
        return {"axis": "time", "blocks": self.n_blocks, "block_length": self.n_origins // self.n_blocks}

    def merge(self, other: "PairCorrelationAccumulator") -> "PairCorrelationAccumulator":
        """Combine two independent accumulations (e.g. replicas); blocks are concatenated."""
        same = (
            self.kind == other.kind
            and self.j_max == other.j_max
            and np.array_equal(self.lags, other.lags)
            and self.L == other.L
            and self.block_axis == other.block_axis
        )
        if not same:
            raise DomainError("accumulators differ in kind, lags, offsets, lattice size or block axis")
        merged = PairCorrelationAccumulator(
            self.kind, self.t_max, self.j_max, self.lags, self.n_blocks, self.block_axis, self.L
        )
        merged.n_origins = self.n_origins + other.n_origins
        merged.block_sums = np.concatenate([self.block_sums, other.block_sums], axis=2)
        merged.block_counts = np.concatenate([self.block_counts, other.block_counts])
        merged.origin_sums = list(self.origin_sums) + list(other.origin_sums)
        merged._bounds = self._bounds
        if self.block_axis == "space":
            merged.n_blocks = len(merged.block_counts)
        return merged


def accumulate(
    snapshots: Sequence[np.ndarray] | Iterable[np.ndarray],
    kind,
    t_max: int,
    j_max: int,
    lags=None,
    n_blocks: int = 16,
    block_axis: str = "space",
) -> PairCorrelationAccumulator:
    """Run the estimator for ``kind`` over lags ``0..t_max`` and offsets ``-j_max..j_max``."""
    acc = PairCorrelationAccumulator(CorrelationKind(kind), t_max, j_max, lags, n_blocks, block_axis)
    n = 0
    for h in snapshots:
        acc.push(h)
        n += 1
    if acc.n_origins == 0:
        raise InsufficientDataError(
            f"{acc.kind.value} up to lag {t_max} needs snapshots 0..{acc.needed - 1} "
            f"({acc.needed} in total), got {n}"
        )
    return acc


def stderr(acc: PairCorrelationAccumulator, t: int, j: int) -> float:
    """Batch-means standard error of the estimate at ``(t, j)``."""
    return acc.stderr(t, j)


def displacement_variance(snapshots: Sequence[np.ndarray], t: int) -> float:
    """Space- and origin-averaged ``E (h^{s+t}_x - h^s_x)^2`` for lag ``t`` (in snapshot steps).

    Works in any dimension; every snapshot ``s`` with ``s + t`` available is an origin.
    """
    n = len(snapshots)
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0:
        return 0.0
    if t >= n:
        raise InsufficientDataError(f"lag {t} needs at least {t + 1} snapshots, got {n}")
    total = 0.0
    for s in range(n - t):
        diff = np.asarray(snapshots[s + t]) - np.asarray(snapshots[s])
        total += float(np.mean(diff * diff))
    return total / (n - t)
