"""Heat-bath dynamics of the Gaussian interface on ``(Z/L)^d``.

Two update schemes share the same single-site rule: the new height is the
neighbour average plus a Gaussian of variance ``1/(2d)``.

* sub-lattice parallel: one half-sweep resamples every site of one
  checkerboard colour at once, colours alternating;
* random sequential: ``n`` micro-updates, each at a uniformly chosen site.
  ``L^d`` micro-updates make one unit of macroscopic time (rate-one clocks).

Reproducibility.  Half-sweep noise comes from a Philox counter generator
keyed by the run seed with the round number in the high counter words, so
round ``r`` always receives the same normals in site order no matter how
many threads apply them.  The sequential scheme draws sites and normals
from one ordinary PCG64 stream in fixed-size chunks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator

import numba
import numpy as np
from numba import njit, prange

from .errors import DomainError
from .spectral import sample_equilibrium

__all__ = [
    "SUBLATTICE",
    "SEQUENTIAL",
    "InterfaceState",
    "SimConfig",
    "CounterRNG",
    "Lattice",
    "lattice",
    "half_sweep",
    "sequential_update",
    "initial_state",
    "iter_snapshots",
    "run",
]

log = logging.getLogger(__name__)

SUBLATTICE = "sublattice"
SEQUENTIAL = "sequential"
_CHUNK = 1 << 18

# the bundled TBB is too old for numba; skip probing it
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@dataclass
class Lattice:
    """Neighbour table and checkerboard colour classes for a periodic cube."""

    L: int
    d: int
    neighbors: np.ndarray  # (L**d, 2d) flat indices
    colour: tuple[np.ndarray, np.ndarray]  # flat indices with sum(coords) even / odd

    @property
    def n_sites(self) -> int:
        return self.L**self.d


@lru_cache(maxsize=16)
def lattice(L: int, d: int) -> Lattice:
    if L < 2:
        raise DomainError(f"L must be >= 2, got {L}")
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    shape = (L,) * d
    flat = np.arange(L**d).reshape(shape)
    nbrs = []
    for axis in range(d):
        for step in (-1, 1):
            nbrs.append(np.roll(flat, -step, axis=axis).ravel())
    neighbors = np.ascontiguousarray(np.stack(nbrs, axis=1), dtype=np.int64)
    coords = np.indices(shape).reshape(d, -1)
    parity = coords.sum(axis=0) % 2
    colour = (np.flatnonzero(parity == 0), np.flatnonzero(parity == 1))
    return Lattice(L, d, neighbors, colour)


@dataclass
class InterfaceState:
    """Heights on ``(Z/L)^d`` with update counters.

    ``round`` counts half-sweeps (the next half-sweep updates the colour
    with ``sum(coords) + round`` even); ``micro`` counts sequential
    micro-updates.
    """

    heights: np.ndarray
    round: int = 0
    micro: int = 0

    @property
    def L(self) -> int:
        return self.heights.shape[0]

    @property
    def d(self) -> int:
        return self.heights.ndim

    @property
    def parity(self) -> int:
        return self.round % 2

    def copy(self) -> "InterfaceState":
        return InterfaceState(self.heights.copy(), self.round, self.micro)


class CounterRNG:
    """Normals addressed by ``(key, round, position)``.

    The 128-bit Philox key is derived from ``seed`` through
    :class:`numpy.random.SeedSequence`; the counter starts at
    ``[0, 0, round, 0]`` so distinct rounds never share a block.
    """

    def __init__(self, seed):
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        self.key = ss.generate_state(2, dtype=np.uint64)

    def normals(self, round_: int, n: int) -> np.ndarray:
        counter = np.array([0, 0, round_, 0], dtype=np.uint64)
        bitgen = np.random.Philox(key=self.key, counter=counter)
        return np.random.Generator(bitgen).standard_normal(n)


@njit(parallel=True, cache=True)
def _resample_parallel(h, neighbors, sites, z, sigma, inv_deg):
    for m in prange(sites.shape[0]):
        i = sites[m]
        s = 0.0
        for q in range(neighbors.shape[1]):
            s += h[neighbors[i, q]]
        h[i] = s * inv_deg + sigma * z[m]


@njit(cache=True)
def _resample_sequential(h, neighbors, sites, z, sigma, inv_deg):
    for m in range(sites.shape[0]):
        i = sites[m]
        s = 0.0
        for q in range(neighbors.shape[1]):
            s += h[neighbors[i, q]]
        h[i] = s * inv_deg + sigma * z[m]


def half_sweep(state: InterfaceState, rng: CounterRNG) -> InterfaceState:
    """Resample every site with ``sum(coords) + round`` even, in place; then ``round += 1``."""
    L, d = state.L, state.d
    if L % 2:
        raise DomainError(f"sub-lattice dynamics needs even L, got {L}")
    lat = lattice(L, d)
    sites = lat.colour[state.round % 2]
    z = rng.normals(state.round, sites.shape[0])
    h = state.heights.reshape(-1)
    _resample_parallel(h, lat.neighbors, sites, z, np.sqrt(0.5 / d), 1.0 / (2 * d))
    state.round += 1
    return state


def sequential_update(state: InterfaceState, rng: np.random.Generator, n_micro: int) -> InterfaceState:
    """Apply ``n_micro`` random-sequential heat-bath updates in place."""
    if n_micro < 0:
        raise DomainError(f"n_micro must be >= 0, got {n_micro}")
    lat = lattice(state.L, state.d)
    h = state.heights.reshape(-1)
    sigma, inv_deg = np.sqrt(0.5 / state.d), 1.0 / (2 * state.d)
    left = n_micro
    while left > 0:
        c = min(left, _CHUNK)
        sites = rng.integers(0, lat.n_sites, size=c)
        z = rng.standard_normal(c)
        _resample_sequential(h, lat.neighbors, sites, z, sigma, inv_deg)
        left -= c
    state.micro += n_micro
    return state


@dataclass(frozen=True)
class SimConfig:
    """Run parameters.

    ``warmup_rounds``, ``measure_rounds`` and ``snapshot_stride`` are in
    half-sweeps for sub-lattice dynamics and in macroscopic time units
    (``L^d`` micro-updates) for sequential dynamics.
    """

    L: int
    d: int = 1
    dynamics: str = SUBLATTICE
    seed: int = 0
    warmup_rounds: int = 0
    measure_rounds: int = 0
    snapshot_stride: int = 2
    replicas: int = 1
    initial: str = "equilibrium"

    def __post_init__(self):
        if self.dynamics not in (SUBLATTICE, SEQUENTIAL):
            raise DomainError(f"unknown dynamics {self.dynamics!r}")
        if self.L < 2 or (self.dynamics == SUBLATTICE and self.L % 2):
            raise DomainError(f"L must be even and >= 2 for {self.dynamics} dynamics, got {self.L}")
        if self.initial == "equilibrium" and self.L % 2:
            raise DomainError("equilibrium sampling needs even L")
        if self.d < 1:
            raise DomainError(f"d must be >= 1, got {self.d}")
        for name in ("warmup_rounds", "measure_rounds", "replicas"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        if self.snapshot_stride < 1:
            raise DomainError("snapshot_stride must be >= 1")
        if self.initial not in ("equilibrium", "flat"):
            raise DomainError(f"unknown initial condition {self.initial!r}")

    @property
    def n_snapshots(self) -> int:
        return self.measure_rounds // self.snapshot_stride + 1


def _streams(seed: int, replica: int):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(replica,))
    init, sweep, seq = ss.spawn(3)
    return np.random.default_rng(init), CounterRNG(sweep), np.random.default_rng(seq)


def initial_state(config: SimConfig, rng: np.random.Generator) -> InterfaceState:
    if config.initial == "flat":
        h = np.zeros((config.L,) * config.d)
    else:
        h = sample_equilibrium(config.L, config.d, rng)
    return InterfaceState(h)


def iter_snapshots(config: SimConfig, replica: int = 0) -> Iterator[tuple[float, np.ndarray]]:
    """Yield ``(time, heights)`` pairs; heights are fresh copies.

    Time is lattice time (half-sweeps) for sub-lattice dynamics and
    macroscopic time for sequential dynamics, counted from the start of the
    run (warmup included).
    """
    init_rng, sweep_rng, seq_rng = _streams(config.seed, replica)
    state = initial_state(config, init_rng)
    n_sites = config.L**config.d

    def advance(units: int) -> None:
        if config.dynamics == SUBLATTICE:
            for _ in range(units):
                half_sweep(state, sweep_rng)
        else:
            sequential_update(state, seq_rng, units * n_sites)

    advance(config.warmup_rounds)
    clock = config.warmup_rounds
    log.debug("replica %d: %d snapshots of %d sites", replica, config.n_snapshots, n_sites)
    for k in range(config.n_snapshots):
        if k:
            advance(config.snapshot_stride)
            clock += config.snapshot_stride
        yield float(clock), state.heights.copy()


def run(config: SimConfig, observer: Callable[[float, np.ndarray], None], replica: int = 0) -> None:
    """Drive one replica and hand every snapshot to ``observer(time, heights)``."""
    for time, h in iter_snapshots(config, replica):
        observer(time, h)
