import math

import numba
import numpy as np
import pytest

from harness.errors import DomainError
from harness.simulator import (
    SEQUENTIAL,
    SUBLATTICE,
    CounterRNG,
    InterfaceState,
    SimConfig,
    half_sweep,
    initial_state,
    iter_snapshots,
    lattice,
    run,
    sequential_update,
)


def _colour_mask(shape, parity):
    return (np.indices(shape).sum(axis=0) % 2) == parity


@pytest.mark.parametrize("d, L, var", [(1, 1 << 21, 0.5), (2, 1024, 0.25)])
def test_half_sweep_site_rule(d, L, var):
    shape = (L,) * d
    state = InterfaceState(np.full(shape, 5.0))
    half_sweep(state, CounterRNG(42))
    upd = state.heights[_colour_mask(shape, 0)]
    n = upd.size
    assert abs(upd.mean() - 5.0) < 4 * math.sqrt(var / n)
    assert abs(upd.var() - var) < 4 * var * math.sqrt(2 / n)
    assert np.all(state.heights[_colour_mask(shape, 1)] == 5.0)
    assert state.round == 1


def test_half_sweep_alternates_colours():
    rng = CounterRNG(0)
    state = InterfaceState(np.zeros(16))
    half_sweep(state, rng)
    before = state.heights.copy()
    half_sweep(state, rng)
    assert np.array_equal(state.heights[0::2], before[0::2])
    assert not np.array_equal(state.heights[1::2], before[1::2])


def test_half_sweep_odd_length():
    with pytest.raises(DomainError):
        half_sweep(InterfaceState(np.zeros(7)), CounterRNG(0))


def test_counter_rng_addresses_rounds():
    rng = CounterRNG(9)
    assert np.array_equal(rng.normals(3, 100), CounterRNG(9).normals(3, 100))
    assert np.array_equal(rng.normals(3, 100)[:10], rng.normals(3, 10))
    assert not np.array_equal(rng.normals(3, 10), rng.normals(4, 10))


def test_half_sweep_independent_of_thread_count():
    h0 = np.random.default_rng(1).standard_normal(1 << 12)
    outs = []
    for n in sorted({1, numba.config.NUMBA_NUM_THREADS}):
        numba.set_num_threads(n)
        s = InterfaceState(h0.copy())
        rng = CounterRNG(77)
        for _ in range(6):
            half_sweep(s, rng)
        outs.append(s.heights)
    numba.set_num_threads(numba.config.NUMBA_NUM_THREADS)
    assert all(np.array_equal(outs[0], o) for o in outs)


def test_sequential_zero_and_single_update():
    h0 = np.random.default_rng(3).standard_normal(64)
    s = InterfaceState(h0.copy())
    sequential_update(s, np.random.default_rng(0), 0)
    assert np.array_equal(s.heights, h0)
    sequential_update(s, np.random.default_rng(0), 1)
    assert np.count_nonzero(s.heights != h0) == 1
    assert s.micro == 1
    with pytest.raises(DomainError):
        sequential_update(s, np.random.default_rng(0), -1)


def test_lattice_tables():
    lat = lattice(4, 2)
    assert lat.neighbors.shape == (16, 4)
    # site (0, 0) = 0 has neighbours (3,0), (1,0), (0,3), (0,1)
    assert sorted(lat.neighbors[0].tolist()) == [1, 3, 4, 12]
    assert len(lat.colour[0]) == len(lat.colour[1]) == 8
    with pytest.raises(DomainError):
        lattice(1, 1)


@pytest.mark.parametrize("dynamics, stride", [(SUBLATTICE, 2), (SEQUENTIAL, 1)])
def test_stationarity(dynamics, stride):
    cfg = SimConfig(L=1 << 15, dynamics=dynamics, seed=4, measure_rounds=30 * stride, snapshot_stride=30 * stride)
    h = list(iter_snapshots(cfg))[-1][1]
    g = np.roll(h, -1) - h
    n = g.size
    assert abs(np.mean(g * g) - 1.0) < 4 * math.sqrt(2 / n)
    assert abs(np.mean(g * np.roll(g, -2))) < 4 * math.sqrt(1 / n)


def test_snapshot_times():
    cfg = SimConfig(L=16, dynamics=SUBLATTICE, measure_rounds=8, snapshot_stride=2, warmup_rounds=4)
    times = [t for t, _ in iter_snapshots(cfg)]
    assert times == [4.0, 6.0, 8.0, 10.0, 12.0]
    cfg = SimConfig(L=16, dynamics=SEQUENTIAL, measure_rounds=3, snapshot_stride=1)
    assert [t for t, _ in iter_snapshots(cfg)] == [0.0, 1.0, 2.0, 3.0]


@pytest.mark.parametrize("dynamics", [SUBLATTICE, SEQUENTIAL])
def test_run_is_deterministic(dynamics):
    cfg = SimConfig(L=128, d=2 if dynamics == SUBLATTICE else 1, dynamics=dynamics, seed=123,
                    measure_rounds=4, snapshot_stride=2)
    a, b = [], []
    run(cfg, lambda t, h: a.append(h.tobytes()))
    run(cfg, lambda t, h: b.append(h.tobytes()))
    assert a == b
    c = []
    run(SimConfig(L=128, d=cfg.d, dynamics=dynamics, seed=124, measure_rounds=4, snapshot_stride=2),
        lambda t, h: c.append(h.tobytes()))
    assert a != c


def test_replicas_differ():
    cfg = SimConfig(L=64, dynamics=SEQUENTIAL, seed=5, measure_rounds=1, snapshot_stride=1)
    a = list(iter_snapshots(cfg, replica=0))[-1][1]
    b = list(iter_snapshots(cfg, replica=1))[-1][1]
    assert not np.array_equal(a, b)


def test_config_validation():
    for kwargs in (
        dict(L=7),
        dict(L=8, dynamics="parallel"),
        dict(L=8, d=0),
        dict(L=8, warmup_rounds=-1),
        dict(L=8, snapshot_stride=0),
        dict(L=8, initial="random"),
    ):
        with pytest.raises(DomainError):
            SimConfig(**kwargs)


def test_flat_initial_condition():
    cfg = SimConfig(L=32, d=2, initial="flat")
    s = initial_state(cfg, np.random.default_rng(0))
    assert s.heights.shape == (32, 32) and not s.heights.any()
    assert s.parity == 0 and s.L == 32 and s.d == 2
    assert s.copy().heights is not s.heights
