import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from harness.errors import DomainError, ParityError, ZeroModeError
from harness.spectral import (
    ModeIndex,
    TorusSpec,
    equilibrium_gradient_variance,
    gamma,
    gamma_grid,
    is_zero_mode,
    mode_variance,
    periodic_displacement_variance,
    poisson_kernel,
    poisson_kernel_quadrature,
    sample_equilibrium,
    spatial_mode_variance,
)


def test_gamma_examples():
    s = TorusSpec(16, 12)
    assert gamma(s, (0, 0)) == 0.0
    assert gamma(s, (8, 0)) == pytest.approx(4.0)
    assert gamma(s, (4, 3)) == pytest.approx(1.0)


def test_mode_variance_examples():
    s = TorusSpec(16, 12)
    assert mode_variance(s, (8, 0)) == pytest.approx(1 / 16)
    assert mode_variance(s, ModeIndex.of(s, 4, 3)) == pytest.approx(1 / 4)
    with pytest.raises(ZeroModeError, match="zero-mode"):
        mode_variance(s, (0, 0))
    with pytest.raises(ZeroModeError):
        mode_variance(s, (8, 6))


def test_gamma_in_higher_dimension():
    s = TorusSpec(8, 8, d=2)
    # c(k) = (cos(pi/2) + cos(0)) / 2 = 1/2
    assert gamma(s, (2, (2, 0))) == pytest.approx(1 - 0 + 0.25)
    assert is_zero_mode(s, (4, (4, 4)))
    assert not is_zero_mode(s, (4, (4, 0)))
    with pytest.raises(DomainError):
        ModeIndex.of(s, 0, 1)


def test_torus_validation():
    for bad in ((3, 4), (4, 5), (0, 4)):
        with pytest.raises(DomainError):
            TorusSpec(*bad)
    with pytest.raises(DomainError):
        TorusSpec(4, 4, d=0)


def test_mode_index_reduces():
    s = TorusSpec(8, 6)
    assert ModeIndex.of(s, -1, 7) == ModeIndex(7, (1,))


torus = st.tuples(st.integers(1, 12), st.integers(1, 12)).map(lambda p: TorusSpec(2 * p[0], 2 * p[1]))


@given(torus, st.integers(0, 10**6), st.integers(0, 10**6))
def test_gamma_nonnegative_and_orbit_symmetric(s, nu, k):
    g = gamma(s, (nu, k))
    assert g >= 0.0
    assert (g == 0.0) == is_zero_mode(s, (nu, k))
    assert gamma(s, (s.T - nu, s.L - k)) == pytest.approx(g, abs=1e-12)
    assert gamma(s, (nu + s.T // 2, k + s.L // 2)) == pytest.approx(g, abs=1e-12)


@given(torus)
def test_gamma_grid_matches_pointwise(s):
    g = gamma_grid(s)
    for nu in range(0, s.T, max(1, s.T // 4)):
        for k in range(0, s.L, max(1, s.L // 4)):
            assert g[nu, k] == pytest.approx(gamma(s, (nu, k)), abs=1e-14)


@pytest.mark.parametrize("L, j, want", [(4, 2, 1.0), (4, 1, 0.75), (8, 0, 0.0), (12, 5, 35 / 12)])
def test_equilibrium_gradient_variance(L, j, want):
    assert equilibrium_gradient_variance(L, j) == pytest.approx(want, abs=1e-12)


@given(st.integers(2, 40).flatmap(lambda h: st.tuples(st.just(2 * h), st.integers(0, 2 * h - 1))))
def test_equal_time_sums_are_bridge_variance(q):
    L, j = q
    assert equilibrium_gradient_variance(L, j) == pytest.approx(j * (L - j) / L, abs=1e-10)


def test_periodic_variance_examples():
    assert periodic_displacement_variance(TorusSpec(256, 4), 2) == pytest.approx(1.0, abs=0.02)
    assert periodic_displacement_variance(TorusSpec(16, 8), 0) == 0.0
    with pytest.raises(ParityError):
        periodic_displacement_variance(TorusSpec(16, 8), 3, parity="even")


def test_periodic_variance_converges_like_one_over_T():
    L = 8
    for j in (2, 3):
        gaps = [abs(periodic_displacement_variance(TorusSpec(T, L), j) - equilibrium_gradient_variance(L, j))
                for T in (64, 128, 256, 512)]
        assert all(a >= b for a, b in zip(gaps, gaps[1:]))
        scaled = [g * T for g, T in zip(gaps, (64, 128, 256, 512))]
        assert max(scaled) <= 2 * scaled[0] + 1e-9


def test_poisson_kernel_examples():
    assert poisson_kernel(0.5, 2) == pytest.approx(1 / 3)
    assert poisson_kernel(0.0, 0) == 1.0
    assert poisson_kernel(0.9, 10) == pytest.approx(1.8351497, abs=5e-8)
    with pytest.raises(DomainError):
        poisson_kernel(1.0, 0)
    with pytest.raises(DomainError):
        poisson_kernel_quadrature(-1.2, 0)


@given(st.floats(-0.95, 0.95), st.integers(0, 30))
def test_poisson_kernel_quadrature(a, n):
    assert abs(poisson_kernel_quadrature(a, n) - poisson_kernel(a, n)) < 1e-10


def test_spatial_mode_variance():
    v = spatial_mode_variance(8, 1)
    assert v[0] == 0.0
    assert v[4] == pytest.approx(1 / 4)
    v2 = spatial_mode_variance(4, 2)
    assert v2[0, 0] == 0.0
    assert v2[2, 2] == pytest.approx(1 / 8)


def test_sample_equilibrium_small_ring():
    rng = np.random.default_rng(2024)
    samples = np.stack([sample_equilibrium(4, 1, rng) for _ in range(10_000)])
    d2 = np.mean((samples[:, 2] - samples[:, 0]) ** 2)
    d1 = np.mean((samples[:, 1] - samples[:, 0]) ** 2)
    assert d2 == pytest.approx(1.0, rel=0.05)
    assert d1 == pytest.approx(0.75, rel=0.05)


def test_sample_equilibrium_gradients():
    rng = np.random.default_rng(7)
    L = 4096
    acc = []
    for _ in range(500):
        h = sample_equilibrium(L, 1, rng)
        g = np.roll(h, -1) - h
        assert abs(g.sum()) < 1e-9
        acc.append(np.mean(g * g))
    assert np.mean(acc) == pytest.approx((L - 1) / L, rel=0.05)


@pytest.mark.parametrize("L, j", [(64, 1), (64, 2), (64, 5), (16, 8)])
def test_sample_equilibrium_matches_mode_sums(L, j):
    rng = np.random.default_rng(L * 100 + j)
    x = np.concatenate([(np.roll(h, -j) - h) ** 2 for h in (sample_equilibrium(L, 1, rng) for _ in range(400))])
    # each ring contributes L correlated terms; use per-ring means for the error bar
    per_ring = x.reshape(400, L).mean(axis=1)
    se = per_ring.std(ddof=1) / math.sqrt(len(per_ring))
    assert abs(per_ring.mean() - equilibrium_gradient_variance(L, j)) < 4 * se


def test_sample_equilibrium_reproducible_and_zero_mean():
    a = sample_equilibrium(32, 2, 5)
    b = sample_equilibrium(32, 2, np.random.SeedSequence(5))
    assert np.array_equal(a, b)
    assert abs(a.mean()) < 1e-12
    assert a.shape == (32, 32)
    with pytest.raises(DomainError):
        sample_equilibrium(7, 1, 0)
