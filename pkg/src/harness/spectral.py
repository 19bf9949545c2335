"""Fourier-side quantities: space-time eigenvalues, mode variances, equal-time sums.

Conventions follow the time-periodic Gaussian field on the even space-time
sub-lattice ``{(t, i) : t + i even}`` of the torus ``Z/T x (Z/L)^d``.  With
``c(k) = (1/d) sum_n cos(2 pi k_n / L)`` the quadratic form is diagonal in
Fourier space with eigenvalue::

    gamma(nu, k) = 1 - 2 cos(2 pi nu / T) c(k) + c(k)^2

and every mode outside the zero orbit ``{(0, 0), (T/2, L/2)}`` has
``E|h_hat|^2 = 1 / (4 gamma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParityError, ZeroModeError

__all__ = [
    "TorusSpec",
    "ModeIndex",
    "gamma",
    "gamma_grid",
    "is_zero_mode",
    "mode_variance",
    "equilibrium_gradient_variance",
    "periodic_displacement_variance",
    "poisson_kernel",
    "poisson_kernel_quadrature",
    "spatial_mode_variance",
    "sample_equilibrium",
]


@dataclass(frozen=True)
class TorusSpec:
    T: int
    L: int
    d: int = 1

    def __post_init__(self):
        if self.T <= 0 or self.T % 2:
            raise DomainError(f"T must be a positive even integer, got {self.T}")
        if self.L <= 0 or self.L % 2:
            raise DomainError(f"L must be a positive even integer, got {self.L}")
        if self.d < 1:
            raise DomainError(f"d must be >= 1, got {self.d}")


@dataclass(frozen=True)
class ModeIndex:
    """Fourier label ``(nu, k)``; ``k`` is a tuple with one entry per spatial axis."""

    nu: int
    k: tuple[int, ...]

    @classmethod
    def of(cls, spec: TorusSpec, nu: int, k) -> "ModeIndex":
        ks = (k,) if np.isscalar(k) else tuple(k)
        if len(ks) != spec.d:
            raise DomainError(f"mode has {len(ks)} spatial components, torus has d={spec.d}")
        return cls(int(nu) % spec.T, tuple(int(x) % spec.L for x in ks))


def _mode(spec: TorusSpec, m) -> ModeIndex:
    if isinstance(m, ModeIndex):
        return ModeIndex.of(spec, m.nu, m.k)
    nu, k = m
    return ModeIndex.of(spec, nu, k)


def _c(spec: TorusSpec, k: tuple[int, ...]) -> float:
    return sum(math.cos(2.0 * math.pi * kn / spec.L) for kn in k) / spec.d


def gamma(spec: TorusSpec, m) -> float:
    """Eigenvalue of the space-time quadratic form at mode ``m`` (a ModeIndex or ``(nu, k)``)."""
    m = _mode(spec, m)
    c = _c(spec, m.k)
    g = 1.0 - 2.0 * math.cos(2.0 * math.pi * m.nu / spec.T) * c + c * c
    # exact zero on the zero orbit; tiny negative rounding elsewhere is impossible
    # since gamma >= (1 - |c|)^2 > 0 there
    return 0.0 if is_zero_mode(spec, m) else g


def gamma_grid(spec: TorusSpec) -> np.ndarray:
    """``gamma`` on the full ``(T, L)`` grid for ``d = 1``, indexed ``[nu, k]``."""
    if spec.d != 1:
        raise DomainError("gamma_grid is only defined for d = 1")
    w = 2.0 * np.pi * np.arange(spec.T) / spec.T
    c = np.cos(2.0 * np.pi * np.arange(spec.L) / spec.L)
    g = 1.0 - 2.0 * np.cos(w)[:, None] * c[None, :] + c[None, :] ** 2
    g[0, 0] = 0.0
    g[spec.T // 2, spec.L // 2] = 0.0
    return g


def is_zero_mode(spec: TorusSpec, m) -> bool:
    m = m if isinstance(m, ModeIndex) else _mode(spec, m)
    if m.nu == 0 and all(kn == 0 for kn in m.k):
        return True
    return m.nu == spec.T // 2 and all(kn == spec.L // 2 for kn in m.k)


def mode_variance(spec: TorusSpec, m) -> float:
    """``E|h_hat(nu, k)|^2 = 1 / (4 gamma)``; the zero orbit carries Lebesgue measure."""
    m = _mode(spec, m)
    if is_zero_mode(spec, m):
        raise ZeroModeError(f"mode (nu={m.nu}, k={m.k}) is in the zero-mode orbit, which is not normalizable")
    return 1.0 / (4.0 * gamma(spec, m))


def equilibrium_gradient_variance(L: int, j: int) -> float:
    """``E (h_j - h_0)^2`` under the equilibrium measure on a ring of ``L`` sites.

    Uses the parity-split mode sums (modes ``k = 0`` and ``k = L/2`` dropped)::

        even j:  (1/L) sum (1 - cos(2 pi k j/L)) / (1 - cos^2(2 pi k/L))
        odd j:   1/L + (1/L) sum (1 - cos(2 pi k j/L) cos(2 pi k/L)) / (1 - cos^2(2 pi k/L))

    Both equal the bridge variance ``j (L - j) / L``.
    """
    if L <= 0 or L % 2:
        raise DomainError(f"L must be a positive even integer, got {L}")
    if not 0 <= j < L:
        raise DomainError(f"need 0 <= j < L, got j={j}, L={L}")
    k = np.array([k for k in range(1, L) if k != L // 2], dtype=np.float64)
    ck = np.cos(2.0 * np.pi * k / L)
    ckj = np.cos(2.0 * np.pi * k * j / L)
    if j % 2 == 0:
        terms = (1.0 - ckj) / (1.0 - ck * ck)
        return float(np.sum(terms)) / L
    terms = (1.0 - ckj * ck) / (1.0 - ck * ck)
    return (1.0 + float(np.sum(terms))) / L


def periodic_displacement_variance(spec: TorusSpec, j: int, parity: str | None = None) -> float:
    """Finite-(T, L) mode sum for the equal-time (even ``j``) or one-step (odd ``j``) variance.

    Even ``j``: ``E_per (h^0_j - h^0_0)^2``; odd ``j``: ``E_per (h^1_j - h^0_0)^2``.
    Both are ``(1/LT) sum (1 - cos theta) / gamma`` over modes off the zero orbit,
    with ``theta = 2 pi k j / L + 2 pi nu tau / T`` and ``tau = j mod 2``.
    Converges to :func:`equilibrium_gradient_variance` as ``T -> inf``.
    """
    if spec.d != 1:
        raise DomainError("periodic_displacement_variance is only defined for d = 1")
    tau = j % 2
    if parity is not None:
        want = {"even": 0, "odd": 1}[parity]
        if want != tau:
            raise ParityError(f"parity={parity!r} does not match j={j}")
    g = gamma_grid(spec)
    nu = np.arange(spec.T)[:, None]
    k = np.arange(spec.L)[None, :]
    theta = 2.0 * np.pi * (k * j / spec.L + nu * tau / spec.T)
    mask = g > 0.0
    terms = np.where(mask, (1.0 - np.cos(theta)) / np.where(mask, g, 1.0), 0.0)
    return float(np.sum(terms)) / (spec.L * spec.T)


def poisson_kernel(a: float, n: int) -> float:
    """Closed form ``a^n / (1 - a^2)`` of ``(1/2pi) int cos(n w) / (1 - 2a cos w + a^2) dw``."""
    if not abs(a) < 1.0:
        raise DomainError(f"need |a| < 1, got a={a}")
    if n < 0:
        raise DomainError(f"need n >= 0, got n={n}")
    return a**n / (1.0 - a * a)


def poisson_kernel_quadrature(a: float, n: int) -> float:
    """The same integral by the periodic trapezoid rule.

    The integrand is analytic and periodic, so the rule converges like
    ``|a|^N``; ``N`` is chosen so that ``|a|^N < 1e-17`` (at least ``64 + 4n``).
    """
    if not abs(a) < 1.0:
        raise DomainError(f"need |a| < 1, got a={a}")
    if abs(a) > 0.0:
        n_nodes = int(math.ceil(40.0 / -math.log(abs(a))))
    else:
        n_nodes = 0
    n_nodes = max(n_nodes + 2 * n, 64 + 4 * n)
    w = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    return float(np.mean(np.cos(n * w) / (1.0 - 2.0 * a * np.cos(w) + a * a)))


def spatial_mode_variance(L: int, d: int = 1) -> np.ndarray:
    """``E|h_hat_k|^2 = 1 / (2d (1 - c(k)))`` for the equilibrium measure, zero mode set to 0.

    Returned on the ``(L,)*d`` grid in :func:`numpy.fft.fftn` ordering.
    """
    c1 = np.cos(2.0 * np.pi * np.arange(L) / L)
    c = np.zeros((L,) * d)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = L
        c = c + c1.reshape(shape)
    c = c / d
    lam = 2.0 * d * (1.0 - c)
    lam.flat[0] = np.inf
    return 1.0 / lam


def sample_equilibrium(L: int, d: int = 1, seed=None) -> np.ndarray:
    """Draw heights from the equilibrium measure on ``(Z/L)^d`` with zero mean.

    A real white-noise field is transformed to Fourier space, each mode is
    scaled by its standard deviation and the result transformed back.  For
    real input the transform already has the conjugate-pair structure
    ``w_hat(-k) = conj(w_hat(k))``: paired modes have independent real and
    imaginary parts of variance 1/2 each, and the self-conjugate modes (every
    component of ``k`` in ``{0, L/2}``) are real with unit variance.  The zero
    mode is multiplied by 0, which pins the spatial mean to 0.

    ``seed`` may be an int, a :class:`numpy.random.SeedSequence` or a
    :class:`numpy.random.Generator`; the normals come from the generator's
    ziggurat transform, so a given seed reproduces the sample bit for bit.
    """
    if L <= 0 or L % 2:
        raise DomainError(f"L must be a positive even integer, got {L}")
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    shape = (L,) * d
    white = rng.standard_normal(shape)
    scale = np.sqrt(spatial_mode_variance(L, d))
    half = scale[..., : L // 2 + 1]
    axes = tuple(range(d))
    h = np.fft.irfftn(np.fft.rfftn(white, axes=axes) * half, s=shape, axes=axes)
    return np.ascontiguousarray(h)
