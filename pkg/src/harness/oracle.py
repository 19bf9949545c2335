"""Dense ground truth for the space-time Gaussian field on small tori.

The field lives on the even sub-lattice ``{(t, i) : t + i even}`` of
``{0..T-1} x Z/L``.  A quadratic form ``H = x^T A x`` is assembled term by
term; the density is ``exp(-H)`` so the covariance is ``(2A)^{-1}`` once the
single flat direction (uniform translation) is removed by pinning one
variable to 0.  Every observable we read is a gradient, hence independent
of which variable is pinned.

Three forms are available:

``free``
    Heat-bath transitions for ``1 <= t <= T-1`` plus the equilibrium weight
    ``(1/4) sum_{i even} (h^0_i - h^0_{i+2})^2`` at ``t = 0``.  Its law is
    exactly the stationary sub-lattice dynamics on a ring of ``L`` sites.
``periodic``
    Heat-bath transitions for every ``t`` with time wrapping ``T-1 -> 0``.
``equilibrium``
    The one-time measure ``(1/2) sum_i (h_{i+1} - h_i)^2`` on ``L`` sites
    (built by :func:`equilibrium_form`).

This module is an oracle, not a performance path: matrices are dense and
capped at ``MAX_VARIABLES``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, FiniteSizeError, HarnessError, OracleSizeError
from .exact import CorrelationKind
from .spectral import TorusSpec, gamma_grid, is_zero_mode

__all__ = [
    "MAX_VARIABLES",
    "QuadraticFormSpec",
    "build_form",
    "equilibrium_form",
    "CovarianceMatrix",
    "covariance",
    "spacetime_pair_correlation",
    "pair_correlation_from_cov",
    "prop2_gap",
    "covariance_gap",
    "oracle_mode_variances",
    "kernel_dimension",
]

MAX_VARIABLES = 10_000


@dataclass(frozen=True)
class QuadraticFormSpec:
    kind: str
    T: int
    L: int

    def __post_init__(self):
        if self.kind not in ("free", "periodic"):
            raise DomainError(f"kind must be 'free' or 'periodic', got {self.kind!r}")
        if self.T <= 0 or self.T % 2 or self.L <= 0 or self.L % 2:
            raise DomainError(f"T and L must be positive even integers, got T={self.T}, L={self.L}")

    @property
    def n_variables(self) -> int:
        return self.T * self.L // 2

    def index(self, t: int, i: int) -> int:
        """Position of site ``(t, i)`` in the variable vector (time-major)."""
        if self.kind == "periodic":
            t %= self.T
        elif not 0 <= t < self.T:
            raise FiniteSizeError(f"time {t} outside the free window [0, {self.T})")
        i %= self.L
        if (t + i) % 2:
            raise DomainError(f"site (t={t}, i={i}) is not on the even space-time sub-lattice")
        return t * (self.L // 2) + i // 2


def _assemble(n: int, rows: list[np.ndarray], coefs: list[np.ndarray]) -> np.ndarray:
    # rows[k][m], coefs[k][m]: variable index and coefficient of the k-th entry of term m
    A = np.zeros((n, n))
    for a in range(len(rows)):
        for b in range(len(rows)):
            np.add.at(A, (rows[a], rows[b]), coefs[a] * coefs[b])
    return A


def build_form(spec: QuadraticFormSpec) -> np.ndarray:
    """Symmetric matrix ``A`` with ``H(x) = x^T A x`` for the free or periodic space-time form.

    Each squared term ``(h^t_i - h^{t-1}_{i-1}/2 - h^{t-1}_{i+1}/2)^2`` adds a
    rank-one block.  For ``L = 2`` the two neighbours coincide and the
    contributions add up correctly through ``np.add.at``.
    """
    n = spec.n_variables
    if n > MAX_VARIABLES:
        raise OracleSizeError(f"T*L/2 = {n} exceeds the dense cap of {MAX_VARIABLES}")
    T, L = spec.T, spec.L
    t0 = 0 if spec.kind == "periodic" else 1
    sites = [(t, i) for t in range(t0, T) for i in range(L) if (t + i) % 2 == 0]
    centre = np.array([spec.index(t, i) for t, i in sites])
    left = np.array([spec.index((t - 1) % T, i - 1) for t, i in sites])
    right = np.array([spec.index((t - 1) % T, i + 1) for t, i in sites])
    ones = np.ones(len(sites))
    A = _assemble(n, [centre, left, right], [ones, -0.5 * ones, -0.5 * ones])
    if spec.kind == "free":
        evens = np.arange(0, L, 2)
        a = np.array([spec.index(0, i) for i in evens])
        b = np.array([spec.index(0, i + 2) for i in evens])
        half = np.full(len(evens), 0.5)
        # (1/4)(x - y)^2 = (x/2 - y/2)^2
        A += _assemble(n, [a, b], [half, -half])
    return A


def equilibrium_form(L: int) -> np.ndarray:
    """``A`` with ``x^T A x = (1/2) sum_i (h_{i+1} - h_i)^2`` on a ring of ``L`` sites."""
    if L < 2:
        raise DomainError(f"L must be >= 2, got {L}")
    i = np.arange(L)
    half = np.full(L, np.sqrt(0.5))
    return _assemble(L, [i, (i + 1) % L], [half, -half])


def kernel_dimension(A: np.ndarray, rtol: float = 1e-10) -> int:
    """Number of numerically zero eigenvalues (dense eigendecomposition; small forms only)."""
    w = np.linalg.eigvalsh(A)
    return int(np.sum(np.abs(w) <= rtol * np.max(np.abs(w))))


@dataclass
class CovarianceMatrix:
    """Covariance ``(2A)^{-1}`` with one variable pinned to 0, held as a Cholesky factor.

    Entries are produced on demand by solving against unit vectors, so large
    forms never need the full inverse.  ``rcond`` is LAPACK's reciprocal
    condition-number estimate of the pinned matrix.
    """

    n: int
    pinned: int
    factor: tuple = field(repr=False)
    rcond: float = float("nan")

    def _reduced(self, idx) -> np.ndarray:
        idx = np.asarray(idx)
        return np.where(idx > self.pinned, idx - 1, idx)

    def columns(self, idx) -> np.ndarray:
        """Full-length covariance columns ``Cov(x, x_idx)`` (shape ``(n, len(idx))``)."""
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
        rhs = np.zeros((self.n - 1, len(idx)))
        live = idx != self.pinned
        rhs[self._reduced(idx[live]), np.nonzero(live)[0]] = 1.0
        sol = sla.cho_solve(self.factor, rhs)
        return np.insert(sol, self.pinned, 0.0, axis=0)

    def dense(self) -> np.ndarray:
        return self.columns(np.arange(self.n))

    def cov(self, f: dict[int, float], g: dict[int, float]) -> float:
        """``Cov(sum f_a x_a, sum g_b x_b)`` for sparse coefficient maps."""
        gi = list(g)
        cols = self.columns(gi)
        gv = np.array([g[b] for b in gi])
        fi = np.array(list(f), dtype=np.int64)
        fv = np.array([f[a] for a in f])
        return float(fv @ cols[fi] @ gv)


def covariance(A: np.ndarray, pinned: int = 0) -> CovarianceMatrix:
    """Delete row/column ``pinned`` and factor ``2A``.

    Raises :class:`HarnessError` if the reduced matrix is not positive definite,
    which means the form has more than one flat direction (an assembly bug).
    """
    n = A.shape[0]
    if not 0 <= pinned < n:
        raise DomainError(f"pinned index {pinned} out of range for n={n}")
    keep = np.r_[0:pinned, pinned + 1 : n]
    M = 2.0 * A[np.ix_(keep, keep)]
    try:
        factor = sla.cho_factor(M, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise HarnessError("form is singular after pinning one variable: kernel dimension > 1") from exc
    anorm = float(np.max(np.sum(np.abs(M), axis=0)))
    rcond, _ = sla.lapack.dpocon(factor[0], anorm, uplo="L")
    return CovarianceMatrix(n=n, pinned=pinned, factor=factor, rcond=float(rcond))


def _combo(*terms) -> dict[int, float]:
    out: dict[int, float] = {}
    for idx, c in terms:
        out[idx] = out.get(idx, 0.0) + c
    return out


def _observables(spec: QuadraticFormSpec, kind: CorrelationKind, t: int, j: int):
    """Coefficient maps ``(late, early)`` of the gradient pair for ``(kind, t, j)``."""
    ix = spec.index
    if kind is CorrelationKind.G11:
        late = _combo((ix(2 * t, j + 2), 1.0), (ix(2 * t, j), -1.0))
        early = _combo((ix(0, 2), 1.0), (ix(0, 0), -1.0))
    elif kind is CorrelationKind.G22:
        late = _combo((ix(2 * t + 2, j), 1.0), (ix(2 * t, j), -1.0))
        early = _combo((ix(2, 0), 1.0), (ix(0, 0), -1.0))
    elif kind is CorrelationKind.G12:
        late = _combo((ix(2 * t, j + 1), 1.0), (ix(2 * t, j - 1), -1.0))
        early = _combo((ix(2, 0), 1.0), (ix(0, 0), -1.0))
    else:
        late = _combo((ix(2 * t, 0), 1.0), (ix(2 * t - 2, 0), -1.0))
        early = _combo((ix(0, j + 1), 1.0), (ix(0, j - 1), -1.0))
    return late, early


def pair_correlation_from_cov(
    spec: QuadraticFormSpec, cov: CovarianceMatrix, kind, t: int, j: int, guard: bool = True
) -> float:
    """Finite-size analogue of the correlation ``(kind, t, j)`` from an existing covariance."""
    kind = CorrelationKind(kind)
    kind.check(t, j)
    if guard and 2 * t + abs(j) + 4 > min(spec.T, spec.L) // 2:
        raise FiniteSizeError(
            f"({kind.value}, t={t}, j={j}) too large for T={spec.T}, L={spec.L}: need 2t+|j|+4 <= min(T,L)/2"
        )
    late, early = _observables(spec, kind, t, j)
    return cov.cov(late, early)


def spacetime_pair_correlation(spec: QuadraticFormSpec, kind, t: int, j: int, guard: bool = True) -> float:
    """Gradient-gradient covariance of the dense field matching the infinite-volume ``(kind, t, j)``.

    ``t`` counts update rounds (lattice time ``2t``).
    """
    cov = covariance(build_form(spec), pinned=0)
    return pair_correlation_from_cov(spec, cov, kind, t, j, guard=guard)


def covariance_gap(a: CovarianceMatrix, b: CovarianceMatrix, n: int) -> float:
    """Max abs difference of the leading ``n x n`` blocks (both pinned at index 0)."""
    if a.pinned != 0 or b.pinned != 0:
        raise DomainError("covariance_gap compares covariances pinned at index 0")
    idx = np.arange(n)
    return float(np.max(np.abs(a.columns(idx)[:n] - b.columns(idx)[:n])))


def prop2_gap(T: int, T1: int, L: int) -> float:
    """Distance between the periodic field restricted to ``0 <= t < T1`` and the free field of extent ``T1``.

    Both covariances are pinned at site ``(0, 0)``, so each entry is a
    covariance of the height differences ``x - x_(0,0)``.
    """
    if T < T1:
        raise DomainError(f"need T >= T1, got T={T}, T1={T1}")
    per = QuadraticFormSpec("periodic", T, L)
    free = QuadraticFormSpec("free", T1, L)
    c_per = covariance(build_form(per), pinned=0)
    c_free = covariance(build_form(free), pinned=0)
    return covariance_gap(c_per, c_free, free.n_variables)


def oracle_mode_variances(spec: QuadraticFormSpec, cov: CovarianceMatrix | None = None):
    """``E|h_hat(nu, k)|^2`` read off the dense periodic covariance by discrete Fourier transform.

    Returns ``(observed, predicted)`` arrays indexed ``[nu, k]``; entries on
    the zero orbit are NaN in both.
    """
    if spec.kind != "periodic":
        raise DomainError("mode variances are defined for the periodic form")
    if cov is None:
        cov = covariance(build_form(spec), pinned=0)
    C = cov.dense()
    T, L = spec.T, spec.L
    t = np.array([v // (L // 2) for v in range(spec.n_variables)])
    i = np.array([2 * (v % (L // 2)) + (t[v] % 2) for v in range(spec.n_variables)])
    nu = np.arange(T)[:, None, None]
    k = np.arange(L)[None, :, None]
    F = np.exp(2j * np.pi * (k * i[None, None, :] / L + nu * t[None, None, :] / T)) / np.sqrt(L * T)
    F = F.reshape(T * L, -1)
    observed = np.real(np.einsum("ma,ab,mb->m", F, C, F.conj())).reshape(T, L)
    tspec = TorusSpec(T, L)
    g = gamma_grid(tspec)
    predicted = np.where(g > 0, 1.0 / (4.0 * np.where(g > 0, g, 1.0)), np.nan)
    for n_ in range(T):
        for k_ in range(L):
            if is_zero_mode(tspec, (n_, k_)):
                observed[n_, k_] = np.nan
    return observed, predicted
