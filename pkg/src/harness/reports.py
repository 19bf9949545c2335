"""Tabular outputs: exact tables and the empirical correlation figures as CSV.

All writers produce UTF-8 text with LF line endings.  Metadata goes in
``#``-prefixed lines before the column header; numbers use Python's
shortest round-trip ``repr`` so output bytes are a pure function of the
inputs.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import curve_fit

from . import __version__
from .errors import DomainError
from .estimators import PairCorrelationAccumulator
from .exact import CorrelationKind, asymptotic, exact
from .simulator import SEQUENTIAL, SimConfig, iter_snapshots

__all__ = [
    "Table",
    "format_number",
    "exact_table",
    "measure_correlations",
    "fig2_table",
    "fig3_table",
    "FIG2_COLUMNS",
    "FIG3_COLUMNS",
    "SCALING_NOTE",
]

FIG2_COLUMNS = (
    "t",
    "g11_raw", "g11_scaled", "g11_err",
    "g22_raw", "g22_scaled", "g22_err",
    "g12_raw", "g12_scaled", "g12_err",
    "g11_oe_exact_scaled", "g22_oe_exact_scaled",
)
FIG3_COLUMNS = ("j", "g11", "g11_err", "g22", "g22_err", "g12", "g12_err", "g11_fit", "g22_fit", "g12_fit")

SCALING_NOTE = (
    "g11_scaled = sqrt(pi t)/2 * g11(t,0); g22_scaled = -4 t sqrt(pi t) * g22(t,0); "
    "g12_scaled = -2 t sqrt(pi t) * g12(t,1); each tends to 1 for the sub-lattice closed forms"
)


def format_number(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in table")
    if x == 0.0:
        return "0"  # folds -0.0
    return repr(x)


@dataclass
class Table:
    columns: Sequence[str]
    rows: list
    meta: list  # (key, value) pairs

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.meta:
            buf.write(f"# {key}: {value}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join("" if v is None else format_number(v) if not isinstance(v, str) else v for v in row))
            buf.write("\n")
        return buf.getvalue()

    def column(self, name: str) -> np.ndarray:
        k = list(self.columns).index(name)
        return np.array([r[k] for r in self.rows], dtype=float)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())


def exact_table(t_max: int, j_max: int) -> Table:
    """Every valid ``(kind, t, j)`` with ``t <= t_max`` and ``|j| <= j_max``.

    The asymptotic cell is left empty where the large-``t`` forms are undefined (``t = 0``).
    """
    if t_max < 0 or j_max < 0:
        raise DomainError("t_max and j_max must be >= 0")
    rows = []
    for kind in CorrelationKind:
        for t in range(kind.min_t, t_max + 1):
            for j in range(-j_max, j_max + 1):
                if j % 2 != kind.parity:
                    continue
                asym = asymptotic(kind, t, j) if t >= 1 else None
                rows.append((kind.value, t, j, exact(kind, t, j), asym))
    meta = [("harness", __version__), ("t_max", t_max), ("j_max", j_max)]
    return Table(("kind", "t", "j", "exact", "asymptotic"), rows, meta)


def measure_correlations(
    L: int,
    t1: int,
    t_max: int,
    j_max: int,
    seed: int,
    kinds: Iterable[CorrelationKind | str] = ("g11", "g22", "g12"),
    lags=None,
    replicas: int = 1,
    n_blocks: int = 16,
) -> dict[CorrelationKind, PairCorrelationAccumulator]:
    """Random-sequential run of ``t1 + t_max`` time units per replica, snapshots at unit stride.

    Replicas are merged in replica-index order.
    """
    if L % 2 or L < 2:
        raise DomainError(f"L must be even and >= 2, got {L}")
    if t1 < 1:
        raise DomainError(f"t1 must be >= 1, got {t1}")
    kinds = [CorrelationKind(k) for k in kinds]
    cfg = SimConfig(L=L, d=1, dynamics=SEQUENTIAL, seed=seed, measure_rounds=t1 + t_max, snapshot_stride=1)
    merged: dict[CorrelationKind, PairCorrelationAccumulator] = {}
    for r in range(max(replicas, 1)):
        accs = {k: PairCorrelationAccumulator(k, t_max, j_max, lags, n_blocks) for k in kinds}
        for _, h in iter_snapshots(cfg, replica=r):
            for acc in accs.values():
                acc.push(h)
        for k, acc in accs.items():
            merged[k] = acc if k not in merged else merged[k].merge(acc)
    return merged


def _run_meta(name, L, t1, seed, replicas, accs) -> list:
    acc = next(iter(accs.values()))
    info = acc.block_info()
    return [
        ("harness", __version__),
        ("table", name),
        ("dynamics", "sequential (L micro-updates per time unit)"),
        ("L", L),
        ("t1", t1),
        ("seed", seed),
        ("replicas", replicas),
        ("origins", {k.value: a.n_origins for k, a in accs.items()}),
        ("error_bars", f"batch means over {info['blocks']} {info['axis']} blocks"),
    ]


def fig2_table(L: int, t1: int, t_max: int, seed: int, replicas: int = 1) -> Table:
    """Scaled empirical ``g11(t,0)``, ``g22(t,0)``, ``g12(t,1)`` for ``t = 1..t_max``.

    ``*_err`` columns are standard errors of the raw values.  The sub-lattice
    reference for ``g12`` is not given its own column: it is exactly twice
    ``g22(t, 0)``.
    """
    if t1 < 8:
        raise DomainError(f"t1 must be >= 8, got {t1}")
    if t_max < 1:
        raise DomainError(f"t_max must be >= 1, got {t_max}")
    accs = measure_correlations(L, t1, t_max, 1, seed, replicas=replicas)
    g11, g22, g12 = (accs[CorrelationKind(k)] for k in ("g11", "g22", "g12"))
    m11, e11 = g11.mean(), g11.stderr_grid()
    m22, e22 = g22.mean(), g22.stderr_grid()
    m12, e12 = g12.mean(), g12.stderr_grid()
    rows = []
    for t in range(1, t_max + 1):
        s11 = math.sqrt(math.pi * t) / 2.0
        s22 = -4.0 * t * math.sqrt(math.pi * t)
        s12 = -2.0 * t * math.sqrt(math.pi * t)
        rows.append((
            t,
            m11[t, 1], s11 * m11[t, 1], e11[t, 1],
            m22[t, 1], s22 * m22[t, 1], e22[t, 1],
            m12[t, 2], s12 * m12[t, 2], e12[t, 2],
            s11 * exact("g11", t, 0), s22 * exact("g22", t, 0),
        ))
    meta = _run_meta("fig2", L, t1, seed, replicas, accs)
    meta += [("t_max", t_max), ("scaling", SCALING_NOTE), ("oe_reference", "sub-lattice closed forms; g12 reference = 2 * g22 reference")]
    return Table(FIG2_COLUMNS, rows, meta)


def _gauss(j, A, D, t):
    return A * np.exp(-j * j / (4.0 * D * t))


def _fit(model, j, y, err, p0):
    sigma = np.maximum(err, 1e-300)
    popt, _ = curve_fit(model, j, y, p0=p0, sigma=sigma, absolute_sigma=True, maxfev=20000)
    return [float(v) for v in popt]


def fig3_table(L: int, t1: int, t: int, j_max: int, seed: int, replicas: int = 1) -> Table:
    """Empirical profiles in ``j`` at fixed ``t`` with least-squares fits of the large-``t`` shapes.

    Fitted shapes (amplitude and diffusion constant ``D`` free, each fit separately)::

        g11: A exp(-j^2/(4Dt))
        g22: B (1 - j^2/(2Dt)) exp(-j^2/(4Dt))
        g12: C j exp(-j^2/(4Dt))
    """
    if t1 < 8:
        raise DomainError(f"t1 must be >= 8, got {t1}")
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    accs = measure_correlations(L, t1, t, j_max, seed, lags=[t], replicas=replicas)
    prof = {}
    for k, acc in accs.items():
        prof[k.value] = (acc.mean()[0], acc.stderr_grid()[0])
    j = np.arange(-j_max, j_max + 1, dtype=float)

    y11, e11 = prof["g11"]
    y22, e22 = prof["g22"]
    y12, e12 = prof["g12"]
    A, D11 = _fit(lambda x, A, D: _gauss(x, A, D, t), j, y11, e11, (y11[j_max], 0.5))
    B, D22 = _fit(lambda x, B, D: B * (1 - x * x / (2 * D * t)) * np.exp(-x * x / (4 * D * t)), j, y22, e22, (y22[j_max], 0.5))
    c0 = y12[j_max + 1] if j_max >= 1 else -0.01
    C, D12 = _fit(lambda x, C, D: C * x * np.exp(-x * x / (4 * D * t)), j, y12, e12, (c0, 0.5))
    f11 = _gauss(j, A, D11, t)
    f22 = B * (1 - j * j / (2 * D22 * t)) * np.exp(-j * j / (4 * D22 * t))
    f12 = C * j * np.exp(-j * j / (4 * D12 * t))
    rows = [
        (int(j[m]), y11[m], e11[m], y22[m], e22[m], y12[m], e12[m], f11[m], f22[m], f12[m])
        for m in range(len(j))
    ]
    meta = _run_meta("fig3", L, t1, seed, replicas, accs)
    meta += [
        ("t", t),
        ("j_max", j_max),
        ("fit_g11", f"A exp(-j^2/(4 D t)); A={A!r} D={D11!r}"),
        ("fit_g22", f"B (1 - j^2/(2 D t)) exp(-j^2/(4 D t)); B={B!r} D={D22!r}"),
        ("fit_g12", f"C j exp(-j^2/(4 D t)); C={C!r} D={D12!r}"),
    ]
    return Table(FIG3_COLUMNS, rows, meta)
