"""Growth and boundedness experiments."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .core import DimCache, ext_dim_column, require_prime
from .errors import checked
from .labels import build_labels, predicted_length_count

GOLDEN = (1 + math.sqrt(5)) / 2
ARGMAX_SLOPE = 0.5 - math.sqrt(5) / 10


@dataclass
class GrowthRow:
    index: int
    measured: float
    predicted: float | None = None
    ratio: float | None = None


@dataclass
class GrowthReport:
    title: str
    rows: list[GrowthRow]
    verdict: str
    passed: bool
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "rows": [asdict(r) for r in self.rows],
            "verdict": self.verdict,
            "passed": self.passed,
            "meta": self.meta,
        }


def fibonacci(n: int) -> int:
    """F_n with F_0 = F_1 = 1."""
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def binomial_max(n: int) -> tuple[int, int]:
    """(a*, C(n-a*, a*+1)): the smallest a in [0, n/2] maximising C(n-a, a+1)."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    best_a, best = 0, -1
    for a in range(n // 2 + 1):
        v = comb(n - a, a + 1)
        if v > best:
            best_a, best = a, v
    return best_a, best


def argmax_prediction(n: int) -> int:
    return math.floor(ARGMAX_SLOPE * n)


def growth_constant_closed_form() -> float:
    """E = Abar^Abar / (A^A C^C) with A = 1/2 - sqrt5/10, Abar = 1 - A, C = Abar - A."""
    A = ARGMAX_SLOPE
    Abar = 1 - A
    C = Abar - A
    return Abar**Abar / (A**A * C**C)


def growth_constant_estimate(n_lo: int, n_hi: int) -> float:
    """exp of the least-squares slope of log max_a C(n-a, a+1) over n_lo..n_hi."""
    if n_lo < 10 or n_hi - n_lo < 2:
        raise ValueError(f"need 10 <= n_lo and n_hi >= n_lo + 2, got [{n_lo}, {n_hi}]")
    ns = np.arange(n_lo, n_hi + 1, dtype=float)
    logs = np.array([math.log(binomial_max(int(n))[1]) for n in ns])
    slope = np.polyfit(ns, logs, 1)[0]
    return math.exp(slope)


@lru_cache(maxsize=None)
def _compositions(p: int, l: int, N: int) -> int:
    if l == 0:
        return 1 if N == 0 else 0
    if N < l:
        return 0
    total, q = 0, 1
    while q <= N - (l - 1):
        total += _compositions(p, l - 1, N - q)
        q *= p
    return total


def nd_count(p: int, l: int, d: int) -> int:
    """Ordered l-tuples (m_1, ..., m_l) with sum_j p^{m_j} = d + 1."""
    p = require_prime(p)
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    return checked(_compositions(p, l, d + 1))


def boundedness_scan(
    p: int, n: int, d_max: int, cache: DimCache | None = None
) -> GrowthReport:
    """Running maximum of dim Ext^n(Delta(0), Delta(2d)) for d <= d_max.

    One row per new maximum (index = d).  The verdict only states where the
    last improvement happened; it is not a proof of the bound.
    """
    col = ext_dim_column(p, n, d_max, cache)
    rows: list[GrowthRow] = []
    running = 0
    for d in np.flatnonzero(col):
        v = int(col[d])
        if v > running:
            rows.append(GrowthRow(int(d), v, running or None, v / running if running else None))
            running = v
    last = rows[-1].index if rows else None
    verdict = (
        f"running max {running}; no improvement after d = {last} (scanned to d = {d_max})"
        if rows else f"all dimensions zero up to d = {d_max}"
    )
    return GrowthReport(
        f"boundedness p={p} n={n}",
        rows,
        verdict,
        True,
        {"p": p, "n": n, "d_max": d_max, "running_max": running, "last_improvement": last},
    )


def fibonacci_check(n_max: int) -> GrowthReport:
    """Label counts against F_{n+1} (F_0 = F_1 = 1)."""
    if n_max < 2:
        raise ValueError(f"n_max must be >= 2, got {n_max}")
    rows = []
    successive = []
    for n in range(n_max + 1):
        t = len(build_labels(n))
        f = fibonacci(n + 1)
        rows.append(GrowthRow(n, t, f, t / f))
        if n:
            successive.append(t / rows[n - 1].measured)
    passed = all(r.measured == r.predicted for r in rows)
    verdict = (
        f"t_n = F_(n+1) for all n <= {n_max}; t_n/t_(n-1) -> {successive[-1]:.6f} "
        f"(golden ratio {GOLDEN:.6f})"
        if passed else "label counts deviate from Fibonacci numbers"
    )
    return GrowthReport("fibonacci label counts", rows, verdict, passed,
                        {"successive_ratios": successive})


def binomial_report(n_max: int) -> GrowthReport:
    """Argmax of C(n-a, a+1) against floor((1/2 - sqrt5/10) n) for 2 <= n <= n_max."""
    rows = []
    ok = True
    for n in range(2, n_max + 1):
        a, v = binomial_max(n)
        pred = argmax_prediction(n)
        ok &= abs(a - pred) <= 1
        rows.append(GrowthRow(n, a, pred, None))
    verdict = f"argmax within 1 of prediction for 2 <= n <= {n_max}" if ok else "argmax prediction missed"
    return GrowthReport("binomial argmax", rows, verdict, ok)


def length_total_check(n: int) -> bool:
    """Sum of predicted per-length counts equals the Fibonacci label count."""
    total = sum(predicted_length_count(n, n - i) for i in range(n + 1)) + 1
    return total == fibonacci(n + 1)
