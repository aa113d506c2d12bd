"""Truncated bivariate power series in s and z, and identity checkers for G(s).

A :class:`TruncSeries` keeps every coefficient of s^d z^m with d <= ds and
m <= dz in a dense object array of Python ints, so residuals may go negative
and nothing overflows.  All arithmetic drops degrees beyond the bounds and
never reads them.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .core import DimCache, default_cache, require_prime
from .errors import TruncationError

MAX_OFFENDERS = 10


def _zeros(ds: int, dz: int) -> np.ndarray:
    a = np.empty((ds + 1, dz + 1), dtype=object)
    a.fill(0)
    return a


class TruncSeries:
    """Immutable truncated series sum c[d][m] s^d z^m."""

    __slots__ = ("_c", "prime")

    def __init__(self, coeffs: np.ndarray, prime: int | None = None) -> None:
        c = np.array(coeffs, dtype=object)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ValueError(f"coefficient table must be 2-D and non-empty, got shape {c.shape}")
        c.flags.writeable = False
        self._c = c
        self.prime = prime

    @classmethod
    def zeros(cls, ds: int, dz: int) -> TruncSeries:
        return cls(_zeros(ds, dz))

    @classmethod
    def from_terms(cls, ds: int, dz: int, terms: Mapping[tuple[int, int], int]) -> TruncSeries:
        """Series with the given ``{(d, m): c}`` terms; out-of-range terms are dropped."""
        a = _zeros(ds, dz)
        for (d, m), c in terms.items():
            if d < 0 or m < 0:
                raise ValueError(f"negative exponent ({d}, {m})")
            if d <= ds and m <= dz:
                a[d, m] += c
        return cls(a)

    @classmethod
    def monomial(cls, ds: int, dz: int, d: int = 0, m: int = 0, c: int = 1) -> TruncSeries:
        return cls.from_terms(ds, dz, {(d, m): c})

    @property
    def ds(self) -> int:
        return self._c.shape[0] - 1

    @property
    def dz(self) -> int:
        return self._c.shape[1] - 1

    @property
    def table(self) -> np.ndarray:
        return self._c

    def coefficient(self, d: int, m: int) -> int:
        if 0 <= d <= self.ds and 0 <= m <= self.dz:
            return self._c[d, m]
        return 0

    def z_slice(self, m: int) -> np.ndarray:
        """Coefficients of z^m as an s-indexed array (a copy)."""
        return self._c[:, m].copy()

    def with_coefficient(self, d: int, m: int, value: int) -> TruncSeries:
        a = self._c.copy()
        a[d, m] = value
        return TruncSeries(a, self.prime)

    def nonzero(self) -> list[tuple[int, int, int]]:
        ds_idx, dz_idx = np.nonzero(self._c != 0)
        return [(int(d), int(m), int(self._c[d, m])) for d, m in zip(ds_idx, dz_idx)]

    def is_zero(self) -> bool:
        return not np.any(self._c != 0)

    def _check_bounds(self, other: TruncSeries) -> None:
        if self._c.shape != other._c.shape:
            raise TruncationError(
                f"bounds differ: {(self.ds, self.dz)} vs {(other.ds, other.dz)}"
            )

    def _lift(self, other: TruncSeries | int) -> TruncSeries:
        if isinstance(other, TruncSeries):
            self._check_bounds(other)
            return other
        return TruncSeries.monomial(self.ds, self.dz, 0, 0, int(other))

    def __add__(self, other: TruncSeries | int) -> TruncSeries:
        return TruncSeries(self._c + self._lift(other)._c)

    __radd__ = __add__

    def __neg__(self) -> TruncSeries:
        return TruncSeries(-self._c)

    def __sub__(self, other: TruncSeries | int) -> TruncSeries:
        return TruncSeries(self._c - self._lift(other)._c)

    def __rsub__(self, other: int) -> TruncSeries:
        return self._lift(other) - self

    def __mul__(self, other: TruncSeries | int) -> TruncSeries:
        if not isinstance(other, TruncSeries):
            return TruncSeries(self._c * int(other))
        self._check_bounds(other)
        a, b = self, other
        if len(b.nonzero()) > len(a.nonzero()):
            a, b = b, a
        out = _zeros(self.ds, self.dz)
        for i, j, c in b.nonzero():
            out[i:, j:] += c * a._c[: self.ds + 1 - i, : self.dz + 1 - j]
        return TruncSeries(out)

    __rmul__ = __mul__

    def substitute_power(self, q: int) -> TruncSeries:
        return substitute_power(self, q)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    def __hash__(self) -> int:  # immutable, but equality is value-based
        return hash((self._c.shape, tuple(self._c.flat)))

    def __repr__(self) -> str:
        terms = self.nonzero()[:6]
        body = " + ".join(f"{c}*s^{d}*z^{m}" for d, m, c in terms) or "0"
        more = " + ..." if len(self.nonzero()) > 6 else ""
        return f"TruncSeries(ds={self.ds}, dz={self.dz}: {body}{more})"

    def to_csv(self, z: int | None = None, nonzero_only: bool = True) -> str:
        """CSV with columns s_degree, z_degree, coefficient (one z-slice if ``z`` given)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s_degree", "z_degree", "coefficient"])
        zs = range(self.dz + 1) if z is None else [z]
        for d in range(self.ds + 1):
            for m in zs:
                c = self._c[d, m]
                if c or not nonzero_only:
                    w.writerow([d, m, c])
        return buf.getvalue()


def substitute_power(f: TruncSeries, q: int) -> TruncSeries:
    """f(s^q): g[d][m] = f[d/q][m] when q divides d, dropping degrees past ds."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    out = _zeros(f.ds, f.dz)
    out[::q] = f.table[: f.ds // q + 1]
    return TruncSeries(out)


def _subst1(a: np.ndarray, q: int) -> np.ndarray:
    out = np.zeros_like(a)
    out[::q] = a[: (len(a) - 1) // q + 1]
    return out


def _shift1(a: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros_like(a)
    if k < len(a):
        out[k:] = a[: len(a) - k]
    return out


def _obj(n: int) -> np.ndarray:
    a = np.empty(n, dtype=object)
    a.fill(0)
    return a


def build_G(p: int, ds: int, dz: int, cache: DimCache | None = None) -> TruncSeries:
    """G(s) = sum_d ve(2d) s^d truncated to s^ds, z^dz, read off the recursion tables."""
    p = require_prime(p)
    if ds < 1 or dz < 1:
        raise ValueError(f"bounds must be >= 1, got ds={ds}, dz={dz}")
    t = (default_cache() if cache is None else cache).table(p, ds, dz)
    block = t.rows[: ds + 1, : dz + 1]
    return TruncSeries(np.vectorize(int, otypes=[object])(block), prime=p)


def solve_G(p: int, ds: int, dz: int) -> TruncSeries:
    """G(s) obtained by solving its functional equation degree by degree.

    This never touches the ve recursion: every s-degree is determined by
    strictly smaller ones through the equation itself.
    """
    p = require_prime(p)
    a = _zeros(ds, dz)

    def zshift(row: np.ndarray, k: int) -> np.ndarray:
        out = _obj(dz + 1)
        if k <= dz:
            out[k:] = row[: dz + 1 - k]
        return out

    for d in range(ds + 1):
        row = _obj(dz + 1)
        if d == 0:
            row[0] = 1
        if p == 2:
            # G = 1 + zsG(s) + sG(s^2)
            if d >= 1:
                row += zshift(a[d - 1], 1)
            if d % 2:
                row += a[(d - 1) // 2]
        else:
            # G = 1 + zs^{p-1} + z^2 s^p G(s) + s^{p-1} G(s^p) + z s^p G(s^p)
            if d == p - 1 and dz >= 1:
                row[1] += 1
            if d >= p:
                row += zshift(a[d - p], 2)
            if d >= p - 1 and (d - (p - 1)) % p == 0:
                row += a[(d - (p - 1)) // p]
            if d >= p and d % p == 0:
                row += zshift(a[d // p - 1], 1)
        a[d] = row
    return TruncSeries(a, prime=p)


@dataclass
class CheckReport:
    """Outcome of one identity check on a truncated series."""

    name: str
    passed: bool
    region: tuple[int, int]  # (max s-degree, max z-degree) that was compared
    offenders: list[tuple[int, int, int]] = field(default_factory=list)
    residual: TruncSeries | None = field(default=None, repr=False)
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "region": {"max_s_degree": self.region[0], "max_z_degree": self.region[1]},
            "offenders": [{"s_degree": d, "z_degree": m, "value": int(v)} for d, m, v in self.offenders],
            "detail": self.detail,
        }


def _report(name: str, residual: TruncSeries, s_max: int, z_max: int, detail: str = "") -> CheckReport:
    bad = [(d, m, v) for d, m, v in residual.nonzero() if d <= s_max and m <= z_max]
    return CheckReport(name, not bad, (s_max, z_max), bad[:MAX_OFFENDERS], residual, detail)


def _require_prime_match(G: TruncSeries, p: int) -> None:
    if G.prime is not None and G.prime != p:
        raise ValueError(f"series was built for p={G.prime}, check needs p={p}")


def _functional_residual(p: int, G: TruncSeries, odd_form: bool) -> TruncSeries:
    ds, dz = G.ds, G.dz
    mono = lambda d, m, c=1: TruncSeries.monomial(ds, dz, d, m, c)  # noqa: E731
    Gp = substitute_power(G, p)
    if not odd_form:
        lhs = G - mono(1, 1) * G
        rhs = mono(1, 0) * Gp + 1
    else:
        lhs = G - mono(p, 2) * G
        rhs = 1 + mono(p - 1, 1) + (mono(p - 1, 0) + mono(p, 1)) * Gp
    return lhs - rhs


def check_functional_eq(p: int, G: TruncSeries) -> CheckReport:
    """Residual of the functional equation of G for characteristic ``p``.

    p = 2:  (1 - zs) G(s) = s G(s^2) + 1
    p > 2:  (1 - z^2 s^p) G(s) = (1 + z s^{p-1}) + s^{p-1} (1 + zs) G(s^p)

    Compared on s-degree <= ds and z-degree <= dz - 2.
    """
    p = require_prime(p)
    _require_prime_match(G, p)
    if G.dz < 2:
        raise TruncationError(f"need dz >= 2 to test any coefficient, got {G.dz}")
    res = _functional_residual(p, G, odd_form=p > 2)
    return _report(f"functional-equation p={p}", res, G.ds, G.dz - 2)


def check_p2_unified_form(G: TruncSeries) -> CheckReport:
    """The odd-p equation with p = 2; it is the p = 2 equation times (1 + zs)."""
    _require_prime_match(G, 2)
    if G.dz < 2:
        raise TruncationError(f"need dz >= 2 to test any coefficient, got {G.dz}")
    res = _functional_residual(2, G, odd_form=True)
    return _report("functional-equation odd form at p=2", res, G.ds, G.dz - 2)


def _stack(slices: Iterable[np.ndarray], ds: int, dz: int) -> TruncSeries:
    a = _zeros(ds, dz)
    for m, col in enumerate(slices):
        a[:, m] = col
    return TruncSeries(a)


def check_gn_recursion(G: TruncSeries) -> CheckReport:
    """p = 2 slice identities for G = sum z^n g_n(s).

    g_0(s) - s g_0(s^2) = 1,  g_n(s) - s g_{n-1}(s) = s g_n(s^2) for n >= 1,
    and the telescoped form s g_n(s) = sum_k s^{2^k} s^{2^k} g_{n-1}(s^{2^k}).
    """
    _require_prime_match(G, 2)
    ds, dz = G.ds, G.dz
    g = [G.z_slice(n) for n in range(dz + 1)]
    one = _obj(ds + 1)
    one[0] = 1
    res = []
    for n in range(dz + 1):
        r = g[n] - _shift1(_subst1(g[n], 2), 1)
        r = r - (one if n == 0 else _shift1(g[n - 1], 1))
        res.append(r)
    report = _report("g_n recursion", _stack(res, ds, dz), ds, dz)

    tele = [_obj(ds + 1)]
    for n in range(1, dz + 1):
        rhs = _obj(ds + 1)
        q = 1
        while q <= ds:
            rhs += _shift1(_subst1(g[n - 1], q), 2 * q)
            q *= 2
        tele.append(_shift1(g[n], 1) - rhs)
    tele_report = _report("g_n telescoped", _stack(tele, ds, dz), ds, dz)
    if not tele_report.passed:
        report.passed = False
        report.offenders += tele_report.offenders
        report.detail = "telescoped form failed"
    return report


def product_F(ds: int, dz: int, K: int) -> TruncSeries:
    """prod_{k<K} (1 - z s^{2^k}) truncated."""
    F = TruncSeries.monomial(ds, dz)
    for k in range(K):
        F = F * (1 - TruncSeries.monomial(ds, dz, 2**k, 1))
    return F


def check_rational_identity(G: TruncSeries, K: int) -> CheckReport:
    """F(s) s G(s) - F(s^2) s^2 G(s^2) = s F(s^2) with F = prod_k (1 - z s^{2^k})."""
    _require_prime_match(G, 2)
    ds, dz = G.ds, G.dz
    if 2**K <= ds:
        raise ValueError(f"need 2^K > ds so the product is exact; K={K}, ds={ds}")
    F = product_F(ds, dz, K)
    s = TruncSeries.monomial(ds, dz, 1, 0)
    s2 = TruncSeries.monomial(ds, dz, 2, 0)
    F2, G2 = substitute_power(F, 2), substitute_power(G, 2)
    res = F * s * G - F2 * s2 * G2 - s * F2
    report = _report("rational identity", res, ds, dz)

    # summed form: F(s) s G(s) = sum_k s^{2^k} F(s^{2^{k+1}})
    total = TruncSeries.zeros(ds, dz)
    q = 1
    while q <= ds:
        total = total + TruncSeries.monomial(ds, dz, q, 0) * substitute_power(F, 2 * q)
        q *= 2
    summed = _report("rational identity summed", F * s * G - total, ds, dz)
    if not summed.passed:
        report.passed = False
        report.offenders += summed.offenders
        report.detail = "summed form failed"
    return report


def h0_closed_form(p: int, ds: int) -> np.ndarray:
    """1 + s^{p-1} + s^{p^2-1} + ... up to s^ds."""
    out = _obj(ds + 1)
    q = 1
    while q - 1 <= ds:
        out[q - 1] += 1
        q *= p
    return out


def sh1_closed_form(p: int, ds: int) -> np.ndarray:
    """sum_{k1} s^{p^{k1+1}} + sum_{k1,k0} s^{p^{k1} + p^{k1+k0+1}} up to s^ds."""
    out = _obj(ds + 1)
    a = 1
    while a <= ds:
        if a * p <= ds:
            out[a * p] += 1
        b = a * p
        while a + b <= ds:
            out[a + b] += 1
            b *= p
        a *= p
    return out


def check_h_closed_forms(p: int, G: TruncSeries) -> CheckReport:
    """Odd p: h_0 and s*h_1 against their closed forms, and for n >= 2

    s h_n(s) - s^p h_n(s^p) = s^{p+1} h_{n-2}(s) + s^{p+1} h_{n-1}(s^p).
    """
    p = require_prime(p)
    if p == 2:
        raise ValueError("h_n closed forms are stated for odd p")
    _require_prime_match(G, p)
    ds, dz = G.ds, G.dz
    h = [G.z_slice(n) for n in range(dz + 1)]
    res = [h[0] - h0_closed_form(p, ds)]
    if dz >= 1:
        res.append(_shift1(h[1], 1) - sh1_closed_form(p, ds))
    for n in range(2, dz + 1):
        lhs = _shift1(h[n], 1) - _shift1(_subst1(h[n], p), p)
        rhs = _shift1(h[n - 2], p + 1) + _shift1(_subst1(h[n - 1], p), p + 1)
        res.append(lhs - rhs)
    return _report(f"h_n closed forms p={p}", _stack(res, ds, dz), ds, dz)
