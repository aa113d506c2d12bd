"""Exact Ext dimensions between Weyl modules for SL2 in characteristic p.

The central object is the polynomial

    ve(p, d) = sum_m dim Ext^m(Delta(0), Delta(2d)) z^m,

computed bottom-up from the recursions for p = 2 and for odd p.  Rows are
kept in dense ``uint64`` tables truncated in z, so a scan over many weights
only pays for the degrees it asks about.
"""

from __future__ import annotations

import contextlib
import enum
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import UnsupportedWeightError, checked, checked_add

CACHE_FORMAT = "sl2ext-cache"
CACHE_VERSION = 1


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def require_prime(p: int) -> int:
    """Validate a characteristic; returns it as a plain int."""
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)):
        raise TypeError(f"characteristic must be an int, got {type(p).__name__}")
    p = int(p)
    if not is_prime(p):
        raise ValueError(f"characteristic must be prime, got {p}")
    return p


def _require_nonneg(name: str, value: int) -> int:
    if value < 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return int(value)


class BlockClass(enum.Enum):
    ZERO_RESIDUE = "zero-residue"          # w = 0 mod 2p
    MINUS_TWO_RESIDUE = "minus-two-residue"  # w = 2p-2 mod 2p, w > 0
    OUT_OF_BLOCK = "out-of-block"


def classify_block(p: int, w: int) -> BlockClass:
    """Which part of the principal block (if any) the weight ``w`` lies in."""
    p = require_prime(p)
    w = _require_nonneg("weight", w)
    if w % 2:
        return BlockClass.OUT_OF_BLOCK
    r = w % (2 * p)
    if r == 0:
        return BlockClass.ZERO_RESIDUE
    if r == 2 * p - 2:
        return BlockClass.MINUS_TWO_RESIDUE
    return BlockClass.OUT_OF_BLOCK


@dataclass(frozen=True)
class ExtPoly:
    """Polynomial in z with nonnegative integer coefficients.

    ``coeffs[m]`` is the coefficient of z^m; trailing zeros are stripped so
    equal polynomials compare equal.
    """

    coeffs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        c = [int(x) for x in self.coeffs]
        if any(x < 0 for x in c):
            raise ValueError(f"negative coefficient in {c}")
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    def __getitem__(self, m: int) -> int:
        if m < 0 or m >= len(self.coeffs):
            return 0
        return self.coeffs[m]

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    @property
    def degree(self) -> int:
        """z-degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def total(self) -> int:
        return sum(self.coeffs)

    def __str__(self) -> str:
        terms = []
        for m, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if m == 0 else ("z" if m == 1 else f"z^{m}")
            if not mono:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}{mono}")
        return " + ".join(terms) if terms else "0"


class _Table:
    """ve(p, d) for 0 <= d < size, every row truncated to z-degree ``cap``."""

    def __init__(self, p: int, cap: int) -> None:
        self.p = p
        self.cap = cap
        self.size = 0
        self.rows = np.zeros((64, cap + 1), dtype=np.uint64)

    def _grow(self, need: int) -> None:
        n = self.rows.shape[0]
        if need <= n:
            return
        while n < need:
            n *= 2
        bigger = np.zeros((n, self.cap + 1), dtype=np.uint64)
        bigger[: self.size] = self.rows[: self.size]
        self.rows = bigger

    def extend(self, d_max: int) -> None:
        if d_max < self.size:
            return
        self._grow(d_max + 1)
        rows, p = self.rows, self.p
        for d in range(self.size, d_max + 1):
            row = rows[d]
            if d == 0:
                row[0] = 1
            elif p == 2:
                row[1:] = rows[d - 1, :-1]
                if d % 2:
                    row[:] = checked_add(row, rows[(d - 1) // 2])
            else:
                r = (2 * d) % (2 * p)
                if r == 0:
                    row[1:] = rows[d - 1, :-1]
                elif r == 2 * p - 2:
                    k = (d + 1) // p
                    row[1:] = rows[(k - 1) * p, :-1]
                    row[:] = checked_add(row, rows[k - 1])
                # out of block: stays zero
            if p > 2 and d == p - 1:
                self._self_check(row)
        self.size = d_max + 1

    def _self_check(self, row: np.ndarray) -> None:
        # base value ve(2p-2) = 1 + z must fall out of the recursion
        expect = np.zeros_like(row)
        expect[: min(2, len(row))] = 1
        if not np.array_equal(row, expect):
            raise RuntimeError(f"recursion self-check failed for p={self.p}: {row}")

    def row(self, d: int) -> np.ndarray:
        self.extend(d)
        return self.rows[d]


def _round_cap(n: int) -> int:
    cap = 16
    while cap < n:
        cap *= 2
    return cap


class DimCache:
    """Memo of exact ``ve`` polynomials plus the truncated working tables.

    Exact polynomials keyed by ``(p, d)`` can be persisted to a JSON-lines
    file.  Tables are rebuilt on demand and never persisted.  With
    ``threadsafe=False`` no locking is done (single-threaded reference mode).
    """

    def __init__(self, path: str | Path | None = None, *, threadsafe: bool = True) -> None:
        self.path = Path(path) if path is not None else None
        self._polys: dict[tuple[int, int], ExtPoly] = {}
        self._tables: dict[tuple[int, int], _Table] = {}
        self._lock: contextlib.AbstractContextManager = (
            threading.RLock() if threadsafe else contextlib.nullcontext()
        )
        self.dirty = False
        if self.path is not None and self.path.exists():
            self.load(self.path)

    def __len__(self) -> int:
        return len(self._polys)

    def __contains__(self, key: tuple[int, int]) -> bool:
        return key in self._polys

    def get(self, p: int, d: int) -> ExtPoly | None:
        return self._polys.get((p, d))

    def put(self, p: int, d: int, poly: ExtPoly) -> None:
        # values are deterministic, so a racing duplicate insert is harmless
        with self._lock:
            if self._polys.get((p, d)) != poly:
                self._polys[(p, d)] = poly
                self.dirty = True

    def entries(self) -> Iterator[tuple[int, int, ExtPoly]]:
        for (p, d) in sorted(self._polys):
            yield p, d, self._polys[(p, d)]

    def clear(self) -> None:
        with self._lock:
            self._polys.clear()
            self._tables.clear()
            self.dirty = True

    def table(self, p: int, d_max: int, degree: int) -> _Table:
        """A table covering ``d_max`` that retains z-degrees up to ``degree``."""
        with self._lock:
            best = None
            for (q, cap), t in self._tables.items():
                if q == p and cap >= degree and (best is None or cap < best.cap):
                    best = t
            if best is None:
                best = _Table(p, _round_cap(degree))
                self._tables[(p, best.cap)] = best
            best.extend(d_max)
            return best

    # persistence

    def save(self, path: str | Path | None = None) -> Path:
        target = Path(path) if path is not None else self.path
        if target is None:
            raise ValueError("no cache path configured")
        target.parent.mkdir(parents=True, exist_ok=True)
        lines = [json.dumps({"format": CACHE_FORMAT, "version": CACHE_VERSION})]
        for p, d, poly in self.entries():
            lines.append(json.dumps({"p": p, "d": d, "coeffs": list(poly.coeffs)}))
        tmp = target.with_suffix(target.suffix + ".tmp")
        tmp.write_text("\n".join(lines) + "\n")
        tmp.replace(target)
        self.dirty = False
        return target

    def load(self, path: str | Path) -> int:
        records = list(read_cache_records(path))
        with self._lock:
            for p, d, poly in records:
                self._polys[(p, d)] = poly
        return len(records)


class CacheFormatError(ValueError):
    pass


def validate_poly(p: int, d: int, poly: ExtPoly) -> None:
    """Raise ``ValueError`` if ``poly`` violates the invariants of ve(p, d)."""
    if poly.degree > 2 * d // p:
        raise ValueError(f"degree {poly.degree} exceeds bound {2 * d // p} for p={p}, d={d}")
    if classify_block(p, 2 * d) is BlockClass.OUT_OF_BLOCK and poly:
        raise ValueError(f"weight {2 * d} is outside the principal block but poly is {poly}")


def read_cache_records(path: str | Path) -> Iterator[tuple[int, int, ExtPoly]]:
    """Parse and validate a cache file, yielding ``(p, d, poly)``."""
    with open(path) as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise CacheFormatError(f"{path}:1: bad header: {exc}") from None
        if header != {"format": CACHE_FORMAT, "version": CACHE_VERSION}:
            raise CacheFormatError(f"{path}:1: unexpected header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                p, d, coeffs = rec["p"], rec["d"], rec["coeffs"]
                if not all(isinstance(x, int) and not isinstance(x, bool) for x in [p, d, *coeffs]):
                    raise ValueError("non-integer field")
                require_prime(p)
                _require_nonneg("d", d)
                for c in coeffs:
                    checked(c)
                poly = ExtPoly(tuple(coeffs))
                validate_poly(p, d, poly)
            except (KeyError, TypeError, ValueError, OverflowError) as exc:
                raise CacheFormatError(f"{path}:{lineno}: {exc}") from None
            yield p, d, poly


_default_cache = DimCache()


def default_cache() -> DimCache:
    return _default_cache


def ve(p: int, d: int, cache: DimCache | None = None) -> ExtPoly:
    """The full polynomial ve(2d) = sum_m dim Ext^m(Delta(0), Delta(2d)) z^m.

    Cost grows like d^2/p in time and memory (every row up to ``d`` is kept
    to its full degree), so scans should use :func:`ext_dim` instead.
    """
    p = require_prime(p)
    d = _require_nonneg("d", d)
    cache = _default_cache if cache is None else cache
    hit = cache.get(p, d)
    if hit is not None:
        return hit
    bound = 2 * d // p
    row = cache.table(p, d, bound).row(d)
    if row[bound + 1 :].any():
        raise RuntimeError(f"ve({2 * d}) for p={p} has terms above the degree bound {bound}")
    poly = ExtPoly(tuple(int(x) for x in row[: bound + 1]))
    cache.put(p, d, poly)
    return poly


def ext_dim(p: int, n: int, d: int, cache: DimCache | None = None) -> int:
    """dim Ext^n(Delta(0), Delta(2d))."""
    p = require_prime(p)
    n = _require_nonneg("n", n)
    d = _require_nonneg("d", d)
    cache = _default_cache if cache is None else cache
    hit = cache.get(p, d)
    if hit is not None:
        return hit[n]
    if n > 2 * d // p:
        return 0
    return int(cache.table(p, d, n).row(d)[n])


def ext_dim_column(p: int, n: int, d_max: int, cache: DimCache | None = None) -> np.ndarray:
    """Vector of dim Ext^n(Delta(0), Delta(2d)) for d = 0..d_max (uint64)."""
    p = require_prime(p)
    n = _require_nonneg("n", n)
    d_max = _require_nonneg("d_max", d_max)
    cache = _default_cache if cache is None else cache
    return cache.table(p, d_max, n).rows[: d_max + 1, n].copy()


def is_power_of(p: int, x: int) -> bool:
    if x < 1:
        return False
    while x % p == 0:
        x //= p
    return x == 1


def hom_dim_closed(p: int, d: int) -> int:
    """1 if d = p^r - 1 for some r >= 0, else 0."""
    p = require_prime(p)
    d = _require_nonneg("d", d)
    return int(is_power_of(p, d + 1))


def ext_dim_general(
    p: int, lam: int, mu: int, m: int, cache: DimCache | None = None
) -> int:
    """dim Ext^m(Delta(lam), Delta(mu)) by reduction to Delta(0).

    Writing lam = p*a + i and mu = p*b + j, the two reduction formulas cover
    residues 0 <= i, j <= p-2.  Steinberg residues (p-1) raise
    :class:`UnsupportedWeightError`, except that lam = 0 is always answered
    from the core since that is the defining case.  Ext^{-1} is taken as 0.
    """
    p = require_prime(p)
    lam = _require_nonneg("lambda", lam)
    mu = _require_nonneg("mu", mu)
    if m < 0:
        return 0
    if lam == mu:
        return 1 if m == 0 else 0
    a, i = divmod(lam, p)
    b, j = divmod(mu, p)
    if i == p - 1 or j == p - 1:
        if lam == 0:
            return ext_dim(p, m, mu // 2, cache) if mu % 2 == 0 else 0
        raise UnsupportedWeightError(
            f"weights {lam}, {mu} have a residue p-1 = {p - 1} modulo {p}"
        )
    diff = b - a
    if diff <= 0:
        return 0
    if j == i and diff % 2 == 0:
        return ext_dim(p, m, p * diff // 2, cache)
    if j == p - 2 - i and diff % 2 == 1:
        head = ext_dim(p, m - 1, p * (diff - 1) // 2, cache) if m >= 1 else 0
        return checked(head + ext_dim_general(p, a, b - 1, m, cache))
    return 0


def max_ext_scan(
    p: int, n: int, d_max: int, cache: DimCache | None = None
) -> tuple[int, list[int]]:
    """Largest dim Ext^n(Delta(0), Delta(2d)) over d <= d_max, with every maximiser."""
    col = ext_dim_column(p, n, d_max, cache)
    best = int(col.max())
    return best, [int(d) for d in np.flatnonzero(col == best)]


def recompute_entries(
    entries: Iterable[tuple[int, int, ExtPoly]],
) -> Iterator[tuple[int, int, ExtPoly, ExtPoly]]:
    """Recompute each cached entry from an empty cache; yields (p, d, stored, fresh)."""
    fresh_cache = DimCache()
    for p, d, poly in entries:
        yield p, d, poly, ve(p, d, fresh_cache)
