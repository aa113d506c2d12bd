"""Expansions N = sum_i 2^{b_i} with weakly decreasing exponents.

For p = 2 the number of such expansions with t parts and N = d + 1 is
exactly dim Ext^{t-1}(Delta(0), Delta(2d)).  Counting goes through a
dynamic program; :func:`enumerate_expansions` is the brute-force
counterpart used to anchor it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import groupby

import numpy as np

from .errors import CapacityError, checked

DEFAULT_LIMIT = 1_000_000


@dataclass(frozen=True, order=True)
class Expansion:
    """A weakly decreasing exponent tuple; ``target`` is sum 2^b."""

    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        parts = tuple(int(b) for b in self.parts)
        if any(b < 0 for b in parts):
            raise ValueError(f"negative exponent in {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"exponents must be weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def target(self) -> int:
        return sum(1 << b for b in self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def run_form(self) -> RunForm:
        return RunForm(tuple((c, len(list(g))) for c, g in groupby(self.parts)))


@dataclass(frozen=True)
class RunForm:
    """(c_1^{r_1}, ..., c_w^{r_w}) with c_1 > ... > c_w >= 0 and r_i >= 1."""

    runs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        cs = [c for c, _ in self.runs]
        if any(r < 1 for _, r in self.runs):
            raise ValueError(f"multiplicities must be >= 1: {self.runs}")
        if any(cs[i] <= cs[i + 1] for i in range(len(cs) - 1)) or any(c < 0 for c in cs):
            raise ValueError(f"run values must be strictly decreasing and >= 0: {self.runs}")

    def __len__(self) -> int:
        return sum(r for _, r in self.runs)

    def expansion(self) -> Expansion:
        return Expansion(tuple(c for c, r in self.runs for _ in range(r)))


@lru_cache(maxsize=None)
def _count(n: int, t: int, e: int) -> int:
    # expansions of n into exactly t parts, each exponent <= e
    if t == 0:
        return 1 if n == 0 else 0
    if n < t or n > t << e:
        return 0
    total = 0
    for b in range(min(e, n.bit_length() - 1), -1, -1):
        if (1 << b) * t < n:
            break
        total += _count(n - (1 << b), t - 1, b)
    return total


def count_pow2_partitions(t: int, N: int) -> int:
    """Number of weakly decreasing t-tuples of exponents with sum 2^{b_i} = N."""
    if t < 0 or N < 0:
        raise ValueError(f"need t, N >= 0, got t={t}, N={N}")
    if N == 0:
        return 1 if t == 0 else 0
    return checked(_count(N, t, N.bit_length() - 1))


def pow2_partition_table(t_max: int, N_max: int) -> np.ndarray:
    """``T[t, N]`` = count_pow2_partitions(t, N) for t <= t_max, N <= N_max.

    Same recurrence as :func:`count_pow2_partitions`, run as a table over the
    largest allowed exponent so a whole grid costs one pass.
    """
    T = np.zeros((t_max + 1, N_max + 1), dtype=object)
    T[0, 0] = 1
    q = 1
    while q <= N_max:
        # allow exponent log2(q); rows read T[t-1] already updated, so q repeats
        for t in range(1, t_max + 1):
            T[t, q:] += T[t - 1, : N_max + 1 - q]
        q *= 2
    for x in T.flat:
        checked(x)
    return T


def enumerate_expansions(N: int, t: int, limit: int = DEFAULT_LIMIT) -> list[Expansion]:
    """Every expansion of N with exactly t parts, in lexicographic order."""
    if N < 1 or t < 1:
        return []
    out: list[Expansion] = []

    def rec(prefix: list[int], remaining: int, left: int, cap: int) -> None:
        if left == 0:
            if remaining == 0:
                if len(out) >= limit:
                    raise CapacityError(f"more than {limit} expansions of {N} with {t} parts")
                out.append(Expansion(tuple(prefix)))
            return
        for b in range(0, cap + 1):
            v = 1 << b
            if v > remaining:
                break
            rest = remaining - v
            # the other parts each lie in [1, 2^b]
            if rest < left - 1 or rest > (left - 1) * v:
                continue
            prefix.append(b)
            rec(prefix, rest, left - 1, b)
            prefix.pop()

    rec([], N, t, N.bit_length() - 1)
    return out


def psi_map(e: Expansion) -> Expansion:
    """Split one copy of the largest part 2^{b_1} into two copies of 2^{b_1 - 1}."""
    if not e.parts or e.parts[0] < 2:
        raise ValueError(f"largest exponent must be >= 2, got {e.parts}")
    b1 = e.parts[0]
    return Expansion(tuple(sorted(e.parts[1:] + (b1 - 1, b1 - 1), reverse=True)))


@dataclass(frozen=True)
class LowerBoundResult:
    t: int
    count: int
    bound: int
    reduced_count: int  # expansions of 2^t with 2t-2 parts
    passed: bool


def check_lower_bound(t: int) -> LowerBoundResult:
    """dim Ext^{2t-2}(Delta(0), Delta(2 * 2^t)) against the bound 2^{t-2}."""
    if t < 2:
        raise ValueError(f"t must be >= 2, got {t}")
    count = count_pow2_partitions(2 * t - 1, 2**t + 1)
    reduced = count_pow2_partitions(2 * t - 2, 2**t)
    bound = 2 ** (t - 2)
    return LowerBoundResult(t, count, bound, reduced, count >= bound and count == reduced)


@dataclass(frozen=True)
class StewartResult:
    m: int
    lhs: int
    rhs: int
    passed: bool


def stewart_identity(m: int) -> StewartResult:
    """Expansions of 2^m + 1 with m + 1 parts versus expansions of 2^m with m parts."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    lhs = count_pow2_partitions(m + 1, 2**m + 1)
    rhs = count_pow2_partitions(m, 2**m)
    return StewartResult(m, lhs, rhs, lhs == rhs)
