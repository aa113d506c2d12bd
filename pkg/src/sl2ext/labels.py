"""Labels for s*h_n(s) when p is odd.

A label of length t stands for the sum over k_i >= 0 of s^{p^{m_1} + ... + p^{m_t}},
where each exponent form is m_j = (sum of the parameters that have started
by coordinate j) + a_j.  Parameters start at coordinates 1, 2, ..., so the
coefficient matrix is the staircase

    k_n(1, 1, ..., 1) + k_{i_1}(0, 1, ..., 1) + ... + (a_1, ..., a_t).

Labels of degree n come from degree n-2 (prepend exponent k_n + 1) and from
degree n-1 (prepend k_n and bump every offset by one).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from math import comb

from .core import require_prime
from .errors import checked


@dataclass(frozen=True)
class Label:
    offsets: tuple[int, ...]
    starts: tuple[int, ...]  # 1-based coordinate where each parameter starts, outermost first
    names: tuple[int, ...]  # subscript i of k_i for each parameter, for display only

    def __post_init__(self) -> None:
        t = len(self.offsets)
        if t < 1:
            raise ValueError("a label has at least one coordinate")
        if len(self.starts) != len(self.names):
            raise ValueError("starts and names must align")
        if not self.starts or self.starts[0] != 1:
            raise ValueError(f"outermost parameter must start at coordinate 1: {self.starts}")
        if any(self.starts[i] >= self.starts[i + 1] for i in range(len(self.starts) - 1)):
            raise ValueError(f"start coordinates must increase strictly: {self.starts}")
        if self.starts[-1] > t:
            raise ValueError(f"parameter starts past the last coordinate: {self.starts}")
        if any(a < 0 for a in self.offsets):
            raise ValueError(f"offsets must be >= 0: {self.offsets}")

    def __len__(self) -> int:
        return len(self.offsets)

    def exponents(self, ks: tuple[int, ...]) -> tuple[int, ...]:
        """Exponent tuple (m_1, ..., m_t) for a parameter assignment (outermost first)."""
        if len(ks) != len(self.starts):
            raise ValueError(f"expected {len(self.starts)} parameters, got {len(ks)}")
        out = []
        for j in range(1, len(self.offsets) + 1):
            out.append(sum(k for k, s in zip(ks, self.starts) if s <= j) + self.offsets[j - 1])
        return tuple(out)

    def __str__(self) -> str:
        forms = []
        for j in range(1, len(self.offsets) + 1):
            terms = [f"k_{name}" for name, s in zip(self.names, self.starts) if s <= j]
            a = self.offsets[j - 1]
            if a:
                terms.append(str(a))
            forms.append("+".join(terms))
        return "(" + ", ".join(forms) + ")"


def _rule_a(label: Label, n: int) -> Label:
    # from degree n-2: (k_n + 1, k_n + m_1, ..., k_n + m_t)
    return Label(
        (1, *label.offsets),
        (1, *(s + 1 for s in label.starts)),
        (n, *label.names),
    )


def _rule_b(label: Label, n: int) -> Label:
    # from degree n-1: (k_n, k_n + f_1 + 1, ..., k_n + f_u + 1)
    return Label(
        (0, *(a + 1 for a in label.offsets)),
        (1, *(s + 1 for s in label.starts)),
        (n, *label.names),
    )


@lru_cache(maxsize=None)
def build_labels(n: int) -> tuple[Label, ...]:
    """All labels of s*h_n(s), rule-(a) images of degree n-2 first."""
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    if n == 0:
        return (Label((0,), (1,), (0,)),)
    if n == 1:
        return (
            Label((1,), (1,), (1,)),
            Label((0, 1), (1, 2), (1, 0)),
        )
    out = [_rule_a(L, n) for L in build_labels(n - 2)]
    out += [_rule_b(L, n) for L in build_labels(n - 1)]
    for L in out:
        if max(L.offsets) > n:
            raise AssertionError(f"offset bound violated in degree {n}: {L}")
    return tuple(out)


def label_solutions(label: Label, p: int, N: int) -> int:
    """Number of parameter assignments k >= 0 with sum_j p^{m_j(k)} = N."""
    p = require_prime(p)
    if N < 1:
        return 0
    t = len(label.offsets)
    starts, offsets = label.starts, label.offsets
    # parameters starting at each coordinate (0 or 1 in normal form, but stay general)
    new_at = [0] * (t + 2)
    for s in starts:
        new_at[s] += 1
    # suffix offsets, for the lower bound on what the remaining coordinates add
    count = 0

    def rest_min(j: int, base: int) -> int:
        return sum(p ** (base + offsets[i]) for i in range(j, t))

    def rec(j: int, base: int, partial: int, fresh: int) -> None:
        # j: next coordinate (0-based); base: sum of parameters started so far
        nonlocal count
        if fresh:
            # choose one newly starting parameter at a time
            k = 0
            while True:
                b = base + k
                if partial + rest_min(j, b) > N:
                    break
                rec(j, b, partial, fresh - 1)
                k += 1
            return
        if j == t:
            if partial == N:
                count += 1
            return
        term = p ** (base + offsets[j])
        if partial + term > N:
            return
        rec(j + 1, base, partial + term, new_at[j + 2])

    rec(0, 0, 0, new_at[1])
    return checked(count)


def label_sum_histogram(label: Label, p: int, N_max: int) -> Counter:
    """Counter {N: solutions} for every N <= N_max, in one traversal."""
    p = require_prime(p)
    t = len(label.offsets)
    offsets = label.offsets
    new_at = [0] * (t + 2)
    for s in label.starts:
        new_at[s] += 1
    hist: Counter = Counter()

    def rest_min(j: int, base: int) -> int:
        return sum(p ** (base + offsets[i]) for i in range(j, t))

    def rec(j: int, base: int, partial: int, fresh: int) -> None:
        if fresh:
            k = 0
            while partial + rest_min(j, base + k) <= N_max:
                rec(j, base + k, partial, fresh - 1)
                k += 1
            return
        if j == t:
            hist[partial] += 1
            return
        rec(j + 1, base, partial + p ** (base + offsets[j]), new_at[j + 2])

    rec(0, 0, 0, new_at[1])
    return hist


def ext_dim_via_labels(p: int, n: int, d: int) -> int:
    """dim Ext^n(Delta(0), Delta(2d)) as the coefficient of s^{d+1} in s*h_n(s)."""
    p = require_prime(p)
    if p == 2:
        raise ValueError("label counting applies to odd p")
    return checked(sum(label_solutions(L, p, d + 1) for L in build_labels(n)))


def ext_dims_via_labels(p: int, n: int, d_max: int) -> list[int]:
    """ext_dim_via_labels for every d <= d_max."""
    p = require_prime(p)
    if p == 2:
        raise ValueError("label counting applies to odd p")
    out = [0] * (d_max + 1)
    for L in build_labels(n):
        for N, c in label_sum_histogram(L, p, d_max + 1).items():
            if N >= 1:
                out[N - 1] += c
    return [checked(x) for x in out]


def length_spectrum(n: int) -> Counter:
    """Histogram {length: number of labels} in degree n."""
    return Counter(len(L) for L in build_labels(n))


def length_set(n: int) -> set[int]:
    """Predicted set of label lengths: {t..2t} for n = 2t-1, {t+1..2t+1} for n = 2t."""
    if n == 0:
        return {1}
    t, odd = divmod(n + 1, 2)
    if odd == 0:
        return set(range(t, 2 * t + 1))
    t = n // 2
    return set(range(t + 1, 2 * t + 2))


def predicted_length_count(n: int, length: int) -> int:
    """1 for length n+1, else C(n-i, i+1) for length n-i."""
    if length == n + 1:
        return 1
    i = n - length
    return comb(n - i, i + 1) if i >= 0 else 0


@dataclass(frozen=True)
class Witness:
    n: int
    length: int
    p: int
    exponents: tuple[int, ...]
    weight_sum: int  # m = sum p^{b_j}; the Ext weight is 2(m-1)
    bound: int
    assignments: tuple[tuple[int, ...], ...]  # one solution per label of this length

    @property
    def d(self) -> int:
        return self.weight_sum - 1


def witness_weight(n: int, k: int, p: int) -> Witness:
    """A weight where every length-k label of degree n has a solution.

    Uses b_j = j(n+1); since offsets lie in [0, n] this makes b_j - a_j
    positive and strictly increasing for every label.
    """
    p = require_prime(p)
    labels = [L for L in build_labels(n) if len(L) == k]
    if not labels:
        raise ValueError(f"no label of length {k} in degree {n}")
    betas = tuple(j * (n + 1) for j in range(1, k + 1))
    m = sum(p**b for b in betas)
    sols = []
    for L in labels:
        targets = [b - a for b, a in zip(betas, L.offsets)]
        # staircase: parameter i contributes from coordinate starts[i] on
        ks, prev = [], 0
        for s in L.starts:
            ks.append(targets[s - 1] - prev)
            prev = targets[s - 1]
        if any(x < 0 for x in ks) or L.exponents(tuple(ks)) != betas:
            raise AssertionError(f"witness construction failed for {L}")
        sols.append(tuple(ks))
    return Witness(n, k, p, betas, m, len(labels), tuple(sols))
