"""Exception types and checked unsigned 64-bit counting."""

from __future__ import annotations

import numpy as np

U64_MAX = (1 << 64) - 1


class ArithmeticOverflowError(OverflowError):
    """A counter left the unsigned 64-bit range."""


class UnsupportedWeightError(ValueError):
    """Weights outside the range covered by the reduction formulas."""


class CapacityError(RuntimeError):
    """An enumeration would exceed the configured size limit."""


class TruncationError(ValueError):
    """Series bounds are too small for the requested check."""


def checked(value: int) -> int:
    """Return ``value`` unchanged if it is a valid u64 counter."""
    if value < 0 or value > U64_MAX:
        raise ArithmeticOverflowError(f"counter {value} outside [0, 2^64-1]")
    return value


def checked_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise u64 sum of equal-length arrays; raises instead of wrapping."""
    out = a + b
    if np.any(out < a):
        raise ArithmeticOverflowError("u64 overflow while adding coefficient rows")
    return out
