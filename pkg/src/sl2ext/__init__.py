"""Ext dimensions between Weyl modules for SL2 in characteristic p."""

from .core import (
    BlockClass,
    DimCache,
    ExtPoly,
    classify_block,
    ext_dim,
    ext_dim_general,
    hom_dim_closed,
    max_ext_scan,
    ve,
)
from .errors import ArithmeticOverflowError, CapacityError, UnsupportedWeightError

__all__ = [
    "ArithmeticOverflowError",
    "BlockClass",
    "CapacityError",
    "DimCache",
    "ExtPoly",
    "UnsupportedWeightError",
    "classify_block",
    "ext_dim",
    "ext_dim_general",
    "hom_dim_closed",
    "max_ext_scan",
    "ve",
]

__version__ = "0.1.0"
