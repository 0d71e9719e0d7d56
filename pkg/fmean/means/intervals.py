from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..core.exceptions import DomainError, ValidationError


@dataclass(frozen=True)
class Interval:
    """An interval of the extended real line with open or closed ends."""

    lo: float
    hi: float
    lo_open: bool = True
    hi_open: bool = True

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValidationError("Interval endpoints must not be NaN")
        if not self.lo < self.hi:
            raise ValidationError(f"Interval requires lo < hi, got lo={self.lo}, hi={self.hi}")
        if math.isinf(self.lo) and not self.lo_open:
            raise ValidationError("An infinite lower endpoint must be open")
        if math.isinf(self.hi) and not self.hi_open:
            raise ValidationError("An infinite upper endpoint must be open")

    @classmethod
    def real_line(cls) -> Interval:
        return cls(-math.inf, math.inf)

    @classmethod
    def positive(cls) -> Interval:
        return cls(0.0, math.inf)

    @classmethod
    def negative(cls) -> Interval:
        return cls(-math.inf, 0.0)

    @classmethod
    def unit(cls) -> Interval:
        return cls(0.0, 1.0)

    def contains(self, x: float) -> bool:
        if not math.isfinite(x):
            return False
        above = x > self.lo if self.lo_open else x >= self.lo
        below = x < self.hi if self.hi_open else x <= self.hi
        return above and below

    def contains_all(self, values: ArrayLike) -> bool:
        arr = np.asarray(values, dtype=float)
        if arr.size == 0:
            return True
        if not np.all(np.isfinite(arr)):
            return False
        above = arr > self.lo if self.lo_open else arr >= self.lo
        below = arr < self.hi if self.hi_open else arr <= self.hi
        return bool(np.all(above & below))

    def on_boundary(self, x: float) -> bool:
        """True when `x` equals an excluded finite endpoint."""
        if not math.isfinite(x):
            return False
        return (self.lo_open and x == self.lo) or (self.hi_open and x == self.hi)

    def intersect(self, other: Interval) -> Interval | None:
        if self.lo > other.lo:
            lo, lo_open = self.lo, self.lo_open
        elif other.lo > self.lo:
            lo, lo_open = other.lo, other.lo_open
        else:
            lo, lo_open = self.lo, self.lo_open or other.lo_open
        if self.hi < other.hi:
            hi, hi_open = self.hi, self.hi_open
        elif other.hi < self.hi:
            hi, hi_open = other.hi, other.hi_open
        else:
            hi, hi_open = self.hi, self.hi_open or other.hi_open
        if not lo < hi:
            return None
        return Interval(lo, hi, lo_open, hi_open)

    def require(self, values: ArrayLike, what: str = "value") -> NDArray[np.float64]:
        """Return `values` as a float array, raising DomainError if any leaves the interval."""
        arr = np.asarray(values, dtype=float)
        if not self.contains_all(arr):
            flat = arr.ravel()
            bad = next(float(v) for v in flat if not self.contains(float(v)))
            raise DomainError(f"{what} {bad!r} lies outside {self}")
        return arr

    def __str__(self) -> str:
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{_fmt(self.lo)}, {_fmt(self.hi)}{right}"


def _fmt(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)
