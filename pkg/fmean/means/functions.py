"""Catalog of mean functions and their inverses.

Every entry is strictly increasing on its domain I, so the f-mean
f^-1(mean of f(x)) is well defined. Entries whose natural form decreases
(power with a < 0, exp with a < 0) are sign-flipped; the mean is unchanged.

Entries that saturate in float64 (cara, exp, normal_cdf) carry an `accurate`
interval on which f^-1(f(x)) recovers x to ATOL_INV.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from enum import StrEnum
from typing import Any, NoReturn, overload

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize, special

from ..core.exceptions import (
    CodomainError,
    ConfigurationError,
    InversionError,
    ValidationError,
)
from .intervals import Interval

FloatArray = NDArray[np.float64]
ArrayMap = Callable[[FloatArray], FloatArray]

ATOL_INV = 1e-10
BISECTION_XTOL = 1e-13
_MAX_BRACKET_STEPS = 200

# Round-trip limits of the saturating entries. Past them f(x) sits within a
# few ulps of the edge of J, so f^-1 loses digits and then rounds onto the edge.
_CARA_ACCURATE_EXPONENT = 12.0
_EXP_ACCURATE_EXPONENT = 700.0
_NORMAL_CDF_ACCURATE = (-30.0, 4.5)


class Convexity(StrEnum):
    CONCAVE = "concave"
    CONVEX = "convex"
    NEITHER = "neither"

    def flipped(self) -> Convexity:
        if self is Convexity.CONCAVE:
            return Convexity.CONVEX
        if self is Convexity.CONVEX:
            return Convexity.CONCAVE
        return Convexity.NEITHER


@dataclass(frozen=True, eq=False)
class MeanFunction:
    """A strictly increasing continuous map f: I -> J with its inverse."""

    name: str
    params: tuple[float, ...]
    domain: Interval
    codomain: Interval
    convexity: Convexity
    forward: ArrayMap = field(repr=False)
    closed_inverse: ArrayMap | None = field(default=None, repr=False)
    mean_formula: str = ""
    bracket: tuple[float, float] = (-10.0, 10.0)
    # where f^-1(f(x)) recovers x to ATOL_INV in float64; None means all of I
    accurate: Interval | None = None

    @property
    def has_closed_inverse(self) -> bool:
        return self.closed_inverse is not None

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        joined = ", ".join(f"{p:g}" for p in self.params)
        return f"{self.name}({joined})"

    @overload
    def evaluate(self, x: float) -> float: ...

    @overload
    def evaluate(self, x: ArrayLike) -> FloatArray | float: ...

    def evaluate(self, x: ArrayLike) -> FloatArray | float:
        """f(x); raises DomainError when any value leaves I.

        Raises CodomainError when f(x) rounds onto or past the edge of J, which
        happens in the tails of saturating entries (normal_cdf, cara, exp).
        """
        arr = self.domain.require(x, what=f"{self.label} argument")
        with np.errstate(over="ignore"):
            out = np.asarray(self.forward(arr), dtype=float)
        if not self.codomain.contains_all(out):
            _raise_saturated(self, arr, out)
        return _unwrap(out)

    def invert(self, y: ArrayLike) -> FloatArray | float:
        return invert(self, y)

    def swapped(self) -> MeanFunction:
        """f^-1 used as a mean function: domain J, codomain I, convexity flipped."""
        return MeanFunction(
            name=f"inverse[{self.name}]",
            params=self.params,
            domain=self.codomain,
            codomain=self.domain,
            convexity=self.convexity.flipped(),
            forward=lambda y: np.asarray(invert(self, y), dtype=float),
            closed_inverse=self.forward,
            mean_formula=f"f(E[f^-1(X)]) with f = {self.label}",
        )

    def scaled(self, alpha: float, beta: float) -> MeanFunction:
        """alpha * f + beta for alpha > 0; generates the same means as f."""
        if not alpha > 0:
            raise ValidationError(f"Affine rescaling needs alpha > 0, got {alpha}")
        codomain = Interval(
            alpha * self.codomain.lo + beta,
            alpha * self.codomain.hi + beta,
            self.codomain.lo_open,
            self.codomain.hi_open,
        )
        return replace(
            self,
            name=f"{self.name}*{alpha:g}+{beta:g}",
            codomain=codomain,
            forward=lambda x: alpha * self.forward(x) + beta,
            closed_inverse=lambda y: np.asarray(invert(self, (y - beta) / alpha), dtype=float),
        )

    def derivative(self, x: float) -> float:
        """Central-difference slope of f at x, one-sided next to a finite endpoint."""
        self.domain.require(x, what=f"{self.label} argument")
        h = 1e-6 * max(1.0, abs(x))
        lo, hi = x - h, x + h
        if not self.domain.contains(lo):
            lo = x
        if not self.domain.contains(hi):
            hi = x
        if hi == lo:
            raise ValidationError(f"Cannot difference {self.label} at {x!r}")
        f_lo, f_hi = self.forward(np.array([lo, hi], dtype=float))
        return float((f_hi - f_lo) / (hi - lo))


def invert(f: MeanFunction, y: ArrayLike) -> FloatArray | float:
    """f^-1(y) for y in J.

    Uses the closed form when the entry has one, otherwise a bracketed monotone
    bisection refined to an interval of width BISECTION_XTOL.
    """
    arr = np.asarray(y, dtype=float)
    _require_codomain(f, arr)
    if f.closed_inverse is not None:
        return _unwrap(f.closed_inverse(arr))
    flat = np.array([_bisect_inverse(f, float(v)) for v in arr.ravel()], dtype=float)
    return _unwrap(flat.reshape(arr.shape))


def _require_codomain(f: MeanFunction, arr: FloatArray) -> None:
    if f.codomain.contains_all(arr):
        return
    for value in arr.ravel():
        v = float(value)
        if f.codomain.contains(v):
            continue
        if f.codomain.on_boundary(v):
            raise CodomainError(
                f"{v!r} sits on the boundary of the codomain {f.codomain} of {f.label}",
                position="boundary",
            )
        raise CodomainError(
            f"{v!r} lies outside the codomain {f.codomain} of {f.label}",
            position="exterior",
        )


def _bisect_inverse(f: MeanFunction, y: float) -> float:
    lo, hi = _bracket(f, y)

    def residual(x: float) -> float:
        return float(f.forward(np.array([x]))[0]) - y

    r_lo, r_hi = residual(lo), residual(hi)
    if r_lo == 0.0:
        return lo
    if r_hi == 0.0:
        return hi
    root = float(optimize.bisect(residual, lo, hi, xtol=BISECTION_XTOL, maxiter=500))
    if abs(residual(root)) > ATOL_INV:
        raise InversionError(
            f"Bisection for {f.label}^-1({y!r}) stopped at {root!r} with residual "
            f"{residual(root):.3e} > {ATOL_INV:.0e}"
        )
    return root


def _raise_saturated(f: MeanFunction, arr: FloatArray, out: FloatArray) -> NoReturn:
    flat_x, flat_y = arr.ravel(), out.ravel()
    index = next(i for i, v in enumerate(flat_y) if not f.codomain.contains(float(v)))
    x, y = float(flat_x[index]), float(flat_y[index])
    position = "boundary" if f.codomain.on_boundary(y) else "exterior"
    hint = f"; {f.label} round-trips on {f.accurate}" if f.accurate is not None else ""
    raise CodomainError(
        f"{f.label}({x!r}) = {y!r} is not inside the codomain {f.codomain} in float64{hint}",
        position=position,
    )


def _bracket(f: MeanFunction, y: float) -> tuple[float, float]:
    """Expand the entry's starting bracket until f(lo) <= y <= f(hi)."""
    lo, hi = f.bracket
    if not f.domain.contains(lo):
        lo = _inward(f.domain, hi, toward_lo=True)
    if not f.domain.contains(hi):
        hi = _inward(f.domain, lo, toward_lo=False)
    for _ in range(_MAX_BRACKET_STEPS):
        f_lo, f_hi = f.forward(np.array([lo, hi], dtype=float))
        if f_lo <= y <= f_hi:
            return lo, hi
        width = hi - lo
        if f_lo > y:
            candidate = lo - width
            lo = candidate if f.domain.contains(candidate) else (lo + f.domain.lo) / 2
        if f_hi < y:
            candidate = hi + width
            hi = candidate if f.domain.contains(candidate) else (hi + f.domain.hi) / 2
    raise InversionError(f"Could not bracket {f.label}^-1({y!r}) inside {f.domain}")


def _inward(domain: Interval, other: float, *, toward_lo: bool) -> float:
    edge = domain.lo if toward_lo else domain.hi
    if math.isinf(other):
        other = 0.0 if domain.contains(0.0) else (1.0 if toward_lo else -1.0)
    return (edge + other) / 2


def _unwrap(values: Any) -> FloatArray | float:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    return arr


# Catalog builders. Each receives validated params and returns the entry.


def _identity(params: Sequence[float]) -> MeanFunction:
    return MeanFunction(
        name="identity",
        params=(),
        domain=Interval.real_line(),
        codomain=Interval.real_line(),
        convexity=Convexity.NEITHER,
        forward=lambda x: np.asarray(x, dtype=float),
        closed_inverse=lambda y: np.asarray(y, dtype=float),
        mean_formula="E[X]",
    )


def _power(params: Sequence[float]) -> MeanFunction:
    (a,) = params
    if a == 0 or not math.isfinite(a):
        raise ValidationError(f"power requires a finite exponent a != 0, got {a}")
    if a > 0:
        if a < 1:
            convexity = Convexity.CONCAVE
        elif a > 1:
            convexity = Convexity.CONVEX
        else:
            convexity = Convexity.NEITHER
        return MeanFunction(
            name="power",
            params=(a,),
            domain=Interval.positive(),
            codomain=Interval.positive(),
            convexity=convexity,
            forward=lambda x: np.power(x, a),
            closed_inverse=lambda y: np.power(y, 1.0 / a),
            mean_formula=f"(E[X^{a:g}])^(1/{a:g})",
            bracket=(0.5, 2.0),
        )
    return MeanFunction(
        name="power",
        params=(a,),
        domain=Interval.positive(),
        codomain=Interval.negative(),
        convexity=Convexity.CONCAVE,
        forward=lambda x: -np.power(x, a),
        closed_inverse=lambda y: np.power(-y, 1.0 / a),
        mean_formula=f"(E[X^{a:g}])^(1/{a:g})",
        bracket=(0.5, 2.0),
    )


def _neg_inverse(params: Sequence[float]) -> MeanFunction:
    return MeanFunction(
        name="neg_inverse",
        params=(),
        domain=Interval.positive(),
        codomain=Interval.negative(),
        convexity=Convexity.CONCAVE,
        forward=lambda x: -1.0 / x,
        closed_inverse=lambda y: -1.0 / y,
        mean_formula="(E[1/X])^-1",
        bracket=(0.5, 2.0),
    )


def _cara(params: Sequence[float]) -> MeanFunction:
    (a,) = params
    if not (a > 0 and math.isfinite(a)):
        raise ValidationError(f"cara requires a > 0, got {a}")
    accurate = Interval(0.0, _CARA_ACCURATE_EXPONENT / a, hi_open=False)
    return MeanFunction(
        name="cara",
        params=(a,),
        domain=Interval.positive(),
        codomain=Interval.unit(),
        convexity=Convexity.CONCAVE,
        forward=lambda x: -np.expm1(-a * x),
        closed_inverse=lambda y: -np.log1p(-y) / a,
        mean_formula=f"-(1/{a:g}) ln E[exp(-{a:g} X)] for X in {accurate}",
        bracket=(0.5, 2.0),
        accurate=accurate,
    )


def _exp(params: Sequence[float]) -> MeanFunction:
    (a,) = params
    if a == 0 or not math.isfinite(a):
        raise ValidationError(f"exp requires a finite rate a != 0, got {a}")
    bound = _EXP_ACCURATE_EXPONENT / abs(a)
    accurate = Interval(-bound, bound, lo_open=False, hi_open=False)
    formula = f"(1/{a:g}) ln E[exp({a:g} X)] for X in {accurate}"
    if a > 0:
        return MeanFunction(
            name="exp",
            params=(a,),
            domain=Interval.real_line(),
            codomain=Interval.positive(),
            convexity=Convexity.CONVEX,
            forward=lambda x: np.exp(a * x),
            closed_inverse=lambda y: np.log(y) / a,
            mean_formula=formula,
            accurate=accurate,
        )
    return MeanFunction(
        name="exp",
        params=(a,),
        domain=Interval.real_line(),
        codomain=Interval.negative(),
        convexity=Convexity.CONCAVE,
        forward=lambda x: -np.exp(a * x),
        closed_inverse=lambda y: np.log(-y) / a,
        mean_formula=formula,
        accurate=accurate,
    )


def _log(params: Sequence[float]) -> MeanFunction:
    return MeanFunction(
        name="log",
        params=(),
        domain=Interval.positive(),
        codomain=Interval.real_line(),
        convexity=Convexity.CONCAVE,
        forward=np.log,
        closed_inverse=np.exp,
        mean_formula="exp(E[ln X])",
        bracket=(0.5, 2.0),
    )


def _sinh(params: Sequence[float]) -> MeanFunction:
    return MeanFunction(
        name="sinh",
        params=(),
        domain=Interval.real_line(),
        codomain=Interval.real_line(),
        convexity=Convexity.NEITHER,
        forward=np.sinh,
        closed_inverse=np.arcsinh,
        mean_formula="asinh(E[sinh X])",
    )


def _normal_cdf(params: Sequence[float]) -> MeanFunction:
    """Phi with inverse by bisection.

    Phi(x) rounds to 1.0 above x ~ 8.3, and the round trip holds to ATOL_INV
    only on [-30, 4.5].
    """
    accurate = Interval(*_NORMAL_CDF_ACCURATE, lo_open=False, hi_open=False)
    return MeanFunction(
        name="normal_cdf",
        params=(),
        domain=Interval.real_line(),
        codomain=Interval.unit(),
        convexity=Convexity.NEITHER,
        forward=special.ndtr,
        closed_inverse=None,
        mean_formula=f"q(E[Phi(X)]) for X in {accurate}",
        accurate=accurate,
    )


def _cube(params: Sequence[float]) -> MeanFunction:
    return MeanFunction(
        name="cube",
        params=(),
        domain=Interval.real_line(),
        codomain=Interval.real_line(),
        convexity=Convexity.NEITHER,
        forward=lambda x: np.power(x, 3),
        closed_inverse=np.cbrt,
        mean_formula="cbrt(E[X^3])",
    )


_CATALOG: dict[str, tuple[int, Callable[[Sequence[float]], MeanFunction]]] = {
    "identity": (0, _identity),
    "power": (1, _power),
    "neg_inverse": (0, _neg_inverse),
    "cara": (1, _cara),
    "exp": (1, _exp),
    "log": (0, _log),
    "sinh": (0, _sinh),
    "normal_cdf": (0, _normal_cdf),
    "cube": (0, _cube),
}

CATALOG_NAMES = tuple(_CATALOG)


def make_mean_function(name: str, params: Sequence[float] = ()) -> MeanFunction:
    """Build a catalog entry by name, e.g. ("cara", [1.0])."""
    entry = _CATALOG.get(name.strip().lower())
    if entry is None:
        raise ConfigurationError(
            f"Unknown mean function {name!r}. Known: {', '.join(CATALOG_NAMES)}"
        )
    arity, builder = entry
    values = tuple(float(p) for p in params)
    if len(values) != arity:
        raise ValidationError(
            f"{name} takes {arity} parameter(s), got {len(values)}: {list(values)}"
        )
    return builder(values)
