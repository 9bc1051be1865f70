"""Rational functions with factored numerator and denominator.

A :class:`RationalFunction` keeps its numerator and denominator as
:class:`~parmreach.factorizations.Factorization`\\ s and maintains a
canonical form at all times:

* numerator and denominator are coprime (canceled with
  :func:`~parmreach.factorizations.gcd_factored`, which also refines the
  shared pool as a side effect),
* the denominator's constant factor is positive (the numerator carries
  the sign),
* zero is ``0/1`` and the denominator is never the zero factorization.

Because cancellation happens on the factored form, the expensive
polynomial gcd kernel only runs on base pairs that are not already known
to be coprime or irreducible.  Products avoid a full re-cancellation:
for ``(n1/d1) * (n2/d2)`` it suffices to cancel ``n1`` against ``d2``
and ``n2`` against ``d1``, since each factor was coprime to its own
denominator already.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ParmreachError
from .factorizations import (
    Factorization,
    fadd,
    fmul,
    fpow,
    gcd_factored,
    pool,
)
from .polycore import Polynomial, Variable

__all__ = [
    "DivisionByZeroFunction",
    "EvalDenominatorZero",
    "RationalFunction",
    "rf_zero",
    "rf_one",
    "rf_const",
    "rf_of_poly",
    "rf_of_variable",
    "rf_from_polys",
    "rf_add",
    "rf_sub",
    "rf_neg",
    "rf_mul",
    "rf_div",
    "rf_pow",
    "rf_eval",
    "rf_sum",
]


class DivisionByZeroFunction(ParmreachError):
    """Division by a rational function that is identically zero."""


class EvalDenominatorZero(ParmreachError):
    """The evaluation point lies on the denominator's zero set."""


def _minus_one() -> Factorization:
    return Factorization.of(Polynomial.const(-1))


def _den_sign_fixed(num: Factorization, den: Factorization) -> tuple[Factorization, Factorization]:
    """Move a negative sign from the denominator into the numerator."""
    p = pool()
    for h, e in den.factors:
        base = p.poly(h)
        if base.is_constant and base.constant_value() < 0:
            # constant bases always carry exponent 1 after normalization
            m = _minus_one()
            return fmul(num, m), fmul(den, m)
    return num, den


def _cancel(num: Factorization, den: Factorization) -> tuple[Factorization, Factorization]:
    if den.is_zero:
        raise DivisionByZeroFunction("denominator is identically zero")
    if num.is_zero:
        return num, Factorization.one()
    if den.is_one or num.is_one:
        return _den_sign_fixed(num, den)
    t = gcd_factored(num, den)
    return _den_sign_fixed(t.cofactor_left, t.cofactor_right)


class RationalFunction:
    """An exact rational function in canonical (coprime) form.

    Instances are immutable.  Use the module-level constructors and the
    ``rf_*`` operators; the raw constructor trusts its arguments to be
    canonical already.
    """

    __slots__ = ("num", "den", "_num_poly", "_den_poly")

    def __init__(self, num: Factorization, den: Factorization):
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_num_poly", None)
        object.__setattr__(self, "_den_poly", None)

    def __setattr__(self, key, value):  # pragma: no cover - guard only
        raise AttributeError("RationalFunction is immutable")

    # -- inspection ----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_one(self) -> bool:
        return self.num.is_one and self.den.is_one

    @property
    def is_constant(self) -> bool:
        return self.numerator_poly().is_constant and self.denominator_poly().is_constant

    def as_fraction(self) -> Fraction:
        """The constant value; raises ValueError when not constant."""
        if not self.is_constant:
            raise ValueError(f"{self} is not constant")
        return Fraction(self.numerator_poly().constant_value(), self.denominator_poly().constant_value())

    def numerator_poly(self) -> Polynomial:
        p = self._num_poly
        if p is None:
            p = self.num.expand()
            object.__setattr__(self, "_num_poly", p)
        return p

    def denominator_poly(self) -> Polynomial:
        p = self._den_poly
        if p is None:
            p = self.den.expand()
            object.__setattr__(self, "_den_poly", p)
        return p

    # -- protocol ------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        if self.num == other.num and self.den == other.den:
            return True
        # same function, possibly different factorization granularity
        return (
            self.numerator_poly() == other.numerator_poly()
            and self.denominator_poly() == other.denominator_poly()
        )

    def __hash__(self) -> int:
        return hash((self.numerator_poly(), self.denominator_poly()))

    def __str__(self) -> str:
        n, d = self.numerator_poly(), self.denominator_poly()
        if d.is_one:
            return str(n)
        return f"({n})/({d})"

    def factored_str(self) -> str:
        """Render without expanding, showing the factor structure."""
        if self.den.is_one:
            return str(self.num)
        return f"[{self.num}] / [{self.den}]"

    def __repr__(self) -> str:
        return f"RationalFunction({self})"

    # -- operator sugar (delegates to the rf_* functions) ---------------

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return rf_add(self, other)

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return rf_sub(self, other)

    def __neg__(self) -> "RationalFunction":
        return rf_neg(self)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return rf_mul(self, other)

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        return rf_div(self, other)

    def __pow__(self, k: int) -> "RationalFunction":
        return rf_pow(self, k)


def rf_zero() -> RationalFunction:
    return RationalFunction(Factorization.zero(), Factorization.one())


def rf_one() -> RationalFunction:
    return RationalFunction(Factorization.one(), Factorization.one())


def rf_const(c: Fraction | int) -> RationalFunction:
    c = Fraction(c)
    return rf_from_polys(Polynomial.const(c.numerator), Polynomial.const(c.denominator))


def rf_of_poly(p: Polynomial) -> RationalFunction:
    return RationalFunction(Factorization.of(p), Factorization.one())


def rf_of_variable(v: Variable) -> RationalFunction:
    return rf_of_poly(Polynomial.of_variable(v))


def rf_from_polys(num: Polynomial, den: Polynomial) -> RationalFunction:
    """Build ``num/den`` from expanded polynomials and canonicalize."""
    if den.is_zero:
        raise DivisionByZeroFunction("denominator is identically zero")
    n, d = _cancel(Factorization.of(num), Factorization.of(den))
    return RationalFunction(n, d)


def rf_add(a: RationalFunction, b: RationalFunction) -> RationalFunction:
    if a.is_zero:
        return b
    if b.is_zero:
        return a
    if a.den == b.den:
        num = fadd(a.num, b.num)
        n, d = _cancel(num, a.den)
        return RationalFunction(n, d)
    num = fadd(fmul(a.num, b.den), fmul(b.num, a.den))
    n, d = _cancel(num, fmul(a.den, b.den))
    return RationalFunction(n, d)


def rf_neg(a: RationalFunction) -> RationalFunction:
    if a.is_zero:
        return a
    return RationalFunction(fmul(a.num, _minus_one()), a.den)


def rf_sub(a: RationalFunction, b: RationalFunction) -> RationalFunction:
    return rf_add(a, rf_neg(b))


def rf_mul(a: RationalFunction, b: RationalFunction) -> RationalFunction:
    if a.is_zero or b.is_zero:
        return rf_zero()
    if a.is_one:
        return b
    if b.is_one:
        return a
    # cross-cancel: each numerator only against the opposite denominator
    ta = gcd_factored(a.num, b.den)
    tb = gcd_factored(b.num, a.den)
    num = fmul(ta.cofactor_left, tb.cofactor_left)
    den = fmul(tb.cofactor_right, ta.cofactor_right)
    n, d = _den_sign_fixed(num, den)
    return RationalFunction(n, d)


def rf_div(a: RationalFunction, b: RationalFunction) -> RationalFunction:
    if b.is_zero:
        raise DivisionByZeroFunction("division by the zero function")
    if a.is_zero:
        return a
    inv = RationalFunction(*_den_sign_fixed(b.den, b.num))
    return rf_mul(a, inv)


def rf_pow(a: RationalFunction, k: int) -> RationalFunction:
    if k == 0:
        return rf_one()
    if k < 0:
        if a.is_zero:
            raise DivisionByZeroFunction("zero function raised to a negative power")
        base = RationalFunction(*_den_sign_fixed(a.den, a.num))
        k = -k
    else:
        base = a
    if base.is_zero or k == 1:
        return base
    return RationalFunction(fpow(base.num, k), fpow(base.den, k))


def rf_eval(a: RationalFunction, assignment: Mapping[Variable, Fraction]) -> Fraction:
    """Evaluate exactly at a point.

    Raises :class:`EvalDenominatorZero` when the denominator vanishes
    there, and :class:`~parmreach.polycore.MissingAssignment` when the
    point is incomplete.
    """
    d = a.den.eval(assignment)
    if d == 0:
        raise EvalDenominatorZero(f"denominator of {a} vanishes at the evaluation point")
    if a.is_zero:
        return Fraction(0)
    return a.num.eval(assignment) / d


def rf_sum(items: Iterable[RationalFunction]) -> RationalFunction:
    total = rf_zero()
    for item in items:
        total = rf_add(total, item)
    return total
