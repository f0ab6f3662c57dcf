"""Dual-regime arithmetic: exact rationals, or complex floats via mpmath.

The exact regime is permitted only when every exponent in play is an integer,
so that powers of the residue cardinality stay rational.  Anything else runs
in the float regime at a configurable binary precision.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import mpmath

from .errors import DomainError, PoleError

EXACT = "exact"
FLOAT = "float"


def coerce_number(value):
    """Normalize an input number: rationals to Fraction, the rest to complex."""
    if isinstance(value, bool):
        raise DomainError("booleans are not numbers here")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, (float, complex)):
        return complex(value)
    if isinstance(value, (mpmath.mpf, mpmath.mpc)):
        return complex(value)
    raise DomainError(f"cannot interpret {value!r} as a number")


def is_integral(value) -> bool:
    return isinstance(value, Rational) and Fraction(value).denominator == 1


def classify_regime(*values) -> str:
    """Exact when every value is an integer, float otherwise."""
    return EXACT if all(is_integral(v) for v in values) else FLOAT


def real_part(value):
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, complex):
        return value.real
    if isinstance(value, (mpmath.mpf, mpmath.mpc)):
        return mpmath.re(value)
    return value


@dataclass(frozen=True)
class Scalar:
    """An evaluation result: exact Fraction, or complex float with metadata."""

    regime: str
    value: object
    tolerance: float = 0.0
    precision: int = 53

    @classmethod
    def exact(cls, value) -> "Scalar":
        return cls(EXACT, Fraction(value))

    @classmethod
    def floating(cls, value, tolerance: float = 0.0, precision: int = 53) -> "Scalar":
        return cls(FLOAT, mpmath.mpc(value), tolerance, precision)

    def as_complex(self) -> complex:
        if self.regime == EXACT:
            return complex(Fraction(self.value))
        return complex(self.value)

    def to_json(self) -> dict:
        if self.regime == EXACT:
            return {"regime": EXACT, "value": str(self.value)}
        z = mpmath.mpc(self.value)
        return {
            "regime": FLOAT,
            "re": float(mpmath.re(z)),
            "im": float(mpmath.im(z)),
            "tolerance": float(self.tolerance),
        }


def scalar_from_json(data) -> Scalar:
    if not isinstance(data, dict) or "regime" not in data:
        raise DomainError("scalar JSON needs a 'regime' field")
    if data["regime"] == EXACT:
        return Scalar.exact(Fraction(data["value"]))
    if data["regime"] == FLOAT:
        return Scalar.floating(
            complex(data["re"], data.get("im", 0.0)), data.get("tolerance", 0.0)
        )
    raise DomainError(f"unknown scalar regime {data['regime']!r}")


class ExactOps:
    """Arithmetic over Fraction; exponents must be integers."""

    regime = EXACT
    precision = None

    def convert(self, value):
        value = coerce_number(value)
        if not isinstance(value, Fraction):
            raise DomainError(f"exact regime cannot hold {value!r}")
        return value

    def q_pow(self, q: int, exponent) -> Fraction:
        exponent = Fraction(exponent)
        if exponent.denominator != 1:
            raise DomainError(
                f"exact regime needs integer exponents, got {exponent}"
            )
        return Fraction(q) ** int(exponent)

    def pole_factor(self, q: int, exponent, label: str) -> Fraction:
        """q**exponent - 1, raising when it vanishes."""
        if Fraction(exponent) == 0:
            raise PoleError(f"q**E - 1 vanishes at {label}")
        return self.q_pow(q, exponent) - 1

    def wrap(self, value, tolerance: float = 0.0) -> Scalar:
        return Scalar.exact(value)


class FloatOps:
    """Arithmetic over mpmath complex numbers at a fixed precision."""

    regime = FLOAT

    def __init__(self, precision: int = 53, pole_epsilon: float = 1e-9):
        if precision < 10:
            raise DomainError(f"precision of {precision} bits is too small")
        self.precision = precision
        self.pole_epsilon = pole_epsilon

    def workprec(self):
        return mpmath.workprec(self.precision)

    def convert(self, value):
        value = coerce_number(value)
        if isinstance(value, Fraction):
            with self.workprec():
                return mpmath.mpf(value.numerator) / mpmath.mpf(value.denominator)
        return mpmath.mpc(value)

    def q_pow(self, q: int, exponent):
        with self.workprec():
            return mpmath.power(q, self.convert(exponent))

    def pole_factor(self, q: int, exponent, label: str):
        value = self.q_pow(q, exponent)
        if abs(value - 1) < self.pole_epsilon:
            raise PoleError(f"q**E - 1 is within {self.pole_epsilon} of zero at {label}")
        return value - 1

    def wrap(self, value, tolerance: float = 0.0) -> Scalar:
        return Scalar(FLOAT, mpmath.mpc(value), tolerance, self.precision)


def ops_for(regime: str, precision: int = 53, pole_epsilon: float = 1e-9):
    if regime == EXACT:
        return ExactOps()
    if regime == FLOAT:
        return FloatOps(precision, pole_epsilon)
    raise DomainError(f"unknown regime {regime!r}")


def demote_to_float(reason: str) -> None:
    warnings.warn(f"falling back to the float regime: {reason}", stacklevel=3)
