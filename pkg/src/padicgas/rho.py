"""Background-density families and the density-dependent prefactor.

A density is a function on the norm values q**m; it must grow at most like
1/t as t -> 0 and decay faster than any power as t -> infinity.  The
prefactor attached to the main formula is

    (1 - q**(-z)) / (1 - q**(-(z-1))) * sum over m of rho(q**m) * q**(m z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath

from .config import DEFAULT, Limits
from .errors import ConvergenceError, DomainError, UnsupportedRhoError
from .scalars import (
    ExactOps,
    FloatOps,
    Scalar,
    coerce_number,
    is_integral,
    real_part,
)

BALL = "ball"
EXP_DECAY = "exp_decay"
GAUSSIAN = "gaussian"
TABLE = "table"


@dataclass(frozen=True)
class RhoSpec:
    """One background density: unit-ball style indicator, e**(-t), e**(-t^2/2),
    or a finite table of values at norm levels q**m."""

    family: str
    ball_index: int = 0
    table: tuple[tuple[int, object], ...] = ()
    tolerance: float = 1e-14

    @classmethod
    def ball(cls, index: int = 0, tolerance: float = 1e-14) -> "RhoSpec":
        """Indicator of the ball of radius q**index."""
        return cls(BALL, ball_index=index, tolerance=tolerance)

    @classmethod
    def exp_decay(cls, tolerance: float = 1e-14) -> "RhoSpec":
        return cls(EXP_DECAY, tolerance=tolerance)

    @classmethod
    def gaussian(cls, tolerance: float = 1e-14) -> "RhoSpec":
        return cls(GAUSSIAN, tolerance=tolerance)

    @classmethod
    def from_table(cls, mapping, tolerance: float = 1e-14) -> "RhoSpec":
        items = tuple(sorted((int(m), coerce_number(v)) for m, v in dict(mapping).items()))
        if not items:
            raise DomainError("a table density needs at least one entry")
        return cls(TABLE, table=items, tolerance=tolerance)

    @classmethod
    def parse(cls, text: str) -> "RhoSpec":
        """CLI syntax: ``ball:M``, ``ball`` (M=0), ``exp``, ``gaussian``,
        ``table:m=v,m=v,...``."""
        head, _, rest = text.partition(":")
        head = head.strip().lower()
        if head == "ball":
            return cls.ball(int(rest) if rest else 0)
        if head in ("exp", "exp_decay"):
            return cls.exp_decay()
        if head in ("gauss", "gaussian"):
            return cls.gaussian()
        if head == "table":
            entries = {}
            for chunk in rest.split(","):
                if not chunk.strip():
                    continue
                m, _, v = chunk.partition("=")
                entries[int(m)] = Fraction(v) if "/" in v or v.lstrip("+-").isdigit() else float(v)
            return cls.from_table(entries)
        raise DomainError(f"unknown density spec {text!r}")

    def describe(self) -> str:
        if self.family == BALL:
            return f"ball:{self.ball_index}"
        if self.family == TABLE:
            return "table:" + ",".join(f"{m}={v}" for m, v in self.table)
        return "exp" if self.family == EXP_DECAY else "gaussian"

    def value_at_level(self, q: int, m: int):
        """rho(q**m)."""
        if self.family == BALL:
            return Fraction(1) if m <= self.ball_index else Fraction(0)
        if self.family == TABLE:
            for level, v in self.table:
                if level == m:
                    return v
            return Fraction(0)
        if self.family == EXP_DECAY:
            return mpmath.exp(-mpmath.power(q, m))
        if self.family == GAUSSIAN:
            return mpmath.exp(-mpmath.power(q, 2 * m) / 2)
        raise UnsupportedRhoError(f"unknown family {self.family!r}")

    @property
    def series_abscissa(self):
        """Re(z) must strictly exceed this for the level sum to converge."""
        if self.family == BALL:
            return 1
        if self.family == TABLE:
            return -math.inf
        return 0

    @property
    def compactly_supported(self) -> bool:
        return self.family in (BALL, TABLE)

    def max_support_index(self, q: int) -> int:
        """Greatest m with rho(q**m) nonzero (compact support only)."""
        if self.family == BALL:
            return self.ball_index
        if self.family == TABLE:
            nonzero = [m for m, v in self.table if v != 0]
            if not nonzero:
                raise DomainError("the table density is identically zero")
            return max(nonzero)
        raise UnsupportedRhoError(f"{self.describe()} is not compactly supported")

    @property
    def exactly_representable(self) -> bool:
        """Whether the prefactor can stay in the exact regime at integer z."""
        if self.family == BALL:
            return True
        if self.family == TABLE:
            return all(isinstance(v, Rational) for _, v in self.table)
        return False

    @property
    def is_nonnegative(self) -> bool:
        if self.family == TABLE:
            return all(
                not isinstance(v, complex) and real_part(v) >= 0 for _, v in self.table
            ) and any(v != 0 for _, v in self.table)
        return True


def root_function(
    q: int,
    z,
    rho: RhoSpec,
    ops=None,
    limits: Limits = DEFAULT,
    allow_below_abscissa: bool = False,
) -> Scalar:
    """The density prefactor at argument z.

    For the ball indicator this is the closed form q**(M z) / (1 - q**(1-z));
    for the series families the sum is truncated with a certified tail bound
    below the configured tolerance.
    """
    if q < 2:
        raise DomainError(f"residue cardinality must be >= 2, got {q}")
    z = coerce_number(z)
    if ops is None:
        exact_ok = rho.exactly_representable and is_integral(z)
        ops = ExactOps() if exact_ok else FloatOps(pole_epsilon=limits.pole_epsilon)
    if not allow_below_abscissa and not real_part(z) > rho.series_abscissa:
        raise ConvergenceError(
            f"Re(z)={real_part(z)} is at or below the abscissa "
            f"{rho.series_abscissa} of {rho.describe()}"
        )

    if rho.family == BALL:
        denominator = -ops.pole_factor(q, -(z - 1), "z - 1")  # 1 - q**(1-z)
        return ops.wrap(ops.q_pow(q, rho.ball_index * z) / denominator)

    if rho.family == TABLE:
        numerator = 1 - ops.q_pow(q, -z)  # a zero of the prefactor, never a pole
        denominator = -ops.pole_factor(q, -(z - 1), "z - 1")
        total = None
        for m, v in rho.table:
            term = ops.convert(v) * ops.q_pow(q, m * z)
            total = term if total is None else total + term
        return ops.wrap(numerator / denominator * total)

    # exp_decay / gaussian: float only, truncated with a certified tail.
    fops = ops if isinstance(ops, FloatOps) else FloatOps(pole_epsilon=limits.pole_epsilon)
    tol = rho.tolerance if rho.tolerance else limits.series_tolerance
    with fops.workprec():
        zc = fops.convert(z)
        sigma = mpmath.re(zc)
        prefactor = (1 - mpmath.power(q, -zc)) / -fops.pole_factor(q, -(zc - 1), "z - 1")
        scale = abs(prefactor)
        total = mpmath.mpc(0)
        # Levels m <= 0: |rho(q**m)| <= 1, geometric remainder in q**(-sigma).
        m = 0
        while True:
            total += rho.value_at_level(q, m) * mpmath.power(q, m * zc)
            remainder = mpmath.power(q, (m - 1) * sigma) / (1 - mpmath.power(q, -sigma))
            if scale * remainder < tol / 2:
                break
            m -= 1
        # Levels m >= 1: once consecutive term ratios drop below 1/2 the
        # remainder is at most twice the next term.
        m = 1
        while True:
            term = rho.value_at_level(q, m) * mpmath.power(q, m * zc)
            total += term
            exponent = (q ** (m + 1) - q ** m) if rho.family == EXP_DECAY else (
                q ** (2 * (m + 1)) - q ** (2 * m)
            ) / 2
            ratio = mpmath.exp(-exponent) * mpmath.power(q, sigma)
            next_term = abs(rho.value_at_level(q, m + 1) * mpmath.power(q, (m + 1) * sigma))
            if ratio < 0.5 and scale * 2 * next_term < tol / 2:
                break
            m += 1
        return fops.wrap(prefactor * total, tolerance=tol)
