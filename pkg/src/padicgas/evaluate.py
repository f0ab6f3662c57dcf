"""Evaluation of the pair-distance integral and its gas specializations.

The integral of rho(||x||) * max|x_i-x_j|**a * min|x_i-x_j|**b *
prod |x_i-x_j|**s_ij over the N-fold product of a nonarchimedean local field
factors into the density prefactor and a finite combinatorial sum: one term
per splitting filtration with positive multiplicity (general b), or one term
per reduced filtration (b = 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .config import DEFAULT, Limits
from .domain import (
    ChargeVector,
    ExponentAssignment,
    branch_exponent,
    check_omega,
    in_branch_polytope,
    in_root_polytope,
    level_exponent,
    pair_keys,
)
from .errors import ConvergenceError, DimensionError, DomainError, UnsupportedRhoError
from .filtrations import (
    SplittingFiltration,
    all_filtrations,
    orbit_representatives,
)
from .rho import RhoSpec, root_function
from .scalars import (
    EXACT,
    FLOAT,
    ExactOps,
    FloatOps,
    Scalar,
    coerce_number,
    demote_to_float,
    is_integral,
    ops_for,
    real_part,
)


def _select_ops(e: ExponentAssignment, rho: RhoSpec | None, precision: int,
                limits: Limits, force_float: bool = False):
    if force_float:
        return FloatOps(precision, limits.pole_epsilon)
    if e.regime == EXACT:
        if rho is None or rho.exactly_representable:
            return ExactOps()
        demote_to_float(f"{rho.describe()} has no exact closed form")
        return FloatOps(precision, limits.pole_epsilon)
    values = [e.a, e.b] + [v for _, v in e.s]
    if any(isinstance(v, Fraction) and not is_integral(v) for v in values):
        demote_to_float("non-integer exponents make powers of q irrational")
    return FloatOps(precision, limits.pole_epsilon)


def _level_value(spl: SplittingFiltration, q: int, e: ExponentAssignment, b, ops):
    """Multiplicity / q**(n-1) times the product of level-factor reciprocals."""
    m = spl.multiplicity(q)
    value = ops.convert(m) / ops.q_pow(q, spl.n - 1)
    if m == 0:
        return value
    for ell in range(1, spl.length):
        exponent = b + level_exponent(spl, ell, e)
        value = value / ops.pole_factor(q, exponent, f"level {ell} of {spl!r}")
    return value


def _branch_value(spl: SplittingFiltration, q: int, e: ExponentAssignment, ops):
    m = spl.multiplicity(q)
    value = ops.convert(m) / ops.q_pow(q, spl.n - 1)
    if m == 0:
        return value
    root = tuple(range(1, spl.n + 1))
    for block in spl.branches():
        if block == root:
            continue
        exponent = branch_exponent(block, e)
        value = value / ops.pole_factor(q, exponent, f"branch {block}")
    return value


def level_function(
    spl: SplittingFiltration, q: int, e: ExponentAssignment, b=None,
    precision: int = 53, limits: Limits = DEFAULT,
) -> Scalar:
    """One summand of the general-b formula; b defaults to the assignment's."""
    b = e.b if b is None else coerce_number(b)
    ops = ops_for(EXACT if e.regime == EXACT and is_integral(b) else FLOAT,
                  precision, limits.pole_epsilon)
    return ops.wrap(_level_value(spl, q, e, b, ops))


def branch_function(
    spl: SplittingFiltration, q: int, e: ExponentAssignment,
    precision: int = 53, limits: Limits = DEFAULT,
) -> Scalar:
    """One summand of the b = 0 formula; only branch data of spl is used."""
    ops = ops_for(e.regime, precision, limits.pole_epsilon)
    return ops.wrap(_branch_value(spl, q, e, ops))


def z_restricted(
    q: int, e: ExponentAssignment, precision: int = 53, limits: Limits = DEFAULT,
    check: bool = True,
) -> Scalar:
    """The integral over the N-fold unit ball (no density factor).

    Equals 1 / (1 - q**-(N-1+a+b+sum s)) times the sum of level summands.
    """
    if check:
        member, witness = check_omega(q, e, limits)
        if not member:
            raise ConvergenceError(
                f"outside the convergence region: {witness.describe()}", witness
            )
    ops = ops_for(e.regime, precision, limits.pole_epsilon)
    root_exponent = (e.n - 1) + e.a + e.b + e.total()
    head = -ops.pole_factor(q, -root_exponent, "root")  # 1 - q**(-root)
    total = None
    for spl in all_filtrations(e.n, limits):
        if spl.multiplicity(q) == 0:
            continue
        term = _level_value(spl, q, e, e.b, ops)
        total = term if total is None else total + term
    return ops.wrap(total / head)


def z_full(
    q: int, e: ExponentAssignment, rho: RhoSpec,
    override: bool = False, precision: int = 53, limits: Limits = DEFAULT,
) -> Scalar:
    """The density-weighted integral as prefactor times the level-summand sum.

    With ``override`` the finite sum is evaluated outside the convergence
    region (float regime): the result is then the analytic continuation of
    the formula, not the integral.
    """
    member, witness = check_omega(q, e, limits)
    if not member and not override:
        raise ConvergenceError(
            f"outside the convergence region: {witness.describe()}", witness
        )
    ops = _select_ops(e, rho, precision, limits, force_float=override and not member)
    z = e.n + e.a + e.b + e.total()
    head = root_function(q, z, rho, ops=ops, limits=limits,
                         allow_below_abscissa=override)
    total = None
    for spl in all_filtrations(e.n, limits):
        if spl.multiplicity(q) == 0:
            continue
        term = _level_value(spl, q, e, e.b, ops)
        total = term if total is None else total + term
    return ops.wrap(head.value * total, tolerance=head.tolerance)


def z_reduced(
    q: int, e: ExponentAssignment, rho: RhoSpec,
    precision: int = 53, limits: Limits = DEFAULT,
) -> Scalar:
    """The b = 0 form: prefactor times the sum of branch summands.

    Requires b = 0, the root constraint, and every proper-branch constraint
    of the positive-multiplicity reduced filtrations.
    """
    if e.b != 0:
        raise DomainError("the reduced form requires b = 0")
    if not in_root_polytope(e):
        raise ConvergenceError("the root constraint fails")
    reduced = [spl for spl in all_filtrations(e.n, limits) if spl.is_reduced()]
    for spl in reduced:
        if spl.multiplicity(q) > 0 and not in_branch_polytope(spl, e):
            raise ConvergenceError(f"a branch constraint of {spl!r} fails")
    ops = _select_ops(e, rho, precision, limits)
    z = e.n + e.a + e.total()
    head = root_function(q, z, rho, ops=ops, limits=limits)
    total = None
    for spl in reduced:
        if spl.multiplicity(q) == 0:
            continue
        term = _branch_value(spl, q, e, ops)
        total = term if total is None else total + term
    return ops.wrap(head.value * total, tolerance=head.tolerance)


def closed_form_n2(
    q: int, a, b, s, rho: RhoSpec = RhoSpec.ball(0),
    precision: int = 53, limits: Limits = DEFAULT,
) -> Scalar:
    """Hardcoded two-particle formula, kept independent of the general sum."""
    e = ExponentAssignment.build(2, {(1, 2): s}, a, b)
    if not real_part(1 + e.a + e.b + e.value(1, 2)) > 0:
        raise ConvergenceError("need Re(1 + a + b + s) > 0")
    ops = _select_ops(e, rho, precision, limits)
    head = root_function(q, 2 + e.a + e.b + e.value(1, 2), rho, ops=ops, limits=limits)
    value = ops.convert(q - 1) / ops.convert(q) * head.value
    return ops.wrap(value, tolerance=head.tolerance)


def closed_form_n3(
    q: int, a, b, s12, s13, s23, rho: RhoSpec = RhoSpec.ball(0),
    precision: int = 53, limits: Limits = DEFAULT,
) -> Scalar:
    """Hardcoded three-particle formula: the bracket lists the four chains."""
    e = ExponentAssignment.build(3, {(1, 2): s12, (1, 3): s13, (2, 3): s23}, a, b)
    total = e.total()
    if not real_part(2 + e.a + e.b + total) > 0:
        raise ConvergenceError("need Re(2 + a + b + s12 + s13 + s23) > 0")
    for (i, j) in pair_keys(3):
        if not real_part(1 + e.b + e.value(i, j)) > 0:
            raise ConvergenceError(f"need Re(1 + b + s_{i}{j}) > 0")
    ops = _select_ops(e, rho, precision, limits)
    head = root_function(q, 3 + e.a + e.b + total, rho, ops=ops, limits=limits)
    bracket = ops.convert((q - 1) * (q - 2))
    square = ops.convert((q - 1) ** 2)
    for (i, j) in pair_keys(3):
        bracket = bracket + square / ops.pole_factor(
            q, 1 + e.b + e.value(i, j), f"pair ({i},{j})"
        )
    value = head.value * bracket / ops.q_pow(q, 2)
    return ops.wrap(value, tolerance=head.tolerance)


def _require_gas_inputs(cv: ChargeVector, rho: RhoSpec) -> None:
    if not rho.is_nonnegative:
        raise DomainError("gas densities must be nonnegative and not identically zero")
    beta = cv.beta
    if isinstance(beta, complex) and beta.imag != 0:
        raise DomainError("the inverse temperature must be a positive real")
    if not real_part(beta) > 0:
        raise DomainError(f"the inverse temperature must be positive, got {beta}")


def mehta_partition(
    n: int, q: int, cv: ChargeVector, rho: RhoSpec,
    use_orbit_weights: bool = False, precision: int = 53, limits: Limits = DEFAULT,
) -> Scalar:
    """The canonical partition function at s_ij = beta * q_i * q_j.

    ``use_orbit_weights`` groups the reduced sum into one weighted term per
    relabeling orbit; this requires equal charges.
    """
    if cv.n != n:
        raise DimensionError(f"charge vector has {cv.n} entries, expected {n}")
    _require_gas_inputs(cv, rho)
    e = cv.exponents(a=0, b=0)
    root = tuple(range(1, n + 1))
    reduced = [spl for spl in all_filtrations(n, limits) if spl.is_reduced()]
    # Convergence: Re(beta) above every branch abscissa, the root included.
    for spl in reduced:
        if spl.multiplicity(q) == 0:
            continue
        for block in spl.branches():
            threshold = Fraction(-(len(block) - 1)) / cv.block_charge_sum(block)
            if not real_part(cv.beta) > threshold:
                raise ConvergenceError(
                    f"Re(beta) must exceed {threshold} (branch {block})"
                )
    ops = _select_ops(e, rho, precision, limits)
    head = root_function(q, n + e.total(), rho, ops=ops, limits=limits)
    if use_orbit_weights:
        if len(set(cv.charges)) != 1:
            raise DomainError("orbit weighting requires equal charges")
        total = None
        for spl, weight in orbit_representatives(n, reduced_only=True, limits=limits):
            if spl.multiplicity(q) == 0:
                continue
            term = ops.convert(weight) * _branch_value(spl, q, e, ops)
            total = term if total is None else total + term
    else:
        total = None
        for spl in reduced:
            if spl.multiplicity(q) == 0:
                continue
            term = _branch_value(spl, q, e, ops)
            total = term if total is None else total + term
    return ops.wrap(head.value * total, tolerance=head.tolerance)


def expectation(
    n: int, q: int, cv: ChargeVector, a, b, rho: RhoSpec,
    precision: int = 53, limits: Limits = DEFAULT,
) -> Scalar:
    """Moment of diameter**a * min-distance**b for the gas at temperature 1/beta.

    The ratio of the weighted integral at (a, b) to the one at (0, 0).  The
    stated sufficient conditions Re(b) >= -1 and Re(a+b) >= 1-n are enforced
    as given.
    """
    if cv.n != n:
        raise DimensionError(f"charge vector has {cv.n} entries, expected {n}")
    _require_gas_inputs(cv, rho)
    a = coerce_number(a)
    b = coerce_number(b)
    if not real_part(b) >= -1:
        raise DomainError(f"need Re(b) >= -1, got {real_part(b)}")
    if not real_part(a + b) >= 1 - n:
        raise DomainError(f"need Re(a+b) >= {1 - n}, got {real_part(a + b)}")
    numerator = z_full(q, cv.exponents(a=a, b=b), rho, precision=precision, limits=limits)
    denominator = z_full(q, cv.exponents(), rho, precision=precision, limits=limits)
    if numerator.regime == EXACT and denominator.regime == EXACT:
        return Scalar.exact(Fraction(numerator.value) / Fraction(denominator.value))
    tol = max(numerator.tolerance, denominator.tolerance)
    return Scalar(FLOAT, numerator.as_complex() / denominator.as_complex(), tol, precision)


def diameter_moment(
    n: int, q: int, cv: ChargeVector, a, rho: RhoSpec,
    precision: int = 53, limits: Limits = DEFAULT,
) -> Scalar:
    """The b = 0 shortcut: the combinatorial sums cancel, leaving the ratio of
    the density prefactors at the shifted and unshifted arguments."""
    if cv.n != n:
        raise DimensionError(f"charge vector has {cv.n} entries, expected {n}")
    _require_gas_inputs(cv, rho)
    a = coerce_number(a)
    if not real_part(a) >= 1 - n:
        raise DomainError(f"need Re(a) >= {1 - n}, got {real_part(a)}")
    e = cv.exponents(a=a)
    ops = _select_ops(e, rho, precision, limits)
    total = e.total()
    shifted = root_function(q, n + a + total, rho, ops=ops, limits=limits)
    plain = root_function(q, n + total, rho, ops=ops, limits=limits)
    if shifted.regime == EXACT and plain.regime == EXACT:
        return Scalar.exact(Fraction(shifted.value) / Fraction(plain.value))
    tol = max(shifted.tolerance, plain.tolerance)
    return ops.wrap(shifted.value / plain.value, tolerance=tol)


@dataclass(frozen=True)
class LowTempResult:
    """The zero-temperature moment limit and the minimized interaction weight."""

    value: Scalar
    min_interaction: object


def low_temp_limit(
    n: int, q: int, cv: ChargeVector, a, b, rho: RhoSpec,
    precision: int = 53, limits: Limits = DEFAULT,
) -> LowTempResult:
    """Limit of the (a, b) moment as the inverse temperature grows.

    Only the filtrations minimizing the total per-level charge interaction
    survive; the limit is q**(M(a+b)) times a ratio of their weighted counts,
    where M indexes the outermost populated norm level of the density.
    """
    if cv.n != n:
        raise DimensionError(f"charge vector has {cv.n} entries, expected {n}")
    if not rho.compactly_supported:
        raise UnsupportedRhoError(
            f"the low-temperature limit needs a compactly supported density, "
            f"got {rho.describe()}"
        )
    a = coerce_number(a)
    b = coerce_number(b)
    support_index = rho.max_support_index(q)
    contenders = []
    for spl in all_filtrations(n, limits):
        if spl.multiplicity(q) == 0:
            continue
        interaction = sum(
            (cv.level_charge_sum(spl, ell) for ell in range(1, spl.length)),
            Fraction(0),
        )
        contenders.append((interaction, spl))
    minimum = min(weight for weight, _ in contenders)
    survivors = [spl for weight, spl in contenders if weight == minimum]
    exact_ok = is_integral(a) and is_integral(b)
    ops = ops_for(EXACT if exact_ok else FLOAT, precision, limits.pole_epsilon)
    numerator = None
    denominator = None
    for spl in survivors:
        m = ops.convert(spl.multiplicity(q))
        rank_sum = sum(spl.chain[ell].rank for ell in range(1, spl.length))
        levels = spl.length - 1
        num = m * ops.q_pow(q, -(levels * b + rank_sum))
        den = m * ops.q_pow(q, -rank_sum)
        numerator = num if numerator is None else numerator + num
        denominator = den if denominator is None else denominator + den
    value = ops.q_pow(q, support_index * (a + b)) * numerator / denominator
    return LowTempResult(ops.wrap(value), minimum)
