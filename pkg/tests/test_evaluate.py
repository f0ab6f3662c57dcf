import random
import warnings
from fractions import Fraction

import mpmath
import pytest

from padicgas.domain import ChargeVector, ExponentAssignment, in_omega, pair_keys
from padicgas.errors import (
    ConvergenceError,
    DomainError,
    PoleError,
    UnsupportedRhoError,
)
from padicgas.evaluate import (
    branch_function,
    closed_form_n2,
    closed_form_n3,
    diameter_moment,
    expectation,
    level_function,
    low_temp_limit,
    mehta_partition,
    z_full,
    z_reduced,
    z_restricted,
)
from padicgas.filtrations import (
    SplittingFiltration,
    all_filtrations,
    orbit_weight,
    reduction_classes,
)
from padicgas.partitions import Partition
from padicgas.rho import RhoSpec, root_function

BALL0 = RhoSpec.ball(0)


def chain_of(n, *middles):
    return SplittingFiltration(
        [Partition.top(n), *[Partition(n, m) for m in middles], Partition.bottom(n)]
    )


def exponents(n, mapping=None, a=0, b=0, fill=0):
    s = {k: fill for k in pair_keys(n)}
    if mapping:
        s.update(mapping)
    return ExponentAssignment.build(n, s, a, b)


class TestRootFunction:
    def test_ball_closed_form(self):
        assert root_function(2, 3, BALL0).value == Fraction(4, 3)
        for q, m, z in [(2, 0, 5), (3, 1, 4), (5, -1, 2)]:
            got = root_function(q, z, RhoSpec.ball(m)).value
            assert got == Fraction(q) ** (m * z) / (1 - Fraction(q) ** (-(z - 1)))

    def test_table_single_entry_is_prefactor(self):
        rho = RhoSpec.from_table({0: 1})
        for q, z in [(2, 3), (3, 5)]:
            got = root_function(q, z, rho).value
            expected = (1 - Fraction(q) ** -z) / (1 - Fraction(q) ** (-(z - 1)))
            assert got == expected

    def test_divergence_below_abscissa(self):
        with pytest.raises(ConvergenceError):
            root_function(2, 1, BALL0)
        with pytest.raises(ConvergenceError):
            root_function(2, Fraction(1, 2), BALL0)

    def test_pole_at_lattice(self):
        with pytest.raises(PoleError):
            root_function(2, 1, BALL0, allow_below_abscissa=True)

    def test_series_families_match_ball_shape(self):
        # exp(-t) at large Re(z): the m <= 0 levels dominate and the sum
        # approaches sum_{m<=0} q^{mz} * e^{-q^m}; sanity against quadrature
        # of the explicit series with generous manual truncation.
        q, z = 2, 4
        got = root_function(q, z, RhoSpec.exp_decay(1e-13))
        manual = mpmath.mpf(0)
        for m in range(-200, 60):
            manual += mpmath.exp(-mpmath.power(q, m)) * mpmath.power(q, m * z)
        manual *= (1 - mpmath.power(q, -z)) / (1 - mpmath.power(q, -(z - 1)))
        assert abs(got.value - manual) < 1e-12
        gauss = root_function(q, z, RhoSpec.gaussian(1e-13))
        manual_g = mpmath.mpf(0)
        for m in range(-200, 60):
            manual_g += mpmath.exp(-mpmath.power(q, 2 * m) / 2) * mpmath.power(q, m * z)
        manual_g *= (1 - mpmath.power(q, -z)) / (1 - mpmath.power(q, -(z - 1)))
        assert abs(gauss.value - manual_g) < 1e-12


class TestSummands:
    def test_two_particle_summand(self):
        spl = chain_of(2)
        for q in (2, 3, 5):
            for s in (0, 1, 7):
                e = exponents(2, {(1, 2): s})
                assert level_function(spl, q, e).value == Fraction(q - 1, q)
                assert branch_function(spl, q, e).value == Fraction(q - 1, q)

    def test_four_particle_summands(self):
        prime = chain_of(4, [(1, 2), (3, 4)], [(1, 2), (3,), (4,)])
        e = exponents(4, {(1, 2): 1, (3, 4): 1})
        assert level_function(prime, 3, e).value == Fraction(1, 2160)
        star = chain_of(4, [(1, 2), (3, 4)])
        assert branch_function(star, 3, e).value == Fraction(1, 216)
        assert level_function(star, 3, e).value == Fraction(1, 270)

    def test_three_particle_summand(self):
        spl = chain_of(3, [(1, 2), (3,)])
        e = exponents(3, {(1, 2): 1})
        assert level_function(spl, 2, e).value == Fraction(1, 12)

    def test_length_one_chain_has_no_factors(self):
        for n, q in [(3, 5), (4, 7)]:
            spl = chain_of(n)
            e = exponents(n, fill=3)
            expected = Fraction(spl.multiplicity(q), q ** (n - 1))
            assert branch_function(spl, q, e).value == expected
            assert level_function(spl, q, e).value == expected

    def test_pole_error_names_the_level(self):
        spl = chain_of(3, [(1, 2), (3,)])
        e = exponents(3, {(1, 2): -1})
        with pytest.raises(PoleError, match="level 1"):
            level_function(spl, 2, e)


class TestMainFormula:
    def test_unit_mass(self):
        assert z_full(2, exponents(2), BALL0).value == 1

    def test_two_particle_values(self):
        assert z_full(2, exponents(2, {(1, 2): 1}), BALL0).value == Fraction(2, 3)
        assert closed_form_n2(2, 0, 0, 1).value == Fraction(2, 3)
        assert closed_form_n2(2, 0, 0, 0).value == 1
        assert closed_form_n2(3, 1, 0, 0).value == Fraction(3, 4)

    def test_three_particle_display(self):
        e = exponents(3, fill=1)
        lhs = z_full(2, e, BALL0).value
        rhs = closed_form_n3(2, 0, 0, 1, 1, 1).value
        assert lhs == rhs == Fraction(8, 31)

    def test_matches_closed_forms_on_random_points(self):
        rng = random.Random(42)
        for q in (2, 3, 5):
            done = 0
            while done < 25:
                a, b = rng.randint(-1, 2), rng.randint(0, 2)
                s2 = rng.randint(-1, 4)
                e2 = exponents(2, {(1, 2): s2}, a, b)
                if in_omega(q, e2):
                    assert z_full(q, e2, BALL0).value == closed_form_n2(q, a, b, s2).value
                    done += 1
                s3 = {k: rng.randint(-1, 4) for k in pair_keys(3)}
                e3 = exponents(3, s3, a, b)
                if in_omega(q, e3):
                    got = z_full(q, e3, BALL0).value
                    want = closed_form_n3(q, a, b, s3[(1, 2)], s3[(1, 3)], s3[(2, 3)]).value
                    assert got == want

    def test_outside_region_raises_with_witness(self):
        e = exponents(3, {(1, 2): -1, (1, 3): 3, (2, 3): 3})
        with pytest.raises(ConvergenceError) as info:
            z_full(2, e, BALL0)
        assert info.value.witness is not None

    def test_override_returns_float_continuation(self):
        e = exponents(3, {(1, 2): -2, (1, 3): 3, (2, 3): 3})
        scalar = z_full(2, e, BALL0, override=True)
        assert scalar.regime == "float"
        # continuation of the finite sum: compute the same thing by hand
        total = mpmath.mpf(0)
        for spl in all_filtrations(3):
            if spl.multiplicity(2) == 0:
                continue
            term = mpmath.mpf(spl.multiplicity(2)) / 4
            for ell in range(1, spl.length):
                from padicgas.domain import level_exponent

                term /= mpmath.power(2, float(level_exponent(spl, ell, e))) - 1
            total += term
        head = mpmath.mpf(1) / (1 - mpmath.power(2, -float(2 + e.total())))
        assert abs(scalar.value - head * total) < 1e-12

    def test_restricted_equals_full_with_unit_ball(self):
        rng = random.Random(5)
        for _ in range(10):
            n = rng.randint(2, 4)
            q = rng.choice([2, 3])
            e = exponents(n, {k: rng.randint(0, 3) for k in pair_keys(n)},
                          rng.randint(0, 2), rng.randint(0, 2))
            assert z_restricted(q, e).value == z_full(q, e, BALL0).value


class TestReducedForm:
    def test_reduction_identity_explicit_instance(self):
        e = exponents(4, {(1, 2): 1, (3, 4): 1})
        star = chain_of(4, [(1, 2), (3, 4)])
        members = reduction_classes(4)[star]
        total = sum(Fraction(level_function(m, 3, e).value) for m in members)
        assert total == Fraction(1, 270) + 2 * Fraction(1, 2160) == Fraction(1, 216)
        assert branch_function(star, 3, e).value == Fraction(1, 216)

    def test_z_reduced_equals_z_full_at_b_zero(self):
        rng = random.Random(9)
        for n in (2, 3, 4):
            for q in (2, 3, 5):
                done = 0
                while done < 5:
                    s = {k: rng.randint(0, 3) for k in pair_keys(n)}
                    a = rng.randint(-1, 2)
                    e = exponents(n, s, a, 0)
                    if not in_omega(q, e):
                        continue
                    assert z_reduced(q, e, BALL0).value == z_full(q, e, BALL0).value
                    done += 1

    def test_z_reduced_rejects_nonzero_b(self):
        with pytest.raises(DomainError):
            z_reduced(2, exponents(2, b=1), BALL0)


class TestOrbitGrouping:
    def test_orbit_sum_equals_weight_times_representative(self):
        rng = random.Random(13)
        for n in (3, 4):
            spls = all_filtrations(n)
            for _ in range(6):
                spl = spls[rng.randrange(len(spls))]
                beta = rng.randint(1, 3)
                e = ChargeVector.build([1] * n, beta).exponents()
                from itertools import permutations

                images = {}
                for sigma in permutations(range(1, n + 1)):
                    img = spl.apply_permutation(sigma)
                    images[img.sort_key()] = img
                q = rng.choice([2, 3, 5])
                total_level = sum(
                    Fraction(level_function(img, q, e).value) for img in images.values()
                )
                assert total_level == orbit_weight(spl) * Fraction(
                    level_function(spl, q, e).value
                )
                total_branch = sum(
                    Fraction(branch_function(img, q, e).value) for img in images.values()
                )
                assert total_branch == orbit_weight(spl) * Fraction(
                    branch_function(spl, q, e).value
                )


class TestGasSpecializations:
    def test_mehta_examples(self):
        assert mehta_partition(2, 2, ChargeVector.build([1, 1], 1), BALL0).value == Fraction(2, 3)
        assert mehta_partition(2, 2, ChargeVector.build([1, 2], 1), BALL0).value == Fraction(4, 7)

    def test_mehta_orbit_weighted_form_agrees(self):
        for n in (2, 3, 4):
            for q in (2, 3):
                cv = ChargeVector.build([1] * n, 2)
                plain = mehta_partition(n, q, cv, BALL0)
                grouped = mehta_partition(n, q, cv, BALL0, use_orbit_weights=True)
                assert plain.value == grouped.value

    def test_mehta_convergence_threshold(self):
        cv = ChargeVector.build([1, 1, 1], Fraction(-2, 3))  # exactly -2/N
        with pytest.raises(DomainError):
            # beta must be positive for a gas; the threshold check is separate
            mehta_partition(3, 2, cv, BALL0)
        near = ChargeVector.build([1, 1, 1], Fraction(-2, 3) + Fraction(1, 100))
        with pytest.raises(DomainError):
            mehta_partition(3, 2, near, BALL0)

    def test_expectation_is_one_at_zero_moments(self):
        for n in (2, 3):
            for q in (2, 3):
                cv = ChargeVector.build([1] * n, 2)
                assert expectation(n, q, cv, 0, 0, BALL0).value == 1

    def test_expectation_example(self):
        cv = ChargeVector.build([1, 1], 1)
        assert expectation(2, 2, cv, 1, 0, BALL0).value == Fraction(6, 7)
        assert diameter_moment(2, 2, cv, 1, BALL0).value == Fraction(6, 7)

    def test_expectation_matches_ball_closed_form(self):
        rng = random.Random(17)
        for _ in range(12):
            n = rng.randint(2, 4)
            q = rng.choice([2, 3, 5])
            m = rng.choice([-1, 0, 1])
            a = rng.randint(1 - n, 3)
            beta = rng.choice([1, 2, 3])
            charges = [rng.randint(1, 3) for _ in range(n)]
            cv = ChargeVector.build(charges, beta)
            total = cv.total_charge_sum() * beta
            expected = (
                Fraction(q) ** (m * a)
                * (Fraction(q) ** (n - 1 + total) - 1)
                / (Fraction(q) ** (n - 1 + total) - Fraction(q) ** (-a))
            )
            got = expectation(n, q, cv, a, 0, RhoSpec.ball(m))
            assert got.value == expected

    def test_expectation_preconditions(self):
        cv = ChargeVector.build([1, 1], 1)
        with pytest.raises(DomainError):
            expectation(2, 2, cv, 0, -2, BALL0)
        with pytest.raises(DomainError):
            expectation(2, 2, cv, -3, 1, BALL0)


class TestLowTemperature:
    def test_collapses_for_large_residue_fields(self):
        for n, q in [(2, 2), (2, 5), (3, 3), (3, 7), (4, 5)]:
            for m in (-1, 0, 1):
                for a, b in [(0, 0), (1, 0), (2, 1), (1, -1)]:
                    cv = ChargeVector.build([1] * n, 1)
                    res = low_temp_limit(n, q, cv, a, b, RhoSpec.ball(m))
                    assert res.min_interaction == 0
                    assert res.value.value == Fraction(q) ** (m * (a + b))

    def test_small_residue_field_structure(self):
        cv = ChargeVector.build([1, 1, 1], 1)
        res = low_temp_limit(3, 2, cv, 0, 1, RhoSpec.ball(0))
        # only the three two-level chains survive; each contributes the same
        assert res.min_interaction == 1
        assert res.value.value == Fraction(1, 2)

    def test_rejects_noncompact_density(self):
        with pytest.raises(UnsupportedRhoError):
            low_temp_limit(2, 2, ChargeVector.build([1, 1], 1), 0, 0, RhoSpec.exp_decay())

    def test_expectation_converges_to_limit(self):
        for n in (2, 3, 4):
            for q in (2, 3, 5):
                cv = ChargeVector.build([1] * n, 60.0)
                limit = low_temp_limit(n, q, ChargeVector.build([1] * n, 1), 1, 1, BALL0)
                got = expectation(n, q, cv, 1, 1, BALL0)
                assert got.regime == "float"
                lim = complex(limit.value.as_complex())
                rel = abs(got.as_complex() - lim) / abs(lim)
                assert rel < 1e-6


class TestRegimes:
    def test_float_matches_exact_at_integer_points(self):
        rng = random.Random(23)
        for _ in range(10):
            n = rng.randint(2, 4)
            q = rng.choice([2, 3])
            s_int = {k: rng.randint(0, 3) for k in pair_keys(n)}
            a, b = rng.randint(0, 2), rng.randint(0, 2)
            exact = z_full(q, exponents(n, s_int, a, b), BALL0)
            floaty = z_full(
                q,
                ExponentAssignment.build(n, {k: float(v) for k, v in s_int.items()},
                                         float(a), float(b)),
                BALL0,
            )
            assert exact.regime == "exact" and floaty.regime == "float"
            rel = abs(floaty.as_complex() - complex(Fraction(exact.value))) / abs(
                complex(Fraction(exact.value))
            )
            assert rel < 1e-12

    def test_rational_exponents_warn_and_demote(self):
        e = exponents(2, {(1, 2): Fraction(1, 2)})
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            scalar = z_full(2, e, BALL0)
        assert scalar.regime == "float"
        assert any("float regime" in str(w.message) for w in caught)

    def test_nonexact_density_warns_and_demotes(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            scalar = z_full(2, exponents(2, {(1, 2): 1}), RhoSpec.gaussian())
        assert scalar.regime == "float"
        assert any("float regime" in str(w.message) for w in caught)


class TestTableDensity:
    def test_parse_and_exact_evaluation(self):
        rho = RhoSpec.parse("table:0=1,-1=1/2")
        assert rho.table == ((-1, Fraction(1, 2)), (0, Fraction(1, 1)))
        q, z = 2, 4
        head = root_function(q, z, rho)
        assert head.regime == "exact"
        prefactor = (1 - Fraction(q) ** -z) / (1 - Fraction(q) ** (-(z - 1)))
        series = Fraction(1, 2) * Fraction(q) ** (-z) + 1
        assert head.value == prefactor * series
        scalar = z_full(q, exponents(2, {(1, 2): 1}), rho)
        assert scalar.regime == "exact"
        # the table is a linear combination of nested ball indicators:
        # ball(0) - 1/2 ball(-1) - 1/2 ball(-2), and the integral is linear
        # in the density
        e = exponents(2, {(1, 2): 1})
        balls = {m: Fraction(z_full(q, e, RhoSpec.ball(m)).value) for m in (0, -1, -2)}
        mix = balls[0] - Fraction(1, 2) * balls[-1] - Fraction(1, 2) * balls[-2]
        assert scalar.value == mix

    def test_max_support_index(self):
        rho = RhoSpec.parse("table:2=0,1=3,-5=1")
        assert rho.max_support_index(3) == 1
