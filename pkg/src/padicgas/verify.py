"""Cross-check battery behind the ``verify`` subcommand.

Each check pits two independent routes against each other: the summed level
functions of a reduction class against the branch function, the two pairing
directions against the identity, the exhaustive digit oracle against the
closed formula, and the class measures against total mass.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .config import DEFAULT, Limits
from .domain import ExponentAssignment, pair_keys
from .evaluate import branch_function, level_function, z_restricted
from .filtrations import (
    LevelPair,
    all_filtrations,
    branch_to_level,
    level_to_branch,
    reduction_classes,
)
from .oracle import exact_truncated_integral, max_depth_within_budget
from .scalars import EXACT


def _sample_in_branch_polytope(rng: random.Random, spl, trials: int) -> list[dict]:
    """Integer exponent maps with every proper-branch exponent positive."""
    n = spl.n
    root = tuple(range(1, n + 1))
    out = []
    while len(out) < trials:
        s = {pair: Fraction(rng.randint(-1, 4)) for pair in pair_keys(n)}
        e = ExponentAssignment.build(n, s, 0, 0)
        ok = all(
            (len(b) - 1) + e.block_sum(b) > 0
            for b in spl.branches()
            if b != root
        )
        if ok:
            out.append(s)
    return out


def check_reduction_identity(n_max: int, qs, seed: int, trials: int,
                             limits: Limits) -> dict:
    rng = random.Random(seed)
    tested = 0
    for n in range(2, n_max + 1):
        classes = reduction_classes(n, limits)
        for q in qs:
            for star, members in classes.items():
                if star.multiplicity(q) == 0:
                    continue
                for s in _sample_in_branch_polytope(rng, star, trials):
                    e = ExponentAssignment.build(n, s, 0, 0)
                    lhs = sum(
                        Fraction(level_function(spl, q, e, b=0).value)
                        for spl in members
                    )
                    rhs = Fraction(branch_function(star, q, e).value)
                    if lhs != rhs:
                        return {
                            "name": "reduction-identity",
                            "pass": False,
                            "detail": f"n={n} q={q} {star!r}: {lhs} != {rhs}",
                        }
                    tested += 1
    return {
        "name": "reduction-identity",
        "pass": True,
        "detail": f"{tested} exact identities over n<= {n_max}, q in {list(qs)}",
    }


def check_pairing_round_trip(n_max: int, limits: Limits) -> dict:
    from itertools import product

    tested = 0
    for n in range(2, n_max + 1):
        for spl in all_filtrations(n, limits):
            for gaps in product((1, 2), repeat=spl.length):
                lp = LevelPair(spl, gaps)
                if branch_to_level(level_to_branch(lp)) != lp:
                    return {
                        "name": "pairing-round-trip",
                        "pass": False,
                        "detail": f"failed at {spl!r} gaps={gaps}",
                    }
                tested += 1
    return {
        "name": "pairing-round-trip",
        "pass": True,
        "detail": f"{tested} round trips over n <= {n_max}",
    }


def check_oracle_agreement(qs, seed: int, limits: Limits) -> dict:
    rng = random.Random(seed)
    tested = 0
    for n in (2, 3):
        for q in qs:
            depth = max_depth_within_budget(n, q, limits)
            s = {pair: Fraction(rng.randint(0, 2)) for pair in pair_keys(n)}
            e = ExponentAssignment.build(n, s, 0, 1)
            result = exact_truncated_integral(n, q, 0, 1, e, depth, limits)
            target = z_restricted(q, e, limits=limits)
            if target.regime != EXACT:
                return {"name": "oracle-agreement", "pass": False,
                        "detail": "expected an exact target"}
            gap = abs(Fraction(result.main.value) - Fraction(target.value))
            if gap > result.tail_bound:
                return {
                    "name": "oracle-agreement",
                    "pass": False,
                    "detail": f"n={n} q={q}: |{gap}| > tail {result.tail_bound}",
                }
            tested += 1
    return {
        "name": "oracle-agreement",
        "pass": True,
        "detail": f"{tested} enumerations within their tail bounds",
    }


def check_measure_sums(n_max: int, qs, limits: Limits) -> dict:
    tested = 0
    for n in range(2, n_max + 1):
        for q in qs:
            total = Fraction(0)
            for spl in all_filtrations(n, limits):
                m = spl.multiplicity(q)
                if m == 0:
                    continue
                term = Fraction(m)
                for layer in spl.levels:
                    term /= q**layer.rank - 1
                total += term
            if total != 1:
                return {
                    "name": "measure-sums",
                    "pass": False,
                    "detail": f"n={n} q={q}: classes sum to {total}, not 1",
                }
            tested += 1
    return {
        "name": "measure-sums",
        "pass": True,
        "detail": f"{tested} (n, q) combinations sum to total mass 1",
    }


def run_battery(n_max: int, qs, seed: int, trials: int,
                limits: Limits = DEFAULT) -> list[dict]:
    return [
        check_reduction_identity(n_max, qs, seed, trials, limits),
        check_pairing_round_trip(n_max, limits),
        check_oracle_agreement(qs, seed, limits),
        check_measure_sums(n_max, qs, limits),
    ]
