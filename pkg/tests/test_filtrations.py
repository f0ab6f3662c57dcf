import math
import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padicgas.errors import DomainError, SizeLimitError
from padicgas.filtrations import (
    BranchPair,
    LevelPair,
    SplittingFiltration,
    all_filtrations,
    branch_to_level,
    enumerate_filtrations,
    falling_factorial,
    level_to_branch,
    orbit_representatives,
    orbit_weight,
    reduction_classes,
)
from padicgas.partitions import Partition, enumerate_partitions


def chain_of(n, *middles):
    return SplittingFiltration(
        [Partition.top(n), *[Partition(n, m) for m in middles], Partition.bottom(n)]
    )


S2 = lambda: chain_of(2)
NINE_CHAIN = [
    [(1, 2, 3, 4, 5), (6, 7, 8, 9)],
    [(1, 2, 3), (4, 5), (6, 7, 8, 9)],
    [(1, 2, 3), (4,), (5,), (6,), (7,), (8,), (9,)],
]


def count_chains_by_dp(n):
    # Independent cross-check: dynamic program over the full partition list
    # using pairwise refinement tests, no depth-first search involved.
    ps = list(enumerate_partitions(n))
    order = sorted(ps, key=lambda p: p.rank)  # bottom first
    counts = {}
    for p in order:
        if p == Partition.bottom(n):
            counts[p] = 1
            continue
        counts[p] = sum(counts[q] for q in order if q.rank < p.rank and q.strictly_refines(p))
    return counts[Partition.top(n)]


def test_counts_against_independent_dp():
    for n in range(2, 6):
        assert len(all_filtrations(n)) == count_chains_by_dp(n)


def test_small_counts():
    assert len(all_filtrations(2)) == 1
    assert len(all_filtrations(3)) == 4
    assert all(spl.is_reduced() for spl in all_filtrations(3))


def test_chain_validation():
    with pytest.raises(DomainError):
        SplittingFiltration([Partition.top(3), Partition.top(3), Partition.bottom(3)])
    with pytest.raises(DomainError):
        SplittingFiltration([Partition(3, [(1, 2), (3,)]), Partition.bottom(3)])
    with pytest.raises(DomainError):
        SplittingFiltration([Partition.top(3), Partition(3, [(1, 2), (3,)])])


def test_enumeration_bound():
    with pytest.raises(SizeLimitError, match="7"):
        list(enumerate_filtrations(8))


def test_branch_stats_on_nine_element_example():
    spl = chain_of(9, *NINE_CHAIN)
    assert spl.length == 4
    depths = {b: spl.branch_depth(b) for b in spl.branches()}
    assert depths[(1, 2, 3, 4, 5, 6, 7, 8, 9)] == 0
    assert depths[(1, 2, 3, 4, 5)] == 1
    assert depths[(6, 7, 8, 9)] == 2
    assert depths[(1, 2, 3)] == 3
    assert depths[(4, 5)] == 2
    assert spl.branch_degree((1, 2, 3, 4, 5)) == 2
    assert spl.branch_degree((6, 7, 8, 9)) == 4
    assert spl.branch_degree((1, 2, 3)) == 3


def test_reduction_of_nine_element_example():
    spl = chain_of(9, *NINE_CHAIN)
    star = spl.reduced()
    assert star.chain == (
        Partition.top(9),
        Partition(9, [(1, 2, 3, 4, 5), (6, 7, 8, 9)]),
        Partition(9, [(1, 2, 3), (4, 5), (6,), (7,), (8,), (9,)]),
        Partition.bottom(9),
    )
    assert star.is_reduced()
    assert star.branches() == spl.branches()
    assert star.reduced() == star


def test_four_particle_equivalence_class():
    star = chain_of(4, [(1, 2), (3, 4)])
    prime = chain_of(4, [(1, 2), (3, 4)], [(1, 2), (3,), (4,)])
    second = chain_of(4, [(1, 2), (3, 4)], [(1,), (2,), (3, 4)])
    assert star.is_reduced()
    assert not prime.is_reduced()
    assert not second.is_reduced()
    classes = reduction_classes(4)
    assert sorted(classes[star]) == sorted([star, prime, second])
    assert prime.reduced() == star
    assert second.reduced() == star


def test_reduce_is_identity_on_reduced():
    for spl in all_filtrations(4):
        star = spl.reduced()
        assert star.branches() == spl.branches()
        assert star.is_reduced()
        assert (spl.reduced() == spl) == spl.is_reduced()
        assert star.reduced() == star


def test_each_branch_set_class_has_one_reduced_member():
    for n in range(2, 6):
        for star, members in reduction_classes(n).items():
            assert sum(1 for m in members if m.is_reduced()) == 1
            assert all(m.branches() == star.branches() for m in members)


def test_multiplicity_examples():
    star = chain_of(4, [(1, 2), (3, 4)])
    assert star.multiplicity(3) == (3 - 1) ** 3 == 8
    single = chain_of(3)
    assert single.multiplicity(2) == falling_factorial(1, 2) == 0
    assert single.multiplicity(3) == 2
    mixed = chain_of(4, [(1, 2, 3), (4,)])
    assert mixed.multiplicity(2) == 0
    for q in (3, 4, 7):
        assert mixed.multiplicity(q) == (q - 1) * (q - 1) * (q - 2)
    assert S2().multiplicity(5) == 4


def test_multiplicity_positive_for_large_q():
    for n in range(2, 6):
        for spl in all_filtrations(n):
            for q in (n, n + 1, 11):
                assert spl.multiplicity(q) > 0
            assert (spl.multiplicity(2) == 0) == any(
                spl.branch_degree(b) > 2 for b in spl.branches()
            )
    with pytest.raises(DomainError):
        S2().multiplicity(1)


def test_count_bounds_for_reduced_chains():
    for n in range(2, 6):
        spls = all_filtrations(n)
        reduced = [s for s in spls if s.is_reduced()]
        assert math.factorial(n - 1) <= len(reduced) <= len(spls)
        if n >= 3:
            assert math.factorial(n - 1) < len(reduced)
        if n >= 4:
            assert len(reduced) < len(spls)


def test_permutation_action_on_three_particles():
    spl = chain_of(3, [(1, 2), (3,)])
    swapped = spl.apply_permutation((1, 3, 2))
    assert swapped == chain_of(3, [(1, 3), (2,)])
    assert spl.apply_permutation((1, 2, 3)) == spl
    with pytest.raises(DomainError):
        spl.apply_permutation((1, 1, 2))


@given(st.integers(min_value=2, max_value=5), st.randoms(use_true_random=False))
@settings(max_examples=60, deadline=None)
def test_permutation_action_preserves_statistics(n, rnd):
    spls = all_filtrations(n)
    spl = spls[rnd.randrange(len(spls))]
    sigma = list(range(1, n + 1))
    rnd.shuffle(sigma)
    image = spl.apply_permutation(tuple(sigma))
    assert image.length == spl.length
    assert image.is_reduced() == spl.is_reduced()
    assert sorted(len(b) for b in image.branches()) == sorted(len(b) for b in spl.branches())
    for q in (2, 3, 5):
        assert image.multiplicity(q) == spl.multiplicity(q)
    for block in spl.branches():
        mapped = tuple(sorted(sigma[i - 1] for i in block))
        assert image.branch_depth(mapped) == spl.branch_depth(block)
        assert image.branch_degree(mapped) == spl.branch_degree(block)


def test_orbit_weights():
    assert orbit_weight(chain_of(3, [(1, 2), (3,)])) == 3
    for n in (2, 3, 4):
        assert orbit_weight(chain_of(n)) == 1
    for n in (3, 4):
        for spl in all_filtrations(n):
            assert math.factorial(n) % orbit_weight(spl) == 0


def test_orbit_representatives_partition_everything():
    for n in (2, 3, 4, 5):
        reps = list(orbit_representatives(n))
        assert sum(w for _, w in reps) == len(all_filtrations(n))
        reduced = list(orbit_representatives(n, reduced_only=True))
        assert sum(w for _, w in reduced) == sum(
            1 for s in all_filtrations(n) if s.is_reduced()
        )
    assert len(list(orbit_representatives(2))) == 1
    three = list(orbit_representatives(3))
    assert sorted(w for _, w in three) == [1, 3]


def test_level_pair_validation():
    spl = chain_of(3, [(1, 2), (3,)])
    with pytest.raises(DomainError):
        LevelPair(spl, (1,))
    with pytest.raises(DomainError):
        LevelPair(spl, (1, 0))
    assert LevelPair(spl, (2, 3)).marks() == (-1, 1, 4)


def test_branch_pair_requires_reduced():
    prime = chain_of(4, [(1, 2), (3, 4)], [(1, 2), (3,), (4,)])
    with pytest.raises(DomainError):
        BranchPair.from_mapping(prime, {b: 1 for b in prime.branches()})


def test_pairing_examples():
    # two particles: the count of the full set is the only datum
    lp = LevelPair(S2(), (5,))
    bp = level_to_branch(lp)
    assert bp.as_dict() == {(1, 2): 5}
    assert branch_to_level(bp) == lp
    # all-ones counts on the 2+2 reduced chain give the two-gap (1, 1) pair
    star = chain_of(4, [(1, 2), (3, 4)])
    bp = BranchPair.from_mapping(star, {b: 1 for b in star.branches()})
    lp = branch_to_level(bp)
    assert lp.spl == star and lp.gaps == (1, 1)


def test_pairing_nine_element_instance():
    spl = chain_of(9, *NINE_CHAIN)
    lp = LevelPair(spl, (2, 1, 3, 2))
    bp = level_to_branch(lp)
    assert bp.as_dict() == {
        (1, 2, 3, 4, 5, 6, 7, 8, 9): 2,
        (1, 2, 3, 4, 5): 1,
        (6, 7, 8, 9): 4,
        (1, 2, 3): 5,
        (4, 5): 3,
    }
    assert branch_to_level(bp) == lp


def test_pairing_round_trips_exhaustive_small():
    for n in (2, 3, 4):
        for spl in all_filtrations(n):
            for gaps in product((1, 2, 3), repeat=spl.length):
                lp = LevelPair(spl, gaps)
                assert branch_to_level(level_to_branch(lp)) == lp
        for star, _ in reduction_classes(n).items():
            branches = star.branches()
            for values in product((1, 2, 3), repeat=len(branches)):
                bp = BranchPair.from_mapping(star, dict(zip(branches, values)))
                assert level_to_branch(branch_to_level(bp)) == bp
