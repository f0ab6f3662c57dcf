"""Strictly refining partition chains, their statistics, and the two pairings.

A chain runs from the one-block partition of [n] down to all singletons.  The
non-singleton blocks appearing above the bottom are called branches; a chain
is reduced when each branch occurs in exactly one of those levels.  Chains
carry a multiplicity polynomial in the residue cardinality q, and points of
the integration domain are classified either by (chain, gap vector) pairs or
equivalently by (reduced chain, per-branch count) pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Iterator

from .config import DEFAULT, Limits
from .errors import DomainError, SizeLimitError
from .partitions import Block, Partition, strict_refinements


def falling_factorial(n: int, k: int) -> int:
    """n (n-1) ... (n-k+1); zero when k exceeds n."""
    if n < 0 or k < 0:
        raise DomainError(f"falling factorial needs nonnegative arguments, got ({n}, {k})")
    return math.perm(n, k)


class SplittingFiltration:
    """A chain top = p_0 > p_1 > ... > p_L = bottom of partitions of [n]."""

    __slots__ = ("n", "chain", "_hash", "_branches", "_depth", "_degree")

    def __init__(self, chain) -> None:
        chain = tuple(chain)
        if len(chain) < 2:
            raise DomainError("a filtration needs at least the top and bottom partitions")
        n = chain[0].n
        if n < 2:
            raise DomainError(f"filtrations need n >= 2, got n={n}")
        if chain[0] != Partition.top(n):
            raise DomainError("chain must start at the one-block partition")
        if chain[-1] != Partition.bottom(n):
            raise DomainError("chain must end at the all-singletons partition")
        for upper, lower in zip(chain, chain[1:]):
            if not lower.strictly_refines(upper):
                raise DomainError(
                    f"consecutive chain entries must strictly refine: "
                    f"{lower!r} under {upper!r}"
                )
        self._init_raw(n, chain)

    def _init_raw(self, n: int, chain: tuple[Partition, ...]) -> None:
        self.n = n
        self.chain = chain
        self._hash = hash((n, chain))
        self._branches = None
        self._depth = None
        self._degree = None

    @classmethod
    def _from_valid_chain(cls, n: int, chain: tuple[Partition, ...]) -> "SplittingFiltration":
        self = object.__new__(cls)
        self._init_raw(n, chain)
        return self

    @property
    def length(self) -> int:
        return len(self.chain) - 1

    @property
    def levels(self) -> tuple[Partition, ...]:
        """The partitions p_0 .. p_{L-1}; the bottom is not a level."""
        return self.chain[:-1]

    def _ensure_stats(self) -> None:
        if self._branches is not None:
            return
        depth: dict[Block, int] = {}
        for idx, level in enumerate(self.levels):
            for block in level.blocks:
                if len(block) > 1:
                    depth[block] = idx  # overwritten until the deepest occurrence
        degree: dict[Block, int] = {}
        for block, d in depth.items():
            members = set(block)
            child = self.chain[d + 1]
            degree[block] = sum(1 for c in child.blocks if c[0] in members)
        self._branches = tuple(sorted(depth))
        self._depth = depth
        self._degree = degree

    def branches(self) -> tuple[Block, ...]:
        """All non-singleton blocks occurring in the levels, sorted."""
        self._ensure_stats()
        return self._branches

    def branch_depth(self, block: Block) -> int:
        """Index of the last level containing the branch."""
        self._ensure_stats()
        if block not in self._depth:
            raise DomainError(f"{block} is not a branch of this filtration")
        return self._depth[block]

    def branch_degree(self, block: Block) -> int:
        """Number of blocks the branch splits into one level further down."""
        self._ensure_stats()
        if block not in self._degree:
            raise DomainError(f"{block} is not a branch of this filtration")
        return self._degree[block]

    def multiplicity(self, q: int) -> int:
        """Product over branches of (q-1)(q-2)...(q-degree+1).

        Counts the digit choices realizing this chain; zero exactly when some
        branch degree exceeds q.
        """
        if q < 2:
            raise DomainError(f"residue cardinality must be >= 2, got {q}")
        self._ensure_stats()
        out = 1
        for block in self._branches:
            out *= falling_factorial(q - 1, self._degree[block] - 1)
            if out == 0:
                return 0
        return out

    def is_reduced(self) -> bool:
        """True when every branch occurs in exactly one level."""
        self._ensure_stats()
        counts: dict[Block, int] = {}
        for level in self.levels:
            for block in level.blocks:
                if len(block) > 1:
                    counts[block] = counts.get(block, 0) + 1
        return all(c == 1 for c in counts.values())

    def reduced(self) -> "SplittingFiltration":
        """The unique reduced filtration with the same branch set.

        Levels are rebuilt greedily: repeatedly take the containment-maximal
        branches not yet placed, pad with singletons, and finish with the
        all-singletons partition.
        """
        n = self.n
        remaining = set(self.branches()) - {tuple(range(1, n + 1))}
        chain = [Partition.top(n)]
        while remaining:
            sets = {b: frozenset(b) for b in remaining}
            maximal = [b for b in remaining if not any(sets[b] < sets[o] for o in remaining)]
            covered = set()
            for b in maximal:
                covered.update(b)
            blocks = maximal + [(i,) for i in range(1, n + 1) if i not in covered]
            chain.append(Partition(n, blocks))
            remaining.difference_update(maximal)
        chain.append(Partition.bottom(n))
        return SplittingFiltration._from_valid_chain(n, tuple(chain))

    def apply_permutation(self, sigma) -> "SplittingFiltration":
        """Relabel every block of every level by i -> sigma[i-1]."""
        sigma = tuple(sigma)
        if sorted(sigma) != list(range(1, self.n + 1)):
            raise DomainError(f"{sigma} is not a permutation of [{self.n}]")
        chain = tuple(
            Partition(self.n, [tuple(sigma[i - 1] for i in block) for block in p.blocks])
            for p in self.chain
        )
        return SplittingFiltration._from_valid_chain(self.n, chain)

    def sort_key(self):
        return tuple(p.blocks for p in self.chain)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SplittingFiltration)
            and self.n == other.n
            and self.chain == other.chain
        )

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "SplittingFiltration") -> bool:
        return self.sort_key() < other.sort_key()

    def __repr__(self) -> str:
        inner = " > ".join(
            "".join("{" + ",".join(map(str, b)) + "}" for b in p.blocks) for p in self.chain
        )
        return f"SplittingFiltration({inner})"


def enumerate_filtrations(
    n: int, limits: Limits = DEFAULT, reduced_only: bool = False
) -> Iterator[SplittingFiltration]:
    """Yield every splitting filtration of order n once, depth-first.

    The order is an implementation choice: at each partition the strict
    refinements are visited in their fixed enumeration order.
    """
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    if n > limits.max_filtration_n:
        raise SizeLimitError(
            f"n={n} exceeds the filtration enumeration bound {limits.max_filtration_n}"
        )
    bottom = Partition.bottom(n)
    chain: list[Partition] = [Partition.top(n)]

    def walk() -> Iterator[SplittingFiltration]:
        for nxt in strict_refinements(chain[-1]):
            chain.append(nxt)
            if nxt == bottom:
                spl = SplittingFiltration._from_valid_chain(n, tuple(chain))
                if not reduced_only or spl.is_reduced():
                    yield spl
            else:
                yield from walk()
            chain.pop()

    yield from walk()


@lru_cache(maxsize=32)
def all_filtrations(n: int, limits: Limits = DEFAULT) -> tuple[SplittingFiltration, ...]:
    """Materialized enumeration, cached per (n, limits)."""
    return tuple(enumerate_filtrations(n, limits))


def reduction_classes(
    n: int, limits: Limits = DEFAULT
) -> dict[SplittingFiltration, list[SplittingFiltration]]:
    """Group all filtrations of order n by their common branch set.

    Keys are the unique reduced representative of each class.
    """
    groups: dict[tuple[Block, ...], list[SplittingFiltration]] = {}
    for spl in enumerate_filtrations(n, limits):
        groups.setdefault(spl.branches(), []).append(spl)
    out: dict[SplittingFiltration, list[SplittingFiltration]] = {}
    for members in groups.values():
        reduced = [spl for spl in members if spl.is_reduced()]
        if len(reduced) != 1:
            raise DomainError("each branch-set class must contain exactly one reduced chain")
        out[reduced[0]] = members
    return out


def orbit_weight(spl: SplittingFiltration, limits: Limits = DEFAULT) -> int:
    """Number of distinct relabelings of the chain under all n! permutations."""
    if spl.n > limits.max_orbit_n:
        raise SizeLimitError(f"n={spl.n} exceeds the orbit bound {limits.max_orbit_n}")
    images = {spl.apply_permutation(sigma).sort_key() for sigma in permutations(range(1, spl.n + 1))}
    return len(images)


def orbit_representatives(
    n: int, reduced_only: bool = False, limits: Limits = DEFAULT
) -> Iterator[tuple[SplittingFiltration, int]]:
    """One representative per relabeling orbit, with the orbit size as weight.

    The representative is the image with the smallest encoding.
    """
    if n > limits.max_orbit_n:
        raise SizeLimitError(f"n={n} exceeds the orbit bound {limits.max_orbit_n}")
    seen: set[tuple] = set()
    sigmas = list(permutations(range(1, n + 1)))
    for spl in enumerate_filtrations(n, limits, reduced_only=reduced_only):
        if spl.sort_key() in seen:
            continue
        images = {}
        for sigma in sigmas:
            image = spl.apply_permutation(sigma)
            images.setdefault(image.sort_key(), image)
        seen.update(images)
        yield images[min(images)], len(images)


@dataclass(frozen=True)
class LevelPair:
    """A filtration together with the positive gaps between its split depths."""

    spl: SplittingFiltration
    gaps: tuple[int, ...]

    def __post_init__(self):
        if len(self.gaps) != self.spl.length:
            raise DomainError(
                f"expected {self.spl.length} gap entries, got {len(self.gaps)}"
            )
        if any(g < 1 for g in self.gaps):
            raise DomainError("gap entries must be positive integers")

    def marks(self) -> tuple[int, ...]:
        """Cumulative split depths m_0 = -1 < m_1 < ... < m_L."""
        out = [-1]
        for g in self.gaps:
            out.append(out[-1] + g)
        return tuple(out)


@dataclass(frozen=True)
class BranchPair:
    """A reduced filtration together with one positive count per branch."""

    spl: SplittingFiltration
    counts: tuple[tuple[Block, int], ...]

    def __post_init__(self):
        if not self.spl.is_reduced():
            raise DomainError("branch pairs require a reduced filtration")
        expected = self.spl.branches()
        keys = tuple(k for k, _ in self.counts)
        if keys != expected:
            raise DomainError(f"counts must cover exactly the branches {expected}")
        if any(v < 1 for _, v in self.counts):
            raise DomainError("branch counts must be positive integers")

    @classmethod
    def from_mapping(cls, spl: SplittingFiltration, mapping) -> "BranchPair":
        mapping = {tuple(sorted(k)): v for k, v in dict(mapping).items()}
        missing = [b for b in spl.branches() if b not in mapping]
        if missing:
            raise DomainError(f"missing branch counts for {missing}")
        extra = [b for b in mapping if b not in spl.branches()]
        if extra:
            raise DomainError(f"counts given for non-branches {extra}")
        return cls(spl, tuple((b, mapping[b]) for b in spl.branches()))

    def as_dict(self) -> dict[Block, int]:
        return dict(self.counts)


def _parent_branch(branches, block: Block) -> Block:
    """Smallest branch properly containing block (branch sets are laminar)."""
    candidates = [b for b in branches if len(b) > len(block) and set(block) <= set(b)]
    if not candidates:
        raise DomainError(f"{block} has no containing branch")
    return min(candidates, key=len)


def level_to_branch(lp: LevelPair) -> BranchPair:
    """Convert a (chain, gaps) pair to the equivalent per-branch counts.

    The count of the full ground set is the first gap; every other branch
    collects the gaps strictly between its parent's depth and its own.
    """
    spl = lp.spl
    branches = spl.branches()
    root = tuple(range(1, spl.n + 1))
    counts = {root: lp.gaps[0]}
    for block in branches:
        if block == root:
            continue
        parent = _parent_branch(branches, block)
        lo = spl.branch_depth(parent) + 1
        hi = spl.branch_depth(block)
        counts[block] = sum(lp.gaps[lo : hi + 1])
    return BranchPair.from_mapping(spl.reduced(), counts)


def branch_to_level(bp: BranchPair) -> LevelPair:
    """Inverse of level_to_branch.

    The cumulative count along the containment chain above each branch fixes
    its split depth; the sorted depths rebuild the chain and the gaps.
    """
    star = bp.spl
    n = star.n
    branches = star.branches()
    counts = bp.as_dict()
    root = tuple(range(1, n + 1))
    sets = {b: frozenset(b) for b in branches}
    cumulative = {}
    for block in branches:
        cumulative[block] = sum(v for other, v in counts.items() if sets[block] <= sets[other])
    marks = sorted(set(c - 1 for c in cumulative.values()))
    index_of_mark = {m: i for i, m in enumerate(marks)}  # split level of each depth
    level_of = {block: index_of_mark[cumulative[block] - 1] for block in branches}
    length = len(marks)
    chain = [Partition.top(n)]
    for ell in range(1, length):
        blocks = [
            block
            for block in branches
            if block != root
            and level_of[block] >= ell
            and level_of[_parent_branch(branches, block)] < ell
        ]
        covered = {i for block in blocks for i in block}
        blocks += [(i,) for i in range(1, n + 1) if i not in covered]
        chain.append(Partition(n, blocks))
    chain.append(Partition.bottom(n))
    spl = SplittingFiltration(chain)
    full = [-1] + marks
    gaps = tuple(full[i + 1] - full[i] for i in range(length))
    return LevelPair(spl, gaps)
