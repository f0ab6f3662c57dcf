"""Set partitions of [n] = {1, ..., n} and the refinement partial order."""

from __future__ import annotations

import json
from functools import lru_cache
from typing import Iterator

from .config import DEFAULT, Limits
from .errors import DimensionError, DomainError, SizeLimitError

Block = tuple[int, ...]


class Partition:
    """A partition of {1, ..., n} in canonical form.

    Blocks are stored sorted by minimum element with elements ascending, so
    two partitions are equal exactly when their encodings are identical.
    """

    __slots__ = ("n", "blocks", "_hash")

    def __init__(self, n: int, blocks) -> None:
        if n < 0:
            raise DomainError(f"partition ground set size must be >= 0, got {n}")
        cleaned = [tuple(sorted(b)) for b in blocks]
        if any(not b for b in cleaned):
            raise DomainError("partition blocks must be nonempty")
        canon = tuple(sorted(cleaned, key=lambda b: b[0]))
        seen: set[int] = set()
        for block in canon:
            for element in block:
                if not (1 <= element <= n):
                    raise DomainError(f"element {element} outside [{n}]")
                if element in seen:
                    raise DomainError(f"element {element} appears in two blocks")
                seen.add(element)
        if len(seen) != n:
            missing = sorted(set(range(1, n + 1)) - seen)
            raise DomainError(f"blocks do not cover [{n}]: missing {missing}")
        self.n = n
        self.blocks = canon
        self._hash = hash((n, canon))

    @classmethod
    def _raw(cls, n: int, canon: tuple[Block, ...]) -> "Partition":
        # Internal fast path: canon must already be canonical and valid.
        self = object.__new__(cls)
        self.n = n
        self.blocks = canon
        self._hash = hash((n, canon))
        return self

    @classmethod
    def top(cls, n: int) -> "Partition":
        return cls._raw(n, (tuple(range(1, n + 1)),)) if n else cls._raw(0, ())

    @classmethod
    def bottom(cls, n: int) -> "Partition":
        return cls._raw(n, tuple((i,) for i in range(1, n + 1)))

    @property
    def rank(self) -> int:
        """n minus the number of blocks."""
        return self.n - len(self.blocks)

    def block_of(self, element: int) -> Block:
        for block in self.blocks:
            if element in block:
                return block
        raise DomainError(f"element {element} outside [{self.n}]")

    def refines(self, other: "Partition") -> bool:
        """True when every block of self is contained in a block of other."""
        if self.n != other.n:
            raise DimensionError(f"partitions of [{self.n}] and [{other.n}] are incomparable")
        owner = {}
        for idx, block in enumerate(other.blocks):
            for element in block:
                owner[element] = idx
        return all(len({owner[e] for e in block}) == 1 for block in self.blocks)

    def strictly_refines(self, other: "Partition") -> bool:
        return self != other and self.refines(other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and self.n == other.n and self.blocks == other.blocks

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Partition") -> bool:
        # Encoding order; used only to make enumerations and orbits deterministic.
        return (self.n, self.blocks) < (other.n, other.blocks)

    def __repr__(self) -> str:
        return f"Partition({self.n}, {format_partition(self)})"


def rank(p: Partition) -> int:
    return p.rank


def refines(fine: Partition, coarse: Partition) -> bool:
    return fine.refines(coarse)


def strict_refines(fine: Partition, coarse: Partition) -> bool:
    return fine.strictly_refines(coarse)


def enumerate_partitions(n: int, limits: Limits = DEFAULT) -> Iterator[Partition]:
    """Yield every partition of [n] exactly once, in a fixed order.

    Each element k is placed into the existing blocks in order and then into
    a fresh block, so the count equals the Bell number of n.
    """
    if n < 0:
        raise DomainError(f"need n >= 0, got {n}")
    if n > limits.max_partition_n:
        raise SizeLimitError(
            f"n={n} exceeds the partition enumeration bound {limits.max_partition_n}"
        )
    blocks: list[list[int]] = []

    def place(k: int) -> Iterator[Partition]:
        if k > n:
            yield Partition._raw(n, tuple(tuple(b) for b in blocks))
            return
        for block in blocks:
            block.append(k)
            yield from place(k + 1)
            block.pop()
        blocks.append([k])
        yield from place(k + 1)
        blocks.pop()

    yield from place(1)


@lru_cache(maxsize=None)
def _set_partitions_of(block: Block) -> tuple[tuple[Block, ...], ...]:
    # All partitions of an arbitrary index set, as tuples of canonical blocks.
    n = len(block)
    out = []
    for p in enumerate_partitions(n):
        out.append(tuple(tuple(block[i - 1] for i in sub) for sub in p.blocks))
    return tuple(out)


@lru_cache(maxsize=None)
def strict_refinements(p: Partition) -> tuple[Partition, ...]:
    """Every partition strictly refining p, in a fixed order."""
    choices = [_set_partitions_of(block) for block in p.blocks]
    results: list[Partition] = []

    def walk(idx: int, acc: list[Block], trivial: bool) -> None:
        if idx == len(choices):
            if not trivial:
                canon = tuple(sorted(acc, key=lambda b: b[0]))
                results.append(Partition._raw(p.n, canon))
            return
        for option in choices[idx]:
            walk(idx + 1, acc + list(option), trivial and len(option) == 1)

    walk(0, [], True)
    return tuple(results)


def format_partition(p: Partition) -> str:
    """Canonical textual form, e.g. ``[[1,2],[3]]``."""
    return json.dumps([list(b) for b in p.blocks], separators=(",", ":"))


def parse_partition(text: str, n: int | None = None) -> Partition:
    """Inverse of format_partition; validates the encoded blocks."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid partition syntax {text!r}: {exc}") from exc
    return partition_from_json(data, n)


def partition_from_json(data, n: int | None = None) -> Partition:
    if not isinstance(data, list) or not all(isinstance(b, list) for b in data):
        raise DomainError("partition JSON must be a list of blocks")
    elements = [e for block in data for e in block]
    if not all(isinstance(e, int) for e in elements):
        raise DomainError("partition blocks must contain integers")
    if n is None:
        n = max(elements, default=0)
    return Partition(n, [tuple(b) for b in data])
