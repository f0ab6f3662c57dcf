"""Canonical JSON text and parsers for every shape the CLI emits.

Output is deterministic: keys keep their construction order, floats print
with 17 significant digits, rationals print as ``p/q`` strings.
"""

from __future__ import annotations

import json
from fractions import Fraction
from numbers import Rational

import mpmath

from .domain import pair_label, parse_pair_label
from .errors import DomainError
from .filtrations import BranchPair, LevelPair, SplittingFiltration
from .partitions import Partition, partition_from_json
from .scalars import Scalar, scalar_from_json  # noqa: F401  (re-exported)


def format_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise DomainError(f"cannot serialize non-finite float {x}")
    return format(float(x), ".17g")


def dumps(obj, indent: int = 2) -> str:
    """Serialize with fixed key order and fixed float formatting."""

    def render(node, pad: int) -> str:
        if isinstance(node, dict):
            if not node:
                return "{}"
            inner = ",\n".join(
                " " * (pad + indent) + json.dumps(str(k)) + ": " + render(v, pad + indent)
                for k, v in node.items()
            )
            return "{\n" + inner + "\n" + " " * pad + "}"
        if isinstance(node, (list, tuple)):
            if not node:
                return "[]"
            flat = all(isinstance(x, (int, float, str, bool)) or x is None for x in node)
            if flat:
                return "[" + ",".join(render(x, 0) for x in node) + "]"
            inner = ",\n".join(" " * (pad + indent) + render(v, pad + indent) for v in node)
            return "[\n" + inner + "\n" + " " * pad + "]"
        if isinstance(node, bool) or node is None:
            return json.dumps(node)
        if isinstance(node, int):
            return str(node)
        if isinstance(node, float):
            return format_float(node)
        if isinstance(node, Rational):
            return json.dumps(str(Fraction(node)))
        if isinstance(node, str):
            return json.dumps(node)
        if isinstance(node, (mpmath.mpf,)):
            return format_float(float(node))
        raise DomainError(f"cannot serialize {type(node).__name__}")

    return render(obj, 0) + "\n"


def number_to_json(value):
    """Numbers as JSON: ints bare, rationals as 'p/q', complex as {re, im}."""
    if isinstance(value, Rational):
        f = Fraction(value)
        return int(f) if f.denominator == 1 else str(f)
    if isinstance(value, (mpmath.mpf,)):
        return float(value)
    if isinstance(value, (complex, mpmath.mpc)):
        z = complex(value)
        if z.imag == 0:
            return z.real
        return {"re": z.real, "im": z.imag}
    if isinstance(value, float):
        return value
    raise DomainError(f"cannot serialize number {value!r}")


def number_from_json(data):
    if isinstance(data, bool):
        raise DomainError("booleans are not numbers")
    if isinstance(data, int):
        return Fraction(data)
    if isinstance(data, float):
        return data
    if isinstance(data, str):
        return Fraction(data)
    if isinstance(data, dict) and set(data) <= {"re", "im"}:
        return complex(data.get("re", 0.0), data.get("im", 0.0))
    raise DomainError(f"cannot parse number {data!r}")


def partition_to_json(p: Partition) -> list:
    return [list(b) for b in p.blocks]


def filtration_to_json(spl: SplittingFiltration) -> list:
    return [partition_to_json(p) for p in spl.chain]


def filtration_from_json(data, n: int | None = None) -> SplittingFiltration:
    if not isinstance(data, list):
        raise DomainError("a filtration is a JSON list of partitions")
    if n is None:
        n = max((e for p in data[:1] for b in p for e in b), default=0)
    return SplittingFiltration([partition_from_json(p, n) for p in data])


def level_pair_to_json(lp: LevelPair) -> dict:
    return {"chain": filtration_to_json(lp.spl), "n": list(lp.gaps)}


def level_pair_from_json(data) -> LevelPair:
    return LevelPair(filtration_from_json(data["chain"]), tuple(data["n"]))


def branch_pair_to_json(bp: BranchPair) -> dict:
    return {
        "chain": filtration_to_json(bp.spl),
        "k": {json.dumps(list(b), separators=(",", ":")): v for b, v in bp.counts},
    }


def branch_pair_from_json(data) -> BranchPair:
    spl = filtration_from_json(data["chain"])
    mapping = {tuple(json.loads(key)): int(v) for key, v in data["k"].items()}
    return BranchPair.from_mapping(spl, mapping)


def exponents_to_json(s_items) -> dict:
    return {pair_label(i, j): number_to_json(v) for (i, j), v in s_items}


def exponents_from_json(data) -> dict:
    if not isinstance(data, dict):
        raise DomainError("an exponent map is a JSON object keyed by s_ij")
    return {parse_pair_label(k): number_from_json(v) for k, v in data.items()}
