"""Tunable enumeration bounds and numerical tolerances."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class Limits:
    """Budgets guarding the combinatorially explosive operations.

    Exceeding a bound raises SizeLimitError rather than silently truncating.
    """

    max_partition_n: int = 10     # Bell(10) = 115975 partitions
    max_filtration_n: int = 7     # full chain enumeration stays tractable
    max_orbit_n: int = 8          # orbit computations visit all n! relabelings
    oracle_budget_bits: int = 24  # exhaustive oracle enumerates <= 2**bits matrices
    series_tolerance: float = 1e-14
    pole_epsilon: float = 1e-9    # float-regime pole-proximity threshold


DEFAULT = Limits()

_INT_KEYS = ("max_partition_n", "max_filtration_n", "max_orbit_n", "oracle_budget_bits")
_FLOAT_KEYS = ("series_tolerance", "pole_epsilon")


def load_limits(path: str, base: Limits = DEFAULT) -> Limits:
    """Read ``key=value`` lines (``#`` comments allowed) into a Limits."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in _INT_KEYS:
                overrides[key] = int(value)
            elif key in _FLOAT_KEYS:
                overrides[key] = float(value)
            else:
                raise DomainError(f"{path}:{lineno}: unknown config key {key!r}")
    return dataclasses.replace(base, **overrides)
