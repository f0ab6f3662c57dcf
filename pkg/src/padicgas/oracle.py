"""Independent verification by exhaustive digit enumeration and sampling.

Field elements are never constructed: everything works on n x depth digit
matrices over {0, ..., q-1}.  The valuation of a coordinate difference is the
first column where the two digit rows disagree, so the integrand restricted
to a coset is read off a small matrix of pairwise valuations.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from numbers import Rational

import numpy as np

from .config import DEFAULT, Limits
from .domain import ExponentAssignment, check_omega, level_exponent, pair_keys
from .errors import (
    ConvergenceError,
    DomainError,
    SaturationError,
    SizeLimitError,
)
from .filtrations import LevelPair, SplittingFiltration, all_filtrations
from .partitions import Partition
from .scalars import EXACT, Scalar, real_part

SATURATED = math.inf


@dataclass(frozen=True)
class DigitMatrix:
    """n digit rows of a common depth over {0, ..., q-1}."""

    q: int
    digits: tuple[tuple[int, ...], ...]

    @classmethod
    def build(cls, q: int, rows) -> "DigitMatrix":
        rows = tuple(tuple(int(d) for d in row) for row in rows)
        if q < 2:
            raise DomainError(f"digit base must be >= 2, got {q}")
        if len(rows) < 1 or len({len(r) for r in rows}) != 1:
            raise DomainError("digit rows must be nonempty and of equal length")
        for row in rows:
            for d in row:
                if not 0 <= d < q:
                    raise DomainError(f"digit {d} outside [0, {q})")
        return cls(q, rows)

    @property
    def n(self) -> int:
        return len(self.digits)

    @property
    def depth(self) -> int:
        return len(self.digits[0])

    def to_csv(self) -> str:
        return "\n".join(",".join(str(d) for d in row) for row in self.digits) + "\n"

    @classmethod
    def from_csv(cls, q: int, text: str) -> "DigitMatrix":
        rows = [line.split(",") for line in text.strip().splitlines()]
        return cls.build(q, rows)


def valuation_matrix(dm: DigitMatrix) -> list[list[object]]:
    """Pairwise first-disagreement indices; SATURATED when rows agree fully."""
    n, depth = dm.n, dm.depth
    out = [[SATURATED] * n for _ in range(n)]
    for i in range(n):
        out[i][i] = SATURATED
        for j in range(i + 1, n):
            v = SATURATED
            for t in range(depth):
                if dm.digits[i][t] != dm.digits[j][t]:
                    v = t
                    break
            out[i][j] = out[j][i] = v
    return out


def _pairs(n: int) -> list[tuple[int, int]]:
    return pair_keys(n)


def profile_of(dm: DigitMatrix) -> tuple[int, ...]:
    """Pairwise valuations in pair order, capped at depth (cap = saturated)."""
    vm = valuation_matrix(dm)
    return tuple(
        dm.depth if vm[i - 1][j - 1] is SATURATED or vm[i - 1][j - 1] == SATURATED
        else int(vm[i - 1][j - 1])
        for i, j in _pairs(dm.n)
    )


def level_pair_from_profile(n: int, profile, depth: int) -> LevelPair:
    """Rebuild the (chain, gaps) classification from resolved valuations."""
    pairs = _pairs(n)
    vals = dict(zip(pairs, profile))
    if any(v >= depth for v in vals.values()):
        raise SaturationError(
            f"some pairwise valuation is >= the depth {depth}; deepen the matrix"
        )
    marks = sorted(set(vals.values()))
    thresholds = marks + [marks[-1] + 1]
    chain = []
    for t in thresholds:
        # Union-find over i ~ j when v(i,j) >= t; ultrametricity makes this
        # an equivalence without closure.
        parent = list(range(n + 1))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (i, j), v in vals.items():
            if v >= t:
                parent[find(i)] = find(j)
        blocks: dict[int, list[int]] = {}
        for i in range(1, n + 1):
            blocks.setdefault(find(i), []).append(i)
        chain.append(Partition(n, [tuple(b) for b in blocks.values()]))
    full = [-1] + marks
    gaps = tuple(full[k + 1] - full[k] for k in range(len(marks)))
    return LevelPair(SplittingFiltration(chain), gaps)


def assign_level_pair(dm: DigitMatrix) -> LevelPair:
    """The classification of the point carried by a fully resolved matrix."""
    return level_pair_from_profile(dm.n, profile_of(dm), dm.depth)


def measure_of_level_pair(spl: SplittingFiltration, gaps, q: int) -> Fraction:
    """Haar measure of the set of points with this exact classification."""
    lp = LevelPair(spl, tuple(gaps))
    out = Fraction(spl.multiplicity(q))
    for ell, g in enumerate(lp.gaps):
        out *= Fraction(q) ** (-spl.chain[ell].rank * g)
    return out


# ---------------------------------------------------------------------------
# Exhaustive enumeration, vectorized over the last two digit rows.


def _thread_count() -> int:
    raw = os.environ.get("PADIC_GAS_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _row_digits(q: int, depth: int) -> np.ndarray:
    codes = np.arange(q**depth, dtype=np.int64)
    out = np.empty((q**depth, depth), dtype=np.uint8)
    for t in range(depth - 1, -1, -1):
        out[:, t] = codes % q
        codes //= q
    return out


def _pair_valuation_table(q: int, depth: int) -> np.ndarray:
    """First-disagreement index for every ordered pair of digit rows."""
    rows = _row_digits(q, depth)
    size = rows.shape[0]
    table = np.full((size, size), depth, dtype=np.int64)
    chunk = max(1, (1 << 22) // max(size, 1))
    for start in range(0, size, chunk):
        stop = min(size, start + chunk)
        block = rows[start:stop]  # (c, depth)
        neq = block[:, None, :] != rows[None, :, :]  # (c, size, depth)
        any_diff = neq.any(axis=2)
        first = neq.argmax(axis=2)
        table[start:stop] = np.where(any_diff, first, depth)
    return table


def check_budget(n: int, q: int, depth: int, limits: Limits = DEFAULT) -> None:
    bits = n * depth * math.log2(q)
    if bits > limits.oracle_budget_bits:
        raise SizeLimitError(
            f"enumerating q**(n*depth) = {q}**{n * depth} matrices needs "
            f"{bits:.1f} bits, over the budget of {limits.oracle_budget_bits}"
        )


def max_depth_within_budget(n: int, q: int, limits: Limits = DEFAULT) -> int:
    depth = int(limits.oracle_budget_bits / (n * math.log2(q)))
    if depth < 1:
        raise SizeLimitError(f"no admissible depth for n={n}, q={q}")
    return depth


@lru_cache(maxsize=8)
def digit_profile_counts(
    n: int, q: int, depth: int, limits: Limits = DEFAULT
) -> dict[tuple[int, ...], int]:
    """Occurrences of every capped valuation profile among all digit matrices.

    The enumeration fixes the first n-2 rows in Python and broadcasts the
    last two over a precomputed pairwise valuation table.
    """
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    check_budget(n, q, depth, limits)
    table = _pair_valuation_table(q, depth)
    size = table.shape[0]
    pairs = _pairs(n)
    base = depth + 1
    coef = {pair: base ** idx for idx, pair in enumerate(pairs)}
    space = base ** len(pairs)
    use_bincount = space <= 1 << 20
    counts_vec = np.zeros(space, dtype=np.int64) if use_bincount else None
    collected: list[np.ndarray] = []

    def handle_fixed(fixed: tuple[int, ...]) -> np.ndarray | None:
        k = len(fixed)  # indices of rows 1..k are fixed, rows k+1, k+2 vary
        code = 0
        for x in range(k):
            for y in range(x + 1, k):
                code += coef[(x + 1, y + 1)] * int(table[fixed[x], fixed[y]])
        grid = np.full((size, size), code, dtype=np.int64)
        for x in range(k):
            grid += coef[(x + 1, k + 1)] * table[fixed[x]][:, None]
            grid += coef[(x + 1, k + 2)] * table[fixed[x]][None, :]
        grid += coef[(k + 1, k + 2)] * table
        flat = grid.ravel()
        if use_bincount:
            return np.bincount(flat, minlength=space)
        return flat.astype(np.int32 if space < 2**31 else np.int64)

    fixed_tuples = list(product(range(size), repeat=n - 2))
    workers = _thread_count()
    if workers > 1 and len(fixed_tuples) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(handle_fixed, fixed_tuples))
    else:
        results = [handle_fixed(f) for f in fixed_tuples]
    if use_bincount:
        for r in results:
            counts_vec += r
        nonzero = np.nonzero(counts_vec)[0]
        raw = {int(c): int(counts_vec[c]) for c in nonzero}
    else:
        codes = np.concatenate(results)
        values, freq = np.unique(codes, return_counts=True)
        raw = {int(c): int(f) for c, f in zip(values, freq)}

    out: dict[tuple[int, ...], int] = {}
    for code, count in raw.items():
        profile = []
        rest = code
        for _ in pairs:
            profile.append(rest % base)
            rest //= base
        out[tuple(profile)] = count
    return out


def _integrand_exponent(n: int, a, b, s: dict, profile, depth: int):
    """a*min(v) + b*max(v) + sum s_ij v_ij on the capped profile.

    For saturated profiles this is the worst-case bound exponent: capped
    valuations under-state the true ones, which is conservative when all
    real parts are nonnegative.
    """
    pairs = _pairs(n)
    vmin = min(profile)
    vmax = max(profile)
    out = a * vmin + b * vmax
    for pair, v in zip(pairs, profile):
        if v:
            out = out + s[pair] * v
    return out


def _analytic_tail(
    q: int, e: ExponentAssignment, depth: int, limits: Limits
) -> Fraction | float:
    """Exact mass of |integrand| beyond the resolved region.

    Classified points missed at this depth are exactly those whose gap totals
    exceed it; summing the per-class geometric series (at real parts) over
    every chain and subtracting the resolved prefix gives the remainder.
    """
    n = e.n
    ra = real_part(e.a)
    rb = real_part(e.b)
    exact = all(
        isinstance(v, Rational) for v in [ra, rb] + [real_part(v) for _, v in e.s]
    )
    total = Fraction(0) if exact else 0.0
    for spl in all_filtrations(n, limits):
        if spl.multiplicity(q) == 0:
            continue
        length = spl.length
        root_exp = real_part((n - 1) + e.a + e.b + e.total())
        ratios = [Fraction(q) ** -root_exp if exact else float(q) ** -float(root_exp)]
        for ell in range(1, length):
            ex = real_part(e.b + level_exponent(spl, ell, e))
            ratios.append(Fraction(q) ** -ex if exact else float(q) ** -float(ex))
        scale = (Fraction(spl.multiplicity(q)) if exact else float(spl.multiplicity(q))) / q ** (n - 1)
        # Full sum: the first gap carries exponent (g - 1), the rest carry g.
        full = scale / (1 - ratios[0])
        for r in ratios[1:]:
            full *= r / (1 - r)
        # Resolved prefix: gap totals at most the depth, by convolution.
        zero = Fraction(0) if exact else 0.0
        acc = [zero] * (depth + 1)
        acc[0] = scale  # before placing any gap; offset by 1 per gap placed
        for idx, r in enumerate(ratios):
            nxt = [zero] * (depth + 1)
            for t in range(depth + 1):
                if acc[t] == 0:
                    continue
                power = acc[t] if idx == 0 else acc[t] * r  # first gap: r**(g-1)
                g = 1
                while t + g <= depth:
                    nxt[t + g] = nxt[t + g] + power
                    power = power * r
                    g += 1
            acc = nxt
        resolved = sum(acc)
        total = total + (full - resolved)
    return total


@dataclass(frozen=True)
class TruncatedResult:
    """Resolved mass plus a certified bound on everything unresolved."""

    main: Scalar
    tail_bound: object
    depth: int

    def to_json(self) -> dict:
        return {
            "main": self.main.to_json(),
            "tail_bound": float(self.tail_bound),
            "depth": self.depth,
        }


def exact_truncated_integral(
    n: int,
    q: int,
    a,
    b,
    e: ExponentAssignment,
    depth: int,
    limits: Limits = DEFAULT,
    precision: int = 53,
) -> TruncatedResult:
    """Enumerate every digit matrix to the given depth and integrate.

    Fully resolved cosets contribute exactly; cosets with an unresolved pair
    contribute to the tail bound.  With all real exponent parts nonnegative
    the per-coset bound evaluates the integrand on the capped profile (the
    minimum-distance factor capped at q**-depth); otherwise the remainder is
    summed analytically from the per-class geometric series.
    """
    e = ExponentAssignment.build(n, e.as_dict(), a, b)
    member, witness = check_omega(q, e, limits)
    if not member:
        raise ConvergenceError(
            f"the truncated integral needs a convergent target: {witness.describe()}",
            witness,
        )
    counts = digit_profile_counts(n, q, depth, limits)
    s = e.as_dict()
    exact = e.regime == EXACT
    volume = Fraction(q) ** (-n * depth)
    main = Fraction(0) if exact else 0.0
    all_nonneg = (
        real_part(e.a) >= 0
        and real_part(e.b) >= 0
        and all(real_part(v) >= 0 for v in s.values())
    )
    tail = Fraction(0) if all_nonneg else None
    for profile, count in counts.items():
        saturated = any(v >= depth for v in profile)
        exponent = _integrand_exponent(n, e.a, e.b, s, profile, depth)
        if exact:
            value = count * volume * Fraction(q) ** (-int(exponent))
        else:
            value = count * float(volume) * complex(q) ** (-complex(exponent))
        if saturated:
            if all_nonneg:
                bound = count * volume * Fraction(q) ** -Fraction(real_part(exponent))
                tail = tail + bound
        else:
            main = main + value
    if not all_nonneg:
        tail = _analytic_tail(q, e, depth, limits)
    scalar = Scalar.exact(main) if exact else Scalar.floating(main, precision=precision)
    return TruncatedResult(scalar, tail, depth)


@dataclass(frozen=True)
class MonteCarloResult:
    estimate: float
    stderr: float
    saturation_rate: float
    samples: int
    depth: int
    seed: int

    def to_json(self) -> dict:
        return {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "saturation_rate": self.saturation_rate,
            "samples": self.samples,
            "depth": self.depth,
            "seed": self.seed,
        }


def sample_profiles(
    n: int, q: int, depth: int, samples: int, seed: int
) -> np.ndarray:
    """Capped valuation profiles of uniform digit matrices, (samples, pairs).

    The generator is counter-based (Philox), so a seed fixes the stream.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    digits = rng.integers(0, q, size=(samples, n, depth), dtype=np.uint8)
    pairs = _pairs(n)
    out = np.empty((samples, len(pairs)), dtype=np.int64)
    for idx, (i, j) in enumerate(pairs):
        neq = digits[:, i - 1, :] != digits[:, j - 1, :]
        any_diff = neq.any(axis=1)
        out[:, idx] = np.where(any_diff, neq.argmax(axis=1), depth)
    return out


def monte_carlo_integral(
    n: int,
    q: int,
    a,
    b,
    e: ExponentAssignment,
    depth: int,
    samples: int,
    seed: int,
    limits: Limits = DEFAULT,
) -> MonteCarloResult:
    """Sample uniform digit matrices and average the integrand.

    Saturated samples are discarded (their share is reported); more than half
    saturated means the depth is too small to say anything.
    """
    if samples < 100:
        raise DomainError(f"need at least 100 samples, got {samples}")
    e = ExponentAssignment.build(n, e.as_dict(), a, b)
    member, witness = check_omega(q, e, limits)
    if not member:
        raise ConvergenceError(
            f"sampling needs a convergent target: {witness.describe()}", witness
        )
    profiles = sample_profiles(n, q, depth, samples, seed)
    keep = ~(profiles >= depth).any(axis=1)
    rate = 1.0 - keep.sum() / samples
    if rate > 0.5:
        raise DomainError(
            f"saturation rate {rate:.2f} exceeds 0.5; increase the depth"
        )
    kept = profiles[keep]
    coeffs = np.array(
        [float(real_part(v)) for _, v in e.s], dtype=np.float64
    )
    exponents = (
        kept @ coeffs
        + float(real_part(e.a)) * kept.min(axis=1)
        + float(real_part(e.b)) * kept.max(axis=1)
    )
    values = np.power(float(q), -exponents)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(len(values)))
    return MonteCarloResult(mean, stderr, float(rate), samples, depth, seed)
