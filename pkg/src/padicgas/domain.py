"""Exponent functionals, convergence polytopes, abscissae, and pole families.

All membership tests are strict inequalities on real parts; the regions are
open, so boundary points are outside.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .config import DEFAULT, Limits
from .errors import DimensionError, DomainError, UnsupportedRhoError
from .filtrations import SplittingFiltration, enumerate_filtrations
from .partitions import Block
from .scalars import classify_regime, coerce_number, real_part

Pair = tuple[int, int]


def pair_keys(n: int) -> list[Pair]:
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def pair_label(i: int, j: int) -> str:
    """Key for the exponent s_ij; single digits collapse to e.g. ``s_12``."""
    if i <= 9 and j <= 9:
        return f"s_{i}{j}"
    return f"s_{i}_{j}"


def parse_pair_label(label: str) -> Pair:
    if not label.startswith("s_"):
        raise DomainError(f"exponent keys look like s_12 or s_1_2, got {label!r}")
    rest = label[2:]
    if "_" in rest:
        parts = rest.split("_")
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise DomainError(f"cannot parse exponent key {label!r}")
        i, j = int(parts[0]), int(parts[1])
    elif len(rest) == 2 and rest.isdigit():
        i, j = int(rest[0]), int(rest[1])
    else:
        raise DomainError(f"cannot parse exponent key {label!r}")
    if not i < j:
        raise DomainError(f"exponent key {label!r} needs i < j")
    return (i, j)


@dataclass(frozen=True)
class ExponentAssignment:
    """The full input point: one exponent per pair i < j, plus a and b."""

    n: int
    s: tuple[tuple[Pair, object], ...]
    a: object
    b: object
    regime: str

    @classmethod
    def build(cls, n: int, s, a=0, b=0) -> "ExponentAssignment":
        if n < 2:
            raise DomainError(f"need n >= 2, got {n}")
        keys = pair_keys(n)
        mapping = {}
        for key, value in dict(s).items():
            pair = tuple(key)
            if pair not in set(keys):
                raise DimensionError(f"pair {pair} is not an i<j pair of [{n}]")
            mapping[pair] = coerce_number(value)
        missing = [k for k in keys if k not in mapping]
        if missing:
            raise DimensionError(
                f"expected {len(keys)} exponents, missing {[pair_label(*p) for p in missing]}"
            )
        a = coerce_number(a)
        b = coerce_number(b)
        regime = classify_regime(a, b, *mapping.values())
        return cls(n, tuple((k, mapping[k]) for k in keys), a, b, regime)

    @classmethod
    def zero(cls, n: int, a=0, b=0) -> "ExponentAssignment":
        return cls.build(n, {k: 0 for k in pair_keys(n)}, a, b)

    @classmethod
    def constant(cls, n: int, value, a=0, b=0) -> "ExponentAssignment":
        return cls.build(n, {k: value for k in pair_keys(n)}, a, b)

    def as_dict(self) -> dict[Pair, object]:
        return dict(self.s)

    def value(self, i: int, j: int):
        for pair, v in self.s:
            if pair == (i, j):
                return v
        raise DimensionError(f"({i},{j}) is not an i<j pair of [{self.n}]")

    def total(self):
        out = Fraction(0)
        for _, v in self.s:
            out = out + v
        return out

    def block_sum(self, block: Block):
        """Sum of s_ij over pairs inside the block."""
        members = sorted(block)
        out = Fraction(0)
        lookup = self.as_dict()
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                out = out + lookup[(members[x], members[y])]
        return out


@dataclass(frozen=True)
class ChargeVector:
    """Positive particle charges and an inverse temperature."""

    charges: tuple
    beta: object

    @classmethod
    def build(cls, charges, beta=1) -> "ChargeVector":
        charges = tuple(coerce_number(c) for c in charges)
        if len(charges) < 2:
            raise DomainError("need at least two charges")
        for c in charges:
            if real_part(c) <= 0 or (isinstance(c, complex) and c.imag != 0):
                raise DomainError(f"charges must be positive reals, got {c}")
        return cls(charges, coerce_number(beta))

    @property
    def n(self) -> int:
        return len(self.charges)

    def pair_product(self, i: int, j: int):
        return self.charges[i - 1] * self.charges[j - 1]

    def pair_products(self) -> dict[Pair, object]:
        return {(i, j): self.pair_product(i, j) for (i, j) in pair_keys(self.n)}

    def block_charge_sum(self, block: Block):
        """Sum of q_i q_j over pairs inside the block (positive for branches)."""
        members = sorted(block)
        out = Fraction(0)
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                out = out + self.pair_product(members[x], members[y])
        return out

    def level_charge_sum(self, spl: SplittingFiltration, ell: int):
        """Sum of the block charge sums over the branches of level ell."""
        if not 0 <= ell < spl.length:
            raise DomainError(f"level index {ell} outside 0..{spl.length - 1}")
        return sum(
            (self.block_charge_sum(b) for b in spl.chain[ell].blocks if len(b) > 1),
            Fraction(0),
        )

    def total_charge_sum(self):
        return self.block_charge_sum(tuple(range(1, self.n + 1)))

    def exponents(self, a=0, b=0) -> ExponentAssignment:
        """The specialization s_ij = beta * q_i * q_j."""
        return ExponentAssignment.build(
            self.n, {k: self.beta * v for k, v in self.pair_products().items()}, a, b
        )


@dataclass(frozen=True)
class AffineForm:
    """const + sum(coeff[key] * variable); keys are 'a', 'b', or 's_ij'."""

    const: object
    coeff: tuple[tuple[str, int], ...]

    @classmethod
    def build(cls, const, coeff: dict[str, int]) -> "AffineForm":
        items = tuple(sorted((k, int(v)) for k, v in coeff.items() if v))
        return cls(coerce_number(const), items)

    def evaluate(self, e: ExponentAssignment):
        lookup = {pair_label(i, j): v for (i, j), v in e.s}
        lookup["a"] = e.a
        lookup["b"] = e.b
        out = self.const
        for key, c in self.coeff:
            if key not in lookup:
                raise DimensionError(f"form variable {key} missing from the assignment")
            out = out + c * lookup[key]
        return out

    def substitute(self, **values) -> "AffineForm":
        """Fold named variables (typically a and b) into the constant."""
        const = self.const
        keep = []
        for key, c in self.coeff:
            if key in values:
                const = const + c * coerce_number(values[key])
            else:
                keep.append((key, c))
        return AffineForm(const, tuple(keep))

    def describe(self) -> str:
        parts = [str(self.const)]
        for key, c in self.coeff:
            parts.append(key if c == 1 else f"{c}*{key}")
        return " + ".join(parts)

    def to_json(self, period_log_q: bool = True) -> dict:
        const = self.const
        const_repr = str(const) if isinstance(const, Rational) else float(real_part(const))
        return {
            "const": const_repr,
            "coeff": {k: c for k, c in self.coeff},
            "period_log_q": period_log_q,
        }


def root_form(n: int, with_b: bool = True) -> AffineForm:
    coeff = {pair_label(i, j): 1 for (i, j) in pair_keys(n)}
    coeff["a"] = 1
    if with_b:
        coeff["b"] = 1
    return AffineForm.build(n - 1, coeff)


def branch_form(block: Block) -> AffineForm:
    members = sorted(block)
    if len(members) < 2:
        raise DomainError(f"branch forms need blocks of size >= 2, got {block}")
    coeff = {}
    for x in range(len(members)):
        for y in range(x + 1, len(members)):
            coeff[pair_label(members[x], members[y])] = 1
    return AffineForm.build(len(members) - 1, coeff)


def level_form(spl: SplittingFiltration, ell: int, with_b: bool = True) -> AffineForm:
    if not 0 <= ell < spl.length:
        raise DomainError(f"level index {ell} outside 0..{spl.length - 1}")
    level = spl.chain[ell]
    coeff = {}
    for block in level.blocks:
        members = sorted(block)
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                coeff[pair_label(members[x], members[y])] = 1
    if with_b:
        coeff["b"] = 1
    return AffineForm.build(level.rank, coeff)


def branch_exponent(block: Block, e: ExponentAssignment):
    """(#block - 1) + sum of s_ij over pairs inside the block."""
    if len(block) < 2:
        raise DomainError(f"branch exponents need blocks of size >= 2, got {block}")
    return (len(block) - 1) + e.block_sum(block)


def level_exponent(spl: SplittingFiltration, ell: int, e: ExponentAssignment):
    """rank of the level plus the s-sums of its non-singleton blocks."""
    if not 0 <= ell < spl.length:
        raise DomainError(f"level index {ell} outside 0..{spl.length - 1}")
    level = spl.chain[ell]
    out = Fraction(level.rank)
    for block in level.blocks:
        if len(block) > 1:
            out = out + e.block_sum(block)
    return out


def in_root_polytope(e: ExponentAssignment) -> bool:
    return real_part((e.n - 1) + e.a + e.b + e.total()) > 0


@dataclass(frozen=True)
class OmegaWitness:
    """One violated constraint: the chain, its level, and the affine form."""

    kind: str  # "root" or "level"
    spl: SplittingFiltration | None
    level: int | None
    form: AffineForm

    def describe(self) -> str:
        if self.kind == "root":
            return f"root constraint Re({self.form.describe()}) > 0 fails"
        return (
            f"level {self.level} of {self.spl!r}: "
            f"Re({self.form.describe()}) > 0 fails"
        )


def omega_constraints(
    n: int, q: int, limits: Limits = DEFAULT
) -> list[tuple[str, SplittingFiltration | None, int | None, AffineForm]]:
    """The defining constraints of the convergence region, with provenance.

    The root constraint always appears; a level constraint appears once per
    (chain, level) with positive multiplicity at q.  Distinct chains may
    contribute the same affine form.
    """
    if q < 2:
        raise DomainError(f"residue cardinality must be >= 2, got {q}")
    out = [("root", None, None, root_form(n))]
    for spl in enumerate_filtrations(n, limits):
        if spl.multiplicity(q) == 0:
            continue
        for ell in range(1, spl.length):
            out.append(("level", spl, ell, level_form(spl, ell)))
    return out


def omega_form_set(n: int, q: int, limits: Limits = DEFAULT) -> set[AffineForm]:
    """The constraint set as a set of affine forms (deduplicated)."""
    return {form for _, _, _, form in omega_constraints(n, q, limits)}


def check_omega(
    q: int, e: ExponentAssignment, limits: Limits = DEFAULT
) -> tuple[bool, OmegaWitness | None]:
    """Strict membership in the convergence region, with a witness on failure.

    The witness is the first violated constraint in enumeration order.
    """
    for kind, spl, ell, form in omega_constraints(e.n, q, limits):
        if not real_part(form.evaluate(e)) > 0:
            return False, OmegaWitness(kind, spl, ell, form)
    return True, None


def in_omega(q: int, e: ExponentAssignment, limits: Limits = DEFAULT) -> bool:
    member, _ = check_omega(q, e, limits)
    return member


def in_branch_polytope(spl: SplittingFiltration, e: ExponentAssignment) -> bool:
    """Strict positivity of every proper-branch exponent's real part."""
    root = tuple(range(1, spl.n + 1))
    return all(
        real_part(branch_exponent(block, e)) > 0
        for block in spl.branches()
        if block != root
    )


def _ratio(numerator, denominator):
    if isinstance(numerator, Rational) and isinstance(denominator, Rational):
        return Fraction(numerator) / Fraction(denominator)
    return float(numerator) / float(denominator)


def beta_threshold(
    n: int,
    q: int,
    cv: ChargeVector,
    a=0,
    b=0,
    reduced_form: bool = False,
    limits: Limits = DEFAULT,
):
    """The convergence abscissa for the inverse temperature.

    Re(beta) strictly above the returned value puts beta * (q_i q_j) inside
    the convergence region.  With ``reduced_form`` and b = 0 the branch-based
    criterion over reduced chains is used; otherwise the level-based one.
    """
    if cv.n != n:
        raise DimensionError(f"charge vector has {cv.n} entries, expected {n}")
    a = coerce_number(a)
    b = coerce_number(b)
    total = cv.total_charge_sum()
    candidates = [_ratio(-((n - 1) + real_part(a) + real_part(b)), total)]
    use_branches = reduced_form and real_part(b) == 0 and b == 0
    root = tuple(range(1, n + 1))
    for spl in enumerate_filtrations(n, limits, reduced_only=use_branches):
        if spl.multiplicity(q) == 0:
            continue
        if use_branches:
            for block in spl.branches():
                if block == root:
                    continue
                candidates.append(
                    _ratio(-(len(block) - 1), cv.block_charge_sum(block))
                )
        else:
            for ell in range(1, spl.length):
                candidates.append(
                    _ratio(
                        -(spl.chain[ell].rank + real_part(b)),
                        cv.level_charge_sum(spl, ell),
                    )
                )
    return max(candidates)


@dataclass(frozen=True)
class HyperplaneFamily:
    """A candidate pole family: form(s) in (2 pi i / log q) * Z."""

    kind: str  # "root" | "level" | "branch"
    q: int
    form: AffineForm

    def to_json(self) -> dict:
        data = self.form.to_json(period_log_q=True)
        data["kind"] = self.kind
        data["q"] = self.q
        return data


def pole_hyperplanes(
    spl: SplittingFiltration, q: int, a, b, reduced: bool, rho
) -> list[HyperplaneFamily]:
    """Candidate pole families of one summand, for the unit-ball density.

    These families contain all poles of the corresponding summand; no claim
    is made that every member is an actual pole of the full sum.
    """
    if getattr(rho, "family", None) != "ball":
        raise UnsupportedRhoError(
            "pole families have a closed form only for the ball-indicator density"
        )
    a = coerce_number(a)
    b = coerce_number(b)
    out: list[HyperplaneFamily] = []
    root = tuple(range(1, spl.n + 1))
    if reduced:
        out.append(HyperplaneFamily("root", q, root_form(spl.n, with_b=False).substitute(a=a)))
        for block in spl.branches():
            if block == root:
                continue
            out.append(HyperplaneFamily("branch", q, branch_form(block)))
    else:
        out.append(HyperplaneFamily("root", q, root_form(spl.n).substitute(a=a, b=b)))
        for ell in range(1, spl.length):
            out.append(HyperplaneFamily("level", q, level_form(spl, ell).substitute(b=b)))
    return out
