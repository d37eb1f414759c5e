"""Coefficient sequences c_i(k) across k, fitted as integer-valued polynomials.

Polynomials in k are stored in the binomial basis, P(k) = sum_j a_j C(k, j).
Integer-valued polynomials have integer coordinates there and the a_j are
the forward differences of the values at k = 0, so fitting is exact.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence

from .arrangement import SignedCharPoly, VerificationError, build_lattice, char_poly
from .family import GeneratorSchema, expand, make_schema
from .linalg import FieldSpec, InputError

# Expansions of c_1 and c_2 for the SET family as displayed in the published
# hand computation, in the binomial basis (index j -> coefficient of C(k, j)).
PUBLISHED_EXPANSIONS = {
    1: (0, 0, 1, 1),
    2: (0, 0, 0, 2, 15, 25, 10),
}


def binom(k: int, j: int) -> int:
    """C(k, j) as a polynomial in k, so negative k is allowed."""
    num = 1
    for r in range(j):
        num *= k - r
    return num // factorial(j)


class DegreeBoundViolation(VerificationError):
    """The series is not reproduced by any polynomial within the allowed degree."""

    def __init__(self, k: int, expected: int, actual: int, max_degree: int):
        super().__init__(
            f"no polynomial of degree <= {max_degree} fits: at k={k} fit gives {expected}, value is {actual}"
        )
        self.k = k
        self.expected = expected
        self.actual = actual


@dataclass(frozen=True)
class CoeffSeries:
    i: int
    field: FieldSpec
    values: tuple[int, ...]  # values[k] = c_i(k), k = 0..K

    def __post_init__(self):
        if any(v < 0 for v in self.values):
            raise VerificationError(f"negative coefficient in series c_{self.i}: {self.values}")
        if self.i == 0 and any(v != 1 for v in self.values):
            raise VerificationError("c_0 must be 1 for every k")

    @property
    def kmax(self) -> int:
        return len(self.values) - 1


@dataclass(frozen=True)
class BinomialPoly:
    coeffs: tuple[int, ...]  # a_0, a_1, ... with trailing zeros stripped

    def __post_init__(self):
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        if any(not isinstance(a, int) for a in c):
            raise VerificationError(f"non-integer binomial coordinates {c}")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        """Degree in k; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def coefficient(self, j: int) -> int:
        return self.coeffs[j] if 0 <= j < len(self.coeffs) else 0

    def __call__(self, k: int) -> int:
        return sum(a * binom(k, j) for j, a in enumerate(self.coeffs))

    def __str__(self):
        terms = []
        for j, a in enumerate(self.coeffs):
            if a == 0:
                continue
            basis = "1" if j == 0 else f"C(k,{j})"
            if j == 0:
                body = str(abs(a))
            else:
                body = basis if abs(a) == 1 else f"{abs(a)}*{basis}"
            terms.append(("-" if a < 0 else "+", body))
        if not terms:
            return "0"
        out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def to_monomial(self) -> list[Fraction]:
        """Coefficients of 1, k, k^2, ... (rational in general)."""
        out = [Fraction(0)] * max(1, len(self.coeffs))
        for j, a in enumerate(self.coeffs):
            # C(k, j) = k(k-1)...(k-j+1) / j!
            poly = [Fraction(1)]
            for r in range(j):
                nxt = [Fraction(0)] * (len(poly) + 1)
                for d, c in enumerate(poly):
                    nxt[d + 1] += c
                    nxt[d] -= r * c
                poly = nxt
            fact = factorial(j)
            for d, c in enumerate(poly):
                out[d] += a * c / fact
        return out

    @classmethod
    def from_monomial(cls, mono: Sequence) -> "BinomialPoly":
        d = len(mono) - 1
        vals = []
        for k in range(d + 1):
            v = sum(Fraction(c) * k**e for e, c in enumerate(mono))
            if v.denominator != 1:
                raise VerificationError(f"polynomial is not integer-valued at k={k}")
            vals.append(int(v))
        return cls(tuple(forward_differences(vals)))


def forward_differences(values: Sequence[int]) -> list[int]:
    """[Delta^0 v(0), Delta^1 v(0), ..., Delta^(n-1) v(0)]."""
    out = []
    row = list(values)
    while row:
        out.append(row[0])
        row = [b - a for a, b in zip(row, row[1:])]
    return out


def extract_series(charpolys: Mapping[int, SignedCharPoly], i: int, fld: FieldSpec | None = None) -> CoeffSeries:
    if i < 0:
        raise InputError("coefficient index must be non-negative")
    ks = sorted(charpolys)
    if not ks or ks != list(range(len(ks))):
        raise InputError(f"need characteristic polynomials for k = 0..K without gaps, got {ks}")
    vals = []
    for k in ks:
        chi = charpolys[k]
        if chi.k != k:
            raise InputError(f"polynomial at k={k} has degree {chi.k}")
        vals.append(chi.coeffs[i] if i <= k else 0)
    return CoeffSeries(i, fld or FieldSpec.generic(), tuple(vals))


def fit_binomial(series: CoeffSeries, max_degree: int) -> BinomialPoly:
    """Interpolate on k = 0..max_degree and demand exact agreement at every supplied k."""
    vals = series.values
    if len(vals) < max_degree + 1:
        raise InputError(f"need at least {max_degree + 1} values to fit degree {max_degree}, have {len(vals)}")
    diffs = forward_differences(vals[: max_degree + 1])
    fitted = BinomialPoly(tuple(diffs))
    for k, v in enumerate(vals):
        e = fitted(k)
        if e != v:
            raise DegreeBoundViolation(k, e, v, max_degree)
    return fitted


def _chi_for(schema: GeneratorSchema, k: int, max_flats: int | None) -> SignedCharPoly:
    return char_poly(build_lattice(expand(schema, k), max_flats))


def char_polys(
    schema: GeneratorSchema, kmax: int, max_flats: int | None = None, threads: int = 1
) -> dict[int, SignedCharPoly]:
    """chi of expand(schema, k) for k = 0..kmax; builds for distinct k are independent."""
    ks = list(range(kmax + 1))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            polys = list(ex.map(_chi_for, [schema] * len(ks), ks, [max_flats] * len(ks)))
    else:
        polys = [_chi_for(schema, k, max_flats) for k in ks]
    return dict(zip(ks, polys))


@dataclass
class Comparison:
    """Term-by-term comparison of a fitted expansion with a reference expansion."""

    reference: BinomialPoly
    terms: list[tuple[int, int, int]]  # (j, computed a_j, reference a_j)
    values: list[tuple[int, int, int]]  # (k, computed c_i(k), reference value)

    @property
    def agrees(self) -> bool:
        return all(a == b for _, a, b in self.terms)

    @property
    def first_disagreement(self) -> int | None:
        """Smallest k where the values differ."""
        return next((k for k, a, b in self.values if a != b), None)


def compare_expansions(fitted: BinomialPoly, values: Sequence[int], reference: BinomialPoly) -> Comparison:
    top = max(fitted.degree, reference.degree, 0)
    terms = [(j, fitted.coefficient(j), reference.coefficient(j)) for j in range(top + 1)]
    vals = [(k, v, reference(k)) for k, v in enumerate(values)]
    return Comparison(reference, terms, vals)


@dataclass
class FitReport:
    series: CoeffSeries
    fitted: BinomialPoly | None
    max_degree_allowed: int
    k_fit_max: int
    holdout_k: int | None
    holdout_predicted: int | None = None
    holdout_actual: int | None = None
    failure: DegreeBoundViolation | None = None
    comparison: Comparison | None = None
    extra_series: dict = field(default_factory=dict)  # label -> tuple of values

    @property
    def holdout_match(self) -> bool | None:
        if self.holdout_k is None or self.fitted is None:
            return None
        return self.holdout_predicted == self.holdout_actual

    @property
    def ok(self) -> bool:
        if self.failure is not None or self.fitted is None:
            return False
        if self.fitted.degree > self.max_degree_allowed:
            return False
        return self.holdout_match is not False


def fit_and_verify(
    schema: GeneratorSchema,
    i: int,
    k_fit_max: int,
    k_holdout: int | None = None,
    reference: Sequence[int] | BinomialPoly | None = None,
    charpolys: Mapping[int, SignedCharPoly] | None = None,
    max_flats: int | None = None,
    threads: int = 1,
) -> FitReport:
    """Fit c_i(k) on k <= k_fit_max with degree <= 3i and predict the holdout value.

    A degree-bound violation is reported in ``FitReport.failure`` rather than
    raised.  The reference comparison never affects ``ok``.
    """
    if k_holdout is not None and k_holdout <= k_fit_max:
        raise InputError("holdout k must exceed the largest fitted k")
    top = k_fit_max if k_holdout is None else k_holdout
    polys = dict(charpolys) if charpolys is not None else char_polys(schema, top, max_flats, threads)
    polys = {k: polys[k] for k in range(top + 1)}
    full = extract_series(polys, i, schema.field)
    fit_part = CoeffSeries(i, schema.field, full.values[: k_fit_max + 1])
    max_deg = 3 * i
    # a fit on fewer than 3i+1 points cannot be checked against the bound
    deg = min(max_deg, k_fit_max)
    rep = FitReport(full, None, max_deg, k_fit_max, k_holdout)
    try:
        rep.fitted = fit_binomial(fit_part, deg)
    except DegreeBoundViolation as e:
        rep.failure = e
        return rep
    if k_holdout is not None:
        rep.holdout_predicted = rep.fitted(k_holdout)
        rep.holdout_actual = full.values[k_holdout]
    if reference is not None:
        ref = reference if isinstance(reference, BinomialPoly) else BinomialPoly(tuple(reference))
        rep.comparison = compare_expansions(rep.fitted, full.values, ref)
    return rep


@dataclass
class FieldComparison:
    k: int
    rows: list[tuple[str, int, SignedCharPoly]]  # (field label, flat count, chi)

    @property
    def all_equal(self) -> bool:
        return len({(n, c.coeffs) for _, n, c in self.rows}) <= 1

    def differs_from_generic(self) -> list[str]:
        gen = next(((n, c) for f, n, c in self.rows if f == "generic"), None)
        if gen is None:
            return []
        return [f for f, n, c in self.rows if f != "generic" and (n, c.coeffs) != (gen[0], gen[1].coeffs)]


def compare_fields(
    generators: Sequence[Sequence[int]], k: int, fields: Sequence[str | int], max_flats: int | None = None
) -> FieldComparison:
    """Lattice size and chi of the same integer generators over several fields."""
    rows = []
    for f in fields:
        fld = FieldSpec.parse(f)
        s = make_schema(fld, generators)
        lat = build_lattice(expand(s, k), max_flats)
        rows.append((str(fld), len(lat), char_poly(lat)))
    return FieldComparison(k, rows)
