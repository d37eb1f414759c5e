"""Central hyperplane arrangements, their lattices of flats and characteristic polynomials."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .linalg import FieldSpec, InputError, Row, RowMatrix, extend, normalize, null_space, row_space_contains


class VerificationError(ArithmeticError):
    """A mathematical identity that must hold was found violated."""


class BudgetExceeded(RuntimeError):
    """A computation would exceed its configured work budget."""


@dataclass(frozen=True, order=True)
class Hyperplane:
    """Zero set of a linear form, stored with its first nonzero coefficient equal to 1.

    ``offset`` is the constant term of an affine form; only ``offset == 0``
    (central hyperplanes) can be put into a lattice.
    """

    form: Row
    offset: int = 0

    @classmethod
    def make(cls, fld: FieldSpec, coeffs: Sequence, offset=0) -> "Hyperplane":
        v = fld.vector(coeffs)
        if not any(x != 0 for x in v):
            raise InputError("zero form does not define a hyperplane")
        first = next(x for x in v if x != 0)
        off = fld.elem(offset)
        if off != 0:
            off = fld.mul(off, fld.inv(first))
        return cls(normalize(fld, v), off)

    @property
    def k(self) -> int:
        return len(self.form)

    def permuted(self, fld: FieldSpec, perm: Sequence[int]) -> "Hyperplane":
        """Image under the coordinate map sending variable i to variable perm[i]."""
        v = [fld.elem(0)] * len(self.form)
        for i, c in enumerate(self.form):
            v[perm[i]] = c
        return Hyperplane.make(fld, v, self.offset)

    def __str__(self):
        return format_form(self.form)


def format_form(form: Sequence) -> str:
    parts = []
    for i, c in enumerate(form, start=1):
        if c == 0:
            continue
        mag = abs(c) if isinstance(c, Fraction) else c
        sign = "-" if (isinstance(c, Fraction) and c < 0) else "+"
        coef = "" if mag == 1 else f"{mag}*"
        parts.append((sign, f"{coef}x{i}"))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, term in parts[1:]:
        out += f" {sign} {term}"
    return out


@dataclass(frozen=True)
class Arrangement:
    field: FieldSpec
    k: int
    hyperplanes: tuple[Hyperplane, ...]

    def __post_init__(self):
        for h in self.hyperplanes:
            if h.k != self.k:
                raise InputError(f"hyperplane {h} has {h.k} coordinates, expected {self.k}")
        if len(set(self.hyperplanes)) != len(self.hyperplanes):
            raise InputError("duplicate hyperplanes in arrangement")

    @classmethod
    def from_forms(cls, fld: FieldSpec, k: int, forms: Iterable[Sequence]) -> "Arrangement":
        """Canonicalize, deduplicate and sort the given linear forms."""
        hs = {Hyperplane.make(fld, f) for f in forms}
        return cls(fld, k, tuple(sorted(hs)))

    def __len__(self):
        return len(self.hyperplanes)

    @property
    def is_central(self) -> bool:
        return all(h.offset == 0 for h in self.hyperplanes)

    def permuted(self, perm: Sequence[int]) -> "Arrangement":
        hs = {h.permuted(self.field, perm) for h in self.hyperplanes}
        return Arrangement(self.field, self.k, tuple(sorted(hs)))


@dataclass(frozen=True)
class Flat:
    equations: RowMatrix
    # bit i set iff hyperplane i of the arrangement contains this flat
    support: int

    @property
    def codim(self) -> int:
        return len(self.equations.rows)

    @property
    def dim(self) -> int:
        return self.equations.ncols - self.codim

    def key(self) -> bytes:
        return self.equations.key()


class FlatLattice:
    """All flats of a central arrangement, ordered by reverse containment.

    Flats are indexed by increasing codimension, and within one codimension
    by their canonical equations, so indexing is deterministic.  ``mobius[i]``
    is the Moebius value from the ambient space to flat ``i``.
    """

    def __init__(self, arrangement: Arrangement, flats: list[Flat], mobius: list[int]):
        self.arrangement = arrangement
        self.flats = flats
        self.mobius = mobius
        self._index = {f.equations.rows: i for i, f in enumerate(flats)}

    def __len__(self):
        return len(self.flats)

    def index(self, equations: RowMatrix) -> int:
        return self._index[equations.rows]

    def leq(self, i: int, j: int) -> bool:
        """``flat_i <= flat_j`` in the lattice, i.e. flat_j is contained in flat_i."""
        si, sj = self.flats[i].support, self.flats[j].support
        return si & ~sj == 0

    def below(self, j: int) -> list[int]:
        """Indices of flats strictly below flat ``j``."""
        return [i for i in range(len(self.flats)) if i != j and self.leq(i, j)]

    def counts_by_codim(self) -> list[int]:
        out = [0] * (self.arrangement.k + 1)
        for f in self.flats:
            out[f.codim] += 1
        return out

    def check_sign_condition(self) -> None:
        for f, m in zip(self.flats, self.mobius):
            if (-1) ** f.codim * m <= 0:
                raise VerificationError(f"sign condition fails at flat {f.equations.rows}: mu={m}")


def _support_masks(fld: FieldSpec, forms: np.ndarray, basis: list[Row]) -> int:
    """Bitmask of forms vanishing on the span of ``basis``."""
    m = forms.shape[0]
    if not basis:
        return (1 << m) - 1
    if fld.is_generic:
        b = np.array(basis, dtype=object).T
        zero = np.all(forms.dot(b) == 0, axis=1)
    else:
        b = np.array(basis, dtype=np.int64).T
        zero = np.all((forms @ b) % fld.p == 0, axis=1)
    packed = np.packbits(zero.astype(np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def _form_matrix(arr: Arrangement) -> np.ndarray:
    if arr.field.is_generic:
        from .linalg import _integer_scaled

        rows = [_integer_scaled(h.form) for h in arr.hyperplanes]
        return np.array(rows, dtype=object).reshape(len(rows), arr.k)
    return np.array([h.form for h in arr.hyperplanes], dtype=np.int64).reshape(len(arr), arr.k)


def build_flats(arr: Arrangement, max_flats: int | None = None) -> list[Flat]:
    """All flats of ``arr`` by frontier closure, sorted by (codim, equations).

    Each generation intersects the flats of codimension c with single
    hyperplanes.  Hyperplanes already containing a newly found cover are
    skipped, so every cover of a flat is reduced only once.
    """
    if not arr.is_central:
        raise InputError("affine (non-central) arrangements are not supported")
    fld, k = arr.field, arr.k
    forms = _form_matrix(arr)
    m = len(arr)
    bottom = Flat(RowMatrix(fld, k), 0)
    flats = [bottom]
    level = [bottom]
    while level:
        found: dict[tuple, Flat] = {}
        for x in level:
            covered = x.support
            for h in range(m):
                if covered >> h & 1:
                    continue
                eq = extend(x.equations, arr.hyperplanes[h].form)
                z = found.get(eq.rows)
                if z is None:
                    z = Flat(eq, _support_masks(fld, forms, null_space(eq)))
                    found[eq.rows] = z
                covered |= z.support
        level = [found[key] for key in sorted(found)]
        flats.extend(level)
        if max_flats is not None and len(flats) > max_flats:
            raise BudgetExceeded(f"lattice exceeds {max_flats} flats")
    return flats


def _mask_words(flats: list[Flat], m: int) -> np.ndarray:
    nw = max(1, (m + 63) // 64)
    out = np.zeros((len(flats), nw), dtype=np.uint64)
    for i, f in enumerate(flats):
        s = f.support
        for w in range(nw):
            out[i, w] = (s >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    return out


def mobius_values(flats: list[Flat], m: int) -> list[int]:
    """mu(0, x) by mu(0,0) = 1 and mu(0,x) = -sum_{y<x} mu(0,y).

    Flats must come sorted by codimension, so every y < x is final before x.
    """
    words = _mask_words(flats, m)
    mu = np.zeros(len(flats), dtype=np.int64)
    codims = [f.codim for f in flats]
    start = 0
    for i, c in enumerate(codims):
        if i == 0:
            mu[0] = 1
            continue
        while codims[start] < c and start < i:
            start += 1
        # flats with smaller codim are exactly indices < start
        lower = words[:start]
        sub = np.all((lower & ~words[i]) == 0, axis=1)
        mu[i] = -int(mu[:start][sub].sum())
    if len(flats) and np.abs(mu).max() > 2**60:
        raise OverflowError("Moebius values exceed int64 range")
    return [int(v) for v in mu]


def build_lattice(arr: Arrangement, max_flats: int | None = None) -> FlatLattice:
    flats = build_flats(arr, max_flats)
    return FlatLattice(arr, flats, mobius_values(flats, len(arr)))


def brute_force_lattice(arr: Arrangement) -> dict[tuple, int]:
    """Flats and Moebius values from all 2^m subsets of hyperplanes.

    Independent of :func:`build_lattice`: intersections are reduced from
    scratch and the order uses row-space containment.  Only for small m.
    """
    from .linalg import rref

    fld, k = arr.field, arr.k
    flats = set()
    for r in range(len(arr) + 1):
        for sub in itertools.combinations(arr.hyperplanes, r):
            flats.add(rref(RowMatrix(fld, k, tuple(h.form for h in sub))))
    ordered = sorted(flats, key=lambda f: (len(f.rows), f.rows))
    mu: dict[tuple, int] = {}
    for x in ordered:
        below = [y for y in ordered if len(y.rows) < len(x.rows) and row_space_contains(x, y)]
        mu[x.rows] = 1 if not x.rows else -sum(mu[y.rows] for y in below)
    return mu


@dataclass(frozen=True)
class SignedCharPoly:
    """chi(t) = sum_i (-1)^i coeffs[i] t^(k-i) with every coeffs[i] >= 0."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs or self.coeffs[0] != 1:
            raise VerificationError(f"characteristic polynomial not monic: {self.coeffs}")
        if any(c < 0 for c in self.coeffs):
            raise VerificationError(f"coefficients not of alternating sign: {self.coeffs}")

    @property
    def k(self) -> int:
        return len(self.coeffs) - 1

    def signed(self) -> list[int]:
        """Coefficients of t^k, t^(k-1), ..., t^0 with signs."""
        return [(-1) ** i * c for i, c in enumerate(self.coeffs)]

    def __call__(self, t: int) -> int:
        acc = 0
        for c in self.signed():
            acc = acc * t + c
        return acc

    def __str__(self):
        k = self.k
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            e = k - i
            mono = "" if e == 0 else ("t" if e == 1 else f"t^{e}")
            body = f"{c}{mono}" if (c != 1 or e == 0) else mono
            terms.append(("-" if i % 2 else "+", body))
        out = terms[0][1] if terms[0][0] == "+" else "-" + terms[0][1]
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def char_poly(lat: FlatLattice) -> SignedCharPoly:
    k = lat.arrangement.k
    signed = [0] * (k + 1)
    for f, m in zip(lat.flats, lat.mobius):
        signed[f.codim] += m
    return SignedCharPoly(tuple((-1) ** i * c for i, c in enumerate(signed)))


def point_count(chi: SignedCharPoly, q: int) -> int:
    """Number of F_q points off the arrangement, i.e. chi(q)."""
    if not isinstance(q, int) or q < 1:
        raise InputError(f"q must be a positive integer, got {q!r}")
    return chi(q)


def betti_numbers(chi: SignedCharPoly) -> list[int]:
    return list(chi.coeffs)


def complement_count(arr: Arrangement, q: int) -> int:
    """Points of F_p^k (q = p) off every hyperplane, by direct enumeration."""
    fld = arr.field
    if fld.is_generic:
        from .linalg import is_prime

        if not is_prime(q):
            raise InputError("generic arrangements are counted over a prime field here")
        p = q
    else:
        p = fld.p
        if q != p:
            raise InputError("direct complement count supports q = p only")
    forms = []
    for h in arr.hyperplanes:
        if fld.is_generic:
            f = [x.numerator * pow(x.denominator, -1, p) % p for x in h.form]
        else:
            f = list(h.form)
        forms.append(f)
    count = 0
    for x in itertools.product(range(p), repeat=arr.k):
        if all(sum(a * b for a, b in zip(f, x)) % p for f in forms):
            count += 1
    return count
