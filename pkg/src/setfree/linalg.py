"""Exact row reduction over prime fields F_p and over the rationals.

Matrices are immutable tuples of rows.  Over F_p entries are least
non-negative residues; over Q they are ``fractions.Fraction``.  The
canonical form of a matrix is its reduced row echelon form with unit
pivots and zero rows deleted, so equal row spaces give equal matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

Row = Tuple  # tuple of int (mod p) or Fraction

MAX_PRIME = 2**31 - 1


class InputError(ValueError):
    """Raised on malformed or mismatched input."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Coefficient field: ``FieldSpec(p)`` is F_p, ``FieldSpec(None)`` is Q."""

    p: int | None = None

    def __post_init__(self):
        if self.p is not None:
            if not isinstance(self.p, int) or not is_prime(self.p):
                raise InputError(f"field characteristic must be prime, got {self.p!r}")
            if self.p > MAX_PRIME:
                raise InputError(f"prime {self.p} exceeds word size")

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls(p)

    @classmethod
    def generic(cls) -> "FieldSpec":
        return cls(None)

    @classmethod
    def parse(cls, text) -> "FieldSpec":
        """Parse ``"generic"``/``"0"``/``"q"`` or a prime given as int or str."""
        if isinstance(text, str):
            t = text.strip().lower()
            if t in ("generic", "q", "0", "rational", "rationals"):
                return cls.generic()
            try:
                text = int(t)
            except ValueError:
                raise InputError(f"cannot parse field {text!r}") from None
        if text == 0:
            return cls.generic()
        return cls.prime(text)

    @property
    def is_generic(self) -> bool:
        return self.p is None

    @property
    def characteristic(self) -> int:
        return 0 if self.p is None else self.p

    def __str__(self):
        return "generic" if self.p is None else f"F_{self.p}"

    def elem(self, x):
        """Coerce an integer (or Fraction, over Q) into the field."""
        if self.p is None:
            return Fraction(x)
        if isinstance(x, Fraction):
            if x.denominator % self.p == 0:
                raise InputError(f"{x} is not defined mod {self.p}")
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        return int(x) % self.p

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.p is None:
            return 1 / Fraction(x)
        return pow(int(x), -1, self.p)

    def mul(self, a, b):
        return a * b if self.p is None else a * b % self.p

    def sub(self, a, b):
        return a - b if self.p is None else (a - b) % self.p

    def add(self, a, b):
        return a + b if self.p is None else (a + b) % self.p

    def neg(self, a):
        return -a if self.p is None else (-a) % self.p

    def vector(self, coeffs: Iterable) -> Row:
        return tuple(self.elem(c) for c in coeffs)


@dataclass(frozen=True)
class RowMatrix:
    field: FieldSpec
    ncols: int
    rows: Tuple[Row, ...] = field(default=())

    def __post_init__(self):
        if self.ncols < 0:
            raise InputError("ncols must be non-negative")
        for r in self.rows:
            if len(r) != self.ncols:
                raise InputError(f"row {r!r} has length {len(r)}, expected {self.ncols}")

    @classmethod
    def from_rows(cls, fld: FieldSpec, ncols: int, rows: Iterable[Sequence]) -> "RowMatrix":
        return cls(fld, ncols, tuple(fld.vector(r) for r in rows))

    def __len__(self):
        return len(self.rows)

    def key(self) -> bytes:
        """Serialized form of the matrix; byte-equal iff entry-wise equal."""
        return repr((self.field.characteristic, self.ncols, self.rows)).encode()


def normalize(fld: FieldSpec, v: Sequence) -> Row:
    """Scale ``v`` so that its first nonzero entry is 1.  Zero vector stays zero."""
    for x in v:
        if x != 0:
            s = fld.inv(x)
            return tuple(fld.mul(s, y) for y in v)
    return tuple(v)


def _reduce_against(fld: FieldSpec, v: list, rows: Sequence[Row], pivots: Sequence[int]) -> list:
    # rows are in RREF with unit pivots
    for r, c in zip(rows, pivots):
        f = v[c]
        if f != 0:
            if fld.p is None:
                v = [a - f * b for a, b in zip(v, r)]
            else:
                p = fld.p
                v = [(a - f * b) % p for a, b in zip(v, r)]
    return v


def pivot_columns(rows: Sequence[Row]) -> list[int]:
    out = []
    for r in rows:
        for j, x in enumerate(r):
            if x != 0:
                out.append(j)
                break
    return out


def _insert_row(fld: FieldSpec, rows: list, pivots: list, v: list) -> None:
    """Insert reduced nonzero ``v`` into RREF ``rows`` in place."""
    c = next(j for j, x in enumerate(v) if x != 0)
    s = fld.inv(v[c])
    v = [fld.mul(s, x) for x in v]
    for i, r in enumerate(rows):
        f = r[c]
        if f != 0:
            rows[i] = tuple(fld.sub(a, fld.mul(f, b)) for a, b in zip(r, v))
    pos = 0
    while pos < len(pivots) and pivots[pos] < c:
        pos += 1
    rows.insert(pos, tuple(v))
    pivots.insert(pos, c)


def rref(m: RowMatrix) -> RowMatrix:
    """Canonical reduced row echelon form with zero rows removed."""
    fld = m.field
    rows: list = []
    pivots: list = []
    for r in m.rows:
        v = _reduce_against(fld, list(r), rows, pivots)
        if any(x != 0 for x in v):
            _insert_row(fld, rows, pivots, v)
    return RowMatrix(fld, m.ncols, tuple(rows))


def extend(m: RowMatrix, v: Sequence) -> RowMatrix:
    """RREF of ``m`` (already canonical) with one more row appended."""
    fld = m.field
    rows = list(m.rows)
    pivots = pivot_columns(rows)
    w = _reduce_against(fld, list(v), rows, pivots)
    if not any(x != 0 for x in w):
        return m
    _insert_row(fld, rows, pivots, w)
    return RowMatrix(fld, m.ncols, tuple(rows))


def rank(m: RowMatrix) -> int:
    return len(rref(m).rows)


def in_row_space(a: RowMatrix, v: Sequence) -> bool:
    """Whether vector ``v`` lies in the row space of canonical ``a``."""
    w = _reduce_against(a.field, list(v), a.rows, pivot_columns(a.rows))
    return not any(x != 0 for x in w)


def row_space_contains(a: RowMatrix, b: RowMatrix) -> bool:
    """True iff every row of ``b`` lies in the row space of ``a``.

    ``a`` need not be canonical; it is reduced first when it isn't.
    """
    if a.field != b.field or a.ncols != b.ncols:
        raise InputError("row_space_contains: mismatched field or ncols")
    ca = rref(a)
    return all(in_row_space(ca, r) for r in b.rows)


def null_space(m: RowMatrix) -> list[Row]:
    """A basis of {x : m x = 0} read off the canonical form.

    Over Q the basis vectors are scaled to coprime integers.
    """
    fld = m.field
    c = rref(m)
    pivots = pivot_columns(c.rows)
    free = [j for j in range(m.ncols) if j not in set(pivots)]
    basis = []
    for f in free:
        v = [fld.elem(0)] * m.ncols
        v[f] = fld.elem(1)
        for r, pc in zip(c.rows, pivots):
            v[pc] = fld.neg(r[f])
        if fld.is_generic:
            v = _integer_scaled(v)
        basis.append(tuple(v))
    return basis


def _integer_scaled(v: Sequence[Fraction]) -> list[int]:
    from math import gcd, lcm

    den = lcm(*(Fraction(x).denominator for x in v)) if v else 1
    ints = [int(x * den) for x in v]
    g = gcd(*ints) if ints else 1
    return [x // g for x in ints] if g else ints
