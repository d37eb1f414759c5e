"""Exact counts of SET-free and other constraint-avoiding subsets of F_p^n.

Avoiding k-subsets are complements of a hyperplane arrangement in k
variables; this package builds the arrangement from a generator schema,
computes its lattice of flats and characteristic polynomial, checks the
result against brute-force enumeration, and fits the coefficients as
polynomials in k.
"""
from .arrangement import (
    Arrangement,
    BudgetExceeded,
    FlatLattice,
    Hyperplane,
    SignedCharPoly,
    VerificationError,
    betti_numbers,
    build_lattice,
    char_poly,
    point_count,
)
from .coeffpoly import BinomialPoly, CoeffSeries, extract_series, fit_and_verify, fit_binomial
from .counting import CountQuery, count_avoiders, estimate_probability, is_avoiding
from .family import GeneratorSchema, expand, hyperplane_count_formula, load_schema, make_schema, set_family, sumfree_family, validate_schema
from .linalg import FieldSpec, InputError, RowMatrix, rank, row_space_contains, rref

__version__ = "0.1.0"

__all__ = [
    "Arrangement", "BinomialPoly", "BudgetExceeded", "CoeffSeries", "CountQuery", "FieldSpec", "FlatLattice",
    "GeneratorSchema", "Hyperplane", "InputError", "RowMatrix", "SignedCharPoly", "VerificationError",
    "betti_numbers", "build_lattice", "char_poly", "count_avoiders", "estimate_probability", "expand",
    "extract_series", "fit_and_verify", "fit_binomial", "hyperplane_count_formula", "is_avoiding", "load_schema",
    "make_schema", "point_count", "rank", "row_space_contains", "rref", "set_family", "sumfree_family",
    "validate_schema",
]
