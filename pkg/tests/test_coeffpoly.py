from fractions import Fraction
from math import comb

import pytest
from hypothesis import given
from hypothesis import strategies as st

from setfree.arrangement import SignedCharPoly, VerificationError
from setfree.coeffpoly import (
    PUBLISHED_EXPANSIONS,
    BinomialPoly,
    CoeffSeries,
    DegreeBoundViolation,
    compare_fields,
    extract_series,
    fit_and_verify,
    fit_binomial,
    forward_differences,
)
from setfree.linalg import FieldSpec, InputError

F3 = FieldSpec(3)


def series(i, vals):
    return CoeffSeries(i, F3, tuple(vals))


def test_forward_difference_table():
    vals = [0, 0, 1, 4, 10]
    d1 = [b - a for a, b in zip(vals, vals[1:])]
    d2 = [b - a for a, b in zip(d1, d1[1:])]
    d3 = [b - a for a, b in zip(d2, d2[1:])]
    assert (d1, d2, d3) == ([0, 1, 3, 6], [1, 2, 3], [1, 1])
    assert forward_differences(vals) == [0, 0, 1, 1, 0]


def test_fit_constant():
    p = fit_binomial(series(0, [1, 1, 1, 1]), 0)
    assert p.coeffs == (1,) and p.degree == 0 and str(p) == "1"


def test_fit_c1():
    p = fit_binomial(series(1, [0, 0, 1, 4, 10]), 3)
    assert p.coeffs == (0, 0, 1, 1)
    assert str(p) == "C(k,2) + C(k,3)"


def test_fit_needs_enough_points():
    with pytest.raises(InputError):
        fit_binomial(series(2, [0, 0, 0, 3]), 6)


def test_degree_violation_carries_first_k():
    # k^3 is not of degree <= 2; first residual appears at k = 3
    with pytest.raises(DegreeBoundViolation) as e:
        fit_binomial(series(1, [k**3 for k in range(6)]), 2)
    assert e.value.k == 3


def test_extract_series(set_polys):
    assert extract_series(set_polys, 0).values == (1,) * 8
    assert extract_series(set_polys, 1).values[:5] == (0, 0, 1, 4, 10)
    assert extract_series(set_polys, 2).values[2:4] == (0, 3)


def test_extract_series_gap():
    polys = {0: SignedCharPoly((1,)), 2: SignedCharPoly((1, 1, 0))}
    with pytest.raises(InputError):
        extract_series(polys, 1)


def test_series_invariants():
    with pytest.raises(VerificationError):
        CoeffSeries(0, F3, (1, 2))
    with pytest.raises(VerificationError):
        CoeffSeries(1, F3, (0, -1))


def test_vanishing_head(set_polys):
    for i in range(8):
        s = extract_series(set_polys, i)
        assert all(v == 0 for v in s.values[:i])


def test_non_integer_coordinates_rejected():
    with pytest.raises(VerificationError):
        BinomialPoly((Fraction(1, 2),))


@given(st.lists(st.integers(-50, 50), max_size=8))
def test_basis_round_trip(coeffs):
    p = BinomialPoly(tuple(coeffs))
    mono = p.to_monomial()
    assert BinomialPoly.from_monomial(mono) == p
    for k in range(-3, 12):
        assert sum(c * k**e for e, c in enumerate(mono)) == p(k)


def test_monomial_example():
    # C(k,2) + C(k,3) = (k^3 - k) / 6
    assert BinomialPoly((0, 0, 1, 1)).to_monomial() == [0, Fraction(-1, 6), 0, Fraction(1, 6)]


def test_fit_and_verify_c1(set3, set_polys):
    rep = fit_and_verify(set3, 1, 4, 5, charpolys=set_polys)
    assert rep.ok
    assert rep.fitted.coeffs == (0, 0, 1, 1)
    assert rep.holdout_predicted == rep.holdout_actual == 20


def test_fit_and_verify_c0(set3, set_polys):
    rep = fit_and_verify(set3, 0, 6, 7, charpolys=set_polys)
    assert rep.ok and rep.fitted.coeffs == (1,)


def test_c1_identity_all_k(set3, set_polys):
    rep = fit_and_verify(set3, 1, 7, charpolys=set_polys)
    assert all(rep.fitted(k) == comb(k, 2) + comb(k, 3) for k in range(30))


def test_fit_and_verify_c2_with_reference(set3, set_polys):
    rep = fit_and_verify(set3, 2, 6, 7, reference=PUBLISHED_EXPANSIONS[2], charpolys=set_polys)
    assert rep.ok and rep.fitted.degree <= 6
    assert rep.holdout_match
    cmp_ = rep.comparison
    assert not cmp_.agrees
    assert cmp_.first_disagreement == 3
    assert (3, 3, 2) in cmp_.values
    differing = [j for j, a, b in cmp_.terms if a != b]
    assert differing == [3]


def test_fit_and_verify_holdout_must_exceed(set3):
    with pytest.raises(InputError):
        fit_and_verify(set3, 1, 4, 4)


def test_underdetermined_fit_reports_failure(set3, set_polys):
    rep = fit_and_verify(set3, 3, 5, 6, charpolys=set_polys)
    assert rep.holdout_match is False
    assert not rep.ok


def test_compare_fields_k3():
    cmp_ = compare_fields([[1, -1], [1, 1, 1]], 3, ["3", "5", "generic"])
    assert [c.coeffs for _, _, c in cmp_.rows] == [(1, 4, 3, 0), (1, 4, 5, 2), (1, 4, 5, 2)]
    assert cmp_.differs_from_generic() == ["F_3"]
    assert not cmp_.all_equal
