import json
import random
from math import comb

import pytest

from setfree.arrangement import Hyperplane, build_lattice, char_poly
from setfree.family import (
    BUILTIN_NAMES,
    SchemaError,
    builtin,
    expand,
    hyperplane_count_formula,
    load_schema,
    make_schema,
    schema_from_dict,
    schema_to_dict,
    validate_schema,
)
from setfree.linalg import FieldSpec


def forms(arr):
    return {h.form for h in arr.hyperplanes}


def test_set_schema_valid(set3):
    rep = validate_schema(set3)
    assert rep.valid
    assert set(rep.axioms) == {"a", "b", "c", "d"}


def test_missing_difference_generator():
    with pytest.raises(SchemaError, match="axiom \\(a\\)"):
        make_schema(3, [[1, 1, 1]], ensure_distinct=False)
    s = make_schema(3, [[1, 1, 1]], ensure_distinct=True)
    assert validate_schema(s).valid
    assert len(s.generators) == 2


def test_validate_reports_missing_difference():
    from setfree.family import GeneratorForm, GeneratorSchema

    s = GeneratorSchema(FieldSpec(3), (GeneratorForm((1, 1, 1)),), "bare")
    rep = validate_schema(s)
    assert not rep.valid
    assert "VIOLATED" in rep.axioms["a"]


def test_reduction_mod_2():
    s = make_schema(2, [[1, -1], [1, 1, -1]])
    assert validate_schema(s).valid
    assert [g.coeffs for g in s.generators] == [(1, 1), (1, 1, 1)]


def test_vanishing_coefficient_is_degenerate():
    with pytest.raises(SchemaError, match="vanishing"):
        make_schema(3, [[1, -1], [1, 1, 3]])


def test_expand_examples(set3):
    assert forms(expand(set3, 2)) == {(1, 2)}
    assert forms(expand(set3, 3)) == {(1, 2, 0), (1, 0, 2), (0, 1, 2), (1, 1, 1)}
    assert len(expand(set3, 4)) == 10
    assert len(expand(set3, 0)) == 0 and len(expand(set3, 1)) == 0


def test_count_formula_examples(set3, sumfree5):
    assert hyperplane_count_formula(set3, 5) == 20
    assert hyperplane_count_formula(set3, 1) == 0
    assert hyperplane_count_formula(sumfree5, 3) == 6


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_count_formula_matches_expansion(name):
    s = builtin(name)
    for k in range(9):
        assert len(expand(s, k)) == hyperplane_count_formula(s, k)


def test_set_count_is_binomial_sum(set3):
    for k in range(9):
        assert len(expand(set3, k)) == comb(k, 2) + comb(k, 3)


@pytest.mark.parametrize("name", BUILTIN_NAMES + ("set-generic",))
def test_functoriality(name):
    s = builtin("set", "generic") if name == "set-generic" else builtin(name)
    for k in range(7):
        big = expand(s, k)
        for j in range(k + 1):
            truncated = {h.form[:j] for h in big.hyperplanes if all(c == 0 for c in h.form[j:])}
            assert truncated == forms(expand(s, j))


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_symmetry(name):
    s = builtin(name)
    rng = random.Random(7)
    for k in range(1, 7):
        arr = expand(s, k)
        for _ in range(20):
            perm = list(range(k))
            rng.shuffle(perm)
            assert arr.permuted(perm) == arr


def test_monotone_counting_consequence(set3):
    chis = [char_poly(build_lattice(expand(set3, k))) for k in range(6)]
    for k in range(1, 6):
        for q in (3, 9):
            assert chis[k](q) <= q * chis[k - 1](q)


def test_multiple_constraints():
    s = make_schema(5, [[1, -1], [1, 1, 1], [1, 1, -1]], "two")
    assert len(expand(s, 3)) == 3 + 1 + 3
    assert validate_schema(s).valid


def test_duplicate_generators_deduplicated():
    s = make_schema(3, [[1, -1], [2, 1], [1, 1, 1], [2, 2, 2]])
    assert len(s.generators) == 2


def test_schema_file_roundtrip(tmp_path, set3):
    path = tmp_path / "set.json"
    path.write_text(json.dumps({"name": "set", "p": 3, "generators": [[1, -1], [1, 1, 1]]}))
    s = load_schema(path)
    assert s == set3
    assert schema_from_dict(schema_to_dict(s)) == s


def test_schema_file_generic_and_flag(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"name": "g", "p": "generic", "generators": [[1, 1, 1]], "ensure_distinct": True}))
    s = load_schema(path)
    assert s.field.is_generic and len(s.generators) == 2
    path.write_text(json.dumps({"name": "g", "p": 3, "generators": [[1, 1, 1]], "ensure_distinct": False}))
    with pytest.raises(SchemaError):
        load_schema(path)


@pytest.mark.parametrize(
    "doc",
    [
        {"p": 4, "generators": [[1, -1]]},
        {"p": 3},
        {"p": 3, "generators": [[1, "x"]]},
        {"p": 3, "generators": [[1, -1]], "extra": 1},
        {"p": 3, "generators": [[1, -1]], "ensure_distinct": "yes"},
        {"p": 3, "generators": []},
        [1, 2],
    ],
)
def test_bad_schema_documents(doc):
    from setfree.linalg import InputError

    with pytest.raises(InputError):
        schema_from_dict(doc)


def test_yaml_schema(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text("name: sf\np: 7\ngenerators:\n  - [1, 1, -1]\n")
    s = load_schema(path)
    assert s.field.p == 7 and len(s.generators) == 2


def test_unknown_builtin():
    with pytest.raises(SchemaError):
        builtin("nope")


def test_hyperplane_scaling_identity():
    fld = FieldSpec(3)
    assert Hyperplane.make(fld, (1, -1)) == Hyperplane.make(fld, (-1, 1))
