"""Generator schemas for FI-CHA constraint families and their expansion to arrangements.

A schema lists generator forms ``c_1 x_{a_1} + ... + c_r x_{a_r}`` over a
fixed field.  Expanding to ``k`` variables places each generator on every
injection of its slots into ``{1..k}``; the resulting set of hyperplanes is
closed under coordinate permutations and coordinate-forgetting pullbacks.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .arrangement import Arrangement, Hyperplane
from .linalg import FieldSpec, InputError, normalize


class SchemaError(InputError):
    """A schema violates one of the FI-CHA axioms or is degenerate."""


@dataclass(frozen=True)
class GeneratorForm:
    coeffs: tuple  # field elements, all nonzero, first equal to 1

    @property
    def arity(self) -> int:
        return len(self.coeffs)

    def slot_images(self, fld: FieldSpec, k: int) -> set[Hyperplane]:
        """Distinct hyperplanes obtained from all injections of the slots into k variables."""
        out = set()
        zero = fld.elem(0)
        for idx in itertools.permutations(range(k), self.arity):
            v = [zero] * k
            for c, j in zip(self.coeffs, idx):
                v[j] = c
            out.add(Hyperplane.make(fld, v))
        return out

    def canonical_key(self, fld: FieldSpec) -> tuple:
        """Identity up to scalar and slot permutation."""
        return min(normalize(fld, perm) for perm in itertools.permutations(self.coeffs))


DIFFERENCE = (1, -1)


@dataclass(frozen=True)
class GeneratorSchema:
    field: FieldSpec
    generators: tuple[GeneratorForm, ...]
    name: str = "custom"

    @property
    def p(self) -> int | None:
        return self.field.p

    def coefficient_sums_vanish(self) -> bool:
        """Every generator's coefficients sum to zero, so translations preserve avoidance."""
        return all(sum(g.coeffs) == 0 if self.field.is_generic else sum(g.coeffs) % self.field.p == 0
                   for g in self.generators)


@dataclass
class ValidationReport:
    schema_name: str
    valid: bool
    axioms: dict = field(default_factory=dict)
    problems: list = field(default_factory=list)

    def __str__(self):
        lines = [f"schema {self.schema_name}: {'valid' if self.valid else 'INVALID'}"]
        for ax, msg in self.axioms.items():
            lines.append(f"  axiom ({ax}): {msg}")
        for p in self.problems:
            lines.append(f"  problem: {p}")
        return "\n".join(lines)


def _difference_key(fld: FieldSpec) -> tuple:
    return GeneratorForm(fld.vector(DIFFERENCE)).canonical_key(fld)


def make_schema(
    p: int | str | None,
    generators: Sequence[Sequence[int]],
    name: str = "custom",
    ensure_distinct: bool = True,
) -> GeneratorSchema:
    """Build a schema from integer coefficient lists.

    Coefficients are reduced mod p.  A coefficient vanishing there is a
    degenerate generator and raises :class:`SchemaError`.  When
    ``ensure_distinct`` is set the difference generator is added if absent;
    otherwise its absence is an axiom (a) violation.
    """
    fld = p if isinstance(p, FieldSpec) else FieldSpec.parse("generic" if p is None else p)
    if not generators:
        raise SchemaError("schema has no generators")
    forms = []
    seen = set()
    for raw in generators:
        if not raw:
            raise SchemaError("empty generator")
        v = fld.vector(raw)
        if any(x == 0 for x in v):
            raise SchemaError(f"generator {list(raw)} has a coefficient vanishing in {fld}")
        g = GeneratorForm(normalize(fld, v))
        key = g.canonical_key(fld)
        if key not in seen:
            seen.add(key)
            forms.append(g)
    dkey = _difference_key(fld)
    if dkey not in seen:
        if not ensure_distinct:
            raise SchemaError("axiom (a) violated: difference generator x1 - x2 missing")
        forms.insert(0, GeneratorForm(normalize(fld, fld.vector(DIFFERENCE))))
    return GeneratorSchema(fld, tuple(forms), name)


def validate_schema(s: GeneratorSchema) -> ValidationReport:
    fld = s.field
    rep = ValidationReport(s.name, True)
    keys = [g.canonical_key(fld) for g in s.generators]
    if _difference_key(fld) in keys:
        rep.axioms["a"] = "difference generator x1 - x2 present"
    else:
        rep.valid = False
        rep.axioms["a"] = "VIOLATED: difference generator x1 - x2 missing"
    rep.axioms["b"] = "holds by construction: expansion takes the orbit under all slot injections"
    rep.axioms["c"] = "holds by construction: forms on the first j coordinates are exactly the expansion at j"
    rep.axioms["d"] = f"holds: {len(s.generators)} generator(s)"
    for g in s.generators:
        if any(fld.elem(c) == 0 for c in g.coeffs):
            rep.valid = False
            rep.problems.append(f"generator {g.coeffs} has a vanishing coefficient")
        if g.coeffs[0] != 1:
            rep.valid = False
            rep.problems.append(f"generator {g.coeffs} is not scaled to leading coefficient 1")
    if len(set(keys)) != len(keys):
        rep.valid = False
        rep.problems.append("duplicate generators up to scalar and slot order")
    return rep


def expand(s: GeneratorSchema, k: int) -> Arrangement:
    if k < 0:
        raise InputError("k must be non-negative")
    hs: set[Hyperplane] = set()
    for g in s.generators:
        if g.arity <= k:
            hs |= g.slot_images(s.field, k)
    return Arrangement(s.field, k, tuple(sorted(hs)))


def _falling(n: int, r: int) -> int:
    out = 1
    for i in range(r):
        out *= n - i
    return out


def _hyperplanes_per_support(g: GeneratorForm, fld: FieldSpec) -> int:
    """Distinct hyperplanes one generator yields on a fixed set of ``arity`` coordinates.

    Equals r! divided by the size of the stabilizer of the form up to scalar.
    """
    r = g.arity
    return len(g.slot_images(fld, r))


def hyperplane_count_formula(s: GeneratorSchema, k: int) -> int:
    """Predicted |expand(s, k)|: sum over generators of C(k, r) * (orbit size on r slots).

    Assumes distinct generators never produce the same hyperplane, which
    holds when their canonical keys differ (the key determines the form
    on its support up to slot order).
    """
    from math import comb

    total = 0
    for g in s.generators:
        total += comb(k, g.arity) * _hyperplanes_per_support(g, s.field)
    return total


def _p_from_json(value):
    if isinstance(value, str):
        return FieldSpec.parse(value)
    if isinstance(value, int) and not isinstance(value, bool):
        return FieldSpec.parse(value)
    raise SchemaError(f"field 'p' must be an integer or 'generic', got {value!r}")


def schema_from_dict(doc: dict) -> GeneratorSchema:
    if not isinstance(doc, dict):
        raise SchemaError("schema document must be a mapping")
    unknown = set(doc) - {"name", "p", "generators", "ensure_distinct"}
    if unknown:
        raise SchemaError(f"unknown schema fields: {sorted(unknown)}")
    if "p" not in doc or "generators" not in doc:
        raise SchemaError("schema needs fields 'p' and 'generators'")
    gens = doc["generators"]
    if not isinstance(gens, list) or not all(
        isinstance(g, list) and all(isinstance(c, int) and not isinstance(c, bool) for c in g) for g in gens
    ):
        raise SchemaError("'generators' must be a list of integer lists")
    ensure = doc.get("ensure_distinct", True)
    if not isinstance(ensure, bool):
        raise SchemaError("'ensure_distinct' must be a boolean")
    return make_schema(_p_from_json(doc["p"]), gens, str(doc.get("name", "custom")), ensure)


def load_schema(path: str | Path) -> GeneratorSchema:
    """Read a schema file (JSON; YAML too when the suffix says so)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix in (".yaml", ".yml"):
        import yaml

        doc = yaml.safe_load(text)
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: {e}") from None
    return schema_from_dict(doc)


def schema_to_dict(s: GeneratorSchema) -> dict:
    def as_int(c):
        return int(c) if not s.field.is_generic else (int(c) if c.denominator == 1 else str(c))

    return {
        "name": s.name,
        "p": "generic" if s.field.is_generic else s.field.p,
        "generators": [[as_int(c) for c in g.coeffs] for g in s.generators],
        "ensure_distinct": True,
    }


def set_family(p: int | str | None = 3) -> GeneratorSchema:
    """x + y + z = 0 together with distinctness; the SET game when p = 3."""
    return make_schema(p, [[1, -1], [1, 1, 1]], "set")


def sumfree_family(p: int | str | None) -> GeneratorSchema:
    """x + y = z together with distinctness."""
    return make_schema(p, [[1, -1], [1, 1, -1]], f"sumfree-{p}")


BUILTIN_NAMES = ("set", "sumfree-2", "sumfree-3", "sumfree-5", "sumfree-7")


def builtin(name: str, p: int | str | None = None) -> GeneratorSchema:
    """Look up a built-in family; ``p`` overrides the family's own field."""
    if name == "set":
        return set_family(3 if p is None else p)
    if name.startswith("sumfree"):
        tail = name[len("sumfree"):].lstrip("-")
        if p is None:
            if not tail:
                raise SchemaError("sumfree needs a prime, e.g. sumfree-5")
            p = int(tail)
        return sumfree_family(p)
    raise SchemaError(f"unknown family {name!r}; built-ins are {', '.join(BUILTIN_NAMES)}")
