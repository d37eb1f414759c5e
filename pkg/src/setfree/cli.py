"""Command-line interface.

Exit codes: 0 success, 1 failed mathematical check, 2 invalid input,
3 work budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

from .arrangement import BudgetExceeded, VerificationError, betti_numbers, build_lattice, char_poly, point_count
from .coeffpoly import PUBLISHED_EXPANSIONS, FitReport, char_polys, compare_fields, fit_and_verify
from .counting import DEFAULT_BUDGET, CountQuery, count_avoiders, estimate_probability
from .family import BUILTIN_NAMES, GeneratorSchema, builtin, expand, load_schema, schema_to_dict, validate_schema
from .linalg import FieldSpec, InputError

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_MAX_FLATS = 2_000_000
SAFE_INT = 2**53


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def jnum(x: int):
    """JSON-safe exact integer: native when small, decimal string otherwise."""
    return x if -SAFE_INT < x < SAFE_INT else str(x)


def resolve_schema(args) -> GeneratorSchema:
    char = getattr(args, "char", None)
    if args.schema:
        s = load_schema(args.schema)
        if char is not None:
            doc = schema_to_dict(s)
            doc["p"] = char
            from .family import schema_from_dict

            s = schema_from_dict(doc)
        return s
    return builtin(args.family, char)


def emit(args, doc: dict, human: str, csv_rows: list[list] | None = None) -> None:
    if args.format == "json":
        print(json.dumps(doc, indent=2, sort_keys=False))
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in csv_rows or []:
            w.writerow(row)
        sys.stdout.write(buf.getvalue())
    else:
        print(human)


def _query(args, **extra) -> dict:
    q = {"command": args.command}
    q.update(extra)
    return q


# -- chi ---------------------------------------------------------------------


def cmd_chi(args) -> int:
    s = resolve_schema(args)
    arr = expand(s, args.k)
    lat = build_lattice(arr, args.max_flats)
    chi = char_poly(lat)
    lat.check_sign_condition()
    by_codim = lat.counts_by_codim()
    checks = {
        "monic": chi.coeffs[0] == 1,
        "c1_equals_hyperplane_count": chi.coeffs[1] == len(arr) if args.k >= 1 else True,
        "sign_condition": True,
    }
    doc = {
        "query": _query(args, family=s.name, field=str(s.field), k=args.k),
        "result": {
            "chi": str(chi),
            "coefficients": [jnum(c) for c in chi.coeffs],
            "betti_numbers": [jnum(c) for c in betti_numbers(chi)],
            "hyperplanes": len(arr),
            "flats": len(lat),
            "flats_by_codim": by_codim,
        },
        "checks": checks,
    }
    human = "\n".join(
        [
            f"family {s.name} over {s.field}, k = {args.k}",
            f"hyperplanes: {len(arr)}",
            f"chi(t) = {chi}",
            f"betti numbers: {', '.join(map(str, betti_numbers(chi)))}",
            f"{len(lat)} flats; by codimension: {', '.join(map(str, by_codim))}",
        ]
    )
    rows = [["k", "field", "flats", *[f"c_{i}" for i in range(args.k + 1)]], [args.k, str(s.field), len(lat), *chi.coeffs]]
    emit(args, doc, human, rows)
    return EXIT_OK if all(checks.values()) else EXIT_CHECK


# -- count -------------------------------------------------------------------


def cmd_count(args) -> int:
    s = resolve_schema(args)
    q = CountQuery(s, args.n, args.k, ordered=args.ordered, budget=args.budget)
    res = count_avoiders(q, threads=args.threads)
    checks = {}
    code = EXIT_OK
    lines = [
        f"family {s.name} over {s.field}, n = {args.n} (q = {q.q}), k = {args.k}",
        f"{'ordered' if args.ordered else 'unordered'} count: {res.value}",
        f"elapsed: {res.elapsed:.3f}s",
    ]
    if args.verify:
        chi = char_poly(build_lattice(expand(s, args.k), args.max_flats))
        val = point_count(chi, q.q)
        checks["chi_matches_oracle"] = val == res.ordered
        lines.append(f"chi(q) = {val} [{'match' if val == res.ordered else 'MISMATCH'}] with chi(t) = {chi}")
        if val != res.ordered:
            code = EXIT_CHECK
    doc = {
        "query": _query(args, family=s.name, field=str(s.field), n=args.n, k=args.k,
                        mode="ordered" if args.ordered else "unordered", budget=args.budget),
        "result": {"value": jnum(res.value), "ordered": jnum(res.ordered), "unordered": jnum(res.unordered),
                   "q": jnum(q.q)},
        "checks": checks,
    }
    rows = [["n", "k", "q", "mode", "value"], [args.n, args.k, q.q, "ordered" if args.ordered else "unordered", res.value]]
    emit(args, doc, "\n".join(lines), rows)
    return code


# -- coeffs ------------------------------------------------------------------


def _report_lines(rep: FitReport) -> list[str]:
    i = rep.series.i
    out = [f"c_{i}(k) for k = 0..{rep.series.kmax}: {', '.join(map(str, rep.series.values))}"]
    if rep.failure is not None:
        out.append(f"degree bound violated: {rep.failure}")
        return out
    out.append(f"c_{i}(k) = {rep.fitted}")
    out.append(f"degree {rep.fitted.degree} (allowed <= {rep.max_degree_allowed}), fitted on k <= {rep.k_fit_max}")
    if rep.k_fit_max < rep.max_degree_allowed:
        out.append(f"note: {rep.k_fit_max + 1} points cannot pin a degree-{rep.max_degree_allowed} polynomial")
    if rep.holdout_k is not None:
        status = "ok" if rep.holdout_match else "FAILED"
        out.append(
            f"holdout k = {rep.holdout_k}: predicted {rep.holdout_predicted}, computed {rep.holdout_actual} [{status}]"
        )
    return out


def cmd_coeffs(args) -> int:
    s = resolve_schema(args)
    if args.holdout is not None and args.holdout <= args.kmax:
        raise InputError("--holdout must exceed --kmax")
    reference = PUBLISHED_EXPANSIONS.get(args.i) if args.compare_paper else None
    if args.compare_paper and reference is None:
        raise InputError(f"no published expansion for i = {args.i}; available: {sorted(PUBLISHED_EXPANSIONS)}")
    top = args.kmax if args.holdout is None else args.holdout
    polys = char_polys(s, top, args.max_flats, args.threads)
    rep = fit_and_verify(s, args.i, args.kmax, args.holdout, reference=reference, charpolys=polys)
    lines = [f"family {s.name} over {s.field}"] + _report_lines(rep)
    result = {
        "series": [jnum(v) for v in rep.series.values],
        "fitted": None if rep.fitted is None else str(rep.fitted),
        "binomial_coefficients": None if rep.fitted is None else [jnum(a) for a in rep.fitted.coeffs],
        "degree": None if rep.fitted is None else rep.fitted.degree,
        "max_degree_allowed": rep.max_degree_allowed,
        "holdout_k": rep.holdout_k,
        "holdout_predicted": None if rep.holdout_predicted is None else jnum(rep.holdout_predicted),
        "holdout_actual": None if rep.holdout_actual is None else jnum(rep.holdout_actual),
    }
    csv_rows = [["k", f"c_{args.i}"]] + [[k, v] for k, v in enumerate(rep.series.values)]
    if rep.comparison is not None:
        cmp_ = rep.comparison
        generic_vals = None
        if args.generic_kmax >= 0 and not s.field.is_generic:
            gschema = builtin(args.family, "generic") if not args.schema else None
            if gschema is not None:
                gpolys = char_polys(gschema, min(args.generic_kmax, top), args.max_flats, args.threads)
                generic_vals = [gpolys[k].coeffs[args.i] if args.i <= k else 0 for k in sorted(gpolys)]
        lines.append("")
        lines.append(f"comparison with published expansion c_{args.i}(k) = {cmp_.reference}")
        lines.append("  term      computed  published")
        for j, a, b in cmp_.terms:
            mark = "" if a == b else "  <-- differs"
            lines.append(f"  C(k,{j})  {a:>9}  {b:>9}{mark}")
        head = "  k   computed  published" + ("  generic" if generic_vals else "")
        lines.append(head)
        for k, a, b in cmp_.values:
            g = f"  {generic_vals[k]:>7}" if generic_vals and k < len(generic_vals) else ""
            mark = "" if a == b else "  <-- differs"
            lines.append(f"  {k:<2}  {a:>9}  {b:>9}{g}{mark}")
        fd = cmp_.first_disagreement
        lines.append("agreement: all terms equal" if cmp_.agrees else f"disagreement: first differing value at k = {fd}")
        result["comparison"] = {
            "reference": str(cmp_.reference),
            "terms": [{"j": j, "computed": jnum(a), "reference": jnum(b), "equal": a == b} for j, a, b in cmp_.terms],
            "values": [{"k": k, "computed": jnum(a), "reference": jnum(b), "equal": a == b} for k, a, b in cmp_.values],
            "first_disagreement_k": fd,
            "agrees": cmp_.agrees,
        }
        if generic_vals:
            result["comparison"]["generic_values"] = [jnum(v) for v in generic_vals]
        csv_rows = [["k", "computed", "published"]] + [[k, a, b] for k, a, b in cmp_.values]
    doc = {
        "query": _query(args, family=s.name, field=str(s.field), i=args.i, kmax=args.kmax, holdout=args.holdout),
        "result": result,
        "checks": {"degree_bound": rep.failure is None, "holdout": rep.holdout_match},
    }
    emit(args, doc, "\n".join(lines), csv_rows)
    return EXIT_OK if rep.ok else EXIT_CHECK


# -- prob --------------------------------------------------------------------


def cmd_prob(args) -> int:
    s = resolve_schema(args)
    est = estimate_probability(s, args.n, args.k, args.samples, args.seed, args.threads)
    human = "\n".join(
        [
            f"family {s.name} over {s.field}, n = {args.n}, k = {args.k}",
            f"estimate: {est.estimate:.6f} +/- {est.stderr:.6f}",
            f"samples: {est.samples}, avoiding: {est.hits}, seed: {est.seed}",
        ]
    )
    doc = {
        "query": _query(args, family=s.name, field=str(s.field), n=args.n, k=args.k, samples=args.samples,
                        seed=args.seed),
        "result": {"estimate": est.estimate, "stderr": est.stderr, "hits": est.hits, "samples": est.samples},
        "checks": {},
    }
    rows = [["n", "k", "samples", "seed", "hits", "estimate", "stderr"],
            [args.n, args.k, est.samples, est.seed, est.hits, repr(est.estimate), repr(est.stderr)]]
    emit(args, doc, human, rows)
    return EXIT_OK


# -- table -------------------------------------------------------------------


def table_rows(s: GeneratorSchema, k_max: int, n_max: int, budget: int, max_flats: int | None, threads: int = 1):
    """One record per (k, n): chi coefficients, chi(q), oracle count if feasible."""
    if s.field.is_generic:
        raise InputError("table needs a prime field")
    p = s.field.p
    polys = char_polys(s, k_max, max_flats, threads)
    out = []
    for k in range(k_max + 1):
        chi = polys[k]
        for n in range(1, n_max + 1) if n_max >= 1 else [None]:
            rec = {"k": k, "n": n, "q": None, "chi_eval": None, "oracle_count": None, "match": None,
                   "coefficients": list(chi.coeffs)}
            if n is not None:
                q = p**n
                rec["q"] = q
                rec["chi_eval"] = point_count(chi, q)
                try:
                    rec["oracle_count"] = count_avoiders(CountQuery(s, n, k, True, budget), threads).ordered
                    rec["match"] = "match" if rec["oracle_count"] == rec["chi_eval"] else "mismatch"
                except BudgetExceeded:
                    rec["match"] = "skipped"
            out.append(rec)
    return out


def cmd_table(args) -> int:
    s = resolve_schema(args)
    recs = table_rows(s, args.kmax, args.nmax, args.budget, args.max_flats, args.threads)
    header = ["k", "n", "q", "chi_eval", "oracle_count", "match"] + [f"c_{i}" for i in range(args.kmax + 1)]

    def cell(v):
        return "" if v is None else v

    rows = [header]
    for r in recs:
        cs = r["coefficients"]
        rows.append([cell(r[h]) for h in header[:6]] + cs + [""] * (args.kmax + 1 - len(cs)))
    human = io.StringIO()
    widths = [max(len(str(row[c])) for row in rows) for c in range(len(header))]
    for row in rows:
        human.write("  ".join(str(v).rjust(w) for v, w in zip(row, widths)).rstrip() + "\n")
    doc = {
        "query": _query(args, family=s.name, field=str(s.field), kmax=args.kmax, nmax=args.nmax, budget=args.budget),
        "result": {
            "rows": [
                {**{h: (jnum(r[h]) if isinstance(r[h], int) else r[h]) for h in header[:6]},
                 "coefficients": [jnum(c) for c in r["coefficients"]]}
                for r in recs
            ]
        },
        "checks": {"all_feasible_rows_match": all(r["match"] in (None, "match", "skipped") for r in recs)},
    }
    emit(args, doc, human.getvalue().rstrip("\n"), rows)
    return EXIT_OK if doc["checks"]["all_feasible_rows_match"] else EXIT_CHECK


# -- compare -----------------------------------------------------------------


def cmd_compare(args) -> int:
    if args.schema:
        gens = schema_to_dict(load_schema(args.schema))["generators"]
    else:
        gens = schema_to_dict(builtin(args.family, "generic"))["generators"]
    fields = [f.strip() for f in args.chars.split(",") if f.strip()]
    for f in fields:
        FieldSpec.parse(f)
    out_rows = []
    lines = []
    records = []
    for k in range(args.kmin, args.k + 1):
        cmp_ = compare_fields(gens, k, fields, args.max_flats)
        diff = cmp_.differs_from_generic()
        lines.append(f"k = {k}")
        for label, nflats, chi in cmp_.rows:
            tag = ""
            if label in diff:
                tag = "  <-- differs from generic"
            lines.append(f"  {label:>8}: {nflats:>7} flats  chi(t) = {chi}{tag}")
            out_rows.append([k, label, nflats, str(chi)])
        lines.append("  all fields agree" if cmp_.all_equal else f"  fields differing from generic: {', '.join(diff) or '-'}")
        records.append({
            "k": k,
            "fields": [{"field": label, "flats": n, "chi": str(c), "coefficients": [jnum(x) for x in c.coeffs]}
                       for label, n, c in cmp_.rows],
            "all_equal": cmp_.all_equal,
            "differs_from_generic": diff,
        })
    doc = {"query": _query(args, generators=gens, fields=fields, k=args.k), "result": {"by_k": records}, "checks": {}}
    emit(args, doc, "\n".join(lines), [["k", "field", "flats", "chi"]] + out_rows)
    return EXIT_OK


# -- validate ----------------------------------------------------------------


def cmd_validate(args) -> int:
    s = resolve_schema(args)
    rep = validate_schema(s)
    doc = {"query": _query(args, family=s.name), "result": {"schema": schema_to_dict(s), "axioms": rep.axioms,
                                                            "problems": rep.problems},
           "checks": {"valid": rep.valid}}
    emit(args, doc, str(rep), [["valid"], [rep.valid]])
    return EXIT_OK if rep.valid else EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--family", default="set", help=f"built-in family: {', '.join(BUILTIN_NAMES)}")
    src.add_argument("--schema", help="path to a JSON (or YAML) schema file")
    common.add_argument("--format", choices=["human", "csv", "json"], default="human")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="oracle work budget in steps")
    common.add_argument("--max-flats", type=int, default=DEFAULT_MAX_FLATS, help="lattice size budget")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)

    def char_opt(p):
        p.add_argument("--char", help="field: a prime p or 'generic' (overrides the family's field)")

    ap = _Parser(prog="setfree", description="Count constraint-avoiding subsets of F_p^n via hyperplane arrangements.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("chi", parents=[common], help="characteristic polynomial of the arrangement A_k")
    p.add_argument("--k", type=int, required=True)
    char_opt(p)
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("count", parents=[common], help="brute-force count of avoiding k-subsets of F_p^n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--ordered", dest="ordered", action="store_true", default=True)
    mode.add_argument("--unordered", dest="ordered", action="store_false")
    p.add_argument("--verify", action="store_true", help="also evaluate chi(p^n) and compare")
    char_opt(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("coeffs", parents=[common], help="fit c_i(k) in the binomial basis")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--kmax", type=int, default=6, help="largest k used for fitting")
    p.add_argument("--holdout", type=int, default=7, help="k predicted but not fitted (-1 to skip)")
    p.add_argument("--compare-paper", action="store_true", help="diff against the published hand-computed expansion")
    p.add_argument("--generic-kmax", type=int, default=5, help="largest k for the generic-field column (-1 to skip)")
    char_opt(p)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("prob", parents=[common], help="Monte Carlo probability that a random k-subset avoids")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    char_opt(p)
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("table", parents=[common], help="chi coefficients and point counts for a range of k, n")
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--nmax", type=int, default=2)
    char_opt(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("compare", parents=[common], help="compare lattices of one family over several fields")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--kmin", type=int, default=None)
    p.add_argument("--chars", default="3,5,7,generic")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", parents=[common], help="check a schema against the FI-CHA axioms")
    char_opt(p)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "holdout", None) is not None and args.holdout < 0:
        args.holdout = None
    if getattr(args, "kmin", 0) is None:
        args.kmin = args.k
    for name in ("k", "n", "i", "kmax", "nmax"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            print(f"setfree: error: --{name} must be non-negative", file=sys.stderr)
            return EXIT_INPUT
    if args.budget <= 0 or args.max_flats <= 0 or args.threads < 1:
        print("setfree: error: --budget, --max-flats and --threads must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except BudgetExceeded as e:
        print(f"setfree: budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except VerificationError as e:
        print(f"setfree: verification failed: {e}", file=sys.stderr)
        return EXIT_CHECK
    except (InputError, OSError) as e:
        print(f"setfree: error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
