"""Command-line front end.

stdout carries data, stderr carries diagnostics.  Exit codes: 0 success,
1 bad input or resource refusal, 2 a verification check was falsified.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import random
import sys
from fractions import Fraction
from itertools import combinations

from .errors import CimsetError, DomainError, FormatError
from .geometry import (affine_dimension_formula, are_neighbors, facet_system_for_child,
                       neighbors, product_structure, vertex_block_vector)
from .graphs import (enumerate_family, family_from_json, family_to_json,
                     graph_from_json, graph_to_json)
from .imsets import characteristic_imset, coordinate_index, export_full_vector, \
    imset_text_lines
from .learn import compare, k2_forward, k2_backward, optimize_exact
from .oracle import affine_dimension, oracle_adjacent, oracle_facet_check
from .scoring import build_score_table, load_csv, score_table_from_json
from .subsets import bits_of, iter_graded_subsets

VERIFY_FAMILY_MAX = 1 << 12


class _Parser(argparse.ArgumentParser):
    # argparse's default SystemExit(2) collides with the verify-failure code
    def error(self, message):
        raise FormatError(message)


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _load_json(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {what} file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None


def _graph_text(g):
    parts = []
    for i, name in enumerate(g.ordering.names):
        parts.append(f"{name}<-{','.join(g.parent_names(i))}")
    return "; ".join(parts)


def _print_json(obj):
    json.dump(_jsonable(obj), sys.stdout, indent=2)
    sys.stdout.write("\n")


# --- commands -------------------------------------------------------------

def cmd_imset(args) -> int:
    spec = family_from_json(_load_json(args.family, "family"))
    g = graph_from_json(_load_json(args.graph, "graph"))
    idx = coordinate_index(spec)
    c = characteristic_imset(g, idx)
    if args.full:
        vec = export_full_vector(c)
        names = spec.ordering.names
        full = (1 << len(names)) - 1
        labels = [",".join(names[b] for b in bits_of(t))
                  for t in iter_graded_subsets(full) if t.bit_count() >= 2]
        if args.format == "json":
            _print_json({"graph": graph_to_json(g), "full_vector": vec})
        else:
            for lab, v in zip(labels, vec):
                print(f"{lab} {v}")
        return 0
    if args.format == "json":
        coords = [{"child": spec.ordering.names[ch],
                   "subset": list(spec.ordering.names_of_mask(s)),
                   "value": c.bit(ch, s)}
                  for ch, s in idx.coordinates()]
        _print_json({"graph": graph_to_json(g), "coordinates": coords})
    else:
        for line in imset_text_lines(c):
            print(line)
    return 0


def cmd_facets(args) -> int:
    spec = family_from_json(_load_json(args.family, "family"))
    if args.child is not None:
        children = [spec.ordering.index(args.child)]
    else:
        children = [i for i in range(spec.n) if spec.free_mask(i)]
        if not children:
            raise DomainError("family is a single point; no facets to print")
    out = []
    for i in children:
        sysk = facet_system_for_child(spec, i)
        names = sysk.member_names
        rows = []
        emitted = 0
        for s in iter_graded_subsets(sysk.universe, include_empty=True):
            if args.limit is not None and emitted >= args.limit:
                print(f"child {spec.ordering.names[i]}: row limit {args.limit} reached, "
                      f"{sysk.nrows - emitted} rows omitted", file=sys.stderr)
                break
            entries = sorted(sysk.row_sparse(s), key=lambda e: (e[0].bit_count(), e[0]))
            terms = [(tuple(names[b] for b in bits_of(t)), sign) for t, sign in entries]
            rows.append((tuple(names[b] for b in bits_of(s)), terms))
            emitted += 1
        out.append((i, rows))

    if args.format == "json":
        doc = [{"child": spec.ordering.names[i],
                "fixed": list(facet_system_for_child(spec, i).fixed_names),
                "rows": [{"s": list(s), "terms": [
                    {"subset": list(t), "coef": sign} for t, sign in terms]}
                    for s, terms in rows]}
               for i, rows in out]
        _print_json(doc)
    else:
        for i, rows in out:
            for s, terms in rows:
                expr = []
                for t, sign in terms:
                    if not t:
                        expr.append(str(sign))
                    else:
                        expr.append(("+ " if sign > 0 else "- ") + "x[" + ",".join(t) + "]")
                label = "{" + ",".join(s) + "}"
                print(f"{spec.ordering.names[i]} s={label}: {' '.join(expr)} >= 0")
    return 0


def cmd_neighbors(args) -> int:
    spec = family_from_json(_load_json(args.family, "family"))
    g = graph_from_json(_load_json(args.graph, "graph"))
    count = 0
    for h in neighbors(g, spec):
        count += 1
        if not args.count_only:
            if args.format == "json":
                print(json.dumps(graph_to_json(h)))
            else:
                print(_graph_text(h))
    if args.count_only:
        print(count)
    else:
        print(f"{count} neighbors", file=sys.stderr)
    return 0


def _verify_rows(spec, args, cert_sink):
    size = spec.family_size()
    if size > VERIFY_FAMILY_MAX:
        raise DomainError(
            f"family has {size} members; verify enumerates vertices and "
            f"refuses families over {VERIFY_FAMILY_MAX}"
        )
    idx = coordinate_index(spec)
    members = list(enumerate_family(spec))
    vecs = [tuple(characteristic_imset(g, idx).bits) for g in members]
    rows = []

    checks = args.checks.split(",") if args.checks != "all" else \
        ["product", "dimension", "adjacency", "facets"]
    known = {"product", "dimension", "adjacency", "facets"}
    bad = [c for c in checks if c not in known]
    if bad:
        raise FormatError(f"unknown checks: {', '.join(bad)}")

    nbr_count = sum(spec.admissible_count(i) - 1 for i in range(spec.n))
    print(f"family: {size} vertices, block dimension {product_structure(spec).total_dimension}, "
          f"{nbr_count} neighbors each", file=sys.stderr)

    if "product" in checks:
        distinct = len(set(vecs)) == size
        prod = 1
        for i in range(spec.n):
            prod *= len({characteristic_imset(g, idx).block_slice_bytes(i)
                         if spec.ceiling[i] else b"" for g in members})
        ok = distinct and prod == size
        rows.append(("product", ok,
                     f"{size} vertices = product of per-block slice counts" if ok
                     else "block slices do not factor the vertex set"))

    if "dimension" in checks:
        want = affine_dimension_formula(spec)
        got = affine_dimension(vecs)
        rows.append(("dimension", got == want, f"affine rank {got}, formula {want}"))

    if "adjacency" in checks:
        pairs = list(combinations(range(size), 2))
        note = f"all {len(pairs)} pairs"
        if len(pairs) > args.limit:
            rng = random.Random(args.seed)
            pairs = rng.sample(pairs, args.limit)
            pairs.sort()
            note = f"{args.limit} sampled pairs (seed {args.seed})"
        mismatch = None
        for i, j in pairs:
            cert = oracle_adjacent(vecs[i], vecs[j], vecs, synthesize_witness=False)
            closed = are_neighbors(members[i], members[j], spec)
            if cert_sink is not None:
                cert_sink.write(json.dumps(_jsonable(
                    {"kind": cert.kind, "verified": cert.verified,
                     "pair": [graph_to_json(members[i]), graph_to_json(members[j])]})) + "\n")
            if not cert.verified or closed != (cert.kind == "adjacency"):
                mismatch = (i, j)
                break
        rows.append(("adjacency", mismatch is None,
                     note if mismatch is None else
                     f"mismatch on vertex pair {mismatch[0]},{mismatch[1]}"))

    if "facets" in checks:
        failures = 0
        checked = 0
        skipped = []
        for i in range(spec.n):
            free = spec.free_mask(i)
            k = free.bit_count()
            if k == 0:
                continue
            if (1 << k) > args.limit:
                skipped.append(spec.ordering.names[i])
                continue
            sysk = facet_system_for_child(spec, i)
            cloud = [vertex_block_vector(k, s) for s in range(1 << k)]
            for s in iter_graded_subsets(sysk.universe, include_empty=True):
                cert = oracle_facet_check((s, sysk.dense_row(s)), cloud)
                checked += 1
                if cert_sink is not None:
                    s_names = [sysk.member_names[b] for b in bits_of(s)]
                    cert_sink.write(json.dumps(
                        {"kind": cert.kind, "verified": cert.verified,
                         "child": spec.ordering.names[i], "s": s_names}) + "\n")
                if not cert.verified:
                    failures += 1
        detail = f"{checked} rows certified"
        if skipped:
            detail += f"; skipped blocks over --limit: {', '.join(skipped)}"
        rows.append(("facets", failures == 0,
                     detail if failures == 0 else f"{failures} rows falsified"))
    return rows


def cmd_verify(args) -> int:
    spec = family_from_json(_load_json(args.family, "family"))
    sink = open(args.certificates, "w", encoding="utf-8") if args.certificates else None
    try:
        rows = _verify_rows(spec, args, sink)
    finally:
        if sink is not None:
            sink.close()
    failed = [name for name, ok, _ in rows if not ok]
    if args.format == "json":
        _print_json({"checks": [{"check": n, "pass": ok, "detail": d} for n, ok, d in rows]})
    else:
        width = max(len(n) for n, _, _ in rows)
        for n, ok, d in rows:
            print(f"{n:<{width}}  {'PASS' if ok else 'FAIL'}  {d}")
    return 2 if failed else 0


def _load_table(args):
    if args.scores and args.data:
        raise FormatError("give either --scores or --data, not both")
    if args.scores:
        if args.max_parents is not None:
            raise FormatError("--max-parents applies only with --data")
        table = score_table_from_json(_load_json(args.scores, "score table"))
        if args.family:
            spec = family_from_json(_load_json(args.family, "family"))
            if spec != table.spec:
                raise DomainError("score table and --family describe different families")
        return table, table.spec
    if not args.data:
        raise FormatError("one of --scores or --data is required")
    if not args.family:
        raise FormatError("--data requires --family")
    spec = family_from_json(_load_json(args.family, "family"))
    if args.max_parents is not None:
        try:
            spec = dataclasses.replace(spec, max_parents=args.max_parents)
        except DomainError:
            raise
    data = load_csv(args.data, spec.ordering)
    return build_score_table(data, spec, args.criterion), spec


def _check_rational(table):
    for cell in table.entries:
        for v in cell.values():
            if isinstance(v, float):
                raise DomainError(
                    "--rational requires an exact score table (integers or rationals)"
                )


def _result_json(r):
    return {"score": _jsonable(r.total_score),
            "graph": graph_to_json(r.graph),
            "per_child": [{"child": r.graph.ordering.names[c.child],
                           "parents": list(r.graph.ordering.names_of_mask(c.parents)),
                           "local": _jsonable(c.local),
                           "evaluated": c.evaluated}
                          for c in r.per_child]}


def cmd_learn(args) -> int:
    table, spec = _load_table(args)
    if args.rational:
        _check_rational(table)
    runners = {"exact": optimize_exact, "k2f": k2_forward, "k2b": k2_backward}
    wanted = list(runners) if args.method == "all" else [args.method]
    results = {name: runners[name](table, spec) for name in wanted}
    if args.out:
        first = results[wanted[0]]
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(graph_to_json(first.graph), fh, indent=2)
            fh.write("\n")
        print(f"wrote {first.method} graph to {args.out}", file=sys.stderr)
    if args.format == "json":
        _print_json({r.method: _result_json(r) for r in results.values()})
    else:
        for r in results.values():
            print(f"{r.method}: score={r.total_score}")
            print(f"  {_graph_text(r.graph)}")
    return 0


def cmd_compare(args) -> int:
    table, spec = _load_table(args)
    rep = compare(table, spec)
    doc = {name: _result_json(r) for name, r in rep.results.items()}
    doc["gaps"] = {k: _jsonable(v) for k, v in rep.gaps.items()}
    doc["agreement"] = {k: list(v) for k, v in rep.agreement.items()}
    doc["structural_hamming"] = dict(rep.hamming)
    if args.format == "text":
        for name, r in rep.results.items():
            print(f"{name}: score={r.total_score}")
            print(f"  {_graph_text(r.graph)}")
        for name in rep.gaps:
            print(f"gap {name}: {rep.gaps[name]}; hamming {rep.hamming[name]}; "
                  f"children agree {sum(rep.agreement[name])}/{len(rep.agreement[name])}")
    else:
        _print_json(doc)
    return 0


def cmd_enumerate(args) -> int:
    spec = family_from_json(_load_json(args.family, "family"))
    count = 0
    for g in enumerate_family(spec, limit=args.limit):
        count += 1
        if args.format == "json":
            print(json.dumps(graph_to_json(g)))
        else:
            print(_graph_text(g))
    print(f"{count} graphs", file=sys.stderr)
    return 0


# --- wiring ---------------------------------------------------------------

def _add_format(p, default="text"):
    p.add_argument("--format", choices=("text", "json"), default=default)


def _add_table_source(p):
    p.add_argument("--scores", help="score table JSON")
    p.add_argument("--data", help="CSV dataset")
    p.add_argument("--family", help="family JSON (required with --data)")
    p.add_argument("--criterion", choices=("bic", "aic", "ll"), default="bic")
    p.add_argument("--max-parents", type=int, default=None)
    p.add_argument("--rational", action="store_true",
                   help="require exact scores end to end")
    p.add_argument("--threads", type=int, default=None,
                   help="accepted for interface stability; execution is sequential")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="cimset", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("imset", parents=[], help="print a graph's characteristic imset")
    p.add_argument("--family", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--full", action="store_true",
                   help="emit the ambient vector over all node sets of size >= 2")
    _add_format(p)
    p.set_defaults(fn=cmd_imset)

    p = sub.add_parser("facets", help="print per-child facet systems")
    p.add_argument("--family", required=True)
    p.add_argument("--child", default=None)
    p.add_argument("--limit", type=int, default=None, help="max rows per child")
    _add_format(p)
    p.set_defaults(fn=cmd_facets)

    p = sub.add_parser("neighbors", help="list the polytope neighbors of a graph")
    p.add_argument("--family", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--count-only", action="store_true")
    _add_format(p)
    p.set_defaults(fn=cmd_neighbors)

    p = sub.add_parser("verify", help="certify geometry claims with the exact oracle")
    p.add_argument("--family", required=True)
    p.add_argument("--checks", default="all",
                   help="comma list of product,dimension,adjacency,facets")
    p.add_argument("--limit", type=int, default=2000,
                   help="max adjacency pairs / facet rows per block")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--certificates", default=None, help="write JSON-lines certificates")
    p.add_argument("--threads", type=int, default=None,
                   help="accepted for interface stability; execution is sequential")
    _add_format(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("learn", help="learn a structure from data or a score table")
    _add_table_source(p)
    p.add_argument("--method", choices=("exact", "k2f", "k2b", "all"), default="exact")
    p.add_argument("--out", default=None, help="write the learned graph JSON here")
    _add_format(p)
    p.set_defaults(fn=cmd_learn)

    p = sub.add_parser("compare-k2", help="exact vs K2 forward/backward report")
    _add_table_source(p)
    _add_format(p, default="json")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("enumerate", help="list every family member")
    p.add_argument("--family", required=True)
    p.add_argument("--limit", type=int, default=None)
    _add_format(p)
    p.set_defaults(fn=cmd_enumerate)
    return top


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except CimsetError as exc:
        print(f"cimset: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
