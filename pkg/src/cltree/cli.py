"""``cltree`` command line: build, query, verify, entropy, decode, bench.

Exit codes: 0 success, 1 a check failed or input could not be processed,
2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time
from pathlib import Path

from .clustering import build_cluster_structure, cluster_greedy, entropy_bound_report, validate_clustering
from .codec import class_entropy_bound
from .entropy import all_measures
from .structure import CorruptContainer, SuccinctLabeledTree, UnsupportedQuery
from .tree import (LABEL_OPS, QUERY_OPS, LabeledTree, ParseError, generate_tree, naive_query,
                   parse_ltree, parse_xml_skeleton, serialize_ltree)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def read_tree(path: str, fmt: str | None = None) -> LabeledTree:
    data = Path(path).read_bytes()
    if fmt is None:
        fmt = "xml" if path.lower().endswith(".xml") else "ltree"
    return parse_xml_skeleton(data) if fmt == "xml" else parse_ltree(data)


def _m_arg(text: str):
    if text == "auto":
        return "auto"
    try:
        m = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("m must be 'auto' or a positive integer") from None
    if m < 1:
        raise argparse.ArgumentTypeError("m must be >= 1")
    return m


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("expected a nonnegative integer")
    return v


def _pos(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _add_build_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("ltree", "xml"), help="input format (default: by extension)")
    p.add_argument("-k", "--k", type=_nonneg, default=0, help="context order (default 0)")
    p.add_argument("-m", "--m", type=_m_arg, default="auto", help="cluster size parameter or 'auto'")
    p.add_argument("--codec", choices=("plain", "boosted"), default="plain")
    p.add_argument("--d", type=_pos, default=None, help="context sampling period (boosted codec)")
    p.add_argument("--sigma-small", type=_pos, default=16,
                   help="largest alphabet with labeled-query support (default 16)")
    p.add_argument("--seed", type=int, default=0)


def _build(t: LabeledTree, args) -> SuccinctLabeledTree:
    return SuccinctLabeledTree.build(t, m=args.m, k=args.k, codec=args.codec, d=args.d,
                                     sigma_small=args.sigma_small,
                                     precompute=getattr(args, "precompute", False))


def _flatten(report: dict) -> list[tuple[str, object]]:
    rows = []
    for key, val in report.items():
        if isinstance(val, dict):
            rows.extend((f"{key}.{k2}", v2) for k2, v2 in val.items())
        else:
            rows.append((key, val))
    return rows


def cmd_build(args) -> int:
    t = read_tree(args.input, args.format)
    t0 = time.perf_counter()
    s = _build(t, args)
    elapsed = time.perf_counter() - t0
    s.save(args.output)
    report = s.size_report(t)
    report["build_seconds"] = elapsed
    if args.report == "json":
        print(json.dumps(report, indent=1))
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["field", "value"])
        w.writerows(_flatten(report))
    return EXIT_OK


def _parse_query_args(s: SuccinctLabeledTree, op: str, raw: list[str]) -> list:
    arity = {"lca": 2, "child": 2, "level_ancestor": 2, "preorder_select": 1,
             "childrank_label": 2, "depth_label": 2, "childselect_label": 3,
             "level_ancestor_label": 3}.get(op, 1)
    if len(raw) != arity:
        raise UsageError(f"{op} takes {arity} argument(s), got {len(raw)}")
    out = []
    for i, tok in enumerate(raw):
        is_label = op in LABEL_OPS and i == arity - 1
        if is_label:
            if tok not in s.alphabet:
                raise UsageError(f"unknown label {tok!r}")
            out.append(tok)
        else:
            try:
                out.append(int(tok))
            except ValueError:
                raise UsageError(f"expected an integer, got {tok!r}") from None
    return out


def cmd_query(args) -> int:
    s = SuccinctLabeledTree.load(args.structure)
    if args.op not in QUERY_OPS + LABEL_OPS:
        raise UsageError(f"unknown op {args.op!r}; choose from {', '.join(QUERY_OPS + LABEL_OPS)}")
    qargs = _parse_query_args(s, args.op, args.args)
    try:
        ans = s.query(args.op, *qargs)
    except (IndexError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    if args.op == "label":
        print(s.alphabet[ans])
    else:
        print("none" if ans is None else ans)
    return EXIT_OK


def _query_args(t: LabeledTree, rng: random.Random, v: int):
    n = t.n
    yield "parent", (v,)
    yield "firstchild", (v,)
    yield "nextsibling", (v,)
    yield "label", (v,)
    yield "depth", (v,)
    yield "childrank", (v,)
    yield "preorder_rank", (v,)
    yield "preorder_select", (v,)
    yield "lca", (v, rng.randrange(n))
    for i in range(t.degree[v]):
        yield "child", (v, i)
    yield "level_ancestor", (v, rng.randrange(n))
    yield "level_ancestor", (v, 1)
    for a in range(t.sigma):
        yield "childrank_label", (v, a)
        yield "depth_label", (v, a)
        yield "childselect_label", (v, 1 + rng.randrange(2), a)
        yield "level_ancestor_label", (v, 1 + rng.randrange(2), a)


def oracle_mismatches(t: LabeledTree, s: SuccinctLabeledTree, nodes, rng: random.Random,
                      labeled: bool = True) -> list[str]:
    bad = []
    for v in nodes:
        for op, qa in _query_args(t, rng, v):
            if op in LABEL_OPS and not labeled:
                continue
            exp = naive_query(t, op, *qa)
            got = s.query(op, *qa)
            if exp != got:
                bad.append(f"{op}{qa}: expected {exp}, got {got}")
    return bad


def run_checks(t: LabeledTree, s: SuccinctLabeledTree, *, seed: int = 0,
               queries: int = 2000) -> list[tuple[str, bool, str]]:
    """Every invariant check on one input; returns (name, ok, detail) rows."""
    rng = random.Random(seed)
    out = []
    p = s.params
    c = cluster_greedy(t, p.m)
    rep = validate_clustering(t, c, p.m)
    out.append(("clustering C1-C4", rep.ok, rep.detail or "ok"))
    out.append(("decode_full identity", s.decode_full() == t, ""))
    nodes = range(t.n) if t.n <= 200 else [rng.randrange(t.n) for _ in range(max(1, queries // 20))]
    labeled = len(t.alphabet) <= p.sigma_small
    bad = oracle_mismatches(t, s, nodes, rng, labeled)
    out.append(("oracle equivalence", not bad, "; ".join(bad[:3])))
    report = s.size_report(t)
    out.append(("label payload bound", report["payload_ok"],
                f"{report['sections']['T2_payload']} <= {report['payload_bound']:.1f}"))
    if rep.ok:
        cs = build_cluster_structure(t, c, p.k)
        eb = entropy_bound_report(t, cs, p.k, p.m)
        for v in (1, 2, 3):
            gibbs_ok = eb["P_H0"] <= eb["gibbs"][v] + 1e-6
            bound_ok = eb["P_H0"] <= eb["bounds"][v] + 1e-6
            out.append((f"gibbs bound variant {v}", gibbs_ok, f"{eb['P_H0']:.1f} <= {eb['gibbs'][v]:.1f}"))
            out.append((f"explicit bound variant {v}", bound_ok,
                        f"{eb['P_H0']:.1f} <= {eb['bounds'][v]:.1f}"))
    for kk in range(3):
        m = all_measures(t, kk)
        ok = m["Hk_T_given_L"] <= m["H_T"] + 1e-9 and m["Hk_L_given_T"] <= m["Hk_L"] + 1e-9
        out.append((f"conditional entropy order k={kk}", ok, ""))
    if s.sampling is not None:
        walk = s.max_context_walk()
        bound = s.bp.nodes / s.sampling.d + 1
        out.append(("sampling size", s.sampling.sampled <= bound, f"{s.sampling.sampled} <= {bound:.1f}"))
        out.append(("context walk", walk <= s.sampling.d, f"{walk} <= {s.sampling.d}"))
    return out


def cmd_verify(args) -> int:
    t = read_tree(args.input, args.format)
    if args.container:
        try:
            s = SuccinctLabeledTree.load(args.container)
        except CorruptContainer as exc:
            print(f"FAIL container: {exc}")
            return EXIT_FAIL
        if s.n != t.n or list(s.alphabet) != list(t.alphabet):
            print(f"FAIL container mismatch: {s.n} nodes vs input {t.n}")
            return EXIT_FAIL
    else:
        s = _build(t, args)
    rows = run_checks(t, s, seed=args.seed, queries=args.queries)
    failed = 0
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'} {name}" + (f" ({detail})" if detail else ""))
        failed += not ok
    return EXIT_FAIL if failed else EXIT_OK


def cmd_entropy(args) -> int:
    t = read_tree(args.input, args.format)
    w = csv.writer(sys.stdout)
    cols = ["k", "H0", "Hk_L", "H_T", "Hk_T_given_L", "Hk_L_given_T"]
    w.writerow(cols)
    for k in range(args.kmin, args.kmax + 1):
        m = all_measures(t, k)
        w.writerow([k] + [f"{m[c]:.6f}" for c in cols[1:]])
    return EXIT_OK


def cmd_decode(args) -> int:
    s = SuccinctLabeledTree.load(args.structure)
    text = serialize_ltree(s.decode_full())
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    if not args.sizes:
        args.parser.print_usage()
        return EXIT_USAGE
    rng = random.Random(args.seed)
    w = csv.writer(sys.stdout)
    w.writerow(["n", "codec", "op", "ops_per_sec"])
    for n in args.sizes:
        t = generate_tree({"kind": "correlated", "n": n, "rule": "catalog"}, args.seed)
        for codec in ("plain", "boosted"):
            s = SuccinctLabeledTree.build(t, m=args.m, k=args.k, codec=codec)
            for op in ("parent", "firstchild", "depth", "label", "lca", "level_ancestor"):
                nodes = [rng.randrange(n) for _ in range(args.queries)]
                t0 = time.perf_counter()
                for v in nodes:
                    if op == "lca":
                        s.lca(v, nodes[v % len(nodes)])
                    elif op == "level_ancestor":
                        s.level_ancestor(v, 1)
                    else:
                        getattr(s, op)(v)
                dt = time.perf_counter() - t0
                w.writerow([n, codec, op, f"{len(nodes) / max(dt, 1e-9):.1f}"])
            t0 = time.perf_counter()
            s.decode_full()
            w.writerow([n, codec, "decode_full", f"{1 / max(time.perf_counter() - t0, 1e-9):.3f}"])
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cltree", description="Compressed labeled trees.")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("build", help="build a container from a tree file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", choices=("csv", "json"), default="csv")
    p.add_argument("--precompute", action="store_true", help="decode every cluster eagerly")
    _add_build_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="answer one query against a container")
    p.add_argument("structure")
    p.add_argument("op")
    p.add_argument("args", nargs="*")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("verify", help="build (or load) and run every check")
    p.add_argument("input")
    p.add_argument("--container", help="verify this container instead of building one")
    p.add_argument("--queries", type=_pos, default=2000)
    _add_build_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("entropy", help="print the entropy measures as CSV")
    p.add_argument("input")
    p.add_argument("--format", choices=("ltree", "xml"))
    p.add_argument("--kmin", type=_nonneg, default=0)
    p.add_argument("--kmax", type=_nonneg, default=2)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("decode", help="write the tree stored in a container")
    p.add_argument("structure")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("bench", help="query throughput on generated trees")
    p.add_argument("--sizes", type=_pos, nargs="+")
    p.add_argument("--queries", type=_pos, default=1000)
    p.add_argument("-m", "--m", type=_m_arg, default="auto")
    p.add_argument("-k", "--k", type=_nonneg, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench, parser=p)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"cltree {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, CorruptContainer, UnsupportedQuery) as exc:
        print(f"cltree {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
