"""Command line: corpus generation, index build/query, benchmarks, estimates."""

from __future__ import annotations

import argparse
import contextlib
import csv
import math
import sys
import tempfile
from pathlib import Path

from . import bench
from .corpus import GenSpec, gen_corpus, read_corpus
from .engine import bulk_build, compute_postings, evaluate_query, expand_query
from .persist import close_index, load_index, save_index
from .representations import DEFAULT_CHUNK_SIZE, IndexPlan, Representation
from .size_model import CorpusStats, estimate_cor, estimate_hor, estimate_orif, estimate_pr
from .storage import CostModel

ALL_REPS = [r.value for r in Representation]


def _on_off(value: str) -> bool:
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return value == "on"


def cost_from_args(args) -> CostModel:
    f = args.field_bytes
    element = 2 * f if args.posting_elem == "pair8" else 16
    return CostModel(tuple_overhead_bytes=args.tuple_overhead, field_bytes=f,
                     page_bytes=args.page_size, posting_element_bytes=element)


def plans_from_args(args) -> list[IndexPlan]:
    kinds = args.index or ["btree"]
    return [IndexPlan(None if k == "none" else k, pr_doc_index=args.pr_doc_index,
                      hor_key_index=args.hor_key_index) for k in kinds]


def _cost_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("cost model")
    g.add_argument("--page-size", type=int, default=8192)
    g.add_argument("--tuple-overhead", type=int, default=40)
    g.add_argument("--field-bytes", type=int, default=4)
    g.add_argument("--posting-elem", choices=["pair8", "point16"], default="pair8")
    return p


def _index_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("access paths")
    g.add_argument("--rep", action="append", choices=ALL_REPS,
                   help="representation (repeatable; default: all)")
    g.add_argument("--index", action="append", choices=["btree", "hash", "none"],
                   help="index kind (repeatable for benchmarks; default: btree)")
    g.add_argument("--hor-key-index", type=_on_off, default=False, metavar="on|off")
    g.add_argument("--pr-doc-index", type=_on_off, default=False, metavar="on|off")
    g.add_argument("--chunk-size", type=int, default=DEFAULT_CHUNK_SIZE)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orindex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    cost, idx = _cost_flags(), _index_flags()

    p = sub.add_parser("gen", help="write a synthetic Zipf corpus")
    p.add_argument("--docs", type=int, required=True)
    p.add_argument("--vocab", type=int, required=True)
    p.add_argument("--avg-len", type=int, required=True)
    p.add_argument("--zipf", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="corpus file to write")

    p = sub.add_parser("build", parents=[cost, idx], help="build index directories")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="directory; one subdirectory per representation")

    for name, text in (("query", "rank documents for a query"),
                       ("expand", "expand a query with terms of its top documents")):
        p = sub.add_parser(name, help=text)
        p.add_argument("text", help="query text")
        p.add_argument("--index-dir", required=True, help="directory written by build")
        p.add_argument("--rep", action="append", choices=ALL_REPS)
        p.add_argument("--chunk-size", type=int, default=DEFAULT_CHUNK_SIZE)
        p.add_argument("--out", help="CSV output path (default: stdout)")
        if name == "query":
            p.add_argument("-k", type=int, default=10)
        else:
            p.add_argument("--n-docs", type=int, default=5)
            p.add_argument("--n-terms", type=int, default=5)

    p = sub.add_parser("bench-build", parents=[cost, idx], help="table and index sizes")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")

    p = sub.add_parser("bench-query", parents=[cost, idx], help="elementary query times")
    p.add_argument("--corpus", required=True)
    p.add_argument("--terms", type=int, nargs="+", default=[1, 2, 3, 4])
    p.add_argument("--df-fraction", type=float, default=0.3)
    p.add_argument("--repetitions", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in-memory", action="store_true",
                   help="query in-memory tables instead of reopened index files")
    p.add_argument("--out")

    p = sub.add_parser("bench-expand", parents=[cost, idx], help="query expansion times")
    p.add_argument("--corpus", required=True)
    p.add_argument("--query", action="append", help="query text (repeatable)")
    p.add_argument("--n-queries", type=int, default=10,
                   help="2-term high-df queries to draw when no --query is given")
    p.add_argument("--n-docs", type=int, default=5)
    p.add_argument("--n-terms", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in-memory", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("estimate", parents=[cost], help="analytic occurrence-table sizes")
    p.add_argument("--corpus", help="derive N, D, N_d, W and lengths from a corpus file")
    for flag in ("--N", "--D", "--Nd", "--W"):
        p.add_argument(flag, type=int)
    p.add_argument("--avg-name-len", type=float)
    p.add_argument("--avg-docid-len", type=float)
    p.add_argument("--avg-tf-len", type=float)
    p.add_argument("--positions", action="store_true")
    p.add_argument("--out")
    return parser


@contextlib.contextmanager
def _output(path):
    if path:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh
    else:
        yield sys.stdout


def _emit(path, rows, columns) -> None:
    with _output(path) as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _built_indexes(documents, args):
    """Yield every (representation, plan) index, reopened from disk unless --in-memory."""
    cost = cost_from_args(args)
    for rep in args.rep or ALL_REPS:
        for plan in plans_from_args(args):
            index = bulk_build(documents, rep, plan, cost)
            if args.in_memory:
                yield index
                continue
            with tempfile.TemporaryDirectory(prefix="orindex-") as directory:
                save_index(index, directory)
                del index   # only the file-backed copy stays alive
                reopened = load_index(directory, on_disk=True)
                try:
                    yield reopened
                finally:
                    close_index(reopened)


def cmd_gen(args) -> None:
    gen_corpus(GenSpec(args.docs, args.vocab, args.avg_len, args.zipf, args.seed), args.out)


def cmd_build(args) -> None:
    plans = plans_from_args(args)
    if len(plans) > 1:
        raise ValueError("build takes a single --index")
    documents = read_corpus(args.corpus)
    cost = cost_from_args(args)
    for rep in args.rep or ALL_REPS:
        index = bulk_build(documents, rep, plans[0], cost)
        save_index(index, Path(args.out) / rep)


def _open_all(args):
    root = Path(args.index_dir)
    reps = args.rep or [r for r in ALL_REPS if (root / r).is_dir()]
    if not reps:
        raise FileNotFoundError(f"no index directories under {root}")
    return [(rep, root / rep) for rep in reps]


def cmd_query(args) -> None:
    rows = []
    for rep, path in _open_all(args):
        index = load_index(path, on_disk=True)
        try:
            results = evaluate_query(index, args.text, k=args.k, chunk_size=args.chunk_size)
        finally:
            close_index(index)
        rows += [{"representation": rep, "position": i, "doc_id": r.doc_id,
                  "score": f"{r.score:.7f}", "rank": r.rank}
                 for i, r in enumerate(results, start=1)]
    _emit(args.out, rows, ["representation", "position", "doc_id", "score", "rank"])


def cmd_expand(args) -> None:
    rows = []
    for rep, path in _open_all(args):
        index = load_index(path, on_disk=True)
        try:
            terms = expand_query(index, args.text, args.n_docs, args.n_terms)
        finally:
            close_index(index)
        rows.append({"representation": rep, "terms": " ".join(terms)})
    _emit(args.out, rows, ["representation", "terms"])


def cmd_bench_build(args) -> None:
    documents = read_corpus(args.corpus)
    rows = bench.bench_build(documents, args.rep or ALL_REPS, plans_from_args(args),
                             cost_from_args(args))
    _emit(args.out, rows, bench.BUILD_COLUMNS)


def cmd_bench_query(args) -> None:
    documents = read_corpus(args.corpus)
    dfs, n_docs = bench.corpus_dfs(documents)
    selection = bench.select_terms(dfs, n_docs, args.terms, args.df_fraction,
                                   args.repetitions, args.seed)
    rows = []
    for index in _built_indexes(documents, args):
        rows += bench.bench_query([index], selection, args.chunk_size)
    _emit(args.out, rows, bench.QUERY_COLUMNS)


def cmd_bench_expand(args) -> None:
    documents = read_corpus(args.corpus)
    queries = args.query
    if not queries:
        dfs, n_docs = bench.corpus_dfs(documents)
        selection = bench.select_terms(dfs, n_docs, [2], repetitions=args.n_queries,
                                       seed=args.seed)
        queries = [" ".join(terms) for terms in selection.queries[2]]
    rows = []
    for index in _built_indexes(documents, args):
        rows += bench.bench_expand([index], queries, args.n_docs, args.n_terms)
    _emit(args.out, rows, bench.EXPAND_COLUMNS)


def cmd_estimate(args) -> None:
    cost = cost_from_args(args)
    lengths = {"name": args.avg_name_len, "docid": args.avg_docid_len, "tf": args.avg_tf_len}
    if args.corpus:
        postings, _, stats = compute_postings(read_corpus(args.corpus))
        pairs = [(str(p.doc_id), str(p.tf)) for plist in postings.values() for p in plist]
        if stats.W:
            lengths["name"] = sum(len(w.encode()) for w in postings) / stats.W
        if pairs:
            lengths["docid"] = sum(len(d) for d, _ in pairs) / len(pairs)
            lengths["tf"] = sum(len(t) for _, t in pairs) / len(pairs)
    else:
        missing = [flag for flag, v in (("--N", args.N), ("--D", args.D), ("--Nd", args.Nd),
                                        ("--W", args.W)) if v is None]
        if missing:
            raise ValueError(f"estimate needs --corpus or {', '.join(missing)}")
        stats = CorpusStats(N=args.N, D=args.D, N_d=args.Nd, W=args.W)
    stats.check()

    sizes = {"pr": estimate_pr(stats, cost, args.positions),
             "or": estimate_orif(stats, cost, args.positions,
                                 element_bytes=cost.posting_element_bytes)}
    if not args.positions:
        if lengths["name"] is not None:
            sizes["cor"] = estimate_cor(stats, cost, lengths["name"])
        if None not in lengths.values():
            sizes["hor"] = estimate_hor(stats, cost, lengths["name"], lengths["docid"],
                                        lengths["tf"])
    rows = [{"representation": rep, "positions": str(args.positions).lower(),
             "bytes": _number(size), "pages": math.ceil(size / cost.page_bytes)}
            for rep, size in sizes.items()]
    _emit(args.out, rows, ["representation", "positions", "bytes", "pages"])


def _number(value) -> str:
    return str(int(value)) if float(value).is_integer() else f"{value:.3f}"


COMMANDS = {
    "gen": cmd_gen, "build": cmd_build, "query": cmd_query, "expand": cmd_expand,
    "bench-build": cmd_bench_build, "bench-query": cmd_bench_query,
    "bench-expand": cmd_bench_expand, "estimate": cmd_estimate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"orindex {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
