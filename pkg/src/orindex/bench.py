"""Benchmark harness: table/index sizes, query times and expansion times.

Every report is a list of flat dict rows with a fixed column set, written
as CSV.  Columns other than the ``*_ms`` timings are deterministic for a
given corpus and seed.
"""

from __future__ import annotations

import csv
import random
import shutil
import tempfile
import time
import zlib
from collections.abc import Iterable, Sequence
from contextlib import contextmanager
from dataclasses import dataclass

from .corpus import Document
from .engine import bulk_build, compute_postings, evaluate_query, expand_query
from .persist import close_index, load_index, save_index
from .representations import IndexPlan, Representation, SearchIndex
from .storage import CostModel

BUILD_COLUMNS = ["representation", "index_kind", "object", "name", "tuples", "bytes",
                 "pages", "copy_ms", "norms_ms", "index_build_ms"]
QUERY_COLUMNS = ["representation", "index_kind", "terms", "queries", "q_word_ms", "q_occ_ms",
                 "q_doc_ms", "total_ms", "df_low", "df_high", "results_crc"]
EXPAND_COLUMNS = ["representation", "index_kind", "queries", "total_ms", "expansions"]


def _ms(value_ms: float) -> str:
    return f"{value_ms:.3f}"


def _label(plan: IndexPlan) -> str:
    return plan.kind or "none"


def bench_build(documents: Sequence[Document], reps: Iterable[str],
                plans: Iterable[IndexPlan], cost: CostModel | None = None) -> list[dict]:
    """Table and index sizes plus copy / norm / index-creation times."""
    rows = []
    plans = list(plans)
    for rep in reps:
        rep = Representation(rep)
        for plan in plans:
            index = bulk_build(documents, rep, plan, cost)
            rows += build_rows(index)
    return rows


def build_rows(index: SearchIndex) -> list[dict]:
    rep, kind = index.kind.value, _label(index.plan)
    rows = []
    for name, table in index.tables.items():
        stats = table.stats()
        rows.append({"representation": rep, "index_kind": kind, "object": "table",
                     "name": name, "tuples": stats.tuples, "bytes": stats.bytes,
                     "pages": stats.pages,
                     "copy_ms": _ms(index.timings.get(f"copy_{name}_ms", 0.0)),
                     "norms_ms": "", "index_build_ms": ""})
    for path in index.indexes.values():
        stats = path.stats()
        rows.append({"representation": rep, "index_kind": kind, "object": f"index:{stats.kind}",
                     "name": stats.attribute, "tuples": "", "bytes": "", "pages": stats.pages,
                     "copy_ms": "", "norms_ms": "", "index_build_ms": _ms(stats.build_millis)})
    rows.append({"representation": rep, "index_kind": kind, "object": "total", "name": "",
                 "tuples": sum(t.stats().tuples for t in index.tables.values()),
                 "bytes": sum(t.stats().bytes for t in index.tables.values()),
                 "pages": sum(t.stats().pages for t in index.tables.values())
                 + sum(p.pages for p in index.indexes.values()),
                 "copy_ms": _ms(index.timings.get("copy_ms", 0.0)),
                 "norms_ms": _ms(index.timings.get("norms_ms", 0.0)),
                 "index_build_ms": _ms(index.timings.get("index_ms", 0.0))})
    return rows


@dataclass(frozen=True)
class TermSelection:
    df_low: int
    df_high: int
    band: tuple[str, ...]
    queries: dict[int, list[list[str]]]   # term count -> one term list per repetition


def select_terms(dfs: dict[str, int], n_docs: int, term_counts: Sequence[int] = (1, 2, 3, 4),
                 df_fraction: float = 0.3, repetitions: int = 10, seed: int = 0,
                 tolerance: float = 0.2) -> TermSelection:
    """Draw query terms whose df is near ``df_fraction * n_docs``.

    The band starts at +-``tolerance`` around the target and is doubled
    until it holds enough terms for the largest query; the band actually
    used is returned.
    """
    need = max(term_counts)
    if len(dfs) < need:
        raise ValueError(f"vocabulary has {len(dfs)} terms, queries need {need}")
    target = df_fraction * n_docs
    width = tolerance
    while True:
        low, high = target * (1 - width), target * (1 + width)
        band = tuple(sorted(w for w, df in dfs.items() if low <= df <= high))
        if len(band) >= need or (low <= 1 and high >= n_docs):
            break
        width *= 2
    if len(band) < need:
        raise ValueError(f"only {len(band)} terms fall in any df band, queries need {need}")
    rng = random.Random(seed)
    queries = {n: [rng.sample(band, n) for _ in range(repetitions)] for n in term_counts}
    return TermSelection(int(low), int(high), band, queries)


def bench_query(indexes: Sequence[SearchIndex], selection: TermSelection,
                chunk_size: int = 250_000, k: int = 10) -> list[dict]:
    """Mean elementary-query times per representation and term count.

    Result scanning (accumulation and ranking) is not timed.  cor/hor rows
    leave q_word empty since that query is never issued for them.
    """
    rows = []
    for index in indexes:
        for n_terms, queries in selection.queries.items():
            spent = {"q_word": 0, "q_occ": 0, "q_doc": 0}
            crc = 0
            for terms in queries:
                results = evaluate_query(index, " ".join(terms), k=k, chunk_size=chunk_size,
                                         timings=spent)
                crc = zlib.crc32(repr([(r.doc_id, round(r.score, 9)) for r in results])
                                 .encode(), crc)
            n = len(queries)
            mean = {key: value / n / 1e6 for key, value in spent.items()}
            has_word = index.kind.has_word_table
            rows.append({
                "representation": index.kind.value, "index_kind": _label(index.plan),
                "terms": n_terms, "queries": n,
                "q_word_ms": _ms(mean["q_word"]) if has_word else "",
                "q_occ_ms": _ms(mean["q_occ"]), "q_doc_ms": _ms(mean["q_doc"]),
                "total_ms": _ms(sum(mean.values())),
                "df_low": selection.df_low, "df_high": selection.df_high,
                "results_crc": f"{crc:08x}",
            })
    return rows


def bench_expand(indexes: Sequence[SearchIndex], queries: Sequence[str], n_docs: int = 5,
                 n_terms: int = 5) -> list[dict]:
    """Wall time of expanding every query, and the expansions themselves."""
    rows = []
    if not queries:
        return rows
    for index in indexes:
        start = time.perf_counter()
        expansions = [expand_query(index, q, n_docs, n_terms) for q in queries]
        elapsed = (time.perf_counter() - start) * 1000.0
        label = _label(index.plan)
        if index.kind is Representation.PR and index.plan.pr_doc_index:
            label += "+doc_id"
        if index.kind is Representation.HOR and index.plan.hor_key_index:
            label += "+key_inverted"
        rows.append({"representation": index.kind.value, "index_kind": label,
                     "queries": len(queries), "total_ms": _ms(elapsed),
                     "expansions": "|".join(";".join(e) for e in expansions)})
    return rows


@contextmanager
def on_disk(index: SearchIndex):
    """Persist ``index`` and yield it reopened read-only from its files."""
    directory = tempfile.mkdtemp(prefix="orindex-")
    try:
        save_index(index, directory)
        reopened = load_index(directory, on_disk=True)
        try:
            yield reopened
        finally:
            close_index(reopened)
    finally:
        shutil.rmtree(directory, ignore_errors=True)


def corpus_dfs(documents: Sequence[Document]) -> tuple[dict[str, int], int]:
    _, dfs, stats = compute_postings(documents)
    return dfs, stats.D


def write_csv(path, rows: list[dict], columns: list[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
