"""Indexing and vector-space query evaluation over any representation.

Weights are tf * idf with idf = ln(D / df) and tf the raw occurrence count.
Scores are cosine similarities: the accumulated dot product divided by the
stored document norm and the query norm.
"""

from __future__ import annotations

import math
import re
import time
from collections import Counter
from collections.abc import Iterable, Sequence
from typing import NamedTuple

from .corpus import Document
from .representations import (
    DEFAULT_CHUNK_SIZE,
    IndexPlan,
    PostingEntry,
    Representation,
    SearchIndex,
    build_tables,
    doc_terms,
    occurrence_rows,
    q_doc,
    q_occ,
    q_word,
    read_documents,
    read_postings,
)
from .size_model import CorpusStats
from .storage import CostModel

_TOKEN = re.compile(r"[^\W_]+")


class RankedResult(NamedTuple):
    doc_id: int
    score: float
    rank: float


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric runs."""
    return _TOKEN.findall(text.lower())


def compute_postings(documents: Sequence[Document], first_id: int = 1):
    """Postings, dfs and corpus stats; document ids are ``first_id`` onwards.

    Words appear in the returned mappings in first-occurrence order.
    """
    postings: dict[str, list[PostingEntry]] = {}
    n_tokens = 0
    n_d = 0
    for doc_id, doc in enumerate(documents, start=first_id):
        counts = Counter(tokenize(doc.text))
        n_tokens += sum(counts.values())
        n_d += len(counts)
        for term, tf in counts.items():
            plist = postings.get(term)
            if plist is None:
                postings[term] = [PostingEntry(doc_id, tf)]
            else:
                plist.append(PostingEntry(doc_id, tf))
    dfs = {term: len(plist) for term, plist in postings.items()}
    stats = CorpusStats(N=n_tokens, D=len(documents), N_d=n_d, W=len(postings))
    return postings, dfs, stats


def idf(n_docs: int, df: int) -> float:
    return math.log(n_docs / df)


def _norms(postings, n_docs: int) -> dict[int, float]:
    # summed in word id order, then doc id, so every path agrees bit for bit
    squares: dict[int, float] = {}
    for plist in postings.values():
        w = idf(n_docs, len(plist))
        for doc_id, tf in plist:
            x = tf * w
            squares[doc_id] = squares.get(doc_id, 0.0) + x * x
    return {doc_id: math.sqrt(s) for doc_id, s in squares.items()}


def _store_norms(index: SearchIndex, postings) -> None:
    start = time.perf_counter()
    norms = _norms(postings, index.stats.D)
    docs = index.tables["document"]
    for pos, (doc_id, url, _norm, rank) in docs.scan():
        docs.update_in_place(pos, (doc_id, url, norms.get(doc_id, 0.0), rank))
    index.timings["norms_ms"] = (time.perf_counter() - start) * 1000.0


def bulk_build(documents: Sequence[Document], kind: Representation | str,
               plan: IndexPlan | None = None, cost: CostModel | None = None) -> SearchIndex:
    """Copy the tables, then store norms, then build access paths."""
    plan = plan or IndexPlan()
    postings, dfs, stats = compute_postings(documents)
    rows = [(i, d.url, d.rank) for i, d in enumerate(documents, start=1)]
    _check_urls(d.url for d in documents)
    index = build_tables(kind, rows, postings, dfs, cost)
    _store_norms(index, postings)
    index.build_access_paths(plan)
    return index


def _check_urls(urls: Iterable[str], existing: Iterable[str] = ()) -> None:
    seen = set(existing)
    for url in urls:
        if url in seen:
            raise ValueError(f"duplicate url {url!r}")
        seen.add(url)


def add_documents(index: SearchIndex, delta: Sequence[Document]) -> SearchIndex:
    """Append documents: drop access paths, load, refresh dfs and norms, rebuild."""
    delta = list(delta)
    if not delta:
        return index
    old_docs = read_documents(index)
    _check_urls((d.url for d in delta), (row[1] for row in old_docs))
    postings = read_postings(index)
    old_words = list(postings)
    first_id = len(old_docs) + 1
    new_postings, _, _ = compute_postings(delta, first_id=first_id)
    for term, plist in new_postings.items():
        postings.setdefault(term, []).extend(plist)
    dfs = {term: len(plist) for term, plist in postings.items()}
    word_ids = {w: i for i, w in enumerate(postings, start=1)}

    index.drop_access_paths()
    start = time.perf_counter()
    index.tables["document"].copy_into(
        (i, d.url, 0.0, float(d.rank)) for i, d in enumerate(delta, start=first_id))
    kind = index.kind
    occ = index.tables["occurrence"]
    if kind.has_word_table:
        words = index.tables["word"]
        for pos, (w, name, df) in words.scan():
            if dfs[name] != df:
                words.update_in_place(pos, (w, name, dfs[name]))
        known = set(old_words)
        words.copy_into((word_ids[w], w, dfs[w]) for w in postings if w not in known)
    if kind is Representation.PR:
        occ.copy_into(occurrence_rows(kind, postings, dfs, word_ids,
                                      doc_range=(first_id, first_id + len(delta))))
    else:
        # array and map values grow, so every occurrence tuple is rewritten
        occ.truncate()
        occ.copy_into(occurrence_rows(kind, postings, dfs, word_ids))
    index.timings["copy_ms"] = (time.perf_counter() - start) * 1000.0

    index.stats = CorpusStats(
        N=sum(p.tf for plist in postings.values() for p in plist),
        D=len(old_docs) + len(delta),
        N_d=sum(len(plist) for plist in postings.values()),
        W=len(postings),
    )
    _store_norms(index, postings)
    index.rebuild_access_paths()
    return index


def evaluate_query(index: SearchIndex, text: str, k: int = 10,
                   chunk_size: int = DEFAULT_CHUNK_SIZE,
                   timings: dict | None = None) -> list[RankedResult]:
    """Top-k documents by cosine similarity.

    ``timings``, when given, receives the nanoseconds spent in each
    elementary query (``q_word``, ``q_occ``, ``q_doc``); accumulation and
    ranking are not counted.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    clock = time.perf_counter_ns
    query_tf = Counter(tokenize(text))
    spent = {"q_word": 0, "q_occ": 0, "q_doc": 0}
    if not query_tf:
        _merge(timings, spent)
        return []

    n_docs = index.stats.D
    if index.kind.has_word_table:
        t0 = clock()
        hits = q_word(index, list(query_tf))
        spent["q_word"] = clock() - t0
        if not hits:
            _merge(timings, spent)
            return []
        names = {h.word_id: h.name for h in hits}
        dfs = {h.word_id: h.df for h in hits}
        t0 = clock()
        occurrences = q_occ(index, [h.word_id for h in hits])
        spent["q_occ"] = clock() - t0
        terms = [(names[o.key], dfs[o.key], o.postings) for o in occurrences]
    else:
        t0 = clock()
        occurrences = q_occ(index, list(query_tf))
        spent["q_occ"] = clock() - t0
        terms = [(o.key, o.df, o.postings) for o in occurrences]

    acc: dict[int, float] = {}
    q_square = 0.0
    for name, df, postings in terms:
        w = idf(n_docs, df)
        wq = query_tf[name] * w
        q_square += wq * wq
        for doc_id, tf in postings:
            acc[doc_id] = acc.get(doc_id, 0.0) + tf * w * wq
    q_norm = math.sqrt(q_square)
    if not acc or q_norm == 0.0:
        _merge(timings, spent)
        return []

    t0 = clock()
    docs = q_doc(index, acc.keys(), chunk_size)
    spent["q_doc"] = clock() - t0
    _merge(timings, spent)

    results = [RankedResult(doc_id, acc[doc_id] / (norm * q_norm), rank)
               for doc_id, norm, rank in docs if norm > 0.0]
    results.sort(key=lambda r: (-r.score, r.doc_id))
    return results[:k]


def _merge(timings, spent):
    if timings is not None:
        for key, value in spent.items():
            timings[key] = timings.get(key, 0) + value


def expand_query(index: SearchIndex, text: str, n_docs: int = 5,
                 n_terms: int = 5) -> list[str]:
    """Terms with the highest tf sum over the top documents of a query."""
    if n_docs < 1 or n_terms < 1:
        raise ValueError("n_docs and n_terms must be >= 1")
    top = evaluate_query(index, text, k=n_docs)
    own = set(tokenize(text))
    sums: Counter = Counter()
    for result in top:
        for term, tf in doc_terms(index, result.doc_id):
            if term not in own:
                sums[term] += tf
    ranked = sorted(sums.items(), key=lambda item: (-item[1], item[0]))
    return [term for term, _ in ranked[:n_terms]]
