"""The four table layouts of the index and their elementary queries.

    pr   document, word, occurrence(word_id, doc_id, tf)        one row per posting
    or   document, word, occurrence(word_id, occur[])          one row per word
    cor  document, occurrence(word_name, occur[], df)          word table merged in
    hor  document, occurrence(word_name, occur{doc: tf}, df)   text key/value map

Query terms reach postings through q_word (pr/or only) and q_occ; document
norms and ranks come from q_doc.
"""

from __future__ import annotations

import time
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from .access_paths import build_index
from .size_model import CorpusStats
from .storage import CostModel, FieldKind, HeapTable, PostingArray

DEFAULT_CHUNK_SIZE = 250_000


class Representation(str, Enum):
    PR = "pr"
    OR = "or"
    COR = "cor"
    HOR = "hor"

    @property
    def has_word_table(self) -> bool:
        return self in (Representation.PR, Representation.OR)


class PostingEntry(NamedTuple):
    doc_id: int
    tf: int


class WordHit(NamedTuple):
    name: str
    word_id: int
    df: int


class Occurrence(NamedTuple):
    key: int | str
    postings: list[tuple[int, int]]
    df: int | None = None


class UnsupportedQueryError(ValueError):
    pass


DOCUMENT_SCHEMA = [("id", FieldKind.INT), ("url", FieldKind.TEXT),
                   ("norm", FieldKind.FLOAT), ("rank", FieldKind.FLOAT)]
WORD_SCHEMA = [("id", FieldKind.INT), ("name", FieldKind.TEXT), ("df", FieldKind.INT)]
OCCURRENCE_SCHEMAS = {
    Representation.PR: [("word_id", FieldKind.INT), ("doc_id", FieldKind.INT),
                        ("tf", FieldKind.FLOAT)],
    Representation.OR: [("word_id", FieldKind.INT), ("occur", FieldKind.POSTING_ARRAY)],
    Representation.COR: [("word_name", FieldKind.TEXT), ("occur", FieldKind.POSTING_ARRAY),
                         ("df", FieldKind.INT)],
    Representation.HOR: [("word_name", FieldKind.TEXT), ("occur", FieldKind.POSTING_MAP),
                         ("df", FieldKind.INT)],
}


def schemas_for(kind: Representation) -> dict[str, list]:
    out = {"document": DOCUMENT_SCHEMA}
    if kind.has_word_table:
        out["word"] = WORD_SCHEMA
    out["occurrence"] = OCCURRENCE_SCHEMAS[kind]
    return out


@dataclass(frozen=True)
class IndexPlan:
    """Which access paths to build.

    ``kind`` (btree / hash / None) applies to document.id, word.name and the
    occurrence term key (word_id or word_name).  ``pr_doc_index`` adds an
    occurrence.doc_id index for pr; ``hor_key_index`` adds the key-inverted
    index over hor's occur map.
    """

    kind: str | None = "btree"
    pr_doc_index: bool = False
    hor_key_index: bool = False

    def __post_init__(self):
        if self.kind not in ("btree", "hash", None):
            raise ValueError(f"index kind must be btree, hash or none, got {self.kind!r}")

    def paths(self, rep: Representation) -> list[tuple[str, str, str]]:
        """(table, attribute, index kind) triples."""
        out = []
        if self.kind:
            out.append(("document", "id", self.kind))
            if rep.has_word_table:
                out += [("word", "name", self.kind), ("occurrence", "word_id", self.kind)]
            else:
                out.append(("occurrence", "word_name", self.kind))
        if rep is Representation.PR and self.pr_doc_index:
            out.append(("occurrence", "doc_id", self.kind or "btree"))
        if rep is Representation.HOR and self.hor_key_index:
            out.append(("occurrence", "occur", "key_inverted"))
        return out


@dataclass
class SearchIndex:
    kind: Representation
    cost: CostModel
    tables: dict[str, HeapTable]
    stats: CorpusStats
    plan: IndexPlan = field(default_factory=lambda: IndexPlan(None))
    indexes: dict[str, object] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def index_on(self, table: str, attribute: str):
        return self.indexes.get(f"{table}.{attribute}")

    def build_access_paths(self, plan: IndexPlan | None = None) -> None:
        if plan is not None:
            self.plan = plan
        self.indexes = {}
        start = time.perf_counter()
        for table, attribute, kind in self.plan.paths(self.kind):
            self.indexes[f"{table}.{attribute}"] = build_index(self.tables[table], attribute, kind)
        self.timings["index_ms"] = (time.perf_counter() - start) * 1000.0

    def drop_access_paths(self) -> None:
        for index in self.indexes.values():
            index.drop()

    def rebuild_access_paths(self) -> None:
        start = time.perf_counter()
        for index in self.indexes.values():
            index.rebuild()
        self.timings["index_ms"] = (time.perf_counter() - start) * 1000.0


def _posting_map(postings: Sequence[PostingEntry]) -> dict[str, str]:
    return {str(p.doc_id): str(p.tf) for p in postings}


def _array(postings: Sequence[PostingEntry]) -> PostingArray:
    return PostingArray([p.doc_id for p in postings], [p.tf for p in postings])


def occurrence_rows(kind: Representation, postings: Mapping[str, Sequence[PostingEntry]],
                    dfs: Mapping[str, int], word_ids: Mapping[str, int],
                    doc_range: tuple[int, int] | None = None) -> list[tuple]:
    """Occurrence table rows for ``postings``.

    pr rows are document-major (doc_id, then word_id), the order an indexer
    emits them; ``doc_range`` restricts them to ``lo <= doc_id < hi``.
    """
    if kind is Representation.PR:
        triples = [(p.doc_id, word_ids[w], p.tf)
                   for w, plist in postings.items() for p in plist
                   if doc_range is None or doc_range[0] <= p.doc_id < doc_range[1]]
        triples.sort()
        return [(w, d, float(tf)) for d, w, tf in triples]
    if kind is Representation.OR:
        return [(word_ids[w], _array(plist)) for w, plist in postings.items()]
    if kind is Representation.COR:
        return [(w, _array(plist), dfs[w]) for w, plist in postings.items()]
    return [(w, _posting_map(plist), dfs[w]) for w, plist in postings.items()]


def _check_dfs(postings, dfs):
    for word, plist in postings.items():
        if dfs.get(word) != len(plist):
            raise ValueError(
                f"df of {word!r} is {dfs.get(word)} but its posting list has {len(plist)} entries")
    extra = set(dfs) - set(postings)
    if extra:
        raise ValueError(f"df given for words without postings: {sorted(extra)[:5]}")


def build_tables(kind: Representation | str, documents: Sequence[tuple],
                 postings: Mapping[str, Sequence[PostingEntry]], dfs: Mapping[str, int],
                 cost: CostModel | None = None) -> SearchIndex:
    """Load the tables of one representation with copy_into; norms are 0.

    ``documents`` are (id, url) or (id, url, rank); word ids follow the
    iteration order of ``postings``.
    """
    kind = Representation(kind)
    cost = cost or CostModel()
    _check_dfs(postings, dfs)
    tables = {name: HeapTable(name, schema, cost) for name, schema in schemas_for(kind).items()}
    word_ids = {w: i for i, w in enumerate(postings, start=1)}
    timings = {}

    start = time.perf_counter()
    tables["document"].copy_into(
        (d[0], d[1], 0.0, float(d[2]) if len(d) > 2 else 0.0) for d in documents)
    timings["copy_document_ms"] = (time.perf_counter() - start) * 1000.0
    if kind.has_word_table:
        start = time.perf_counter()
        tables["word"].copy_into((word_ids[w], w, dfs[w]) for w in postings)
        timings["copy_word_ms"] = (time.perf_counter() - start) * 1000.0
    start = time.perf_counter()
    tables["occurrence"].copy_into(occurrence_rows(kind, postings, dfs, word_ids))
    timings["copy_occurrence_ms"] = (time.perf_counter() - start) * 1000.0
    timings["copy_ms"] = sum(timings.values())

    stats = CorpusStats(
        N=sum(p.tf for plist in postings.values() for p in plist),
        D=len(documents),
        N_d=sum(len(plist) for plist in postings.values()),
        W=len(postings),
    )
    return SearchIndex(kind, cost, tables, stats, timings=timings)


# -- elementary queries ------------------------------------------------------

def _unique(items: Iterable) -> list:
    return list(dict.fromkeys(items))


def _select(index: SearchIndex, table: str, attribute: str, keys: Sequence,
            columns: Sequence[int]) -> list[tuple]:
    """Rows with ``attribute IN keys`` (access path if built, else scan), row order."""
    heap = index.tables[table]
    path = index.index_on(table, attribute)
    if path is not None:
        return heap.fetch_many(path.lookup_many(keys), columns)
    col = heap.column(attribute)
    wanted = set(keys)
    rows = []
    for _, row in heap.scan():
        if row[col] in wanted:
            rows.append(tuple(row[i] for i in columns))
    return rows


def q_word(index: SearchIndex, terms: Sequence[str]) -> list[WordHit]:
    """ids and dfs of the given terms; unknown terms are omitted."""
    if not index.kind.has_word_table:
        raise UnsupportedQueryError(f"{index.kind.value} has no word table; q_word is not issued")
    terms = _unique(terms)
    if not terms:
        return []
    rows = _select(index, "word", "name", terms, (1, 0, 2))
    return [WordHit(*row) for row in rows]


def q_occ(index: SearchIndex, keys: Sequence) -> list[Occurrence]:
    """Posting lists for word ids (pr/or) or word names (cor/hor).

    Results come in occurrence row order, i.e. ascending word id, with
    postings sorted by doc_id.  cor/hor also return df.
    """
    keys = _unique(keys)
    if not keys:
        raise ValueError("q_occ needs at least one key")
    kind = index.kind
    if kind is Representation.PR:
        groups: dict[int, list] = {}
        for word_id, doc_id, tf in _select(index, "occurrence", "word_id", keys, (0, 1, 2)):
            groups.setdefault(word_id, []).append((doc_id, int(tf)))
        return [Occurrence(w, sorted(groups[w])) for w in sorted(groups)]
    if kind is Representation.OR:
        rows = _select(index, "occurrence", "word_id", keys, (0, 1))
        return [Occurrence(w, _pairs(arr)) for w, arr in rows]
    rows = _select(index, "occurrence", "word_name", keys, (0, 1, 2))
    if kind is Representation.COR:
        return [Occurrence(name, _pairs(arr), df) for name, arr, df in rows]
    return [Occurrence(name, [(int(d), int(tf)) for d, tf in occur.items()], df)
            for name, occur, df in rows]


def _pairs(arr: PostingArray) -> list[tuple[int, int]]:
    return list(zip(arr.doc_ids.tolist(), arr.tfs.astype("int64").tolist()))


def split_in_list(ids: Sequence[int], chunk_size: int) -> list[list[int]]:
    """Blocks of at most ``chunk_size`` ids, one sub-query each."""
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    ids = list(ids)
    return [ids[i:i + chunk_size] for i in range(0, len(ids), chunk_size)]


def q_doc(index: SearchIndex, doc_ids: Iterable[int],
          chunk_size: int = DEFAULT_CHUNK_SIZE) -> list[tuple[int, float, float]]:
    """(id, norm, rank) for the requested documents, ascending id."""
    rows = []
    for block in split_in_list(sorted(set(doc_ids)), chunk_size):
        rows.extend(_select(index, "document", "id", block, (0, 2, 3)))
    rows.sort()
    return rows


def doc_terms(index: SearchIndex, doc_id: int) -> list[tuple[str, int]]:
    """(term, tf) pairs of one document, in word id order."""
    kind = index.kind
    occ = index.tables["occurrence"]
    if kind is Representation.PR:
        path = index.index_on("occurrence", "doc_id")
        if path is not None:
            rows = occ.fetch_many(path.lookup(doc_id), (0, 2))
        else:
            rows = [(w, tf) for _, (w, d, tf) in occ.scan() if d == doc_id]
        return _name_words(index, [(w, int(tf)) for w, tf in rows])
    if kind is Representation.HOR:
        key = str(doc_id)
        path = index.index_on("occurrence", "occur")
        source = occ.fetch_many(path.lookup(key), (0, 1)) if path is not None else (
            (name, occur) for _, (name, occur, _df) in occ.scan())
        return [(name, int(occur[key])) for name, occur in source if key in occur]
    found = []
    for _, row in occ.scan(columns=(0, 1)):
        tf = row[1].find(doc_id)
        if tf is not None:
            found.append((row[0], int(tf)))
    if kind is Representation.OR:
        return _name_words(index, found)
    return found


def _name_words(index: SearchIndex, pairs: list[tuple[int, int]]) -> list[tuple[str, int]]:
    ids = {w for w, _ in pairs}
    names = {w: name for _, (w, name) in index.tables["word"].scan(columns=(0, 1)) if w in ids}
    return [(names[w], tf) for w, tf in sorted(pairs)]


# -- whole-table readers (used by incremental updates) -------------------------

def read_documents(index: SearchIndex) -> list[tuple[int, str, float, float]]:
    return index.tables["document"].rows()


def read_postings(index: SearchIndex) -> dict[str, list[PostingEntry]]:
    """Full posting relation in word id order, rebuilt from the tables."""
    occ = index.tables["occurrence"]
    kind = index.kind
    if kind is Representation.PR:
        names = {w: name for _, (w, name, _df) in index.tables["word"].scan()}
        by_id: dict[int, list] = {w: [] for w in sorted(names)}
        for _, (w, d, tf) in occ.scan():
            by_id[w].append(PostingEntry(d, int(tf)))
        return {names[w]: sorted(plist) for w, plist in by_id.items()}
    if kind is Representation.OR:
        names = {w: name for _, (w, name, _df) in index.tables["word"].scan()}
        rows = sorted(occ.rows(), key=lambda r: r[0])
        return {names[w]: [PostingEntry(d, tf) for d, tf in _pairs(arr)] for w, arr in rows}
    if kind is Representation.COR:
        return {name: [PostingEntry(d, tf) for d, tf in _pairs(arr)]
                for name, arr, _df in occ.rows()}
    return {name: [PostingEntry(int(d), int(tf)) for d, tf in occur.items()]
            for name, occur, _df in occ.rows()}
