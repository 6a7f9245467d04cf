"""Equality access paths over heap table attributes.

Three kinds are offered:

* ``btree``        bulk-loaded B+Tree; leaves map key -> row positions
* ``hash``         static hash index, directory sized for load factor 0.75
* ``key_inverted`` B+Tree over the keys of a posting_map attribute, so a
                   lookup of a key finds every row whose map contains it

All indices are built from a full scan of the table and are immutable
afterwards.  After more rows are copied in, ``rebuild`` brings an index back
in line with the table (drop / load / rebuild).
"""

from __future__ import annotations

import math
import time
import zlib
from bisect import bisect_left, bisect_right
from collections.abc import Iterable
from dataclasses import dataclass

from .storage import FieldKind, HeapTable

INDEX_KINDS = ("btree", "hash", "key_inverted")
HASH_LOAD_FACTOR = 0.75
HASH_CODE_BYTES = 4


class UnsupportedIndexError(ValueError):
    pass


@dataclass(frozen=True)
class IndexStats:
    kind: str
    attribute: str
    pages: int
    build_millis: float


class _Leaf:
    __slots__ = ("keys", "rows", "next", "pages")

    def __init__(self):
        self.keys = []
        self.rows = []
        self.next = None
        self.pages = 1


class _Inner:
    __slots__ = ("keys", "children")

    def __init__(self, keys, children):
        self.keys = keys
        self.children = children


class _Index:
    kind = ""

    def __init__(self, table: HeapTable, attribute: str):
        self.table = table
        self.attribute = attribute
        self.pages = 0
        self.build_millis = 0.0
        self.dropped = False
        self.rebuild()

    # subclasses fill these in
    def _load(self, entries: dict) -> None:
        raise NotImplementedError

    def _keys_of(self, value) -> Iterable:
        return (value,)

    def _collect(self) -> dict:
        entries: dict = {}
        col = self.table.column(self.attribute)
        for pos, (value,) in self.table.scan(columns=(col,)):
            for key in self._keys_of(value):
                bucket = entries.get(key)
                if bucket is None:
                    entries[key] = [pos]
                else:
                    bucket.append(pos)
        return entries

    def rebuild(self):
        start = time.perf_counter()
        self._load(self._collect())
        self.build_millis = (time.perf_counter() - start) * 1000.0
        self.dropped = False
        return self

    def drop(self) -> None:
        self._load({})
        self.pages = 0
        self.dropped = True

    def _check_live(self):
        if self.dropped:
            raise RuntimeError(f"{self.kind} index on {self.table.name}.{self.attribute} was dropped")

    def _key_bytes(self, key) -> int:
        cost = self.table.cost
        if isinstance(key, str):
            return cost.text_cost(key)
        return cost.field_bytes

    def stats(self) -> IndexStats:
        return IndexStats(self.kind, f"{self.table.name}.{self.attribute}",
                          self.pages, self.build_millis)

    def lookup(self, key) -> list[int]:
        raise NotImplementedError

    def lookup_many(self, keys: Iterable) -> list[int]:
        """Row positions matching any key, ascending."""
        out: list[int] = []
        for key in set(keys):
            out.extend(self.lookup(key))
        out.sort()
        return out

    def mapping(self) -> dict:
        raise NotImplementedError


class BPlusTreeIndex(_Index):
    """B+Tree bulk-loaded bottom-up from the sorted key set.

    Leaves are filled greedily by bytes: each entry costs its key plus one
    row reference per matching row.  An entry larger than a page gets a leaf
    of its own spanning several pages.  Inner nodes hold at most
    ``page_bytes // (key_bytes + ref_bytes)`` children.
    """

    kind = "btree"

    def _load(self, entries):
        page = self.table.cost.page_bytes
        ref = self.table.cost.field_bytes
        keys = sorted(entries)
        leaves = []
        leaf = _Leaf()
        used = 0
        for key in keys:
            rows = entries[key]
            size = self._key_bytes(key) + ref * len(rows)
            if leaf.keys and used + size > page:
                leaves.append(leaf)
                leaf = _Leaf()
                used = 0
            leaf.keys.append(key)
            leaf.rows.append(rows)
            used += size
            if used > page:
                leaf.pages = math.ceil(used / page)
                leaves.append(leaf)
                leaf = _Leaf()
                used = 0
        if leaf.keys or not leaves:
            leaves.append(leaf)
        for left, right in zip(leaves, leaves[1:]):
            left.next = right
        self._first = leaves[0]
        self.pages = sum(lf.pages for lf in leaves)
        self.height = 1

        level = leaves
        while len(level) > 1:
            parents = []
            group, used = [], 0
            for node in level:
                size = self._key_bytes(node.keys[0]) + ref
                if len(group) >= 2 and used + size > page:
                    parents.append(self._inner(group))
                    group, used = [], 0
                group.append(node)
                used += size
            parents.append(self._inner(group))
            self.pages += len(parents)
            self.height += 1
            level = parents
        self._root = level[0]

    @staticmethod
    def _inner(children):
        return _Inner([_first_key(c) for c in children[1:]], children)

    def _leaf_for(self, key) -> _Leaf:
        node = self._root
        while isinstance(node, _Inner):
            node = node.children[bisect_right(node.keys, key)]
        return node

    def lookup(self, key) -> list[int]:
        self._check_live()
        leaf = self._leaf_for(key)
        i = bisect_left(leaf.keys, key)
        if i < len(leaf.keys) and leaf.keys[i] == key:
            return list(leaf.rows[i])
        return []

    def lookup_many(self, keys: Iterable) -> list[int]:
        """Merge a sorted key list against the leaf chain."""
        self._check_live()
        wanted = sorted(set(keys))
        out: list[int] = []
        leaf = None
        for key in wanted:
            if leaf is None or not leaf.keys or key > leaf.keys[-1]:
                leaf = self._leaf_for(key)
            i = bisect_left(leaf.keys, key)
            if i < len(leaf.keys) and leaf.keys[i] == key:
                out.extend(leaf.rows[i])
        out.sort()
        return out

    def leaf_keys(self) -> list:
        """Keys in leaf-chain order."""
        out = []
        leaf = self._first
        while leaf is not None:
            out.extend(leaf.keys)
            leaf = leaf.next
        return out

    def leaf_depths(self) -> set[int]:
        depths = set()

        def walk(node, depth):
            if isinstance(node, _Inner):
                for child in node.children:
                    walk(child, depth + 1)
            else:
                depths.add(depth)

        walk(self._root, 1)
        return depths

    def mapping(self) -> dict:
        self._check_live()
        out = {}
        leaf = self._first
        while leaf is not None:
            for key, rows in zip(leaf.keys, leaf.rows):
                out[key] = list(rows)
            leaf = leaf.next
        return out


def _first_key(node):
    while isinstance(node, _Inner):
        node = node.children[0]
    return node.keys[0]


def stable_hash(key) -> int:
    """32-bit hash that is stable across processes."""
    if isinstance(key, str):
        raw = key.encode("utf-8")
    else:
        raw = int(key).to_bytes(8, "little", signed=True)
    return zlib.crc32(raw)


class HashIndex(_Index):
    """Static hash index bulk-built after loading.

    One index entry (hash code + row reference) per row.  Bucket count is
    chosen so that entries / (buckets * entries_per_page) <= 0.75; buckets
    that still overflow chain extra pages.  Within a bucket entries are kept
    sorted by hash code and probed by binary search.
    """

    kind = "hash"

    def _load(self, entries):
        cost = self.table.cost
        self.bucket_capacity = cost.page_bytes // (HASH_CODE_BYTES + cost.field_bytes)
        n_entries = sum(len(rows) for rows in entries.values())
        self.n_buckets = max(1, math.ceil(n_entries / (self.bucket_capacity * HASH_LOAD_FACTOR)))
        buckets = [[] for _ in range(self.n_buckets)]
        for key, rows in entries.items():
            code = stable_hash(key)
            buckets[code % self.n_buckets].append((code, key, rows))
        self._codes = []
        self._entries = []
        pages = 1  # metapage / directory
        for bucket in buckets:
            bucket.sort(key=lambda e: e[0])
            self._codes.append([e[0] for e in bucket])
            self._entries.append([(e[1], e[2]) for e in bucket])
            count = sum(len(e[2]) for e in bucket)
            pages += max(1, math.ceil(count / self.bucket_capacity))
        self.pages = pages
        self.n_entries = n_entries

    @property
    def load_factor(self) -> float:
        return self.n_entries / (self.n_buckets * self.bucket_capacity)

    def lookup(self, key) -> list[int]:
        self._check_live()
        code = stable_hash(key)
        b = code % self.n_buckets
        codes = self._codes[b]
        entries = self._entries[b]
        i = bisect_left(codes, code)
        while i < len(codes) and codes[i] == code:
            if entries[i][0] == key:
                return list(entries[i][1])
            i += 1
        return []

    def mapping(self) -> dict:
        self._check_live()
        return {key: list(rows) for bucket in self._entries for key, rows in bucket}


class KeyInvertedIndex(BPlusTreeIndex):
    """Index from posting_map keys to the rows whose map holds them."""

    kind = "key_inverted"

    def _keys_of(self, value):
        return value.keys()


def build_index(table: HeapTable, attribute: str, kind: str) -> _Index:
    field = table.kind_of(attribute)
    if kind == "key_inverted":
        if field is not FieldKind.POSTING_MAP:
            raise UnsupportedIndexError(
                f"key_inverted index on {table.name}.{attribute} ({field.value}) is unsupported")
        return KeyInvertedIndex(table, attribute)
    if kind in ("btree", "hash"):
        if field not in (FieldKind.INT, FieldKind.TEXT):
            raise UnsupportedIndexError(
                f"{kind} index on {table.name}.{attribute} ({field.value}) is unsupported")
        cls = BPlusTreeIndex if kind == "btree" else HashIndex
        return cls(table, attribute)
    raise UnsupportedIndexError(f"unknown index kind {kind!r} for {table.name}.{attribute}")


def lookup(index, key) -> list[int]:
    return index.lookup(key)


def drop_index(index) -> None:
    index.drop()


def rebuild_index(index):
    return index.rebuild()
