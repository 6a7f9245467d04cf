"""Typed tuple storage on fixed-size pages.

Every tuple is serialized as ``tuple_overhead_bytes`` of (zeroed) header
followed by its fields.  Pages carry no header, so the byte count of a
table is exactly the sum of its tuple sizes and the page count follows
from first-fit packing of those sizes.

Field encodings (little endian):

    int            field_bytes signed integer
    float          field_bytes IEEE float (float4 or float8)
    text           string_header_bytes length prefix + UTF-8 payload
    posting_array  packed (doc_id, tf) elements of posting_element_bytes each
    posting_map    (key, value) text pairs, each side length prefixed

A schema may hold at most one collection field and no text field after it;
the collection's extent is recovered from the tuple length.
"""

from __future__ import annotations

import math
import os
import struct
from array import array
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np


class SchemaError(ValueError):
    """A row does not conform to the table schema."""


class FieldKind(str, Enum):
    INT = "int"
    FLOAT = "float"
    TEXT = "text"
    POSTING_ARRAY = "posting_array"
    POSTING_MAP = "posting_map"


COLLECTION_KINDS = (FieldKind.POSTING_ARRAY, FieldKind.POSTING_MAP)

_INT_CODES = {4: "i", 8: "q"}
_FLOAT_CODES = {4: "f", 8: "d"}
_LEN_CODES = {1: "B", 2: "H", 4: "I", 8: "Q"}


@dataclass(frozen=True)
class CostModel:
    """Byte costs every size number derives from.

    ``tuple_overhead_bytes`` and ``field_bytes`` are the ``t`` and ``f`` of
    the analytic size formulas.  ``posting_element_bytes`` is either two
    fields (an int/float composite) or 16 (a pair of float8, the point
    encoding).
    """

    tuple_overhead_bytes: int = 40
    field_bytes: int = 4
    page_bytes: int = 8192
    string_header_bytes: int = 4
    posting_element_bytes: int = 8

    def __post_init__(self):
        for name in ("tuple_overhead_bytes", "field_bytes", "page_bytes",
                     "string_header_bytes", "posting_element_bytes"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.field_bytes not in _INT_CODES:
            raise ValueError(f"field_bytes must be 4 or 8, got {self.field_bytes}")
        if self.string_header_bytes not in _LEN_CODES:
            raise ValueError(
                f"string_header_bytes must be 1, 2, 4 or 8, got {self.string_header_bytes}")
        if self.posting_element_bytes not in (2 * self.field_bytes, 16):
            raise ValueError(
                f"posting_element_bytes must be {2 * self.field_bytes} or 16, "
                f"got {self.posting_element_bytes}")

    @property
    def point_encoding(self) -> bool:
        return self.posting_element_bytes != 2 * self.field_bytes

    def element_dtype(self) -> np.dtype:
        if self.point_encoding:
            return np.dtype([("doc_id", "<f8"), ("tf", "<f8")])
        f = self.field_bytes
        return np.dtype([("doc_id", f"<i{f}"), ("tf", f"<f{f}")])

    def text_cost(self, value: str) -> int:
        return self.string_header_bytes + len(value.encode("utf-8"))


class PostingArray:
    """Decoded posting_array value: parallel doc_id / tf columns."""

    __slots__ = ("doc_ids", "tfs")

    def __init__(self, doc_ids, tfs):
        self.doc_ids = np.asarray(doc_ids, dtype=np.int64)
        self.tfs = np.asarray(tfs, dtype=np.float64)
        if self.doc_ids.shape != self.tfs.shape or self.doc_ids.ndim != 1:
            raise SchemaError("doc_ids and tfs must be 1-d arrays of equal length")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> PostingArray:
        pairs = list(pairs)
        if not pairs:
            return cls(np.empty(0, np.int64), np.empty(0, np.float64))
        arr = np.asarray(pairs, dtype=np.float64).reshape(len(pairs), 2)
        return cls(arr[:, 0].astype(np.int64), arr[:, 1])

    def __len__(self):
        return len(self.doc_ids)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return iter(self.pairs())

    def __eq__(self, other):
        if not isinstance(other, PostingArray):
            return NotImplemented
        return (np.array_equal(self.doc_ids, other.doc_ids)
                and np.array_equal(self.tfs, other.tfs))

    __hash__ = None

    def __repr__(self):
        return f"PostingArray({self.pairs()!r})"

    def pairs(self) -> list[tuple[int, float]]:
        return list(zip(self.doc_ids.tolist(), self.tfs.tolist()))

    def find(self, doc_id: int) -> float | None:
        """tf stored for ``doc_id``, or None (binary search)."""
        i = int(np.searchsorted(self.doc_ids, doc_id))
        if i < len(self.doc_ids) and self.doc_ids[i] == doc_id:
            return float(self.tfs[i])
        return None


def _is_int(value) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def _is_decimal(text) -> bool:
    return isinstance(text, str) and text.isascii() and text.isdigit()


class _Codec:
    """Row encoder/decoder compiled from a schema and a cost model."""

    def __init__(self, schema: Sequence[tuple[str, FieldKind]], cost: CostModel):
        self.cost = cost
        self.names = [name for name, _ in schema]
        self.kinds = [FieldKind(kind) for _, kind in schema]
        n_coll = sum(k in COLLECTION_KINDS for k in self.kinds)
        if n_coll > 1:
            raise SchemaError("at most one collection field per schema")
        if n_coll:
            at = next(i for i, k in enumerate(self.kinds) if k in COLLECTION_KINDS)
            if FieldKind.TEXT in self.kinds[at + 1:]:
                raise SchemaError("text fields may not follow a collection field")
        f = cost.field_bytes
        self._int = struct.Struct("<" + _INT_CODES[f])
        self._float = struct.Struct("<" + _FLOAT_CODES[f])
        self._len = struct.Struct("<" + _LEN_CODES[cost.string_header_bytes])
        self._int_min = -(1 << (8 * f - 1))
        self._int_max = (1 << (8 * f - 1)) - 1
        self._dtype = cost.element_dtype()
        self.fixed = all(k in (FieldKind.INT, FieldKind.FLOAT) for k in self.kinds)
        if self.fixed:
            codes = "".join(_INT_CODES[f] if k is FieldKind.INT else _FLOAT_CODES[f]
                            for k in self.kinds)
            self._row_struct = struct.Struct(f"<{cost.tuple_overhead_bytes}x{codes}")
        # fixed-width bytes that trail the collection field
        self._tail_fixed = 0
        if n_coll:
            self._tail_fixed = f * (len(self.kinds) - 1 - at)
        self._segments = self._compile_segments()
        self._decoders = {}

    # -- encoding ---------------------------------------------------------

    def encode(self, row) -> bytes:
        if not isinstance(row, (tuple, list)) or len(row) != len(self.kinds):
            raise SchemaError(
                f"row arity {len(row) if isinstance(row, (tuple, list)) else '?'} "
                f"does not match schema arity {len(self.kinds)}")
        for name, kind, value in zip(self.names, self.kinds, row):
            self._check(name, kind, value)
        if self.fixed:
            return self._row_struct.pack(*row)
        parts = [bytes(self.cost.tuple_overhead_bytes)]
        for kind, value in zip(self.kinds, row):
            parts.append(self._encode_field(kind, value))
        return b"".join(parts)

    def _check(self, name, kind, value):
        if kind is FieldKind.INT:
            if not _is_int(value) or not self._int_min <= value <= self._int_max:
                raise SchemaError(f"{name}: expected int, got {value!r}")
        elif kind is FieldKind.FLOAT:
            if not (_is_int(value) or isinstance(value, (float, np.floating))):
                raise SchemaError(f"{name}: expected float, got {value!r}")
        elif kind is FieldKind.TEXT:
            if not isinstance(value, str):
                raise SchemaError(f"{name}: expected str, got {value!r}")
        elif kind is FieldKind.POSTING_ARRAY:
            if not isinstance(value, PostingArray):
                try:
                    value = PostingArray.from_pairs(value)
                except (TypeError, ValueError) as exc:
                    raise SchemaError(f"{name}: expected (doc_id, tf) pairs") from exc
            if len(value) > 1 and not np.all(np.diff(value.doc_ids) > 0):
                raise SchemaError(f"{name}: posting_array not sorted by ascending doc_id")
        else:
            pairs = list(value.items()) if isinstance(value, Mapping) else list(value)
            prev = None
            for pair in pairs:
                if len(pair) != 2 or not (_is_decimal(pair[0]) and _is_decimal(pair[1])):
                    raise SchemaError(f"{name}: posting_map entries must be decimal text pairs")
                key = int(pair[0])
                if prev is not None and key <= prev:
                    raise SchemaError(f"{name}: posting_map not sorted by ascending doc_id")
                prev = key

    def _encode_field(self, kind, value) -> bytes:
        if kind is FieldKind.INT:
            return self._int.pack(value)
        if kind is FieldKind.FLOAT:
            return self._float.pack(value)
        if kind is FieldKind.TEXT:
            raw = value.encode("utf-8")
            return self._len.pack(len(raw)) + raw
        if kind is FieldKind.POSTING_ARRAY:
            if not isinstance(value, PostingArray):
                value = PostingArray.from_pairs(value)
            packed = np.empty(len(value), dtype=self._dtype)
            packed["doc_id"] = value.doc_ids
            packed["tf"] = value.tfs
            return packed.tobytes()
        pairs = value.items() if isinstance(value, Mapping) else value
        out = []
        for key, val in pairs:
            kb, vb = key.encode("ascii"), val.encode("ascii")
            out.append(self._len.pack(len(kb)) + kb + self._len.pack(len(vb)) + vb)
        return b"".join(out)

    def field_cost(self, kind, value) -> int:
        f = self.cost.field_bytes
        if kind in (FieldKind.INT, FieldKind.FLOAT):
            return f
        if kind is FieldKind.TEXT:
            return self.cost.text_cost(value)
        if kind is FieldKind.POSTING_ARRAY:
            return len(value) * self.cost.posting_element_bytes
        pairs = value.items() if isinstance(value, Mapping) else value
        h = self.cost.string_header_bytes
        return sum(2 * h + len(k) + len(v) for k, v in pairs)

    # -- decoding ---------------------------------------------------------

    def _compile_segments(self):
        # Fixed fields are fused with the length header of a following text
        # field (or with nothing, before a collection) into one Struct.
        f = self.cost.field_bytes
        segments = []
        codes, width = "", 0
        for i, kind in enumerate(self.kinds):
            if kind is FieldKind.INT:
                codes += _INT_CODES[f]
                width += 1
            elif kind is FieldKind.FLOAT:
                codes += _FLOAT_CODES[f]
                width += 1
            elif kind is FieldKind.TEXT:
                codes += _LEN_CODES[self.cost.string_header_bytes]
                segments.append((struct.Struct("<" + codes), width, kind, i))
                codes, width = "", 0
            else:
                segments.append((struct.Struct("<" + codes), width, kind, i))
                codes, width = "", 0
        segments.append((struct.Struct("<" + codes), width, None, None))
        return segments

    def decode(self, buf, offset: int, length: int, columns=None) -> tuple:
        return self.decoder(columns)(buf, offset, length)

    def decoder(self, columns=None):
        """Decoding function ``(buf, offset, length) -> row`` for a projection.

        The function body is generated once per projection: fixed fields
        and text length headers are unpacked with fused Structs, and text
        columns outside the projection are skipped without decoding.
        """
        key = None if columns is None else tuple(columns)
        fn = self._decoders.get(key)
        if fn is None:
            fn = self._decoders[key] = self._generate(key)
        return fn

    def _generate(self, columns):
        wanted = range(len(self.kinds)) if columns is None else columns
        env = {"_coll": self._decode_collection}
        lines = [f"def _decode(buf, off, length):",
                 f"    pos = off + {self.cost.tuple_overhead_bytes}"]
        col = 0
        for n, (st, width, tail, at) in enumerate(self._segments):
            env[f"_s{n}"] = st.unpack_from
            names = [f"v{col + i}" for i in range(width)]
            if tail is FieldKind.TEXT:
                names.append("n")
            if names:
                target = ", ".join(names) + ("," if len(names) == 1 else "")
                lines.append(f"    {target} = _s{n}(buf, pos)")
                if tail is not None or n + 1 < len(self._segments):
                    lines.append(f"    pos += {st.size}")
            col += width
            if tail is FieldKind.TEXT:
                if at in wanted:
                    lines.append(f"    v{at} = buf[pos:pos + n].decode('utf-8')")
                lines.append("    pos += n")
                col += 1
            elif tail is not None:
                env["_kind"] = tail
                lines.append(f"    v{at} = _coll(_kind, buf, pos, off + length - {self._tail_fixed})")
                lines.append(f"    pos = off + length - {self._tail_fixed}")
                col += 1
        items = ", ".join(f"v{i}" for i in wanted)
        lines.append(f"    return ({items}{',' if len(wanted) == 1 else ''})")
        exec("\n".join(lines), env)
        return env["_decode"]

    def _decode_collection(self, kind, buf, start, stop):
        if kind is FieldKind.POSTING_ARRAY:
            count = (stop - start) // self._dtype.itemsize
            view = np.frombuffer(buf, dtype=self._dtype, count=count, offset=start)
            decoded = PostingArray(view["doc_id"].astype(np.int64),
                                   view["tf"].astype(np.float64))
            del view
            return decoded
        out = {}
        h = self._len.size
        unpack = self._len.unpack_from
        pos = start
        while pos < stop:
            n = unpack(buf, pos)[0]
            key = bytes(buf[pos + h:pos + h + n]).decode("ascii")
            pos += h + n
            m = unpack(buf, pos)[0]
            out[key] = bytes(buf[pos + h:pos + h + m]).decode("ascii")
            pos += h + m
        return out


def tuple_size(cost: CostModel, row: Sequence, kinds: Sequence[FieldKind] | None = None) -> int:
    """Bytes a row occupies: tuple overhead plus the cost of each field.

    Without ``kinds`` the field kinds are inferred from the Python values
    (int, float, str, PostingArray / pair list, mapping).
    """
    if not row:
        raise ValueError("row must be non-empty")
    if kinds is None:
        kinds = [_infer_kind(v) for v in row]
    codec = _Codec([(f"c{i}", k) for i, k in enumerate(kinds)], cost)
    return cost.tuple_overhead_bytes + sum(
        codec.field_cost(k, v) for k, v in zip(codec.kinds, row))


def _infer_kind(value) -> FieldKind:
    if _is_int(value):
        return FieldKind.INT
    if isinstance(value, (float, np.floating)):
        return FieldKind.FLOAT
    if isinstance(value, str):
        return FieldKind.TEXT
    if isinstance(value, Mapping):
        return FieldKind.POSTING_MAP
    return FieldKind.POSTING_ARRAY


@dataclass(frozen=True)
class TableStats:
    tuples: int
    bytes: int
    pages: int


class _FreeSpace:
    """Max segment tree over per-page free bytes (leftmost-fit search)."""

    def __init__(self):
        self._size = 1
        self._tree = [0, 0]

    def _grow(self, n):
        while self._size < n:
            old = self._tree[self._size:2 * self._size]
            self._size *= 2
            self._tree = [0] * (2 * self._size)
            self._tree[self._size:self._size + len(old)] = old
            for i in range(self._size - 1, 0, -1):
                self._tree[i] = max(self._tree[2 * i], self._tree[2 * i + 1])

    def set(self, page, free):
        self._grow(page + 1)
        i = page + self._size
        tree = self._tree
        tree[i] = free
        i >>= 1
        while i:
            v = max(tree[2 * i], tree[2 * i + 1])
            if tree[i] == v:
                break
            tree[i] = v
            i >>= 1

    def get(self, page):
        return self._tree[page + self._size] if page < self._size else 0

    @property
    def max(self):
        return self._tree[1]

    def leftmost(self, need):
        tree = self._tree
        i = 1
        while i < self._size:
            i = 2 * i if tree[2 * i] >= need else 2 * i + 1
        return i - self._size


class HeapTable:
    """Append-only heap of typed tuples packed first-fit onto pages."""

    def __init__(self, name: str, schema: Sequence[tuple[str, FieldKind | str]],
                 cost: CostModel | None = None):
        self.name = name
        self.cost = cost or CostModel()
        self.schema = [(attr, FieldKind(kind)) for attr, kind in schema]
        self._codec = _Codec(self.schema, self.cost)
        self._reset()

    def _reset(self):
        self._fd = None
        self._base = 0
        self._data = bytearray()
        self._offsets = array("q")
        self._lengths = array("q")
        self._free = _FreeSpace()
        self._current = -1           # page receiving appends
        self._current_free = 0
        self._stats = TableStats(0, 0, 0)

    # -- schema helpers ---------------------------------------------------

    @property
    def attributes(self) -> list[str]:
        return [name for name, _ in self.schema]

    def column(self, attribute: str) -> int:
        try:
            return self.attributes.index(attribute)
        except ValueError:
            raise KeyError(f"table {self.name!r} has no attribute {attribute!r}") from None

    def kind_of(self, attribute: str) -> FieldKind:
        return self.schema[self.column(attribute)][1]

    def row_size(self, row) -> int:
        return tuple_size(self.cost, row, [k for _, k in self.schema])

    # -- loading ----------------------------------------------------------

    def copy_into(self, rows: Iterable) -> int:
        """Bulk append, all-or-nothing; no access paths are maintained."""
        self._writable()
        staged = bytearray()
        sizes = array("q")
        encode = self._codec.encode
        for row in rows:
            raw = encode(row)
            staged += raw
            sizes.append(len(raw))
        if not sizes:
            return 0
        page = self.cost.page_bytes
        data = self._data
        src = 0
        nbytes = 0
        for size in sizes:
            if size > page:
                n_pages = -(-size // page)
                offset = len(data)
                data.extend(bytes(n_pages * page))
                for p in range(offset // page, offset // page + n_pages):
                    self._free.set(p, 0)
            elif self._free.max >= size:
                p = self._free.leftmost(size)
                free = self._free.get(p)
                offset = p * page + (page - free)
                self._free.set(p, free - size)
            else:
                if self._current_free < size:
                    if self._current >= 0:
                        self._free.set(self._current, self._current_free)
                    self._current = len(data) // page
                    self._current_free = page
                    data.extend(bytes(page))
                    # placeholder: the append page is tracked outside the tree
                    self._free.set(self._current, 0)
                offset = self._current * page + (page - self._current_free)
                self._current_free -= size
            data[offset:offset + size] = staged[src:src + size]
            self._offsets.append(offset)
            self._lengths.append(size)
            src += size
            nbytes += size
        self._stats = TableStats(len(self._offsets), self._stats.bytes + nbytes,
                                 len(data) // page)
        return len(sizes)

    def update_in_place(self, position: int, row) -> None:
        """Overwrite a tuple with a row of identical size."""
        self._writable()
        raw = self._codec.encode(row)
        if len(raw) != self._lengths[position]:
            raise SchemaError(
                f"in-place update must keep tuple size {self._lengths[position]}, got {len(raw)}")
        offset = self._offsets[position]
        self._data[offset:offset + len(raw)] = raw

    def truncate(self) -> None:
        self._reset()

    # -- reading ----------------------------------------------------------
    #
    # Tuples are always decoded from page images obtained through
    # _read_pages: a copy out of the in-memory heap, or a positional read of
    # the table file when the table was opened from disk.  Consecutive
    # tuples on one page share a single read.

    def _read_pages(self, first: int, count: int):
        size = self.cost.page_bytes
        if self._fd is None:
            return self._data[first * size:(first + count) * size]
        return os.pread(self._fd, count * size, self._base + first * size)

    def __len__(self):
        return len(self._offsets)

    def stats(self) -> TableStats:
        return self._stats

    def fetch(self, position: int, columns: Sequence[int] | None = None) -> tuple:
        return self.fetch_many((position,), columns)[0]

    def fetch_many(self, positions: Iterable[int],
                   columns: Sequence[int] | None = None) -> list[tuple]:
        size = self.cost.page_bytes
        decode = self._codec.decoder(columns)
        offsets, lengths = self._offsets, self._lengths
        read = self._read_pages
        out = []
        append = out.append
        current = -1
        page = None
        base = 0
        for p in positions:
            offset = offsets[p]
            first = offset // size
            if first != current:
                length = lengths[p]
                if length > size:
                    append(decode(read(first, -(-length // size)), 0, length))
                    current = -1
                    continue
                page = read(first, 1)
                current = first
                base = first * size
            append(decode(page, offset - base, lengths[p]))
        return out

    def scan(self, columns: Sequence[int] | None = None) -> Iterator[tuple[int, tuple]]:
        """Yield ``(position, row)`` for every tuple in insertion order."""
        return self._read(range(len(self._offsets)), columns)

    def _read(self, positions, columns):
        size = self.cost.page_bytes
        decode = self._codec.decoder(columns)
        offsets, lengths = self._offsets, self._lengths
        read = self._read_pages
        current = -1
        page = None
        for p in positions:
            offset = offsets[p]
            length = lengths[p]
            first = offset // size
            if length > size:
                yield p, decode(read(first, -(-length // size)), 0, length)
                current = -1
                continue
            if first != current:
                page = read(first, 1)
                current = first
            yield p, decode(page, offset - first * size, length)

    def rows(self) -> list[tuple]:
        return [row for _, row in self.scan()]

    def tuple_lengths(self) -> list[int]:
        return self._lengths.tolist()

    def pages_read(self, positions: Iterable[int]) -> int:
        """Page reads a fetch of ``positions`` (in that order) performs."""
        size = self.cost.page_bytes
        reads, current = 0, -1
        for p in positions:
            first = self._offsets[p] // size
            if self._lengths[p] > size:
                reads += 1
                current = -1
            elif first != current:
                reads += 1
                current = first
        return reads

    # -- persistence ------------------------------------------------------
    #
    # File layout: fixed header, tuple offsets (int64), tuple lengths
    # (int64), then the page images.

    _MAGIC = b"ORTB0001"
    _HEADER = struct.Struct("<8sqqqqq")

    @property
    def read_only(self) -> bool:
        return self._fd is not None

    def _writable(self):
        if self._fd is not None:
            raise PermissionError(f"table {self.name!r} was opened read-only from disk")

    def to_bytes(self) -> bytes:
        self._writable()
        header = self._HEADER.pack(self._MAGIC, self.cost.page_bytes, len(self._offsets),
                                   self._stats.bytes, self._current, self._current_free)
        return b"".join([header, self._offsets.tobytes(), self._lengths.tobytes(),
                         bytes(self._data)])

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    def _restore_header(self, head: bytes):
        magic, page, n, nbytes, current, current_free = self._HEADER.unpack_from(head, 0)
        if magic != self._MAGIC or page != self.cost.page_bytes:
            raise ValueError(f"table file for {self.name!r} is corrupt or uses another page size")
        pos = self._HEADER.size
        self._offsets.frombytes(head[pos:pos + 8 * n])
        pos += 8 * n
        self._lengths.frombytes(head[pos:pos + 8 * n])
        pos += 8 * n
        self._current, self._current_free = current, current_free
        self._nbytes_on_load = nbytes
        return pos

    def _restore_free_space(self, n_pages: int):
        page = self.cost.page_bytes
        offsets = np.frombuffer(self._offsets, dtype=np.int64)
        lengths = np.frombuffer(self._lengths, dtype=np.int64)
        small = lengths <= page
        used = np.bincount(offsets[small] // page, weights=lengths[small], minlength=n_pages)
        free = page - used.astype(np.int64)
        for off, length in zip(offsets[~small].tolist(), lengths[~small].tolist()):
            free[off // page:off // page + -(-length // page)] = 0
        if self._current >= 0:
            free[self._current] = 0
        for p, room in enumerate(free.tolist()):
            if room:
                self._free.set(p, room)
        del offsets, lengths
        self._stats = TableStats(len(self._offsets), self._nbytes_on_load, n_pages)

    @classmethod
    def from_bytes(cls, name, schema, cost: CostModel, blob: bytes) -> HeapTable:
        table = cls(name, schema, cost)
        pos = table._restore_header(blob)
        table._data = bytearray(blob[pos:])
        table._restore_free_space(len(table._data) // cost.page_bytes)
        return table

    @classmethod
    def load(cls, path, name, schema, cost: CostModel) -> HeapTable:
        with open(path, "rb") as fh:
            return cls.from_bytes(name, schema, cost, fh.read())

    @classmethod
    def open(cls, path, name, schema, cost: CostModel) -> HeapTable:
        """Read-only table whose pages stay on disk and are read on demand."""
        table = cls(name, schema, cost)
        with open(path, "rb") as fh:
            head = fh.read(cls._HEADER.size)
            n = cls._HEADER.unpack_from(head, 0)[2]
            head += fh.read(16 * n)
        base = table._restore_header(head)
        table._fd = os.open(path, os.O_RDONLY)
        table._base = base
        n_pages = (os.fstat(table._fd).st_size - base) // cost.page_bytes
        table._stats = TableStats(n, table._nbytes_on_load, n_pages)
        return table

    def close(self) -> None:
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None
            self._reset()

    def __del__(self):
        fd = getattr(self, "_fd", None)
        if fd is not None:
            os.close(fd)


def copy_into(table: HeapTable, rows: Iterable) -> int:
    return table.copy_into(rows)


def table_stats(table: HeapTable) -> TableStats:
    return table.stats()


def pages_for(sizes: Iterable[int], page_bytes: int) -> int:
    """Reference first-fit page count for a sequence of tuple sizes.

    Quadratic; used to cross-check the packed layout.
    """
    free: list[int] = []
    dedicated = 0
    for size in sizes:
        if size > page_bytes:
            dedicated += math.ceil(size / page_bytes)
            continue
        for i, room in enumerate(free):
            if room >= size:
                free[i] -= size
                break
        else:
            free.append(page_bytes - size)
    return len(free) + dedicated
