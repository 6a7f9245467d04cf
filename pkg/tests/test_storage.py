import math
import os

import numpy as np
import pytest

from orindex.storage import (
    CostModel,
    FieldKind,
    HeapTable,
    PostingArray,
    SchemaError,
    TableStats,
    copy_into,
    pages_for,
    table_stats,
    tuple_size,
)

PR_SCHEMA = [("word_id", FieldKind.INT), ("doc_id", FieldKind.INT), ("tf", FieldKind.FLOAT)]
OR_SCHEMA = [("word_id", FieldKind.INT), ("occur", FieldKind.POSTING_ARRAY)]
DOC_SCHEMA = [("id", FieldKind.INT), ("url", FieldKind.TEXT), ("norm", FieldKind.FLOAT),
              ("rank", FieldKind.FLOAT)]
HOR_SCHEMA = [("word_name", FieldKind.TEXT), ("occur", FieldKind.POSTING_MAP),
              ("df", FieldKind.INT)]
BLOB_SCHEMA = [("id", FieldKind.INT), ("body", FieldKind.TEXT)]


def pr_rows(n, start=1):
    return [(1, d, 1.0) for d in range(start, start + n)]


class TestCostModel:
    def test_defaults(self):
        c = CostModel()
        assert (c.tuple_overhead_bytes, c.field_bytes, c.page_bytes) == (40, 4, 8192)
        assert c.string_header_bytes == 4 and c.posting_element_bytes == 8
        assert not c.point_encoding

    def test_point_encoding(self):
        assert CostModel(posting_element_bytes=16).point_encoding

    @pytest.mark.parametrize("kwargs", [
        {"tuple_overhead_bytes": 0}, {"page_bytes": -1}, {"field_bytes": 0},
        {"posting_element_bytes": 12}, {"field_bytes": 8, "posting_element_bytes": 8},
    ])
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ValueError):
            CostModel(**kwargs)

    def test_text_cost(self):
        assert CostModel().text_cost("u1") == 6
        assert CostModel().text_cost("é") == 6  # utf-8 bytes


class TestTupleSize:
    def test_pr_row(self):
        assert tuple_size(CostModel(), (1, 2, 1.0)) == 52

    def test_or_row(self):
        arr = PostingArray.from_pairs([(1, 1), (2, 1)])
        assert tuple_size(CostModel(), (1, arr)) == 60

    def test_document_row(self):
        assert tuple_size(CostModel(), (1, "u1", 0.0, 0.0)) == 58

    def test_posting_map(self):
        # (4+1)+(4+1) per entry
        assert tuple_size(CostModel(), ("b", {"1": "1", "2": "1"}, 2)) == 40 + 5 + 20 + 4

    def test_point_elements(self):
        arr = PostingArray.from_pairs([(1, 1), (2, 1)])
        assert tuple_size(CostModel(posting_element_bytes=16), (1, arr)) == 40 + 4 + 32

    def test_additive(self):
        cost = CostModel()
        row = (7, "hello", 2.5, 0.0)
        fields = [tuple_size(cost, (v,)) - cost.tuple_overhead_bytes for v in row]
        assert tuple_size(cost, row) - cost.tuple_overhead_bytes == sum(fields)

    def test_empty_row_rejected(self):
        with pytest.raises(ValueError):
            tuple_size(CostModel(), ())


class TestPostingArray:
    def test_roundtrip_and_find(self):
        arr = PostingArray.from_pairs([(1, 2), (5, 1), (9, 3)])
        assert arr.pairs() == [(1, 2.0), (5, 1.0), (9, 3.0)]
        assert arr.find(5) == 1.0
        assert arr.find(4) is None
        assert len(arr) == 3

    def test_unsorted_rejected_on_encode(self):
        t = HeapTable("occ", OR_SCHEMA)
        with pytest.raises(SchemaError):
            t.copy_into([(1, PostingArray.from_pairs([(3, 1), (2, 1)]))])


class TestCopyInto:
    def test_empty_stream(self):
        t = HeapTable("occ", PR_SCHEMA)
        assert copy_into(t, []) == 0
        assert table_stats(t) == TableStats(0, 0, 0)

    def test_five_pr_rows(self):
        t = HeapTable("occ", PR_SCHEMA)
        assert copy_into(t, pr_rows(5)) == 5
        assert table_stats(t) == TableStats(5, 260, 1)

    def test_bad_arity_rejects_batch(self):
        t = HeapTable("occ", PR_SCHEMA)
        copy_into(t, pr_rows(3))
        before = (table_stats(t), t.rows())
        with pytest.raises(SchemaError):
            copy_into(t, pr_rows(2, start=10) + [(1, 2)])
        assert (table_stats(t), t.rows()) == before

    def test_bad_type_rejected(self):
        t = HeapTable("occ", PR_SCHEMA)
        with pytest.raises(SchemaError):
            copy_into(t, [(1, "x", 1.0)])

    def test_concat_equals_two_calls(self):
        rng = np.random.default_rng(5)
        rows = [(int(i), "x" * int(n)) for i, n in enumerate(rng.integers(1, 3000, 200))]
        a, b = HeapTable("a", BLOB_SCHEMA), HeapTable("b", BLOB_SCHEMA)
        a.copy_into(rows)
        b.copy_into(rows[:77])
        b.copy_into(rows[77:])
        assert a.rows() == b.rows() and a.stats() == b.stats()
        assert a.to_bytes() == b.to_bytes()

    def test_rows_preserved_in_order(self):
        t = HeapTable("doc", DOC_SCHEMA)
        rows = [(i, f"u{i}", i / 3, 0.0) for i in range(1, 50)]
        t.copy_into(rows)
        got = t.rows()
        assert [r[:2] for r in got] == [r[:2] for r in rows]
        # floats are stored at field width
        assert got[4][2] == pytest.approx(5 / 3, rel=1e-6)


class TestTableStats:
    def test_oversized_tuple(self):
        t = HeapTable("blob", BLOB_SCHEMA)
        body = "x" * (20000 - 40 - 4 - 4)
        t.copy_into([(1, body)])
        assert t.stats() == TableStats(1, 20000, 3)
        assert t.fetch(0) == (1, body)

    def test_pages_cover_bytes(self):
        rng = np.random.default_rng(0)
        t = HeapTable("blob", BLOB_SCHEMA)
        t.copy_into((i, "y" * int(n)) for i, n in enumerate(rng.integers(0, 9000, 300)))
        s = t.stats()
        assert s.pages * 8192 >= s.bytes

    def test_first_fit_matches_reference(self):
        rng = np.random.default_rng(1)
        sizes = rng.integers(0, 6000, 400)
        rows = [(int(i), "z" * int(n)) for i, n in enumerate(sizes)]
        t = HeapTable("blob", BLOB_SCHEMA)
        t.copy_into(rows)
        expected = pages_for([tuple_size(t.cost, r, [FieldKind.INT, FieldKind.TEXT])
                              for r in rows], 8192)
        assert t.stats().pages == expected

    def test_bytes_order_independent(self):
        rows = [(i, "q" * (i * 37 % 500)) for i in range(100)]
        a, b = HeapTable("a", BLOB_SCHEMA), HeapTable("b", BLOB_SCHEMA)
        a.copy_into(rows)
        b.copy_into(reversed(rows))
        assert a.stats().bytes == b.stats().bytes

    def test_exact_page_fill(self):
        # 8192 = 157 * 52 + 28: the 158th PR tuple opens a second page
        t = HeapTable("occ", PR_SCHEMA)
        t.copy_into(pr_rows(157))
        assert t.stats().pages == 1
        t.copy_into(pr_rows(1, start=1000))
        assert t.stats().pages == 2


class TestPagesFor:
    def test_examples(self):
        assert pages_for([], 8192) == 0
        assert pages_for([52] * 5, 8192) == 1
        assert pages_for([20000], 8192) == 3

    def test_first_fit_backfills(self):
        # 5000 leaves 3192 free on page 1; 6000 opens page 2; 3000 fits back on page 1
        assert pages_for([5000, 6000, 3000], 8192) == 2


class TestUpdatesAndTruncate:
    def test_update_in_place(self):
        t = HeapTable("doc", DOC_SCHEMA)
        t.copy_into([(1, "u1", 0.0, 0.0), (2, "u2", 0.0, 0.0)])
        t.update_in_place(1, (2, "u2", 0.5, 0.0))
        assert t.fetch(1) == (2, "u2", 0.5, 0.0)
        with pytest.raises(SchemaError):
            t.update_in_place(0, (1, "longer", 0.0, 0.0))

    def test_truncate(self):
        t = HeapTable("occ", PR_SCHEMA)
        t.copy_into(pr_rows(10))
        t.truncate()
        assert t.stats() == TableStats(0, 0, 0) and t.rows() == []


class TestReads:
    def test_projection(self):
        t = HeapTable("doc", DOC_SCHEMA)
        t.copy_into([(i, f"u{i}", float(i), 0.0) for i in range(1, 6)])
        cols = [t.column("id"), t.column("norm")]
        assert t.fetch_many([4, 0], cols) == [(5, 5.0), (1, 1.0)]
        assert [row for _, row in t.scan([t.column("url")])] == [(f"u{i}",) for i in range(1, 6)]

    def test_pages_read(self):
        t = HeapTable("occ", PR_SCHEMA)
        t.copy_into(pr_rows(400))  # 157 per page
        assert t.pages_read([0, 1, 2]) == 1
        assert t.pages_read([0, 200, 1]) == 3
        assert t.pages_read(range(400)) == math.ceil(400 / 157)

    def test_posting_map_roundtrip(self):
        t = HeapTable("occ", HOR_SCHEMA)
        t.copy_into([("b", {"1": "1", "2": "1"}, 2)])
        assert t.fetch(0) == ("b", {"1": "1", "2": "1"}, 2)

    def test_posting_map_rejects_non_decimal(self):
        t = HeapTable("occ", HOR_SCHEMA)
        with pytest.raises(SchemaError):
            t.copy_into([("b", {"x": "1"}, 1)])


class TestPersistence:
    def test_roundtrip(self, tmp_path):
        t = HeapTable("occ", OR_SCHEMA)
        t.copy_into([(w, PostingArray.from_pairs([(d, w) for d in range(1, w * 50)]))
                     for w in range(1, 40)])
        path = tmp_path / "occ.tbl"
        t.save(path)
        loaded = HeapTable.load(path, "occ", OR_SCHEMA, t.cost)
        opened = HeapTable.open(path, "occ", OR_SCHEMA, t.cost)
        try:
            assert loaded.rows() == t.rows() == opened.rows()
            assert loaded.stats() == t.stats() == opened.stats()
            assert opened.read_only
            with pytest.raises(PermissionError):
                opened.copy_into([(99, PostingArray.from_pairs([(1, 1)]))])
        finally:
            opened.close()

    def test_deterministic_files(self, tmp_path):
        rows = [(i, f"u{i}", 0.0, 0.0) for i in range(1, 500)]
        for name in ("a", "b"):
            t = HeapTable("doc", DOC_SCHEMA)
            t.copy_into(rows)
            t.save(tmp_path / name)
        assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()

    def test_loaded_table_keeps_first_fit_state(self, tmp_path):
        rows = [(i, "x" * (i * 131 % 4000)) for i in range(60)]
        more = [(100 + i, "y" * (i * 97 % 3000)) for i in range(60)]
        fresh = HeapTable("blob", BLOB_SCHEMA)
        fresh.copy_into(rows)
        fresh.save(tmp_path / "t")
        fresh.copy_into(more)
        loaded = HeapTable.load(tmp_path / "t", "blob", BLOB_SCHEMA, fresh.cost)
        loaded.copy_into(more)
        assert loaded.to_bytes() == fresh.to_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "junk"
        path.write_bytes(os.urandom(128))
        with pytest.raises(ValueError):
            HeapTable.load(path, "x", BLOB_SCHEMA, CostModel())
