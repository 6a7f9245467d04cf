import math
import random

import pytest

from orindex.corpus import Document, GenSpec, generate
from orindex.engine import (
    add_documents,
    bulk_build,
    compute_postings,
    evaluate_query,
    expand_query,
    idf,
    tokenize,
)
from orindex.representations import IndexPlan, Representation, q_doc, read_documents

from oracles import brute_force_expansion, brute_force_scores, c0

REPS = list(Representation)


def state(index):
    """Everything observable about a built index, timings aside."""
    return {
        "tables": {name: t.rows() for name, t in index.tables.items()},
        "stats": index.stats,
        "mappings": {name: p.mapping() for name, p in index.indexes.items()},
    }


class TestTokenize:
    @pytest.mark.parametrize("text,tokens", [
        ("A b, a!", ["a", "b", "a"]),
        ("", []),
        ("tf-idf 2008", ["tf", "idf", "2008"]),
        ("snake_case ÉTÉ", ["snake", "case", "été"]),
    ])
    def test_examples(self, text, tokens):
        assert tokenize(text) == tokens


class TestComputePostings:
    def test_c0(self):
        postings, dfs, stats = compute_postings(c0())
        assert (stats.N, stats.D, stats.W, stats.N_d) == (6, 3, 3, 5)
        assert dfs == {"a": 1, "b": 2, "c": 2}
        assert [tuple(p) for p in postings["b"]] == [(1, 1), (2, 1)]

    def test_single_doc(self):
        postings, dfs, stats = compute_postings([Document("u", "x x x")])
        assert postings["x"][0].tf == 3 and dfs["x"] == 1
        assert (stats.N, stats.N_d) == (3, 1)

    def test_empty(self):
        postings, dfs, stats = compute_postings([])
        assert postings == {} and dfs == {}
        assert (stats.N, stats.D, stats.N_d, stats.W) == (0, 0, 0, 0)


class TestBulkBuild:
    @pytest.mark.parametrize("rep", REPS)
    def test_c0_norms(self, rep):
        index = bulk_build(c0(), rep)
        norms = [row[2] for row in read_documents(index)]
        expected = [math.sqrt((2 * math.log(3)) ** 2 + math.log(1.5) ** 2),
                    math.sqrt(2) * math.log(1.5), math.log(1.5)]
        assert norms == pytest.approx(expected, abs=1e-6)
        assert norms == pytest.approx([2.234323, 0.573414, 0.405465], abs=1e-6)

    def test_single_document(self):
        index = bulk_build([Document("u", "x y")], "or")
        assert read_documents(index)[0][2] == 0.0
        assert evaluate_query(index, "x") == []

    def test_timings(self):
        index = bulk_build(c0(), "pr")
        for key in ("copy_ms", "norms_ms", "index_ms"):
            assert index.timings[key] >= 0

    def test_duplicate_urls(self):
        with pytest.raises(ValueError, match="duplicate url"):
            bulk_build([Document("u", "a"), Document("u", "b")], "or")

    def test_empty_corpus(self):
        index = bulk_build([], "hor", IndexPlan("btree", hor_key_index=True))
        assert all(t.stats().tuples == 0 for t in index.tables.values())
        assert evaluate_query(index, "a") == []

    def test_rank_passthrough(self):
        docs = [Document("u1", "a b", 0.5), Document("u2", "b c", 0.25)]
        index = bulk_build(docs, "cor")
        assert {r.doc_id: r.rank for r in evaluate_query(index, "a c")} == {1: 0.5, 2: 0.25}


class TestEvaluateQuery:
    @pytest.mark.parametrize("rep", REPS)
    def test_c0_b(self, rep):
        results = evaluate_query(bulk_build(c0(), rep), "b", k=10)
        assert [r.doc_id for r in results] == [2, 1]
        assert [r.score for r in results] == pytest.approx([0.707107, 0.181471], abs=1e-6)
        assert [r.rank for r in results] == [0.0, 0.0]

    @pytest.mark.parametrize("rep", REPS)
    def test_unknown_and_empty(self, rep):
        index = bulk_build(c0(), rep)
        assert evaluate_query(index, "z") == []
        assert evaluate_query(index, "") == []

    def test_k(self):
        index = bulk_build(c0(), "or")
        assert len(evaluate_query(index, "b c", k=1)) == 1
        with pytest.raises(ValueError):
            evaluate_query(index, "b", k=0)

    def test_ties_by_doc_id(self):
        docs = [Document(f"u{i}", "x y") for i in range(4)] + [Document("z", "q")]
        results = evaluate_query(bulk_build(docs, "hor"), "x")
        assert [r.doc_id for r in results] == [1, 2, 3, 4]

    def test_brute_force_and_agreement(self):
        docs = generate(GenSpec(docs=120, vocab=200, avg_len=15, seed=9))
        indexes = [bulk_build(docs, rep, IndexPlan("hash")) for rep in REPS]
        rng = random.Random(2)
        vocab = sorted({t for d in docs for t in tokenize(d.text)})
        for _ in range(30):
            query = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 4)))
            oracle = brute_force_scores(docs, query)
            expected = sorted(oracle.items(), key=lambda kv: (-kv[1], kv[0]))[:10]
            runs = [evaluate_query(index, query, k=10) for index in indexes]
            for results in runs:
                assert [r.doc_id for r in results] == [d for d, _ in expected]
                assert [r.score for r in results] == pytest.approx(
                    [s for _, s in expected], abs=1e-6)
                assert all(-1e-9 <= r.score <= 1 + 1e-9 for r in results)
            assert all(run == runs[0] for run in runs)

    def test_timings_accumulate(self):
        index = bulk_build(c0(), "pr")
        spent = {}
        evaluate_query(index, "b", timings=spent)
        evaluate_query(index, "c", timings=spent)
        assert set(spent) == {"q_word", "q_occ", "q_doc"}
        assert all(v > 0 for v in spent.values())
        cor = {}
        evaluate_query(bulk_build(c0(), "cor"), "b", timings=cor)
        assert cor["q_word"] == 0


class TestAddDocuments:
    @pytest.mark.parametrize("rep", REPS)
    def test_c0_split(self, rep):
        plan = IndexPlan("btree", pr_doc_index=True, hor_key_index=True)
        docs = c0()
        grown = add_documents(bulk_build(docs[:2], rep, plan), docs[2:])
        assert state(grown) == state(bulk_build(docs, rep, plan))

    @pytest.mark.parametrize("rep", REPS)
    def test_empty_delta(self, rep):
        index = bulk_build(c0(), rep)
        before = state(index)
        assert state(add_documents(index, [])) == before

    @pytest.mark.parametrize("rep", REPS)
    def test_into_empty(self, rep):
        grown = add_documents(bulk_build([], rep, IndexPlan("hash")), c0())
        assert state(grown) == state(bulk_build(c0(), rep, IndexPlan("hash")))

    def test_duplicate_url(self):
        index = bulk_build(c0(), "or")
        with pytest.raises(ValueError, match="duplicate url"):
            add_documents(index, [Document("u1", "x")])

    def test_random_batches(self):
        docs = generate(GenSpec(docs=90, vocab=150, avg_len=12, seed=5))
        for rep in REPS:
            index = bulk_build(docs[:30], rep, IndexPlan("btree", True, True))
            add_documents(index, docs[30:60])
            add_documents(index, docs[60:])
            assert state(index) == state(bulk_build(docs, rep, IndexPlan("btree", True, True)))


class TestExpandQuery:
    @pytest.mark.parametrize("rep", REPS)
    def test_c0(self, rep):
        index = bulk_build(c0(), rep, IndexPlan("btree", True, True))
        assert expand_query(index, "c", n_docs=2, n_terms=1) == ["b"]
        assert expand_query(index, "c") == ["b"]  # d1 does not match "c"
        assert expand_query(index, "z") == []

    def test_bad_args(self):
        with pytest.raises(ValueError):
            expand_query(bulk_build(c0(), "or"), "c", n_docs=0)

    def test_brute_force(self):
        docs = generate(GenSpec(docs=100, vocab=120, avg_len=15, seed=6))
        for rep in REPS:
            index = bulk_build(docs, rep)
            for query in ("a", "b c", "d e f"):
                oracle = brute_force_scores(docs, query)
                top = [d for d, _ in sorted(oracle.items(), key=lambda kv: (-kv[1], kv[0]))[:5]]
                assert expand_query(index, query) == brute_force_expansion(docs, top, query, 5)


class TestChunking:
    def test_chunk_invariance(self):
        docs = generate(GenSpec(docs=400, vocab=50, avg_len=20, seed=1))
        index = bulk_build(docs, "pr")
        base = evaluate_query(index, "a b", k=400, chunk_size=250000)
        assert len(base) > 300
        for chunk in (1, 7, 100):
            assert evaluate_query(index, "a b", k=400, chunk_size=chunk) == base
        assert q_doc(index, range(1, 401), 3) == q_doc(index, range(1, 401))


def test_idf():
    assert idf(3, 1) == pytest.approx(math.log(3))
    assert idf(5, 5) == 0.0
