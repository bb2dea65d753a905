from __future__ import annotations

import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import oracle_tokenize, oracle_vectors
from scholrec.corpus import CorpusStore
from scholrec.errors import ValidationError
from scholrec.index import (
    FIELDS,
    FieldedVector,
    build_index,
    check_index_invariants,
    load_snapshot,
    save_snapshot,
    tfidf_weight,
    tokenize,
)
from synth import random_corpus


class TestTokenize:
    def test_basic(self):
        assert tokenize("Blood flow, blood!") == ["blood", "flow", "blood"]

    def test_empty(self):
        assert tokenize("") == []

    def test_digit_letter_quirk(self):
        assert tokenize("P2P-based") == ["p2", "based"]

    def test_short_tokens_dropped(self):
        assert tokenize("a I x of") == ["of"]

    def test_unicode_lowercase(self):
        assert tokenize("Écologie VERTE") == ["écologie", "verte"]

    def test_numbers_survive(self):
        assert tokenize("covid19 in 2020") == ["covid19", "in", "2020"]

    @given(st.text(max_size=60))
    def test_matches_independent_tokenizer(self, text):
        assert tokenize(text) == oracle_tokenize(text)


class TestTfidfWeight:
    def test_ubiquitous_term_is_zero(self):
        assert tfidf_weight(1, 5, 5) == 0.0

    def test_ln2(self):
        assert tfidf_weight(1, 2, 4) == pytest.approx(0.6931471805599453, abs=1e-12)

    def test_log_tf_scaling(self):
        assert tfidf_weight(math.e, 2, 4) == pytest.approx(1.3862943611198906, abs=1e-12)

    def test_argument_errors(self):
        with pytest.raises(ValidationError):
            tfidf_weight(0, 1, 4)
        with pytest.raises(ValidationError):
            tfidf_weight(1, 5, 4)
        with pytest.raises(ValidationError):
            tfidf_weight(1, 0, 4)

    @given(
        tf=st.integers(min_value=1, max_value=50),
        n=st.integers(min_value=2, max_value=500),
    )
    def test_idf_strictly_decreases_with_df(self, tf, n):
        weights = [tfidf_weight(tf, df, n) for df in range(1, n + 1)]
        assert all(a > b for a, b in zip(weights, weights[1:]))


class TestFieldedVector:
    def test_zero_weights_pruned(self):
        vector = FieldedVector({"title": {"a": 0.0, "b": 1.5}, "abstract": {}})
        assert vector.field_weights("title") == {"b": 1.5}
        assert "abstract" not in vector.weights

    def test_norm_cached_correctly(self):
        vector = FieldedVector({"title": {"a": 3.0, "b": 4.0}})
        assert vector.norm("title") == pytest.approx(5.0, abs=1e-12)
        recomputed = math.sqrt(sum(w * w for w in vector.field_weights("title").values()))
        assert abs(vector.norm("title") - recomputed) <= 1e-9

    def test_empty(self):
        assert FieldedVector({}).is_empty


class TestBuildIndex:
    def test_empty_store(self):
        index = build_index(CorpusStore([]))
        assert index.doc_count == 0
        assert all(not terms for terms in index.postings.values())

    def test_single_doc_degenerate(self, make_record):
        # every term has df == N == 1 so every weight is zero and pruned
        index = build_index(CorpusStore([make_record("d1")]))
        assert index.doc_count == 1
        assert index.vectors["d1"].is_empty
        assert all(not terms for terms in index.df.values())

    def test_four_doc_fixture_matches_recount(self, make_record):
        records = [
            make_record("d1", title="blood flow", abstract="blood vessel study", fulltext=None),
            make_record("d2", title="blood pressure", abstract="pressure waves", fulltext="flow flow blood"),
            make_record("d3", title="cell biology", abstract="cell division", fulltext=None),
            make_record("d4", title="flow networks", abstract="network theory", fulltext=None),
        ]
        index = build_index(CorpusStore(records))
        expected = oracle_vectors(records)
        for record in records:
            for field in FIELDS:
                oracle_weights = {
                    t: w for t, w in expected[record.id].get(field, {}).items() if w != 0.0
                }
                stored = index.vectors[record.id].field_weights(field)
                assert stored.keys() == oracle_weights.keys()
                for term, weight in oracle_weights.items():
                    assert stored[term] == pytest.approx(weight, abs=1e-9)
        # df spot checks: "blood" appears in titles of d1 and d2
        assert index.term_df("title", "blood") == 2
        assert index.term_df("fulltext", "flow") == 1

    def test_fulltext_only_when_present(self, make_record):
        records = [
            make_record("d1", fulltext="unique corpus body"),
            make_record("d2", fulltext=None),
            make_record("d3", fulltext="   "),
        ]
        index = build_index(CorpusStore(records))
        assert index.vectors["d1"].field_weights("fulltext")
        assert not index.vectors["d2"].field_weights("fulltext")
        assert not index.vectors["d3"].field_weights("fulltext")

    def test_determinism_byte_for_byte(self, make_record):
        rng = random.Random(7)
        records = random_corpus(rng, 40)
        store = CorpusStore(records)
        first = build_index(store)
        second = build_index(store)
        assert first.canonical_postings_json() == second.canonical_postings_json()
        assert second.index_version > first.index_version

    def test_zero_pruning_everywhere(self):
        rng = random.Random(11)
        store = CorpusStore(random_corpus(rng, 60, vocab_size=12))
        index = build_index(store)
        for field_postings in index.postings.values():
            for plist in field_postings.values():
                assert all(weight > 0.0 for _, weight in plist)

    def test_invariants_on_random_corpora(self):
        for seed in (1, 2, 3):
            rng = random.Random(seed)
            store = CorpusStore(random_corpus(rng, 80, vocab_size=25))
            check_index_invariants(build_index(store))

    def test_oracle_equivalence_random_corpus(self):
        rng = random.Random(42)
        records = random_corpus(rng, 120, vocab_size=30)
        index = build_index(CorpusStore(records))
        expected = oracle_vectors(records)
        for record in records:
            for field in FIELDS:
                oracle_nonzero = {
                    t: w for t, w in expected[record.id].get(field, {}).items() if w != 0.0
                }
                stored = index.vectors[record.id].field_weights(field)
                assert stored.keys() == oracle_nonzero.keys()
                for term, weight in oracle_nonzero.items():
                    assert abs(stored[term] - weight) <= 1e-9


class TestSnapshot:
    def test_round_trip_exact(self, make_record, tmp_path):
        rng = random.Random(3)
        store = CorpusStore(random_corpus(rng, 50, vocab_size=20))
        index = build_index(store)
        path = tmp_path / "index.snapshot.jsonl"
        save_snapshot(index, path)
        loaded = load_snapshot(path)
        assert loaded.doc_count == index.doc_count
        assert loaded.index_version == index.index_version
        assert loaded.df == index.df
        assert loaded.canonical_postings_json() == index.canonical_postings_json()
        assert set(loaded.vectors) == set(index.vectors)
        for doc_id, vector in index.vectors.items():
            assert loaded.vectors[doc_id].weights == vector.weights

    def test_version_counter_stays_ahead_after_load(self, tmp_path, make_record):
        store = CorpusStore([make_record("d1"), make_record("d2", title="other words here")])
        index = build_index(store)
        path = tmp_path / "snap.jsonl"
        save_snapshot(index, path)
        loaded = load_snapshot(path)
        rebuilt = build_index(store)
        assert rebuilt.index_version > loaded.index_version

    def test_bad_format_version_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"format_version": 99, "index_version": 1, "doc_count": 0, "doc_ids": []}\n')
        with pytest.raises(ValidationError):
            load_snapshot(path)
