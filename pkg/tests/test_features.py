import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from jstrack.canon import CanonicalProgram, canonicalize_source
from jstrack.canon.lower import make_stmt
from jstrack.errors import EmptyCorpus, VocabMismatch
from jstrack.features import (
    FeatureModelSpec,
    FeatureVector,
    TermVocabulary,
    TfidfFeaturizer,
    cosine,
    extract_terms,
    fit_vocabulary,
    read_vectors,
    similarity_cdf,
    to_csr,
    vectorize,
    write_vectors,
)
from jstrack.pdg import PATH_JOIN
from jstrack.synth import obfuscate

from programs import COOKIE_READER, EQUAL_TEST, LOOPS, SHORT_CIRCUIT

SEQ = FeatureModelSpec("seq", 7)


def dense_tfidf(docs):
    """Plain double loop: rows are documents, columns sorted terms."""
    terms = sorted({t for d in docs for t in d})
    M = np.zeros((len(docs), len(terms)))
    for j, t in enumerate(terms):
        df = sum(1 for d in docs if t in d)
        for i, d in enumerate(docs):
            if t in d:
                M[i, j] = math.log(len(docs) / df)
    return terms, M


def random_corpus(rng):
    n_terms = int(rng.integers(1, 31))
    n_docs = int(rng.integers(1, 21))
    return [
        frozenset(f"t{k}" for k in range(n_terms) if rng.random() < 0.3) | {"shared"}
        for _ in range(n_docs)
    ]


class TestTerms:
    def test_syntactic_lines(self):
        terms = extract_terms(FeatureModelSpec("syntactic"), source="a = 1;\nb = 2;\nc = 3;")
        assert terms == {"a = 1;", "b = 2;", "c = 3;"}

    def test_sequential_boundary(self):
        prog = CanonicalProgram(tuple(make_stmt(t) for t in ("begin", "A = 1", "end")))
        terms = extract_terms(FeatureModelSpec("seq", 2), canon=prog)
        assert terms == {"begin", "begin" + PATH_JOIN + "A = 1", "A = 1" + PATH_JOIN + "end"}

    def test_equal_test_seven_grams(self):
        canon = canonicalize_source(EQUAL_TEST)
        texts = [s.text for s in canon.statements]
        expected = {PATH_JOIN.join(texts[max(0, i - 6):i + 1]) for i in range(len(texts))}
        terms = extract_terms(SEQ, canon=canon)
        assert len(terms) == 6 and terms == expected
        assert all(len(t.split(PATH_JOIN)) <= 6 for t in terms)

    def test_markers_switch(self):
        canon = canonicalize_source(EQUAL_TEST)
        terms = extract_terms(FeatureModelSpec("seq", 1, markers=False), canon=canon)
        assert "begin" not in terms and "end" not in terms and len(terms) == 4

    def test_pdg_terms_one_per_anchor(self):
        canon = canonicalize_source(EQUAL_TEST)
        terms = extract_terms(FeatureModelSpec("pdg", 2), canon=canon)
        assert "if($0)" + PATH_JOIN + "$0 = v0 === v1" in terms
        assert "return true" + PATH_JOIN + "if($0)" in terms

    @pytest.mark.parametrize("name", ["seq4", "seq7", "pdg4", "pdg7", "syntactic"])
    def test_names_round_trip(self, name):
        assert FeatureModelSpec.from_name(name).name == name

    @pytest.mark.parametrize("name", ["seq", "pdg0", "seq17", "syntactic3", "bag"])
    def test_bad_names(self, name):
        with pytest.raises(ValueError):
            FeatureModelSpec.from_name(name)

    def test_default_caps(self):
        assert FeatureModelSpec("syntactic").cap == 200
        assert FeatureModelSpec("seq", 4).cap is None


class TestVocabulary:
    def test_idf_values(self):
        vocab = fit_vocabulary([{"a", "all"}, {"all"}, {"all"}, {"all"}], SEQ)
        idf = dict(zip(vocab.terms, vocab.idf))
        assert idf["a"] == math.log(4)
        assert idf["all"] == 0.0

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            fit_vocabulary([], SEQ)

    def test_dense_oracle(self):
        rng = np.random.default_rng(20240607)
        for _ in range(50):
            docs = random_corpus(rng)
            terms, M = dense_tfidf(docs)
            vocab = fit_vocabulary(docs, SEQ)
            X = to_csr([vectorize(d, vocab) for d in docs], vocab).toarray()
            cols = [vocab.index[t] for t in terms]
            assert np.max(np.abs(X[:, cols] - M), initial=0.0) <= 1e-12
            assert np.all(X[:, vocab.index["shared"]] == 0.0)

    def test_cap_matches_exhaustive_ranking(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            docs = [frozenset(f"t{k}" for k in range(12) if rng.random() < 0.4) | {"x"} for _ in range(10)]
            _, M = dense_tfidf(docs)
            terms = sorted({t for d in docs for t in d})
            score = {t: M[:, j].sum() for j, t in enumerate(terms)}
            best = sorted(terms, key=lambda t: (-score[t], t))[:3]
            vocab = fit_vocabulary(docs, FeatureModelSpec("seq", 2, cap=3))
            assert list(vocab.terms) == best

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.frozensets(st.sampled_from("abcdefghij")), min_size=1, max_size=12),
           st.integers(1, 15))
    def test_cap_law(self, docs, k):
        vocab = fit_vocabulary(docs, FeatureModelSpec("seq", 3, cap=k))
        assert len(vocab) == min(k, len(set().union(*docs)))

    def test_file_round_trip_and_determinism(self, tmp_path):
        docs = [extract_terms(FeatureModelSpec("pdg", 4), source=s)
                for s in (EQUAL_TEST, COOKIE_READER, SHORT_CIRCUIT, LOOPS)]
        spec = FeatureModelSpec("pdg", 4)
        vocab = fit_vocabulary(docs, spec)
        assert vocab.dumps() == fit_vocabulary(list(docs), spec).dumps()
        path = tmp_path / "v.txt"
        vocab.save(path)
        back = TermVocabulary.load(path)
        assert back == vocab and back.terms == vocab.terms and back.idf == vocab.idf
        header = path.read_text(encoding="utf-8").splitlines()[:9]
        assert "log=natural" in header and "model=pdg" in header and "n=4" in header

    def test_terms_with_tabs_survive(self):
        vocab = fit_vocabulary([{"a\tb", "c\\n"}, {"d\ne"}], SEQ)
        assert TermVocabulary.loads(vocab.dumps()).terms == vocab.terms


class TestVectors:
    def setup_method(self):
        self.vocab = fit_vocabulary([{"a", "b"}, {"b", "c"}, {"c", "d"}], SEQ)

    def test_boolean_weights(self):
        v = vectorize({"a", "b", "zzz"}, self.vocab)
        assert list(v.indices) == sorted(v.indices)
        for i, w in zip(v.indices, v.weights):
            assert w == self.vocab.idf[i]
        assert v.nnz == 2

    def test_out_of_vocabulary(self):
        assert vectorize({"q"}, self.vocab).nnz == 0

    def test_cosine_basics(self):
        a = vectorize({"a", "b"}, self.vocab)
        d = vectorize({"d"}, self.vocab)
        assert cosine(a, a) == pytest.approx(1.0, abs=1e-15)
        assert cosine(a, d) == 0.0
        assert cosine(a, vectorize(set(), self.vocab)) == 0.0

    def test_vocab_mismatch(self):
        other = fit_vocabulary([{"a"}, {"z"}], SEQ)
        with pytest.raises(VocabMismatch):
            cosine(vectorize({"a"}, self.vocab), vectorize({"a"}, other))
        with pytest.raises(VocabMismatch):
            to_csr([vectorize({"a"}, other)], self.vocab)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0.01, 10), min_size=4, max_size=4),
           st.lists(st.floats(0.01, 10), min_size=4, max_size=4),
           st.floats(0.01, 100))
    def test_cosine_scale_free(self, wa, wb, lam):
        a = FeatureVector((0, 1, 2, 3), tuple(wa), "d")
        b = FeatureVector((0, 1, 2, 3), tuple(wb), "d")
        scaled = FeatureVector(a.indices, tuple(lam * w for w in wa), "d")
        assert cosine(scaled, b) == pytest.approx(cosine(a, b), abs=1e-12)
        dense = np.dot(wa, wb) / (np.linalg.norm(wa) * np.linalg.norm(wb))
        assert cosine(a, b) == pytest.approx(min(1.0, dense), abs=1e-12)

    def test_vector_file_round_trip(self):
        vecs = [vectorize(d, self.vocab, f"p{i}") for i, d in enumerate([{"a"}, {"b", "c"}, set()])]
        buf = io.StringIO()
        write_vectors(vecs, buf)
        first, rest = buf.getvalue().splitlines()[0], buf.getvalue().splitlines()[2]
        i = self.vocab.index["a"]
        assert first == f"p0\t{i}:{self.vocab.idf[i]!r}"
        assert rest == "p2\t"
        buf.seek(0)
        assert read_vectors(buf, self.vocab) == vecs

    def test_similarity_cdf_steps(self):
        a = vectorize({"a", "b"}, self.vocab)
        assert similarity_cdf([a], [a]) == [(pytest.approx(1.0), 1.0)]
        assert similarity_cdf([a, a, a]) == [(pytest.approx(1.0), 1.0)]


def test_renamed_program_has_identical_vectors():
    sources = [EQUAL_TEST, COOKIE_READER, SHORT_CIRCUIT, LOOPS]
    for name in ("seq4", "seq7", "pdg4", "pdg7"):
        feat = TfidfFeaturizer(name).fit(sources)
        X = feat.transform(sources).toarray()
        Y = feat.transform([obfuscate(s, seed=3) for s in sources]).toarray()
        assert np.array_equal(X, Y)


def test_featurizer_estimator_api():
    feat = TfidfFeaturizer("seq4", cap=5)
    assert clone(feat).get_params() == {"model": "seq4", "cap": 5, "markers": True}
    X = feat.fit_transform([EQUAL_TEST, COOKIE_READER])
    assert X.shape == (2, len(feat.vocabulary_)) and len(feat.vocabulary_) <= 5
    with pytest.raises(TypeError):
        feat.transform(EQUAL_TEST)
