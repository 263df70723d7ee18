"""Term extraction, boolean tf-idf vocabularies and sparse feature vectors.

Three term definitions are supported:

``syntactic``
    every non-empty line of the unpacked source;
``seq`` (sequential n-gram)
    for statement ``i`` of the canonical form, statements
    ``max(0, i - n + 1) .. i`` joined with ``⇐``;
``pdg`` (PDG n-gram)
    for every statement, the set of its backward dependency paths of at
    most ``n`` nodes, serialized into one term.

Weights use boolean tf, so a present term weighs exactly its idf
``ln(|J| / df)``.
"""

import hashlib
import io
import math
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .canon import canonicalize_source, unpack
from .canon.lower import BEGIN, END
from .errors import EmptyCorpus, JstrackError, LexError, VocabMismatch
from .evaluation import cdf_table
from .pdg import PATH_JOIN, backward_paths, build_pdg, serialize_paths

SYNTACTIC = "syntactic"
SEQUENTIAL = "seq"
PDG = "pdg"
KINDS = (SYNTACTIC, SEQUENTIAL, PDG)

DEFAULT_SYNTACTIC_CAP = 200
VOCAB_FORMAT = "jstrack-vocabulary 1"

_MODEL_RE = re.compile(r"^(syntactic|seq|pdg)(\d*)$")


@dataclass(frozen=True)
class FeatureModelSpec:
    """Which terms to extract.

    Parameters
    ----------
    kind : {'syntactic', 'seq', 'pdg'}
    n : int, optional
        Gram length, required for the n-gram kinds (1 to 16).
    cap : int, optional
        Keep only the ``cap`` best ranked terms. Syntactic models default
        to 200; n-gram models are uncapped unless asked.
    markers : bool, default True
        Whether ``begin``/``end`` lines take part in n-gram terms.
    """

    kind: str
    n: int = None
    cap: int = None
    markers: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown feature model {self.kind!r}")
        if self.kind == SYNTACTIC:
            if self.n is not None:
                raise ValueError("the syntactic model takes no gram length")
            if self.cap is None:
                object.__setattr__(self, "cap", DEFAULT_SYNTACTIC_CAP)
        elif self.n is None or not 1 <= self.n <= 16:
            raise ValueError(f"gram length must be in 1..16, got {self.n!r}")
        if self.cap is not None and self.cap < 1:
            raise ValueError("cap must be positive")

    @classmethod
    def from_name(cls, name, cap=None, markers=True):
        """Parse the short names ``syntactic``, ``seq4``, ``seq7``, ``pdg4``, ``pdg7``..."""
        m = _MODEL_RE.match(name)
        if m is None or (m.group(1) == SYNTACTIC) == bool(m.group(2)):
            raise ValueError(f"unknown feature model {name!r}")
        n = int(m.group(2)) if m.group(2) else None
        return cls(m.group(1), n, cap, markers)

    @property
    def name(self):
        return self.kind if self.n is None else f"{self.kind}{self.n}"


def extract_terms(spec, *, source=None, canon=None, graph=None):
    """Term set of one program.

    Syntactic terms come from ``source``; n-gram terms from ``canon`` (and
    ``graph`` for the PDG model, built on demand when omitted).
    """
    if spec.kind == SYNTACTIC:
        if source is None:
            raise ValueError("the syntactic model needs the program source")
        try:
            text = unpack(source)
        except LexError:
            text = source
        return frozenset(line.strip() for line in text.splitlines() if line.strip())
    if canon is None:
        if source is None:
            raise ValueError("n-gram models need a canonical program or its source")
        canon = canonicalize_source(source)
    statements = canon.statements
    keep = [
        i for i, s in enumerate(statements)
        if spec.markers or s.kind not in (BEGIN, END)
    ]
    if spec.kind == SEQUENTIAL:
        texts = [statements[i].text for i in keep]
        n = spec.n
        return frozenset(
            PATH_JOIN.join(texts[max(0, i - n + 1):i + 1]) for i in range(len(texts))
        )
    if graph is None:
        graph = build_pdg(canon)
    return frozenset(
        serialize_paths(canon, backward_paths(graph, i, spec.n)) for i in keep
    )


def program_terms(source, spec):
    """Like :func:`extract_terms` but an unparseable program has no terms."""
    try:
        return extract_terms(spec, source=source)
    except JstrackError:
        return frozenset()


def _escape(term):
    return term.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")


_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def _unescape(text):
    return re.sub(r"\\(.)", lambda m: _UNESCAPES.get(m.group(1), m.group(1)), text)


@dataclass(frozen=True, eq=False)
class TermVocabulary:
    """Ranked terms with their idf weights.

    Attributes
    ----------
    terms : tuple of str
        In rank order.
    idf : tuple of float
    corpus_size : int
        Number of documents the vocabulary was fitted on.
    spec : FeatureModelSpec
    """

    terms: tuple
    idf: tuple
    corpus_size: int
    spec: FeatureModelSpec

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.terms)})

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        return isinstance(other, TermVocabulary) and self.dumps() == other.dumps()

    def __hash__(self):
        return hash(self.digest)

    def dumps(self):
        spec = self.spec
        out = io.StringIO()
        out.write(f"# {VOCAB_FORMAT}\n")
        out.write(f"model={spec.kind}\n")
        out.write(f"n={'none' if spec.n is None else spec.n}\n")
        out.write(f"cap={'none' if spec.cap is None else spec.cap}\n")
        out.write(f"markers={int(spec.markers)}\n")
        out.write("log=natural\n")
        out.write("rank_by=sum\n")
        out.write(f"corpus_size={self.corpus_size}\n")
        for rank, (term, w) in enumerate(zip(self.terms, self.idf), 1):
            out.write(f"{rank}\t{w!r}\t{_escape(term)}\n")
        return out.getvalue()

    @property
    def digest(self):
        """Identity of the vocabulary, stored with vectors and models."""
        cached = self.__dict__.get("_digest")
        if cached is None:
            cached = hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()[:16]
            object.__setattr__(self, "_digest", cached)
        return cached

    @classmethod
    def loads(cls, text):
        lines = text.splitlines()
        if not lines or lines[0] != f"# {VOCAB_FORMAT}":
            raise ValueError("not a vocabulary file")
        header = {}
        pos = 1
        while pos < len(lines) and "\t" not in lines[pos]:
            key, _, value = lines[pos].partition("=")
            header[key] = value
            pos += 1
        if header.get("log") != "natural":
            raise ValueError(f"unsupported log base {header.get('log')!r}")
        terms, idf = [], []
        for line in lines[pos:]:
            _, weight, term = line.split("\t", 2)
            idf.append(float(weight))
            terms.append(_unescape(term))

        def opt(key):
            value = header.get(key, "none")
            return None if value == "none" else int(value)

        spec = FeatureModelSpec(
            header["model"], opt("n"), opt("cap"), header.get("markers", "1") == "1"
        )
        return cls(tuple(terms), tuple(idf), int(header["corpus_size"]), spec)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def fit_vocabulary(corpus, spec):
    """Fit idf weights on a corpus of term sets.

    Terms are ranked by their tf-idf summed over the corpus, which under
    boolean tf is ``df * idf``; ties break lexicographically. With
    ``spec.cap`` only the top ``cap`` terms are kept.

    Raises
    ------
    EmptyCorpus
        If ``corpus`` has no documents.
    """
    docs = [frozenset(d) for d in corpus]
    if not docs:
        raise EmptyCorpus("cannot fit a vocabulary on an empty corpus")
    n_docs = len(docs)
    df = Counter()
    for doc in docs:
        df.update(doc)
    idf = {t: math.log(n_docs / c) for t, c in df.items()}
    ranked = sorted(df, key=lambda t: (-(df[t] * idf[t]), t))
    if spec.cap is not None:
        ranked = ranked[:spec.cap]
    return TermVocabulary(tuple(ranked), tuple(idf[t] for t in ranked), n_docs, spec)


@dataclass(frozen=True)
class FeatureVector:
    """Sparse boolean tf-idf vector; indices strictly increasing."""

    indices: tuple
    weights: tuple
    vocab_digest: str
    program_id: str = ""

    @property
    def nnz(self):
        return len(self.indices)

    def norm(self):
        return math.sqrt(math.fsum(w * w for w in self.weights))

    def to_dense(self, size):
        out = np.zeros(size)
        out[list(self.indices)] = self.weights
        return out


def vectorize(terms, vocab, program_id=""):
    """Vector of a term set; unknown and zero-idf terms have no entry."""
    idx = sorted(vocab.index[t] for t in set(terms) if t in vocab.index)
    idx = [i for i in idx if vocab.idf[i] != 0.0]
    return FeatureVector(tuple(idx), tuple(vocab.idf[i] for i in idx), vocab.digest, program_id)


def _check_same_vocab(a, b):
    if a.vocab_digest != b.vocab_digest:
        raise VocabMismatch(f"vectors from different vocabularies ({a.vocab_digest} vs {b.vocab_digest})")


def dot(a, b):
    _check_same_vocab(a, b)
    wb = dict(zip(b.indices, b.weights))
    return math.fsum(w * wb[i] for i, w in zip(a.indices, a.weights) if i in wb)


def cosine(a, b):
    """Cosine similarity, 0 when either vector is empty.

    Raises
    ------
    VocabMismatch
    """
    num = dot(a, b)
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(1.0, max(0.0, num / (na * nb)))


def similarity_values(group_a, group_b=None):
    """Pairwise cosines between two groups, or within one group (``i < j``)."""
    if group_b is None:
        items = list(group_a)
        return sorted(cosine(items[i], items[j]) for i in range(len(items)) for j in range(i + 1, len(items)))
    return sorted(cosine(a, b) for a in group_a for b in group_b)


def similarity_cdf(group_a, group_b=None):
    """Empirical CDF rows ``(similarity, fraction <= similarity)``."""
    return cdf_table(similarity_values(group_a, group_b))


def to_csr(vectors, vocab):
    """Stack vectors into a ``scipy.sparse.csr_matrix`` of width ``len(vocab)``."""
    indptr = [0]
    indices, data = [], []
    for v in vectors:
        if v.vocab_digest != vocab.digest:
            raise VocabMismatch(f"vector {v.program_id!r} does not belong to this vocabulary")
        indices.extend(v.indices)
        data.extend(v.weights)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(indptr) - 1, len(vocab)),
    )


def write_vectors(vectors, fh):
    for v in vectors:
        body = ",".join(f"{i}:{w!r}" for i, w in zip(v.indices, v.weights))
        fh.write(f"{v.program_id}\t{body}\n")


def read_vectors(fh, vocab):
    out = []
    for line in fh:
        line = line.rstrip("\n")
        if not line:
            continue
        pid, _, body = line.partition("\t")
        pairs = [p.split(":") for p in body.split(",") if p]
        out.append(FeatureVector(
            tuple(int(i) for i, _ in pairs), tuple(float(w) for _, w in pairs), vocab.digest, pid
        ))
    return out


class TfidfFeaturizer(BaseEstimator, TransformerMixin):
    """Boolean tf-idf over program sources.

    Parameters
    ----------
    model : str, default 'seq7'
        ``syntactic``, ``seqN`` or ``pdgN``.
    cap : int, optional
        Vocabulary cap; the syntactic model uses 200 when unset.
    markers : bool, default True
        Include ``begin``/``end`` lines in n-gram terms.

    Attributes
    ----------
    vocabulary_ : TermVocabulary
    spec_ : FeatureModelSpec
    """

    def __init__(self, model="seq7", cap=None, markers=True):
        self.model = model
        self.cap = cap
        self.markers = markers

    def _spec(self):
        return FeatureModelSpec.from_name(self.model, self.cap, self.markers)

    def terms(self, X):
        spec = self._spec()
        return [program_terms(src, spec) for src in _as_sources(X)]

    def fit(self, X, y=None):
        self.spec_ = self._spec()
        self.vocabulary_ = fit_vocabulary(self.terms(X), self.spec_)
        return self

    def transform(self, X):
        if not hasattr(self, "vocabulary_"):
            raise NotFittedError("TfidfFeaturizer is not fitted yet")
        return self.transform_terms(self.terms(X))

    def transform_terms(self, term_sets, ids=None):
        vectors = [
            vectorize(t, self.vocabulary_, "" if ids is None else ids[k])
            for k, t in enumerate(term_sets)
        ]
        return to_csr(vectors, self.vocabulary_)

    def fit_transform(self, X, y=None):
        term_sets = self.terms(X)
        self.spec_ = self._spec()
        self.vocabulary_ = fit_vocabulary(term_sets, self.spec_)
        return self.transform_terms(term_sets)


def _as_sources(X):
    if isinstance(X, str):
        raise TypeError("expected a sequence of program sources, got a single string")
    return [getattr(x, "source", x) for x in X]
