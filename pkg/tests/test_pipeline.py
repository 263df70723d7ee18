import pytest

from jstrack.corpus import FUNCTIONAL, IN_PAGE, TRACKING, Dataset, ScriptRecord
from jstrack.errors import InsufficientPositives
from jstrack.pipeline import (
    CLASSIFIERS,
    FEATURE_MODELS,
    VALIDATION_COLUMNS,
    ValidationConfig,
    classify,
    deciles,
    protocol_split,
    train_model,
    validate,
)
from jstrack.synth import templates

from programs import COOKIE_READER


def separable_dataset():
    funcs = [src for _, label, _, src in templates() if label == FUNCTIONAL]
    records = [ScriptRecord(f"t{i:02d}", COOKIE_READER, IN_PAGE, "p", label=TRACKING, label_rule="R6")
               for i in range(20)]
    records += [ScriptRecord(f"f{i:02d}", src, IN_PAGE, "p", label=FUNCTIONAL, label_rule="R8")
                for i, src in enumerate(funcs + funcs)]
    return Dataset(records)


def test_split_protocol(small_corpus):
    split = protocol_split(small_corpus, seed=5)
    again = protocol_split(small_corpus, seed=5)
    assert split == again
    T = split.train_tracking + split.test_tracking
    F = split.train_functional + split.test_functional
    assert len(set(T)) == len(T) == 48 and len(set(F)) == len(F) == 48
    assert not set(T) & set(F)
    assert len(split.test_tracking) == round(0.2 * 48)
    assert list(split.train_tracking) == sorted(split.train_tracking)
    assert protocol_split(small_corpus, seed=6) != split


def test_too_few_positives():
    records = [ScriptRecord(f"t{i}", "a();", IN_PAGE, "p", label=TRACKING) for i in range(9)]
    records += [ScriptRecord(f"f{i}", "b();", IN_PAGE, "p", label=FUNCTIONAL) for i in range(20)]
    with pytest.raises(InsufficientPositives):
        protocol_split(Dataset(records))


@pytest.mark.parametrize("kind", CLASSIFIERS)
def test_separable_corpus_is_perfect(kind):
    (row,) = validate(separable_dataset(), ValidationConfig(features=("seq7",), models=(kind,)))
    assert (row["tp"], row["tn"], row["aer"]) == (1.0, 1.0, 0.0)


def test_report_shape_and_determinism(small_corpus):
    rows = validate(small_corpus, ValidationConfig(gamma=0.01))
    assert len(rows) == 15
    assert [(r["features"], r["model"]) for r in rows] == [
        (f, m) for f in FEATURE_MODELS for m in CLASSIFIERS]
    assert all(set(r) == set(VALIDATION_COLUMNS) for r in rows)
    assert validate(small_corpus, ValidationConfig(gamma=0.01)) == rows
    ocsvm = [r for r in rows if r["model"] == "ocsvm"]
    assert all(r["n_test"] == 10 + 48 for r in ocsvm)


def test_train_and_classify(small_corpus):
    model = train_model(small_corpus, "ocsvm", "seq7", ValidationConfig(gamma=0.01))
    out = classify(model, small_corpus.records)
    assert [rid for rid, _, _ in out] == [r.id for r in small_corpus.records]
    label = {r.id: r.label for r in small_corpus.records}
    hits = sum(cls == label[rid] for rid, cls, _ in out)
    assert hits / len(out) > 0.9


def test_deciles():
    assert deciles(range(1, 11)) == list(range(1, 10))
