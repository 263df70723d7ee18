import filecmp

from hypothesis import given, settings
from hypothesis import strategies as st

from jstrack.canon import canonicalize_source, emit, lex
from jstrack.corpus import FUNCTIONAL, TRACKING, RULES
from jstrack.rng import SplitMix64
from jstrack.synth import make_dataset, mutate, obfuscate, template_variants, templates, write_bundle


def test_templates():
    names = templates()
    assert sum(1 for t in names if t[1] == TRACKING) == 12
    assert sum(1 for t in names if t[1] == FUNCTIONAL) == 12
    for _, label, rule, source in names:
        assert RULES[rule].label == label
        assert canonicalize_source(source).skipped == 0


def test_obfuscation_keeps_properties_and_keys():
    source = 'var tracker = {endpoint: "x", send: function (n) { return n.length; }}; tracker.send(1);'
    out = obfuscate(source, seed=2)
    texts = [t.text for t in lex(out)]
    assert "endpoint" in texts and "send" in texts and "length" in texts
    assert "tracker" not in texts
    assert emit(canonicalize_source(out)) == emit(canonicalize_source(source))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([t[3] for t in templates()]), st.integers(0, 2**40))
def test_mutate_without_literals_preserves_canon(source, seed):
    out = mutate(source, SplitMix64(seed))
    assert emit(canonicalize_source(out)) == emit(canonicalize_source(source))


def test_variants():
    source = templates()[0][3]
    variants = template_variants(source, SplitMix64(1), variants=3)
    base = lex(source)
    assert [t.text for t in variants[0]] == [t.text for t in base]
    changed = 0
    for v in variants[1:]:
        assert [t.kind for t in v] == [t.kind for t in base]
        for a, b in zip(v, base):
            assert a.text == b.text or a.kind in ("string", "number")
            changed += a.text != b.text
    assert changed > 0


def test_dataset_is_deterministic_and_balanced():
    a, b = make_dataset(40, seed=3), make_dataset(40, seed=3)
    assert a == b
    assert sum(r.label == TRACKING for r in a) == 20
    assert make_dataset(40, seed=4) != a


def test_bundle_is_deterministic(tmp_path):
    write_bundle(tmp_path / "a", n=40, seed=2)
    write_bundle(tmp_path / "b", n=40, seed=2)
    cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")
    stack = [cmp]
    while stack:
        c = stack.pop()
        assert not c.diff_files and not c.left_only and not c.right_only
        _, mismatch, errors = filecmp.cmpfiles(c.left, c.right, c.common_files, shallow=False)
        assert not mismatch and not errors
        stack.extend(c.subdirs.values())
