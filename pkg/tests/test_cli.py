import json
import subprocess
import sys

import pytest

from jstrack.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, run

from programs import COOKIE_READER_MIN, EQUAL_TEST, EQUAL_TEST_CANON

REPORTS = ("validation", "evaluation", "aggressiveness", "agreement", "simbench")


def _ok(argv):
    code = run([str(a) for a in argv])
    assert code == EXIT_OK, argv
    return code


def _pipeline(root):
    """Run the whole command chain on a small synthetic bundle under ``root``."""
    bundle, reports = root / "bundle", root / "reports"
    corpus = bundle / "corpus.manifest"
    learn = ["--features", "seq4", "--gamma", "0.01", "--seed", "3", "--threads", "1"]
    _ok(["synth", bundle, "--n", 96, "--pages", 4, "--seed", 2])
    _ok(["ingest", bundle, "-o", root / "all.manifest"])
    _ok(["validate", "--manifest", corpus, "--feature-models", "seq4", "--models", "ocsvm",
         "--gamma", "0.01", "--seed", "3", "--threads", "1", "-o", reports / "validation.txt"])
    tools = sorted(str(p) for p in (bundle / "tools").glob("*.tsv"))
    _ok(["evaluate", "--labels", corpus, "--predictions", *tools,
         "-o", reports / "evaluation.txt"])
    _ok(["aggressiveness", "--bundle", bundle, "--tool", "NS", "--tool", "GT",
         "--surrogates", bundle / "surrogates.txt", "-o", reports / "aggressiveness.txt"])
    _ok(["train", "--manifest", corpus, "--model", "ocsvm", *learn, "-o", root / "model.json"])
    _ok(["classify", root / "model.json", "--manifest", corpus, "-o", root / "preds.tsv"])
    _ok(["agree", "--classifier", root / "preds.tsv", "--tool", bundle / "tools" / "NS.tsv",
         "--emit-disagreements", reports / "disagreements.tsv",
         "-o", reports / "agreement.txt"])
    _ok(["simbench", "--manifest", corpus, *learn, "-o", reports / "simbench.txt"])
    return reports


@pytest.fixture(scope="module")
def smoke(tmp_path_factory):
    return _pipeline(tmp_path_factory.mktemp("smoke"))


def test_help_and_version(capsys):
    assert run(["--help"]) == EXIT_OK
    assert "simbench" in capsys.readouterr().out
    assert run(["train", "--help"]) == EXIT_OK
    assert run(["--version"]) == EXIT_OK


def test_usage_errors():
    assert run([]) == EXIT_USAGE
    assert run(["--no-such-flag"]) == EXIT_USAGE
    assert run(["train", "--manifest"]) == EXIT_USAGE
    assert run(["frobnicate"]) == EXIT_USAGE


def test_data_errors(tmp_path):
    assert run(["train", "--manifest", str(tmp_path / "missing"), "-o",
                str(tmp_path / "m.json")]) == EXIT_DATA
    bad = tmp_path / "bad.tsv"
    bad.write_text("not a verdict line\n")
    labels = tmp_path / "labels.manifest"
    labels.write_text("")
    assert run(["evaluate", "--labels", str(labels), "--predictions", str(bad)]) == EXIT_DATA
    model = tmp_path / "model.json"
    model.write_text("{\"format\": ")
    js = tmp_path / "a.js"
    js.write_text("var a = 1;")
    assert run(["classify", str(model), str(js)]) == EXIT_DATA


def test_unpack_canonicalize_pdg(tmp_path, capsys):
    src = tmp_path / "a.js"
    src.write_text(COOKIE_READER_MIN)
    assert run(["unpack", str(src)]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) >= 7

    src.write_text(EQUAL_TEST)
    canon = tmp_path / "a.canon"
    assert run(["canonicalize", str(src), "-o", str(canon)]) == EXIT_OK
    assert canon.read_text() == EQUAL_TEST_CANON
    assert run(["pdg", str(canon)]) == EXIT_OK
    assert run(["pdg", str(canon), "--dot"]) == EXIT_OK
    assert capsys.readouterr().out.count("->") >= 2


def test_smoke_reports(smoke):
    for name in REPORTS:
        txt, jsonl = smoke / f"{name}.txt", smoke / f"{name}.jsonl"
        assert txt.read_text().strip(), name
        rows = [json.loads(line) for line in jsonl.read_text().splitlines()]
        assert rows, name
    assert (smoke / "disagreements.tsv").exists()


def test_smoke_is_deterministic(smoke, tmp_path):
    again = _pipeline(tmp_path)
    for name in REPORTS:
        for ext in ("txt", "jsonl"):
            assert (again / f"{name}.{ext}").read_bytes() == (smoke / f"{name}.{ext}").read_bytes()


def _header(vocab):
    lines = vocab.read_text().splitlines()
    fields = dict(line.split("=", 1) for line in lines if "=" in line and "\t" not in line)
    terms = [line for line in lines if "\t" in line]
    assert len(terms) <= int(fields["cap"])
    return {k: fields[k] for k in ("model", "n", "cap")}


def test_config_defaults_and_flags_win(tmp_path):
    bundle = tmp_path / "bundle"
    _ok(["synth", bundle, "--n", 48, "--pages", 2, "--seed", 5])
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"features": "seq4", "gamma": 0.02, "cap": 50}))
    vocab = tmp_path / "vocab.tsv"
    _ok(["--config", cfg, "featurize", "--manifest", bundle / "corpus.manifest",
         "--vocabulary-out", vocab, "-o", tmp_path / "v.txt"])
    assert _header(vocab) == {"model": "seq", "n": "4", "cap": "50"}
    _ok(["--config", cfg, "featurize", "--manifest", bundle / "corpus.manifest", "--cap", "10",
         "--vocabulary-out", vocab, "-o", tmp_path / "v.txt"])
    assert _header(vocab) == {"model": "seq", "n": "4", "cap": "10"}
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert run(["--config", str(bad), "synth", str(tmp_path / "x")]) == EXIT_USAGE


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "jstrack", "--help"],
                         capture_output=True, text=True, check=False)
    assert out.returncode == 0
    assert "canonicalize" in out.stdout
