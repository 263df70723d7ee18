"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
Diagnostics go to stderr; data goes to the named output files or stdout.

Every report is written twice: an aligned text table at the given path
and a JSON-lines twin next to it (same name, ``.jsonl`` suffix) holding
one object per table row, NaN written as ``null``.
"""

import argparse
import json
import os
import sys

from . import __version__
from .canon import canonicalize_source, emit, parse_canonical, unpack
from .corpus import (
    EXTERNAL,
    ScriptRecord,
    dedup,
    ingest_bundle,
    ingest_snapshot,
    load_dataset,
    save_dataset,
)
from .errors import DataError, JstrackError, NumericError
from .evaluation import (
    ScriptRef,
    SurrogateList,
    agreement,
    aggressiveness,
    cdf_at,
    cdf_table,
    confusion,
    disagreements,
    format_table,
    read_verdicts,
    write_report,
    write_verdicts,
)
from .features import FeatureModelSpec, TermVocabulary, similarity_values, write_vectors
from .learn import GridSearchSpec, load_model, save_model
from .pdg import build_pdg, to_dot
from .pipeline import (
    CLASSIFIERS,
    FEATURE_MODELS,
    VALIDATION_COLUMNS,
    ValidationConfig,
    classify,
    deciles,
    featurize,
    similarity_groups,
    train_model,
    validate,
)
from .synth import write_bundle

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _default_threads():
    try:
        return max(1, int(os.environ.get("JSTRACK_THREADS", "1")))
    except ValueError:
        return 1


def _gamma(text):
    if text == "median":
        return text
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("gamma must be positive")
    return value


def _learning_options():
    p = _Parser(add_help=False)
    p.add_argument("--features", choices=FEATURE_MODELS, default="seq7")
    p.add_argument("--nu", type=float, default=None,
                   help="nu for OCSVM/nu-SVM (default 0.05 one-class, 0.5 otherwise)")
    p.add_argument("--gamma", type=_gamma, default="median", help="RBF width or 'median'")
    p.add_argument("--grid-search", action="store_true",
                   help="pick gamma and nu by 5-fold cross-validation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--paper-sign", action="store_true",
                   help="one-class SVM: decision >= 0 means functional")
    p.add_argument("--cap", type=int, default=None, help="vocabulary size limit")
    return p


def build_parser():
    parser = _Parser(prog="jstrack", description="Classify JavaScript programs as tracking or functional.")
    parser.add_argument("--version", action="version", version=f"jstrack {__version__}")
    parser.add_argument("--config", help="JSON file of option defaults (flags win)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    learn = _learning_options()

    p = sub.add_parser("ingest", help="scan a snapshot bundle into a manifest")
    p.add_argument("bundle")
    p.add_argument("-o", "--output", required=True, help="manifest to write")
    p.add_argument("--tools", help="comma-separated blocker settings to keep")

    p = sub.add_parser("unpack", help="pretty-print packed JavaScript")
    p.add_argument("input")
    p.add_argument("-o", "--output")

    p = sub.add_parser("canonicalize", help="lower JavaScript to canonical form")
    p.add_argument("input")
    p.add_argument("-o", "--output")

    p = sub.add_parser("pdg", help="dependency graph of a canonical program")
    p.add_argument("input", help="canonical text file")
    p.add_argument("--dot", action="store_true", help="emit Graphviz text")
    p.add_argument("-o", "--output")

    p = sub.add_parser("featurize", parents=[learn], help="tf-idf vectors of a dataset")
    p.add_argument("--manifest", required=True)
    p.add_argument("--vocabulary", help="existing vocabulary file to vectorize with")
    p.add_argument("--vocabulary-out", help="where to write the fitted vocabulary")
    p.add_argument("-o", "--output")

    p = sub.add_parser("train", parents=[learn], help="fit a classifier")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", choices=CLASSIFIERS, default="ocsvm")
    p.add_argument("-o", "--output", required=True, help="model file to write")

    p = sub.add_parser("classify", help="label scripts with a trained model")
    p.add_argument("model_file")
    p.add_argument("inputs", nargs="*", help="JavaScript files (or use --manifest)")
    p.add_argument("--manifest")
    p.add_argument("-o", "--output")

    p = sub.add_parser("validate", parents=[learn], help="train/test protocol report")
    p.add_argument("--manifest", required=True)
    p.add_argument("--feature-models", default=",".join(FEATURE_MODELS),
                   help="comma-separated feature models")
    p.add_argument("--models", default=",".join(CLASSIFIERS), help="comma-separated classifiers")
    p.add_argument("-o", "--output")

    p = sub.add_parser("evaluate", help="confusion rates of verdict files against labels")
    p.add_argument("--labels", required=True, help="labelled manifest")
    p.add_argument("--predictions", required=True, nargs="+")
    p.add_argument("-o", "--output")

    p = sub.add_parser("aggressiveness", help="fraction of scripts a blocker removes per page")
    p.add_argument("--off", help="blocker-off dump directory (or directory of page dumps)")
    p.add_argument("--on", help="blocker-on dump directory (or directory of page dumps)")
    p.add_argument("--bundle", help="snapshot bundle root (instead of --off/--on)")
    p.add_argument("--tool", action="append", help="blocker setting(s) to compare in --bundle")
    p.add_argument("--surrogates")
    p.add_argument("-o", "--output")

    p = sub.add_parser("agree", help="agreement between classifier and blocker verdicts")
    p.add_argument("--classifier", required=True)
    p.add_argument("--tool", required=True)
    p.add_argument("--emit-disagreements", metavar="FILE")
    p.add_argument("-o", "--output")

    p = sub.add_parser("simbench", parents=[learn], help="cosine-similarity CDFs")
    p.add_argument("--manifest", required=True)
    p.add_argument("-o", "--output")

    p = sub.add_parser("dedup", help="drop records with byte-identical source")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("synth", help="write the synthetic snapshot bundle")
    p.add_argument("output")
    p.add_argument("--n", type=int, default=400, help="number of scripts")
    p.add_argument("--pages", type=int, default=19)
    p.add_argument("--seed", type=int, default=0)
    return parser, sub


# -- helpers ------------------------------------------------------------------

def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _prepare(path):
    """Create the parent directory of an output path; returns the path."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    return path


def _write_text(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(_prepare(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _jsonl_path(path):
    root, _ = os.path.splitext(path)
    return root + ".jsonl"


def _report(rows, columns, path):
    if path is None:
        sys.stdout.write(format_table(rows, columns))
    else:
        write_report(rows, columns, _prepare(path), _jsonl_path(path))


def _config(args):
    return ValidationConfig(
        seed=args.seed, grid_search=args.grid_search, grid=GridSearchSpec(),
        threads=max(1, args.threads), nu=args.nu, gamma=args.gamma, cap=args.cap,
        paper_sign=args.paper_sign,
    )


def _split_list(text, allowed, what):
    items = [x.strip() for x in text.split(",") if x.strip()]
    bad = [x for x in items if x not in allowed]
    if bad or not items:
        raise UsageError(f"unknown {what}: {', '.join(bad) or '(none)'}")
    return tuple(items)


# -- subcommands ----------------------------------------------------------------

def cmd_ingest(args):
    tools = set(args.tools.split(",")) if args.tools else None
    ds = ingest_bundle(args.bundle, tools)
    save_dataset(ds, args.output)
    print(f"{len(ds.records)} record(s) from {len(ds.pages)} snapshot(s)", file=sys.stderr)


def cmd_unpack(args):
    _write_text(unpack(_read(args.input)) + "\n", args.output)


def cmd_canonicalize(args):
    _write_text(emit(canonicalize_source(_read(args.input))), args.output)


def cmd_pdg(args):
    canon = parse_canonical(_read(args.input))
    g = build_pdg(canon)
    if args.dot:
        _write_text(to_dot(canon, g), args.output)
    else:
        _write_text("".join(f"{a}\t{b}\n" for a, b in sorted(g.edges)), args.output)


def cmd_featurize(args):
    ds = load_dataset(args.manifest)
    vocab = TermVocabulary.load(args.vocabulary) if args.vocabulary else None
    spec = vocab.spec if vocab else FeatureModelSpec.from_name(args.features, cap=args.cap)
    fm = featurize(ds.records, spec, vocab, threads=max(1, args.threads))
    if args.vocabulary_out:
        fm.vocabulary.save(_prepare(args.vocabulary_out))
    if args.output is None:
        write_vectors(fm.vectors, sys.stdout)
    else:
        with open(_prepare(args.output), "w", encoding="utf-8", newline="\n") as fh:
            write_vectors(fm.vectors, fh)


def cmd_train(args):
    ds = load_dataset(args.manifest)
    model = train_model(ds, args.model, args.features, _config(args))
    save_model(model, _prepare(args.output))


def cmd_classify(args):
    model = load_model(args.model_file)
    if args.manifest:
        records = list(load_dataset(args.manifest).records)
    elif args.inputs:
        records = [ScriptRecord(p, _read(p), EXTERNAL, url=p) for p in args.inputs]
    else:
        raise UsageError("classify needs --manifest or input files")
    rows = classify(model, records)
    if args.output is None:
        write_verdicts(rows, sys.stdout)
    else:
        with open(_prepare(args.output), "w", encoding="utf-8", newline="\n") as fh:
            write_verdicts(rows, fh)


def cmd_validate(args):
    ds = load_dataset(args.manifest)
    config = _config(args)
    config = ValidationConfig(
        features=_split_list(args.feature_models, FEATURE_MODELS, "feature model"),
        models=_split_list(args.models, CLASSIFIERS, "classifier"),
        seed=config.seed, grid_search=config.grid_search, threads=config.threads,
        nu=config.nu, gamma=config.gamma, cap=config.cap, paper_sign=config.paper_sign,
    )
    _report(validate(ds, config), VALIDATION_COLUMNS, args.output)


def cmd_evaluate(args):
    ds = load_dataset(args.labels)
    labels = {r.id: r.label for r in ds.records if r.labeled}
    rows = []
    for path in args.predictions:
        report = confusion(read_verdicts(path), labels)
        rows.append({"predictions": os.path.basename(path), **report.as_row(),
                     "n": sum(report.counts.values())})
    _report(rows, ("predictions", "tp", "fn", "fp", "tn", "aer", "n"), args.output)


def _refs(records):
    return [ScriptRef.external(r.url, r.source) if r.url is not None else ScriptRef.in_page(r.source)
            for r in records]


def _page_dirs(path):
    """``{page_id: dump dir}`` for one dump or a directory of dumps."""
    if os.path.isfile(os.path.join(path, "index.html")):
        return {os.path.basename(os.path.normpath(path)): path}
    return {
        name: os.path.join(path, name)
        for name in sorted(os.listdir(path))
        if os.path.isfile(os.path.join(path, name, "index.html"))
    }


def cmd_aggressiveness(args):
    surrogates = SurrogateList.loads(_read(args.surrogates)) if args.surrogates else SurrogateList()
    pairs = []  # (tool, page, off dir, on dir)
    if args.bundle:
        if not args.tool:
            raise UsageError("--bundle needs at least one --tool")
        pages_dir = os.path.join(args.bundle, "pages")
        for tool in args.tool:
            for page in sorted(os.listdir(pages_dir)):
                on = os.path.join(pages_dir, page, tool)
                if os.path.isfile(os.path.join(on, "index.html")):
                    pairs.append((tool, page, os.path.join(pages_dir, page, "off"), on))
    elif args.off and args.on:
        off, on = _page_dirs(args.off), _page_dirs(args.on)
        if len(off) == 1 and len(on) == 1:
            pairs.append(("on", next(iter(off)), next(iter(off.values())), next(iter(on.values()))))
        else:
            missing = sorted(set(off) ^ set(on))
            if missing:
                raise DataError(f"pages present on one side only: {', '.join(missing[:5])}")
            pairs = [("on", p, off[p], on[p]) for p in sorted(off)]
    else:
        raise UsageError("aggressiveness needs --off and --on, or --bundle and --tool")
    rows = []
    for tool, page, off_dir, on_dir in pairs:
        a = aggressiveness(_refs(ingest_snapshot(off_dir, page)),
                           _refs(ingest_snapshot(on_dir, page, tool)), surrogates)
        rows.append({"tool": tool, "page": page, "aggressiveness": a})
    for tool in dict.fromkeys(r["tool"] for r in rows):
        table = cdf_table([r["aggressiveness"] for r in rows if r["tool"] == tool])
        for r in rows:
            if r["tool"] == tool:
                r["cdf"] = cdf_at(table, r["aggressiveness"])
    _report(rows, ("tool", "page", "aggressiveness", "cdf"), args.output)


def cmd_agree(args):
    c, t = read_verdicts(args.classifier), read_verdicts(args.tool)
    report = agreement(c, t)
    _report([report.as_row()], ("tt", "tf", "ft", "ff", "agreement", "disagreement", "n"), args.output)
    if args.emit_disagreements:
        groups = disagreements(c, t)
        with open(_prepare(args.emit_disagreements), "w", encoding="utf-8", newline="\n") as fh:
            for direction, ids in groups.items():
                fh.writelines(f"{direction}\t{k}\n" for k in ids)


def cmd_simbench(args):
    ds = load_dataset(args.manifest)
    spec = FeatureModelSpec.from_name(args.features, cap=args.cap)
    tracking, functional = similarity_groups(ds, spec)
    rows = []
    for group, values in (("tracking-tracking", similarity_values(tracking)),
                          ("tracking-functional", similarity_values(tracking, functional))):
        for q, v in zip(range(10, 100, 10), deciles(values)):
            rows.append({"group": group, "quantile": q / 100, "similarity": v})
        rows.append({"group": group, "quantile": 1.0, "similarity": max(values)})
    _report(rows, ("group", "quantile", "similarity"), args.output)


def cmd_dedup(args):
    ds = load_dataset(args.manifest)
    kept = dedup(ds)
    save_dataset(kept, args.output)
    print(f"kept {len(kept.records)} of {len(ds.records)} record(s)", file=sys.stderr)


def cmd_synth(args):
    counts = write_bundle(args.output, n=args.n, seed=args.seed, n_pages=args.pages)
    print(json.dumps(counts, sort_keys=True), file=sys.stderr)


COMMANDS = {
    "ingest": cmd_ingest,
    "unpack": cmd_unpack,
    "canonicalize": cmd_canonicalize,
    "pdg": cmd_pdg,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "classify": cmd_classify,
    "validate": cmd_validate,
    "evaluate": cmd_evaluate,
    "aggressiveness": cmd_aggressiveness,
    "agree": cmd_agree,
    "simbench": cmd_simbench,
    "dedup": cmd_dedup,
    "synth": cmd_synth,
}


def _apply_config(parser, sub, argv):
    """Load ``--config`` and install its values as defaults of the chosen subcommand."""
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        values = json.loads(_read(known.config))
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {known.config}: {exc}") from exc
    if not isinstance(values, dict):
        raise UsageError(f"config file {known.config} must hold a JSON object")
    values = {k.replace("-", "_"): v for k, v in values.items()}
    for name, subparser in sub.choices.items():
        dests = {a.dest for a in subparser._actions}
        subparser.set_defaults(**{k: v for k, v in values.items() if k in dests})


def run(argv=None):
    """Run the command line ``argv``; returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub = build_parser()
    try:
        _apply_config(parser, sub, argv)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        COMMANDS[args.command](args)
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if not exc.code else EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (JstrackError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main():
    return run()


if __name__ == "__main__":
    sys.exit(main())
