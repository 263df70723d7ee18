"""Evaluation metrics: aggressiveness, confusion/AER, agreement, empirical CDFs.

Tracking is the positive class throughout: a blocker "predicts tracking"
for the scripts it blocks.
"""

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

from .canon import unpack
from .errors import (
    ContainmentViolation,
    EmptyInput,
    EmptyPage,
    LexError,
    MissingLabel,
    ParseError,
    UniverseMismatch,
)

TRACKING = "tracking"
FUNCTIONAL = "functional"
CLASSES = (TRACKING, FUNCTIONAL)


def normalized_hash(source):
    """sha256 of the unpacked source (raw source if it does not tokenize)."""
    try:
        text = unpack(source)
    except LexError:
        text = source
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ScriptRef:
    """Identity of one script occurrence on a page.

    In-page scripts are keyed by the hash of their unpacked source,
    external ones by URL.
    """

    key: str
    source: str = ""

    @classmethod
    def in_page(cls, source):
        return cls("h:" + normalized_hash(source), source)

    @classmethod
    def external(cls, url, source=""):
        return cls("u:" + url, source)


@dataclass(frozen=True)
class SurrogateList:
    """Fingerprints of surrogate stubs injected by blockers.

    ``hashes`` are normalized-source hashes; ``patterns`` are substrings
    that mark a script as a surrogate wherever they occur in its source.
    """

    hashes: frozenset = frozenset()
    patterns: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "hashes", frozenset(self.hashes))
        object.__setattr__(self, "patterns", tuple(dict.fromkeys(self.patterns)))

    def matches(self, script):
        if script.key.startswith("h:") and script.key[2:] in self.hashes:
            return True
        if script.source and normalized_hash(script.source) in self.hashes:
            return True
        return any(p in script.source for p in self.patterns)

    @classmethod
    def from_sources(cls, sources, patterns=()):
        return cls(frozenset(normalized_hash(s) for s in sources), tuple(patterns))

    @classmethod
    def loads(cls, text):
        """Parse ``sha256:<hex>`` and ``pattern:<substring>`` lines; ``#`` starts a comment."""
        hashes, patterns = set(), []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            kind, sep, value = line.partition(":")
            if not sep or kind not in ("sha256", "pattern"):
                raise ParseError(f"bad surrogate entry {line!r}", lineno)
            if kind == "sha256":
                hashes.add(value.lower())
            else:
                patterns.append(value)
        return cls(frozenset(hashes), tuple(patterns))

    def dumps(self):
        lines = [f"sha256:{h}" for h in sorted(self.hashes)]
        lines += [f"pattern:{p}" for p in self.patterns]
        return "".join(line + "\n" for line in lines)


def aggressiveness(off, on, surrogates=None):
    """``a(h) = 1 - |on'| / |off'|`` with surrogates removed from both sides.

    Parameters
    ----------
    off, on : iterable of ScriptRef
        Scripts of the page without and with the blocker.
    surrogates : SurrogateList, optional

    Raises
    ------
    EmptyPage
        No (non-surrogate) script without the blocker.
    ContainmentViolation
        A non-surrogate script shows up only with the blocker on.

    Examples
    --------
    >>> s = [ScriptRef(f"h:{i}") for i in range(4)]
    >>> aggressiveness(s, s[:1])
    0.75
    """
    surrogates = surrogates or SurrogateList()
    off_keys = {s.key for s in off if not surrogates.matches(s)}
    on_keys = {s.key for s in on if not surrogates.matches(s)}
    if not off_keys:
        raise EmptyPage("page has no scripts with the blocker off")
    extra = on_keys - off_keys
    if extra:
        raise ContainmentViolation(
            f"{len(extra)} script(s) present only with the blocker on: {sorted(extra)[:3]}"
        )
    return 1.0 - len(on_keys) / len(off_keys)


def cdf_table(values):
    """Empirical CDF as ``[(value, fraction <= value)]`` over distinct values.

    Raises
    ------
    EmptyInput
    """
    vals = sorted(float(v) for v in values)
    if not vals:
        raise EmptyInput("cannot build a CDF of no values")
    n = len(vals)
    rows = []
    for i, v in enumerate(vals):
        if i + 1 < n and vals[i + 1] == v:
            continue
        rows.append((v, (i + 1) / n))
    return rows


def cdf_at(rows, x):
    """Evaluate a CDF table at ``x`` (step function, right-continuous)."""
    frac = 0.0
    for v, f in rows:
        if v > x:
            break
        frac = f
    return frac


def quantile(values, q):
    """Lower empirical quantile: smallest value whose CDF reaches ``q``."""
    vals = sorted(values)
    if not vals:
        raise EmptyInput("no values")
    k = max(0, math.ceil(q * len(vals)) - 1)
    return vals[k]


@dataclass(frozen=True)
class AggressivenessReport:
    values: dict
    cdf: list
    mean: float

    @classmethod
    def from_values(cls, values):
        vals = list(values.values())
        return cls(dict(values), cdf_table(vals), math.fsum(vals) / len(vals))


@dataclass(frozen=True)
class ConfusionReport:
    """Row-normalized confusion rates with tracking as the positive class."""

    tp: float
    fn: float
    fp: float
    tn: float
    aer: float
    counts: dict = field(default_factory=dict)

    def as_row(self):
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn, "aer": self.aer}


def _rate(num, den):
    return num / den if den else math.nan


def confusion(predictions, labels):
    """Confusion rates of ``predictions`` against ``labels`` (both id -> class).

    Raises
    ------
    MissingLabel
        A predicted id has no label.
    """
    missing = [k for k in predictions if k not in labels]
    if missing:
        raise MissingLabel(f"{len(missing)} prediction(s) without a label, e.g. {missing[0]!r}")
    counts = {"tp": 0, "fn": 0, "fp": 0, "tn": 0}
    for key, pred in predictions.items():
        truth = labels[key]
        if truth not in CLASSES or pred not in CLASSES:
            raise ValueError(f"unknown class for {key!r}: {truth!r} / {pred!r}")
        if truth == TRACKING:
            counts["tp" if pred == TRACKING else "fn"] += 1
        else:
            counts["fp" if pred == TRACKING else "tn"] += 1
    n_pos = counts["tp"] + counts["fn"]
    n_neg = counts["fp"] + counts["tn"]
    tp, fn = _rate(counts["tp"], n_pos), _rate(counts["fn"], n_pos)
    fp, tn = _rate(counts["fp"], n_neg), _rate(counts["tn"], n_neg)
    return ConfusionReport(tp, fn, fp, tn, (fp + fn) / 2.0, counts)


@dataclass(frozen=True)
class AgreementReport:
    """Four-cell partition of the corpus by classifier and tool verdicts.

    ``tt`` is tracking for both, ``tf`` tracking for the classifier and
    functional for the tool, and so on.
    """

    tt: float
    tf: float
    ft: float
    ff: float
    n: int

    @property
    def agreement(self):
        return self.tt + self.ff

    @property
    def disagreement(self):
        return 1.0 - self.agreement

    def as_row(self):
        row = asdict(self)
        row.update(agreement=self.agreement, disagreement=self.disagreement)
        return row


def agreement(classifier_out, tool_out):
    """Agreement cells over the shared universe of script ids.

    Raises
    ------
    UniverseMismatch
        The two mappings cover different ids.
    """
    if set(classifier_out) != set(tool_out):
        only_c = len(set(classifier_out) - set(tool_out))
        only_t = len(set(tool_out) - set(classifier_out))
        raise UniverseMismatch(f"{only_c} id(s) only in classifier output, {only_t} only in tool output")
    n = len(classifier_out)
    if n == 0:
        raise EmptyInput("no scripts to compare")
    T_c = {k for k, v in classifier_out.items() if v == TRACKING}
    T_p = {k for k, v in tool_out.items() if v == TRACKING}
    universe = set(classifier_out)
    F_c, F_p = universe - T_c, universe - T_p
    return AgreementReport(
        len(T_c & T_p) / n, len(T_c & F_p) / n, len(F_c & T_p) / n, len(F_c & F_p) / n, n
    )


def disagreements(classifier_out, tool_out):
    """Ids the classifier and tool label differently, grouped by direction."""
    return {
        "classifier_tracking_tool_functional": sorted(
            k for k, v in classifier_out.items() if v == TRACKING and tool_out[k] == FUNCTIONAL
        ),
        "classifier_functional_tool_tracking": sorted(
            k for k, v in classifier_out.items() if v == FUNCTIONAL and tool_out[k] == TRACKING
        ),
    }


def _fmt(value):
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.4f}"
    return str(value)


def format_table(rows, columns):
    """Aligned plain-text table."""
    cells = [[str(c) for c in columns]] + [[_fmt(r.get(c, "")) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _json_value(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def write_report(rows, columns, txt_path, jsonl_path=None):
    """Write ``rows`` as an aligned text table and, optionally, JSON lines.

    The JSON-lines variant holds one object per row with the same keys as
    ``columns``; NaN rates are written as ``null``.
    """
    with open(txt_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_table(rows, columns))
    if jsonl_path is not None:
        with open(jsonl_path, "w", encoding="utf-8", newline="\n") as fh:
            for r in rows:
                fh.write(json.dumps({c: _json_value(r.get(c)) for c in columns}, ensure_ascii=False))
                fh.write("\n")


def read_verdicts(path):
    """Read a verdict file: ``id<TAB>class[<TAB>score]`` per line.

    Classifier predictions and blocker outcomes share this format. Blank
    lines and ``#`` comments are skipped.

    Raises
    ------
    ParseError
        Unknown class, missing field or repeated id, with the line number.
    """
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2 or parts[1] not in CLASSES:
                raise ParseError(f"expected id<TAB>tracking|functional, got {line!r}", lineno)
            if parts[0] in out:
                raise ParseError(f"repeated id {parts[0]!r}", lineno)
            out[parts[0]] = parts[1]
    return out


def write_verdicts(rows, fh):
    """Write ``(id, class)`` or ``(id, class, score)`` rows."""
    for row in rows:
        fields = [row[0], row[1]] + [repr(float(v)) for v in row[2:]]
        fh.write("\t".join(fields) + "\n")
