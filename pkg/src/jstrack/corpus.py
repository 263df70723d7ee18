"""Script records, page snapshots and dataset manifests.

A snapshot bundle stores one DOM dump per page and blocker setting::

    pages/<page_id>/<tool>/index.html
    pages/<page_id>/<tool>/ext/<sha256(url)[:16]>.js

Every ``<script>`` element of a dump becomes one :class:`ScriptRecord`.
Datasets are described by a manifest with one ``key=value|key=value``
line per record (see :func:`dump_manifest_line`).
"""

import hashlib
import os
import re
from dataclasses import dataclass, replace

from .canon.unpack import unpack
from .errors import DataError, DuplicateId, ParseError

IN_PAGE = "in_page"
EXTERNAL = "external"
ORIGINS = (IN_PAGE, EXTERNAL)
TRACKING = "tracking"
FUNCTIONAL = "functional"
LABELS = (TRACKING, FUNCTIONAL)
KNOWN_TOOLS = ("off", "NS", "GT", "AP", "DC", "PB")


@dataclass(frozen=True)
class Rule:
    tag: str
    label: str
    summary: str


RULES = {r.tag: r for r in (
    Rule("R1", TRACKING, "ad panels and ad margins"),
    Rule("R2", TRACKING, "ad fetching and display"),
    Rule("R3", TRACKING, "social media widgets"),
    Rule("R4", TRACKING, "in-page code pulling third-party analytics or ad scripts"),
    Rule("R5", TRACKING, "external third-party analytics or ad scripts"),
    Rule("R6", TRACKING, "cookie setting or reading"),
    Rule("R7", FUNCTIONAL, "external scripts for menus, search, login"),
    Rule("R8", FUNCTIONAL, "in-page functionality"),
    Rule("R9", FUNCTIONAL, "content fetching from first-party or CDN hosts"),
    Rule("R10", TRACKING, "hidden-iframe analytics, ads or social media"),
    Rule("R11", TRACKING, "hidden-iframe cookie access"),
    Rule("R12", FUNCTIONAL, "mouse or keyboard event handling"),
)}


@dataclass(frozen=True)
class ScriptRecord:
    """One JavaScript program.

    ``missing`` marks an external script whose file was not in the bundle;
    its source is empty and it is left out of featurization.
    """

    id: str
    source: str
    origin: str
    page_id: str = None
    url: str = None
    label: str = None
    label_rule: str = None
    tool: str = "off"
    missing: bool = False

    def __post_init__(self):
        if not self.id:
            raise DataError("record id must be non-empty")
        if self.origin not in ORIGINS:
            raise DataError(f"{self.id}: unknown origin {self.origin!r}")
        if self.label is not None and self.label not in LABELS:
            raise DataError(f"{self.id}: unknown label {self.label!r}")
        if self.label_rule is not None:
            if self.label is None:
                raise DataError(f"{self.id}: rule {self.label_rule} given without a label")
            if self.label_rule not in RULES:
                raise DataError(f"{self.id}: unknown rule {self.label_rule!r}")
        if self.origin == IN_PAGE and not self.page_id:
            raise DataError(f"{self.id}: in-page script without a page")

    @property
    def labeled(self):
        return self.label is not None

    @property
    def source_hash(self):
        return hashlib.sha256(self.source.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class PageSnapshot:
    page_id: str
    html_path: str
    tool: str = "off"


@dataclass(frozen=True)
class Dataset:
    records: tuple = ()
    pages: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "pages", tuple(self.pages))
        seen = set()
        for r in self.records:
            if r.id in seen:
                raise DuplicateId(f"duplicate record id {r.id!r}")
            seen.add(r.id)
        keys = set()
        for p in self.pages:
            if (p.page_id, p.tool) in keys:
                raise DuplicateId(f"duplicate page snapshot {p.page_id}/{p.tool}")
            keys.add((p.page_id, p.tool))
        if self.pages:
            known = {p.page_id for p in self.pages}
            for r in self.records:
                if r.page_id and r.page_id not in known:
                    raise DataError(f"{r.id}: unknown page {r.page_id!r}")

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def labeled(self):
        return [r for r in self.records if r.labeled]

    def by_id(self):
        return {r.id: r for r in self.records}


# -- HTML ingestion -------------------------------------------------------

_OPEN_RE = re.compile(r"<script\b([^>]*)>", re.IGNORECASE)
_CLOSE_RE = re.compile(r"</script\s*>", re.IGNORECASE)
_SRC_RE = re.compile(r"""\bsrc\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>"']+))""", re.IGNORECASE)


def sidecar_name(url):
    return hashlib.sha256(url.encode("utf-8")).hexdigest()[:16] + ".js"


def scan_scripts(html):
    """``[(attrs, body)]`` for every script element, in document order.

    A missing close tag ends the element at the end of the document.
    """
    out = []
    pos = 0
    while True:
        m = _OPEN_RE.search(html, pos)
        if m is None:
            return out
        close = _CLOSE_RE.search(html, m.end())
        end = close.start() if close else len(html)
        out.append((m.group(1), html[m.end():end]))
        pos = close.end() if close else len(html)


def _src(attrs):
    m = _SRC_RE.search(attrs)
    if m is None:
        return None
    return next(g for g in m.groups() if g is not None)


def ingest_page(html, page_id, tool="off", sidecar_dir=None):
    """Records for every script element of one DOM dump.

    Parameters
    ----------
    html : str
    page_id : str
    tool : str
        Blocker setting the dump was taken with.
    sidecar_dir : str, optional
        Directory holding external script files named by :func:`sidecar_name`.

    Returns
    -------
    list of ScriptRecord
        Ids are ``<page_id>/<tool>/<nnn>`` in document order.

    Raises
    ------
    OSError
        When a sidecar file exists but cannot be read.
    """
    records = []
    for idx, (attrs, body) in enumerate(scan_scripts(html)):
        rid = f"{page_id}/{tool}/{idx:03d}"
        url = _src(attrs)
        if url is None:
            records.append(ScriptRecord(rid, body, IN_PAGE, page_id, tool=tool))
            continue
        source, missing = "", True
        if sidecar_dir is not None:
            path = os.path.join(sidecar_dir, sidecar_name(url))
            if os.path.exists(path):
                with open(path, encoding="utf-8") as fh:
                    source, missing = fh.read(), False
        records.append(ScriptRecord(rid, source, EXTERNAL, page_id, url, tool=tool, missing=missing))
    return records


def ingest_snapshot(path, page_id=None, tool="off"):
    """Records of one dump directory holding ``index.html`` and ``ext/``."""
    with open(os.path.join(path, "index.html"), encoding="utf-8", errors="replace") as fh:
        html = fh.read()
    page_id = page_id or os.path.basename(os.path.normpath(path))
    return ingest_page(html, page_id, tool, os.path.join(path, "ext"))


def ingest_bundle(root, tools=None):
    """Ingest ``root/pages/*/*/index.html`` into a Dataset (pages sorted by id, then tool)."""
    pages_dir = os.path.join(root, "pages")
    records, pages = [], []
    for page_id in sorted(os.listdir(pages_dir)):
        page_path = os.path.join(pages_dir, page_id)
        if not os.path.isdir(page_path):
            continue
        for tool in sorted(os.listdir(page_path)):
            if tools is not None and tool not in tools:
                continue
            html_path = os.path.join(page_path, tool, "index.html")
            if not os.path.isfile(html_path):
                continue
            pages.append(PageSnapshot(page_id, os.path.relpath(html_path, root), tool))
            records.extend(ingest_snapshot(os.path.join(page_path, tool), page_id, tool))
    return Dataset(records, pages)


# -- manifests -------------------------------------------------------------

_ESCAPES = {"%": "%25", "|": "%7C", "\n": "%0A", "\r": "%0D", "\t": "%09"}
_ESCAPE_RE = re.compile("[%|\n\r\t]")


def _esc(value):
    return _ESCAPE_RE.sub(lambda m: _ESCAPES[m.group()], value)


def _unesc(value):
    return re.sub(r"%([0-9A-Fa-f]{2})", lambda m: chr(int(m.group(1), 16)), value)


def parse_manifest_line(line):
    fields = {}
    for part in line.split("|"):
        key, sep, value = part.partition("=")
        if not sep or not key:
            raise ValueError(f"field {part!r} is not key=value")
        fields[key.strip()] = _unesc(value)
    return fields


def dump_manifest_line(fields):
    return "|".join(f"{k}={_esc(str(v))}" for k, v in fields.items())


def _record_fields(record, path):
    fields = {"id": record.id}
    if record.page_id:
        fields["page"] = record.page_id
    fields["tool"] = record.tool
    fields["origin"] = record.origin
    if record.url is not None:
        fields["url"] = record.url
    if record.label is not None:
        fields["label"] = record.label
    if record.label_rule is not None:
        fields["rule"] = record.label_rule
    if record.missing:
        fields["missing"] = "1"
    if path is not None:
        fields["path"] = path
    return fields


def load_dataset(manifest):
    """Read a manifest; ``path`` values are relative to its directory.

    Lines with ``type=page`` declare page snapshots; every other line is a
    script record. Blank lines and ``#`` comments are skipped; unknown keys
    are ignored.

    Raises
    ------
    ParseError
        With the offending line number.
    DuplicateId
    """
    base = os.path.dirname(os.path.abspath(manifest))
    records, pages = [], []
    seen = set()
    with open(manifest, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            try:
                f = parse_manifest_line(line)
                if f.get("type") == "page":
                    pages.append(PageSnapshot(f["page"], f.get("html", ""), f.get("tool", "off")))
                    continue
                source = ""
                if f.get("path"):
                    with open(os.path.join(base, f["path"]), encoding="utf-8") as sfh:
                        source = sfh.read()
                record = ScriptRecord(
                    f["id"], source, f.get("origin", IN_PAGE), f.get("page") or None,
                    f.get("url"), f.get("label") or None, f.get("rule") or None,
                    f.get("tool", "off"), f.get("missing") == "1",
                )
            except KeyError as exc:
                raise ParseError(f"missing field {exc.args[0]!r}", lineno) from exc
            except (ValueError, OSError) as exc:
                raise ParseError(str(exc), lineno) from exc
            except DuplicateId:
                raise
            except DataError as exc:
                raise ParseError(str(exc), lineno) from exc
            if record.id in seen:
                raise DuplicateId(f"line {lineno}: duplicate record id {record.id!r}")
            seen.add(record.id)
            records.append(record)
    return Dataset(records, pages)


def _script_filename(index):
    return f"scripts/{index:05d}.js"


def save_dataset(dataset, manifest):
    """Write a manifest plus one source file per record under ``scripts/``."""
    base = os.path.dirname(os.path.abspath(manifest))
    os.makedirs(os.path.join(base, "scripts"), exist_ok=True)
    with open(manifest, "w", encoding="utf-8", newline="\n") as fh:
        for p in dataset.pages:
            fh.write(dump_manifest_line({"type": "page", "page": p.page_id, "tool": p.tool,
                                         "html": p.html_path}) + "\n")
        for i, r in enumerate(dataset.records):
            path = None
            if not r.missing:
                path = _script_filename(i)
                with open(os.path.join(base, path), "w", encoding="utf-8", newline="") as sfh:
                    sfh.write(r.source)
            fh.write(dump_manifest_line(_record_fields(r, path)) + "\n")


def dedup(dataset):
    """Keep the first record of every distinct source (sha256 of the bytes).

    Records without source (missing external files) are all kept.
    """
    seen = set()
    kept = []
    for r in dataset.records:
        if r.missing:
            kept.append(r)
            continue
        h = r.source_hash
        if h in seen:
            continue
        seen.add(h)
        kept.append(r)
    return replace(dataset, records=tuple(kept))


__all__ = [
    "Dataset",
    "PageSnapshot",
    "RULES",
    "ScriptRecord",
    "dedup",
    "ingest_bundle",
    "ingest_page",
    "ingest_snapshot",
    "load_dataset",
    "save_dataset",
    "scan_scripts",
    "sidecar_name",
    "unpack",
]
