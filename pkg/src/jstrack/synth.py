"""Synthetic labelled corpus and snapshot bundle.

Programs are drawn from hand-written templates and mutated the way copied
code drifts between sites: identifiers are renamed, whitespace is
re-flowed and some literals are edited. All randomness comes from
:class:`~jstrack.rng.SplitMix64`, so a seed fixes every byte written.

A bundle written by :func:`write_bundle` looks like::

    corpus.manifest            labelled scripts of the blocker-off dumps
    bundle.manifest            every script of every dump
    surrogates.txt
    tools/<tool>.tsv           per-script blocked/allowed verdict
    pages/<page>/<tool>/index.html
    pages/<page>/<tool>/ext/<sidecar>.js
"""

import os
from dataclasses import dataclass, field

from .canon.lexer import IDENTIFIER, KEYWORDS, NUMBER, STRING, lex
from .canon.lower import user_identifiers
from .canon.parser import parse
from .corpus import (
    FUNCTIONAL,
    IN_PAGE,
    TRACKING,
    Dataset,
    PageSnapshot,
    ScriptRecord,
    dump_manifest_line,
    ingest_bundle,
    save_dataset,
    sidecar_name,
)
from .evaluation import SurrogateList
from .rng import SplitMix64
from .synth_templates import FUNCTIONAL_TEMPLATES, SURROGATE_STUBS, TRACKING_TEMPLATES

# blocked fraction of (tracking, functional) scripts per simulated tool
TOOL_RATES = {
    "NS": (0.78, 0.21),
    "GT": (0.65, 0.08),
    "AP": (0.44, 0.06),
    "DC": (0.40, 0.06),
}
_GLUE_OK = frozenset("()[]{};,")
_BREAK_AFTER = frozenset(";{},")
_SURROGATE_TEMPLATES = {"analytics_queue": 0, "social_widget": 1}


def templates():
    """``[(name, label, rule, source)]`` with tracking templates first."""
    out = [(n, TRACKING, r, s.strip() + "\n") for n, r, s in TRACKING_TEMPLATES]
    out += [(n, FUNCTIONAL, r, s.strip() + "\n") for n, r, s in FUNCTIONAL_TEMPLATES]
    return out


# -- token-level mutations -------------------------------------------------

def _object_brace(prev):
    """Whether a ``{`` after token ``prev`` opens an object literal."""
    if prev is None:
        return False
    if prev.kind == "punctuator":
        return prev.text not in (")", ";", "{", "}")
    return prev.kind == "keyword" and prev.text in ("return", "typeof", "in", "case")


def renamable_positions(tokens, names):
    """Indices of identifier tokens that refer to one of ``names``.

    Property names after ``.`` and object-literal keys are left alone.
    """
    out = []
    stack = []  # [is_object_brace, pending '?' count] per open bracket
    prev = None
    for i, tok in enumerate(tokens):
        if tok.kind == "punctuator":
            if tok.text in ("(", "[", "{"):
                stack.append([tok.text == "{" and _object_brace(prev), 0])
            elif tok.text in (")", "]", "}"):
                if stack:
                    stack.pop()
            elif tok.text == "?" and stack:
                stack[-1][1] += 1
            elif tok.text == ":" and stack and stack[-1][1]:
                stack[-1][1] -= 1
        elif tok.kind == IDENTIFIER and tok.text in names:
            after_dot = prev is not None and prev.kind == "punctuator" and prev.text == "."
            nxt = tokens[i + 1] if i + 1 < len(tokens) else None
            is_key = (nxt is not None and nxt.kind == "punctuator" and nxt.text == ":"
                      and stack and stack[-1][0] and not stack[-1][1])
            if not after_dot and not is_key:
                out.append(i)
        prev = tok
    return out


def _fresh_name(rng, taken):
    alphabet = "abcdefghijklmnopqrstuvwxyz"
    while True:
        if rng.random() < 0.5:
            name = "_0x" + format(rng.randbelow(1 << 20), "x")
        else:
            name = "".join(alphabet[rng.randbelow(26)] for _ in range(1 + rng.randbelow(3)))
            name += str(rng.randbelow(100))
        if name not in taken and name not in KEYWORDS:
            taken.add(name)
            return name


def rename_tokens(tokens, mapping):
    """Apply ``mapping`` to every renamable occurrence of its keys."""
    tokens = list(tokens)
    for i in renamable_positions(tokens, set(mapping)):
        tokens[i] = _replace(tokens[i], mapping[tokens[i].text])
    return tokens


def _replace(tok, text):
    return type(tok)(tok.kind, text, tok.line, tok.nl_before)


def random_renaming(source, rng):
    """A fresh-name mapping for every user identifier of ``source``."""
    tokens = lex(source)
    taken = {t.text for t in tokens if t.kind == IDENTIFIER}
    names = sorted(user_identifiers(parse(tokens)))
    return {n: _fresh_name(rng, taken) for n in names}


def render(tokens, rng=None):
    """Join tokens with whitespace that preserves the token stream.

    With ``rng`` the layout is randomized: tokens touching brackets,
    ``;`` or ``,`` may be glued, other neighbours get one or more blanks,
    and line breaks appear only after ``; { } ,`` or where the input had
    one (so automatic semicolon insertion is unaffected).
    """
    parts = []
    prev = None
    for tok in tokens:
        if prev is not None:
            parts.append(_gap(prev, tok, rng))
        parts.append(tok.text)
        prev = tok
    return "".join(parts) + "\n"


def _gap(prev, tok, rng):
    glue_ok = prev.text in _GLUE_OK or tok.text in _GLUE_OK
    if tok.nl_before and prev.text not in _BREAK_AFTER:
        return "\n"
    if rng is None:
        if tok.nl_before:
            return "\n"
        return "" if glue_ok else " "
    r = rng.random()
    if prev.text in _BREAK_AFTER and r < 0.3:
        return "\n" + " " * rng.randbelow(5)
    if glue_ok and r < 0.75:
        return ""
    return [" ", " ", "  ", "\t"][rng.randbelow(4)]


def edit_literals(tokens, rng, rate=0.3):
    """Rewrite each string and integer literal with probability ``rate``."""
    out = []
    for tok in tokens:
        if tok.kind == STRING and len(tok.text) > 2 and rng.random() < rate:
            tok = _replace(tok, tok.text[:-1] + "_" + format(rng.randbelow(4096), "x") + tok.text[-1])
        elif tok.kind == NUMBER and tok.text.isdigit() and rng.random() < rate:
            tok = _replace(tok, str(int(tok.text) + 1 + rng.randbelow(50)))
        out.append(tok)
    return out


def mutate(source, rng, *, rename=True, whitespace=True, literals=0.0):
    """One mutated copy of ``source``."""
    tokens = lex(source)
    if literals:
        tokens = edit_literals(tokens, rng, literals)
    if rename:
        tokens = rename_tokens(tokens, random_renaming(source, rng))
    return render(tokens, rng if whitespace else None)


def obfuscate(source, seed=0):
    """Rename user identifiers and re-flow whitespace; the semantics are unchanged."""
    return mutate(source, SplitMix64(seed), literals=0.0)


# -- corpus -----------------------------------------------------------------

@dataclass(frozen=True)
class SynthScript:
    source: str
    label: str
    rule: str
    template: str


def template_variants(source, rng, variants=3, literal_rate=0.3):
    """Token streams of ``variants`` deployed versions of one template.

    Version 0 is the template itself; the others carry literal edits
    (a site id, an endpoint) and are then copied verbatim between sites.
    """
    base = lex(source)
    return [base] + [edit_literals(base, rng, literal_rate) for _ in range(variants - 1)]


def make_scripts(n=400, seed=0, *, variants=3, literal_rate=0.3, rename_rate=0.9):
    """``n`` mutated template instances, alternating tracking and functional.

    Every instance is one of the template's literal variants, with its
    user identifiers renamed (probability ``rename_rate``) and its
    whitespace re-flowed.
    """
    rng = SplitMix64(seed)
    tpl = templates()
    family = {name: template_variants(src, rng, variants, literal_rate)
              for name, _, _, src in tpl}
    renamable = {name: sorted(user_identifiers(parse(lex(src)))) for name, _, _, src in tpl}
    by_label = {
        TRACKING: [t for t in tpl if t[1] == TRACKING],
        FUNCTIONAL: [t for t in tpl if t[1] == FUNCTIONAL],
    }
    out = []
    for i in range(n):
        label = TRACKING if i % 2 == 0 else FUNCTIONAL
        pool = by_label[label]
        name, _, rule, _ = pool[(i // 2) % len(pool)]
        tokens = family[name][rng.randbelow(variants)]
        if rng.random() < rename_rate:
            taken = {t.text for t in tokens if t.kind == IDENTIFIER}
            tokens = rename_tokens(tokens, {k: _fresh_name(rng, taken) for k in renamable[name]})
        out.append(SynthScript(render(tokens, rng), label, rule, name))
    return out


def make_dataset(n=400, seed=0, **kwargs):
    """Labelled :class:`Dataset` of synthetic scripts (ids ``s0000``, ...)."""
    scripts = make_scripts(n, seed, **kwargs)
    records = [
        ScriptRecord(f"s{i:04d}", s.source, IN_PAGE, "synthetic", label=s.label, label_rule=s.rule)
        for i, s in enumerate(scripts)
    ]
    return Dataset(records, [PageSnapshot("synthetic", "", "off")])


# -- snapshot bundle -------------------------------------------------------

@dataclass
class _Slot:
    script: SynthScript
    url: str = None
    blocked: dict = field(default_factory=dict)


def _html(parts):
    body = "\n".join(parts)
    return f"<!DOCTYPE html>\n<html>\n<head><title>synthetic</title></head>\n<body>\n{body}\n</body>\n</html>\n"


def _tag(slot_source, url):
    if url is None:
        return f"<script type=\"text/javascript\">\n{slot_source}</script>"
    return f"<script src=\"{url}\"></script>"


def write_bundle(root, n=400, seed=0, n_pages=19, external_rate=0.3):
    """Write a synthetic snapshot bundle under ``root``.

    Every page is dumped with the blocker off and with each tool of
    :data:`TOOL_RATES`; a tool drops a script with its class-specific
    rate, and ``GT`` puts a surrogate stub in place of some blocked
    analytics and widget scripts.

    Returns
    -------
    dict
        Counts: ``scripts``, ``pages``, ``snapshots``, ``records``.
    """
    rng = SplitMix64(seed ^ 0x5EED)
    scripts = make_scripts(n, seed)
    tools = sorted(TOOL_RATES)
    pages = {f"page{p:02d}": [] for p in range(n_pages)}
    order = rng.shuffle(range(n))
    page_ids = sorted(pages)
    for k, i in enumerate(order):
        s = scripts[i]
        slot = _Slot(s)
        if rng.random() < external_rate:
            slot.url = f"https://cdn{rng.randbelow(9)}.example/{s.template}/{i:04d}.js"
        for tool in tools:
            rate = TOOL_RATES[tool][0 if s.label == TRACKING else 1]
            slot.blocked[tool] = rng.random() < rate
        pages[page_ids[k % n_pages]].append(slot)

    labels = {}
    for page_id in page_ids:
        for tool in ["off"] + tools:
            out_dir = os.path.join(root, "pages", page_id, tool)
            ext_dir = os.path.join(out_dir, "ext")
            os.makedirs(ext_dir, exist_ok=True)
            parts = []
            for slot in pages[page_id]:
                if tool != "off" and slot.blocked[tool]:
                    stub = _SURROGATE_TEMPLATES.get(slot.script.template)
                    if tool == "GT" and stub is not None:
                        parts.append(_tag(SURROGATE_STUBS[stub] + "\n", None))
                    continue
                parts.append(_tag(slot.script.source, slot.url))
                if slot.url is not None:
                    with open(os.path.join(ext_dir, sidecar_name(slot.url)), "w",
                              encoding="utf-8", newline="") as fh:
                        fh.write(slot.script.source)
                if tool == "off":
                    labels[(page_id, len(parts) - 1)] = slot
            with open(os.path.join(out_dir, "index.html"), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(_html(parts))

    bundle = ingest_bundle(root)
    off = [r for r in bundle.records if r.tool == "off"]
    labelled = []
    verdicts = {t: [] for t in tools}
    for r in off:
        slot = labels[(r.page_id, int(r.id.rsplit("/", 1)[1]))]
        labelled.append(ScriptRecord(r.id, r.source, r.origin, r.page_id, r.url,
                                     slot.script.label, slot.script.rule, "off"))
        for t in tools:
            verdicts[t].append((r.id, TRACKING if slot.blocked[t] else FUNCTIONAL))
    off_pages = [p for p in bundle.pages if p.tool == "off"]
    save_dataset(Dataset(labelled, off_pages), os.path.join(root, "corpus.manifest"))
    _write_bundle_manifest(bundle, os.path.join(root, "bundle.manifest"))

    os.makedirs(os.path.join(root, "tools"), exist_ok=True)
    for t in tools:
        with open(os.path.join(root, "tools", f"{t}.tsv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(f"{rid}\t{cls}\n" for rid, cls in verdicts[t])
    with open(os.path.join(root, "surrogates.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SurrogateList.from_sources(SURROGATE_STUBS).dumps())
    return {"scripts": len(labelled), "pages": n_pages, "snapshots": len(bundle.pages),
            "records": len(bundle.records)}


def _write_bundle_manifest(bundle, path):
    """Manifest of every dump and script, with the record count declared up front."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# records={len(bundle.records)}\n")
        for p in bundle.pages:
            fh.write(dump_manifest_line({"type": "page", "page": p.page_id, "tool": p.tool,
                                         "html": p.html_path}) + "\n")
        for r in bundle.records:
            fields = {"id": r.id, "page": r.page_id, "tool": r.tool, "origin": r.origin}
            if r.url is not None:
                fields["url"] = r.url
            fh.write(dump_manifest_line(fields) + "\n")
