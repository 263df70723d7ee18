"""Tokenizer for the JavaScript subset handled by the canonicalizer.

Regex literals are told apart from division with the usual preceding-token
heuristic. Comments (including the legacy ``<!--`` / ``-->`` HTML forms) and
whitespace are dropped; each token remembers whether a line terminator
preceded it so the parser can apply automatic semicolon insertion.
"""

import re
from dataclasses import dataclass, field

from ..errors import LexError

IDENTIFIER = "identifier"
KEYWORD = "keyword"
STRING = "string"
NUMBER = "number"
REGEX = "regex"
PUNCTUATOR = "punctuator"
TEMPLATE = "template"

KEYWORDS = frozenset(
    """break case catch class const continue debugger default delete do else
    enum export extends false finally for function if import in instanceof let
    new null return super switch this throw true try typeof var void while with
    yield""".split()
)

# keywords after which a slash starts a regex rather than a division
_REGEX_AFTER_KEYWORDS = frozenset(
    "return typeof instanceof in new delete void throw case do else yield".split()
)

_PUNCTUATORS = sorted(
    """>>>= ... === !== **= <<= >>= >>> &&= ||= ??= => == != <= >= && || ?? ?.
    ++ -- += -= *= /= %= &= |= ^= << >> ** { } ( ) [ ] ; , < > + - * / % & | ^
    ! ~ ? : = . @ #""".split(),
    key=len,
    reverse=True,
)

_LINE_TERMINATORS = "\n\r\u2028\u2029"
_WHITESPACE = " \t\v\f\u00a0\ufeff" + _LINE_TERMINATORS

_IDENT_RE = re.compile(r"(?:[^\W\d]|\$)(?:\w|\$|\u200c|\u200d)*")
_NUMBER_RE = re.compile(
    r"""
    0[xX][0-9a-fA-F_]+n?
    | 0[oO][0-7_]+n?
    | 0[bB][01_]+n?
    | (?:\d[\d_]*\.?[\d_]*|\.\d[\d_]*)(?:[eE][+-]?\d+)?n?
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int = field(default=1, compare=False)
    nl_before: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        if not self.text:
            raise ValueError("token text must be non-empty")
        if self.line < 1:
            raise ValueError("token line must be >= 1")

    def is_punct(self, *texts):
        return self.kind == PUNCTUATOR and self.text in texts

    def is_keyword(self, *texts):
        return self.kind == KEYWORD and self.text in texts


def _regex_allowed(prev):
    if prev is None:
        return True
    if prev.kind in (IDENTIFIER, NUMBER, STRING, REGEX, TEMPLATE):
        return False
    if prev.kind == KEYWORD:
        return prev.text in _REGEX_AFTER_KEYWORDS
    return prev.text not in (")", "]", "++", "--")


class _Scanner:
    def __init__(self, source):
        self.src = source
        self.pos = 0
        self.line = 1
        self.tokens = []
        self.nl = False
        self.line_start = True  # only whitespace seen so far on this line

    def error(self, message, line=None):
        raise LexError(message, self.line if line is None else line)

    def newline(self, ch, nxt):
        # \r\n counts once
        if ch == "\r" and nxt == "\n":
            return
        self.line += 1
        self.nl = True
        self.line_start = True

    def skip_line(self):
        src = self.src
        while self.pos < len(src) and src[self.pos] not in _LINE_TERMINATORS:
            self.pos += 1

    def skip_space_and_comments(self):
        src = self.src
        n = len(src)
        while self.pos < n:
            ch = src[self.pos]
            if ch in _WHITESPACE:
                if ch in _LINE_TERMINATORS:
                    self.newline(ch, src[self.pos + 1] if self.pos + 1 < n else "")
                self.pos += 1
            elif src.startswith("//", self.pos) or src.startswith("<!--", self.pos):
                self.skip_line()
            elif self.line_start and src.startswith("-->", self.pos):
                self.skip_line()
            elif src.startswith("/*", self.pos):
                start_line = self.line
                end = src.find("*/", self.pos + 2)
                if end < 0:
                    self.error("unterminated comment", start_line)
                body = src[self.pos + 2:end]
                for i, c in enumerate(body):
                    if c in _LINE_TERMINATORS:
                        self.newline(c, body[i + 1] if i + 1 < len(body) else "")
                self.pos = end + 2
            else:
                return

    def emit(self, kind, text, line):
        self.tokens.append(Token(kind, text, line, self.tok_nl))
        self.nl = False
        self.line_start = False

    def scan_string(self):
        src = self.src
        quote = src[self.pos]
        start, line = self.pos, self.line
        i = self.pos + 1
        while i < len(src):
            c = src[i]
            if c == "\\":
                if i + 1 < len(src) and src[i + 1] in _LINE_TERMINATORS:
                    self.newline(src[i + 1], src[i + 2] if i + 2 < len(src) else "")
                i += 2
                continue
            if c == quote:
                self.pos = i + 1
                self.emit(STRING, src[start:self.pos], line)
                return
            if c in "\n\r":
                break
            i += 1
        self.error("unterminated string literal", line)

    def scan_template(self):
        src = self.src
        start, line = self.pos, self.line
        end = self._template_end(self.pos + 1)
        self.pos = end
        self.emit(TEMPLATE, src[start:end], line)

    def _template_end(self, i):
        """Index just past the closing backtick of a template starting before ``i``."""
        src = self.src
        while i < len(src):
            c = src[i]
            if c == "\\":
                i += 2
                continue
            if c == "`":
                return i + 1
            if c in _LINE_TERMINATORS:
                self.newline(c, src[i + 1] if i + 1 < len(src) else "")
            if c == "$" and src.startswith("${", i):
                i = self._substitution_end(i + 2)
                continue
            i += 1
        self.error("unterminated template literal")

    def _substitution_end(self, i):
        src = self.src
        depth = 1
        while i < len(src):
            c = src[i]
            if c in "'\"":
                j = i + 1
                while j < len(src) and src[j] != c:
                    j += 2 if src[j] == "\\" else 1
                i = j + 1
                continue
            if c == "`":
                i = self._template_end(i + 1)
                continue
            if c in _LINE_TERMINATORS:
                self.newline(c, src[i + 1] if i + 1 < len(src) else "")
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
                if depth == 0:
                    return i + 1
            i += 1
        self.error("unterminated template substitution")

    def scan_regex(self):
        src = self.src
        start, line = self.pos, self.line
        i = self.pos + 1
        in_class = False
        while i < len(src):
            c = src[i]
            if c in _LINE_TERMINATORS:
                break
            if c == "\\":
                i += 2
                continue
            if c == "[":
                in_class = True
            elif c == "]":
                in_class = False
            elif c == "/" and not in_class:
                i += 1
                while i < len(src) and (src[i].isalnum() or src[i] in "_$"):
                    i += 1
                self.pos = i
                self.emit(REGEX, src[start:i], line)
                return
            i += 1
        self.error("unterminated regular expression", line)

    def run(self):
        src = self.src
        while True:
            self.skip_space_and_comments()
            if self.pos >= len(src):
                return self.tokens
            ch = src[self.pos]
            line = self.line
            self.tok_nl = self.nl
            if ch in "'\"":
                self.scan_string()
                continue
            if ch == "`":
                self.scan_template()
                continue
            if ch.isdigit() or (ch == "." and src[self.pos + 1:self.pos + 2].isdigit()):
                m = _NUMBER_RE.match(src, self.pos)
                self.pos = m.end()
                self.emit(NUMBER, m.group(), line)
                continue
            m = _IDENT_RE.match(src, self.pos)
            if m:
                word = m.group()
                self.pos = m.end()
                self.emit(KEYWORD if word in KEYWORDS else IDENTIFIER, word, line)
                continue
            if ch == "/" and _regex_allowed(self.tokens[-1] if self.tokens else None):
                self.scan_regex()
                continue
            for p in _PUNCTUATORS:
                if src.startswith(p, self.pos):
                    # "?." followed by a digit is a conditional then a number
                    if p == "?." and src[self.pos + 2:self.pos + 3].isdigit():
                        continue
                    self.pos += len(p)
                    self.emit(PUNCTUATOR, p, line)
                    break
            else:
                self.error(f"illegal character {ch!r}")


def lex(source):
    """Tokenize ``source`` into a list of :class:`Token`.

    Raises
    ------
    LexError
        On an unterminated string, template, regex or comment, or an
        illegal character.
    """
    return _Scanner(source).run()
