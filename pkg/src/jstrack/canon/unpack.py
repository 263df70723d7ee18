"""Deterministic pretty-printer for packed or minified JavaScript.

Only whitespace changes: the token stream of the output equals the token
stream of the input. Statements end up one per line with single-space token
separation, which makes "one source line" a stable syntactic term.
"""

from .lexer import IDENTIFIER, KEYWORD, NUMBER, PUNCTUATOR, REGEX, STRING, TEMPLATE, lex

_NO_SPACE_BEFORE = frozenset([";", ",", ")", "]", "."])
_NO_SPACE_AFTER = frozenset(["(", "[", "."])
_STAY_AFTER_BRACE = frozenset([")", ",", ";", ".", "]", "("])
_STAY_KEYWORDS = frozenset(["else", "catch", "finally"])
_VALUE_KINDS = frozenset([IDENTIFIER, NUMBER, STRING, REGEX, TEMPLATE])
_ENDS_STATEMENT = frozenset([")", "]", "}", "++", "--"])
_STARTS_STATEMENT = frozenset(["++", "--", "!", "~"])


def _operand_end(tok):
    return tok.kind == IDENTIFIER or tok.is_punct(")", "]")


def _space_between(prev, tok, prev_prefix):
    if tok.is_punct("++", "--") and _operand_end(prev):
        return False
    if prev.is_punct("!", "~") or prev_prefix:
        return False
    if tok.kind == PUNCTUATOR and tok.text in _NO_SPACE_BEFORE:
        # "1 .x" must not become "1.x"
        return tok.text == "." and prev.kind == NUMBER
    if prev.kind == PUNCTUATOR and prev.text in _NO_SPACE_AFTER:
        return False
    if tok.is_punct("(", "["):
        if _operand_end(prev):
            return False
    return True


def _keeps_newline(prev, tok):
    """Original line breaks that automatic semicolon insertion may depend on."""
    prev_ends = (
        prev.kind in _VALUE_KINDS
        or prev.is_punct(*_ENDS_STATEMENT)
        or prev.is_keyword("return", "break", "continue", "this", "true", "false", "null")
    )
    tok_starts = (
        tok.kind in _VALUE_KINDS
        or tok.kind == KEYWORD
        or tok.is_punct(*_STARTS_STATEMENT)
    )
    return prev_ends and tok_starts


def _brace_breaks_after(nxt, closed_do):
    if nxt.kind == PUNCTUATOR and nxt.text in _STAY_AFTER_BRACE:
        return False
    if nxt.is_keyword("while"):
        return not closed_do
    return not nxt.is_keyword(*_STAY_KEYWORDS)


def unpack_tokens(tokens):
    lines = []
    current = []
    paren = 0
    prev = None
    prefix = False  # prev is a prefix ++/--
    braces = []  # per open brace: does it start a do-while body
    closed_do = False
    for tok in tokens:
        brk = False
        if prev is not None:
            if prev.is_punct(";") and paren == 0:
                brk = True
            elif prev.is_punct("{") and not tok.is_punct("}"):
                brk = True
            elif tok.is_punct("}") and not prev.is_punct("{"):
                brk = True
            elif prev.is_punct("}"):
                brk = _brace_breaks_after(tok, closed_do)
            elif tok.nl_before and _keeps_newline(prev, tok):
                brk = True
            if brk:
                lines.append("".join(current))
                current = []
            elif _space_between(prev, tok, prefix):
                current.append(" ")
        prefix = tok.is_punct("++", "--") and (prev is None or not _operand_end(prev) or brk)
        current.append(tok.text)
        closed_do = False
        if tok.is_punct("{"):
            braces.append(prev is not None and prev.is_keyword("do"))
        elif tok.is_punct("}") and braces:
            closed_do = braces.pop()
        if tok.is_punct("(", "["):
            paren += 1
        elif tok.is_punct(")", "]"):
            paren = max(0, paren - 1)
        prev = tok
    if current:
        lines.append("".join(current))
    return "\n".join(lines)


def unpack(source):
    """Re-emit ``source`` one statement per line.

    Raises
    ------
    LexError
        If ``source`` does not tokenize.

    Examples
    --------
    >>> print(unpack("var a=1;var b=2;"))
    var a = 1;
    var b = 2;
    """
    return unpack_tokens(lex(source))
