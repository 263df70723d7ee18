"""Recursive-descent parser for an ES5-flavoured JavaScript subset.

Node shapes (``value`` / ``children``):

=============  =====================================  ==============================
kind           value                                  children
=============  =====================================  ==============================
program        --                                     statements
function       name or None                           [params, block]
params         --                                     identifier nodes
var-decl       "var" / "let" / "const"                declarator nodes
declarator     name                                   [init] or []
expr-stmt      --                                     [expression]
block          --                                     statements
if             --                                     [test, consequent, alternate?]
while          --                                     [test, body]
do-while       --                                     [body, test]
for            --                                     [init?, test?, update?, body]
for-in         --                                     [left, object, body]
return         --                                     [argument] or []
break          label or None                          --
continue       label or None                          --
throw          --                                     [argument]
try            catch param name or None               [block, handler?, finalizer?]
switch         --                                     [discriminant, case...]
case           --                                     [test?, statements...]
empty          --                                     --
skip           short reason                           --
assign         operator ("=", "+=", ...)              [target, value]
binary-op      operator                               [left, right]
logical        "&&" / "||" / "??"                     [left, right]
unary-op       operator                               [argument]
update         ("++" | "--", prefix: bool)            [argument]
conditional    --                                     [test, consequent, alternate]
sequence       --                                     expressions
call           --                                     [callee, args...]
new            --                                     [callee, args...]
member         property name                          [object]
index          --                                     [object, index]
identifier     name                                   --
literal        source text                            --
this           --                                     --
object         --                                     property nodes
property       key text                               [value]
array          --                                     elements (None for holes)
=============  =====================================  ==============================

``for`` children keep positional slots: missing parts are ``None``.
"""

from dataclasses import dataclass, field

from ..errors import ParseError
from .lexer import IDENTIFIER, KEYWORD, NUMBER, PUNCTUATOR, REGEX, STRING, TEMPLATE

_ASSIGN_OPS = frozenset(
    "= += -= *= /= %= <<= >>= >>>= &= |= ^= **= &&= ||= ??=".split()
)

_BINARY_PRECEDENCE = {
    "??": 1,
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6,
    "!=": 6,
    "===": 6,
    "!==": 6,
    "<": 7,
    ">": 7,
    "<=": 7,
    ">=": 7,
    "instanceof": 7,
    "in": 7,
    "<<": 8,
    ">>": 8,
    ">>>": 8,
    "+": 9,
    "-": 9,
    "*": 10,
    "/": 10,
    "%": 10,
    "**": 11,
}

_UNARY_OPS = frozenset(["!", "~", "+", "-"])
_UNARY_KEYWORDS = frozenset(["typeof", "void", "delete"])

# keywords usable as property names after "." or as object keys
_LITERAL_KEYWORDS = frozenset(["null", "true", "false"])


@dataclass
class Node:
    kind: str
    children: list = field(default_factory=list)
    value: object = None
    line: int = 0

    def walk(self):
        """Yield this node and all descendants in source (pre-)order."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(c for c in reversed(node.children) if c is not None)


class _Unsupported(Exception):
    def __init__(self, message, line):
        super().__init__(message)
        self.line = line


class _Parser:
    def __init__(self, tokens):
        self.toks = list(tokens)
        self.pos = 0

    # -- token helpers ---------------------------------------------------
    def peek(self, offset=0):
        i = self.pos + offset
        return self.toks[i] if i < len(self.toks) else None

    def at_end(self):
        return self.pos >= len(self.toks)

    def line(self):
        tok = self.peek()
        if tok is not None:
            return tok.line
        return self.toks[-1].line if self.toks else 1

    def fail(self, message):
        raise _Unsupported(message, self.line())

    def next(self):
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input")
        self.pos += 1
        return tok

    def check(self, *texts):
        tok = self.peek()
        return tok is not None and tok.kind in (PUNCTUATOR, KEYWORD) and tok.text in texts

    def accept(self, *texts):
        if self.check(*texts):
            return self.next()
        return None

    def expect(self, text):
        tok = self.peek()
        if tok is None or tok.kind not in (PUNCTUATOR, KEYWORD) or tok.text != text:
            got = tok.text if tok is not None else "end of input"
            self.fail(f"expected {text!r}, got {got!r}")
        self.pos += 1
        return tok

    def identifier(self):
        tok = self.peek()
        if tok is None or tok.kind != IDENTIFIER:
            self.fail("expected identifier")
        self.pos += 1
        return tok

    def consume_semicolon(self):
        if self.accept(";"):
            return
        tok = self.peek()
        if tok is None or tok.is_punct("}") or tok.nl_before:
            return
        self.fail(f"expected ';' before {tok.text!r}")

    # -- statements ------------------------------------------------------
    def program(self):
        body = []
        while not self.at_end():
            body.append(self.statement_or_skip(top_level=True))
        return Node("program", body, line=1)

    def statement_or_skip(self, top_level=False):
        start = self.pos
        try:
            return self.statement()
        except _Unsupported as exc:
            self.pos = start
            self.skip_statement(top_level)
            return Node("skip", value=str(exc), line=exc.line)

    def skip_statement(self, top_level):
        """Advance past one unparseable statement.

        Stops after a ``;`` at bracket depth 0, after a ``}`` returning to
        depth 0 when a name or keyword follows it, before a ``}`` closing the
        enclosing block, or before a token starting a new line at depth 0.
        Always consumes at least one token.
        """
        depth = 0
        start = self.pos
        while not self.at_end():
            tok = self.peek()
            if depth == 0 and self.pos > start and tok.nl_before:
                return
            if tok.kind == PUNCTUATOR:
                if tok.text in "([{":
                    depth += 1
                elif tok.text in ")]}":
                    if depth == 0:
                        if tok.text == "}" and not top_level and self.pos > start:
                            return
                        self.pos += 1
                        return
                    depth -= 1
                    nxt = self.peek(1)
                    if depth == 0 and tok.text == "}" and nxt is not None and nxt.kind in (IDENTIFIER, KEYWORD):
                        self.pos += 1
                        return
                elif tok.text == ";" and depth == 0:
                    self.pos += 1
                    return
            self.pos += 1

    def statement(self):
        tok = self.peek()
        line = tok.line
        if tok.kind == PUNCTUATOR:
            if tok.text == "{":
                return self.block()
            if tok.text == ";":
                self.next()
                return Node("empty", line=line)
        if tok.kind == KEYWORD:
            handler = getattr(self, "stmt_" + tok.text, None)
            if handler is not None:
                return handler()
            if tok.text in ("class", "import", "export", "with", "enum", "debugger", "super", "yield"):
                self.fail(f"unsupported construct {tok.text!r}")
        if tok.kind == IDENTIFIER:
            nxt = self.peek(1)
            if nxt is not None and nxt.is_punct(":"):
                # labelled statement: the label carries no structure
                self.pos += 2
                return self.statement()
            if tok.text == "async" and nxt is not None and nxt.is_keyword("function"):
                self.fail("unsupported construct 'async'")
        expr = self.expression()
        self.consume_semicolon()
        return Node("expr-stmt", [expr], line=line)

    def block(self):
        line = self.expect("{").line
        body = []
        while not self.check("}"):
            if self.at_end():
                self.fail("unterminated block")
            body.append(self.statement_or_skip())
        self.expect("}")
        return Node("block", body, line=line)

    def var_declarations(self, kind, no_in=False):
        line = self.line()
        decls = []
        while True:
            tok = self.peek()
            if tok is None or tok.kind != IDENTIFIER:
                self.fail("unsupported declaration pattern")
            self.pos += 1
            init = []
            if self.accept("="):
                init = [self.assignment(no_in)]
            decls.append(Node("declarator", init, tok.text, tok.line))
            if not self.accept(","):
                break
        return Node("var-decl", decls, kind, line)

    def stmt_var(self):
        kind = self.next().text
        node = self.var_declarations(kind)
        self.consume_semicolon()
        return node

    stmt_let = stmt_var
    stmt_const = stmt_var

    def stmt_function(self):
        return self.function(declaration=True)

    def function(self, declaration):
        line = self.expect("function").line
        if self.accept("*"):
            self.fail("unsupported generator function")
        name = None
        if self.peek() is not None and self.peek().kind == IDENTIFIER:
            name = self.next().text
        elif declaration:
            self.fail("function declaration without a name")
        self.expect("(")
        params = []
        while not self.check(")"):
            tok = self.identifier()
            if self.check("="):
                self.fail("unsupported default parameter")
            params.append(Node("identifier", value=tok.text, line=tok.line))
            if not self.accept(","):
                break
        self.expect(")")
        body = self.block()
        return Node("function", [Node("params", params, line=line), body], name, line)

    def stmt_if(self):
        line = self.next().line
        self.expect("(")
        test = self.expression()
        self.expect(")")
        cons = self.statement_or_skip()
        children = [test, cons]
        if self.accept("else"):
            children.append(self.statement_or_skip())
        return Node("if", children, line=line)

    def stmt_while(self):
        line = self.next().line
        self.expect("(")
        test = self.expression()
        self.expect(")")
        return Node("while", [test, self.statement_or_skip()], line=line)

    def stmt_do(self):
        line = self.next().line
        body = self.statement_or_skip()
        self.expect("while")
        self.expect("(")
        test = self.expression()
        self.expect(")")
        self.accept(";")
        return Node("do-while", [body, test], line=line)

    def stmt_for(self):
        line = self.next().line
        self.expect("(")
        init = None
        if self.check("var", "let", "const"):
            kind = self.next().text
            init = self.var_declarations(kind, no_in=True)
            if self.check("in") and len(init.children) == 1 and not init.children[0].children:
                self.next()
                obj = self.expression()
                self.expect(")")
                return Node("for-in", [init, obj, self.statement_or_skip()], line=line)
            if self.peek() is not None and self.peek().text == "of":
                self.fail("unsupported for-of loop")
        elif not self.check(";"):
            init = self.expression(no_in=True)
            if self.check("in"):
                if init.kind not in ("identifier", "member", "index"):
                    self.fail("invalid for-in target")
                self.next()
                obj = self.expression()
                self.expect(")")
                return Node("for-in", [init, obj, self.statement_or_skip()], line=line)
            if self.peek() is not None and self.peek().text == "of":
                self.fail("unsupported for-of loop")
        self.expect(";")
        test = None if self.check(";") else self.expression()
        self.expect(";")
        update = None if self.check(")") else self.expression()
        self.expect(")")
        body = self.statement_or_skip()
        return Node("for", [init, test, update, body], line=line)

    def stmt_return(self):
        tok = self.next()
        nxt = self.peek()
        if nxt is None or nxt.nl_before or nxt.is_punct(";", "}"):
            self.accept(";")
            return Node("return", line=tok.line)
        arg = self.expression()
        self.consume_semicolon()
        return Node("return", [arg], line=tok.line)

    def _jump(self, kind):
        tok = self.next()
        label = None
        nxt = self.peek()
        if nxt is not None and nxt.kind == IDENTIFIER and not nxt.nl_before:
            label = self.next().text
        self.consume_semicolon()
        return Node(kind, value=label, line=tok.line)

    def stmt_break(self):
        return self._jump("break")

    def stmt_continue(self):
        return self._jump("continue")

    def stmt_throw(self):
        line = self.next().line
        arg = self.expression()
        self.consume_semicolon()
        return Node("throw", [arg], line=line)

    def stmt_try(self):
        line = self.next().line
        block = self.block()
        handler = finalizer = None
        param = None
        if self.accept("catch"):
            if self.accept("("):
                param = self.identifier().text
                self.expect(")")
            handler = self.block()
        if self.accept("finally"):
            finalizer = self.block()
        if handler is None and finalizer is None:
            self.fail("try without catch or finally")
        return Node("try", [block, handler, finalizer], param, line)

    def stmt_switch(self):
        line = self.next().line
        self.expect("(")
        disc = self.expression()
        self.expect(")")
        self.expect("{")
        cases = []
        while not self.accept("}"):
            if self.at_end():
                self.fail("unterminated switch")
            cline = self.line()
            if self.accept("case"):
                test = self.expression()
            else:
                self.expect("default")
                test = None
            self.expect(":")
            body = []
            while not self.check("case", "default", "}"):
                if self.at_end():
                    self.fail("unterminated switch")
                body.append(self.statement_or_skip())
            cases.append(Node("case", [test] + body, line=cline))
        return Node("switch", [disc] + cases, line=line)

    # -- expressions -----------------------------------------------------
    def expression(self, no_in=False):
        line = self.line()
        exprs = [self.assignment(no_in)]
        while self.accept(","):
            exprs.append(self.assignment(no_in))
        if len(exprs) == 1:
            return exprs[0]
        return Node("sequence", exprs, line=line)

    def assignment(self, no_in=False):
        tok = self.peek()
        if tok is not None and tok.kind == IDENTIFIER:
            nxt = self.peek(1)
            if nxt is not None and nxt.is_punct("=>"):
                self.fail("unsupported arrow function")
        if tok is not None and tok.is_punct("("):
            self._reject_arrow_params()
        left = self.conditional(no_in)
        op = self.peek()
        if op is not None and op.kind == PUNCTUATOR and op.text in _ASSIGN_OPS:
            if left.kind not in ("identifier", "member", "index"):
                self.fail("invalid assignment target")
            self.next()
            value = self.assignment(no_in)
            return Node("assign", [left, value], op.text, op.line)
        return left

    def _reject_arrow_params(self):
        depth = 0
        i = self.pos
        while i < len(self.toks):
            t = self.toks[i]
            if t.kind == PUNCTUATOR:
                if t.text in "([{":
                    depth += 1
                elif t.text in ")]}":
                    depth -= 1
                    if depth == 0:
                        nxt = self.toks[i + 1] if i + 1 < len(self.toks) else None
                        if nxt is not None and nxt.is_punct("=>"):
                            self.fail("unsupported arrow function")
                        return
            i += 1

    def conditional(self, no_in):
        test = self.binary(0, no_in)
        if self.check("?"):
            line = self.next().line
            cons = self.assignment()
            self.expect(":")
            alt = self.assignment(no_in)
            return Node("conditional", [test, cons, alt], line=line)
        return test

    def binary(self, min_prec, no_in):
        left = self.unary()
        while True:
            tok = self.peek()
            if tok is None or tok.kind not in (PUNCTUATOR, KEYWORD):
                return left
            prec = _BINARY_PRECEDENCE.get(tok.text)
            if prec is None or prec <= min_prec or (no_in and tok.text == "in"):
                return left
            self.next()
            # ** is right-associative
            right = self.binary(prec - 1 if tok.text == "**" else prec, no_in)
            kind = "logical" if tok.text in ("&&", "||", "??") else "binary-op"
            left = Node(kind, [left, right], tok.text, tok.line)

    def unary(self):
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input")
        if tok.kind == PUNCTUATOR and tok.text in _UNARY_OPS or tok.kind == KEYWORD and tok.text in _UNARY_KEYWORDS:
            self.next()
            return Node("unary-op", [self.unary()], tok.text, tok.line)
        if tok.is_punct("++", "--"):
            self.next()
            arg = self.unary()
            if arg.kind not in ("identifier", "member", "index"):
                self.fail("invalid update target")
            return Node("update", [arg], (tok.text, True), tok.line)
        expr = self.postfix()
        return expr

    def postfix(self):
        expr = self.call_member()
        tok = self.peek()
        if tok is not None and tok.is_punct("++", "--") and not tok.nl_before:
            if expr.kind not in ("identifier", "member", "index"):
                self.fail("invalid update target")
            self.next()
            return Node("update", [expr], (tok.text, False), tok.line)
        return expr

    def arguments(self):
        self.expect("(")
        args = []
        while not self.check(")"):
            if self.check("..."):
                self.fail("unsupported spread argument")
            args.append(self.assignment())
            if not self.accept(","):
                break
        self.expect(")")
        return args

    def property_name(self):
        tok = self.next()
        if tok.kind in (IDENTIFIER, KEYWORD):
            return tok.text
        self.fail("expected property name")

    def call_member(self):
        tok = self.peek()
        if tok is not None and tok.is_keyword("new"):
            line = self.next().line
            if self.check("."):
                self.fail("unsupported new.target")
            callee = self.member_only(self.primary() if not self.check("new") else self.call_member())
            args = self.arguments() if self.check("(") else []
            expr = Node("new", [callee] + args, line=line)
        else:
            expr = self.primary()
        while True:
            tok = self.peek()
            if tok is None or tok.kind != PUNCTUATOR:
                return expr
            if tok.text == ".":
                self.next()
                expr = Node("member", [expr], self.property_name(), tok.line)
            elif tok.text == "?.":
                self.fail("unsupported optional chaining")
            elif tok.text == "[":
                self.next()
                idx = self.expression()
                self.expect("]")
                expr = Node("index", [expr, idx], line=tok.line)
            elif tok.text == "(":
                expr = Node("call", [expr] + self.arguments(), line=tok.line)
            else:
                return expr

    def member_only(self, expr):
        """Member/index suffixes only (the callee part of a ``new`` expression)."""
        while True:
            tok = self.peek()
            if tok is not None and tok.is_punct("."):
                self.next()
                expr = Node("member", [expr], self.property_name(), tok.line)
            elif tok is not None and tok.is_punct("["):
                self.next()
                idx = self.expression()
                self.expect("]")
                expr = Node("index", [expr, idx], line=tok.line)
            else:
                return expr

    def primary(self):
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input")
        line = tok.line
        if tok.kind == IDENTIFIER:
            self.next()
            return Node("identifier", value=tok.text, line=line)
        if tok.kind in (NUMBER, STRING, REGEX, TEMPLATE):
            self.next()
            return Node("literal", value=tok.text, line=line)
        if tok.kind == KEYWORD:
            if tok.text in _LITERAL_KEYWORDS:
                self.next()
                return Node("literal", value=tok.text, line=line)
            if tok.text == "this":
                self.next()
                return Node("this", line=line)
            if tok.text == "function":
                return self.function(declaration=False)
            self.fail(f"unexpected keyword {tok.text!r}")
        if tok.text == "(":
            self.next()
            expr = self.expression()
            self.expect(")")
            return expr
        if tok.text == "[":
            return self.array()
        if tok.text == "{":
            return self.object()
        self.fail(f"unexpected token {tok.text!r}")

    def array(self):
        line = self.expect("[").line
        elements = []
        while not self.check("]"):
            if self.check(","):
                self.next()
                elements.append(None)
                continue
            if self.check("..."):
                self.fail("unsupported spread element")
            elements.append(self.assignment())
            if not self.check("]"):
                self.expect(",")
        self.expect("]")
        return Node("array", elements, line=line)

    def object(self):
        line = self.expect("{").line
        props = []
        while not self.check("}"):
            tok = self.next()
            if tok.kind in (IDENTIFIER, KEYWORD, STRING, NUMBER):
                key = tok.text
            else:
                self.fail("unsupported object key")
            if tok.text in ("get", "set") and not self.check(":", ",", "}"):
                self.fail("unsupported accessor property")
            if not self.check(":"):
                self.fail("unsupported shorthand property")
            self.next()
            props.append(Node("property", [self.assignment()], key, tok.line))
            if not self.check("}"):
                self.expect(",")
        self.expect("}")
        return Node("object", props, line=line)


def _check_balance(tokens):
    stack = []
    pairs = {")": "(", "]": "[", "}": "{"}
    for tok in tokens:
        if tok.kind != PUNCTUATOR:
            continue
        if tok.text in "([{":
            stack.append(tok)
        elif tok.text in pairs:
            if not stack or stack[-1].text != pairs[tok.text]:
                raise ParseError(f"unbalanced {tok.text!r}", tok.line)
            stack.pop()
    if stack:
        raise ParseError(f"unclosed {stack[-1].text!r}", stack[-1].line)


def parse(tokens):
    """Parse a token list into a ``program`` node.

    Statements the subset does not cover become ``skip`` nodes; only
    unbalanced brackets make recovery impossible and raise ParseError.
    """
    tokens = list(tokens)
    _check_balance(tokens)
    return _Parser(tokens).program()
