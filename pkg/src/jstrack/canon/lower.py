"""Lowering of the AST to the canonical straight-line form.

Every function body (and the top level, when it holds any statement)
becomes one *unit* bracketed by ``begin`` / ``end``. Inside a unit each
statement performs at most one operation; intermediate results live in
temporaries ``$0, $1, ...`` and user identifiers are renamed ``v0, v1,
...``. Both numberings restart in every unit and follow first appearance
in the emitted text, so the result depends only on program structure.

Names treated as *user identifiers* are those the program declares or
assigns anywhere (``var``/``let``/``const``, parameters, function names,
catch parameters, plain assignment and update targets). Everything else
(``document``, ``window``, ``unescape``...) is a free global and is kept,
as are property names and literals.

Loops are unified: ``for``, ``for-in`` and ``do-while`` all become a
``while`` guard over a temporary that is recomputed at the end of the body.
"""

from dataclasses import dataclass, field

from .lexer import IDENTIFIER, KEYWORD, PUNCTUATOR, lex
from .parser import Node, parse

BEGIN = "begin"
END = "end"
ASSIGN = "assign"
GUARD_IF = "guard_if"
GUARD_WHILE = "guard_while"
RET = "ret"
CALL = "call"
JUMP = "jump"
SKIP = "skip"

GUARD_KINDS = frozenset([GUARD_IF, GUARD_WHILE])

_NORMALIZED_OPS = {"==": "===", "!=": "!=="}


@dataclass(frozen=True)
class CanonicalStmt:
    """One canonical line.

    ``depth`` is the guard nesting level inside the unit and ``unit`` the
    index of the enclosing ``begin``/``end`` pair; ``reads`` and ``writes``
    are derived from ``text``.
    """

    text: str
    kind: str
    reads: frozenset = frozenset()
    writes: frozenset = frozenset()
    depth: int = 0
    unit: int = 0


@dataclass(frozen=True)
class CanonicalProgram:
    statements: tuple = ()
    temp_count: int = 0
    skipped: int = field(default=0, compare=False)

    def __len__(self):
        return len(self.statements)

    @property
    def texts(self):
        return [s.text for s in self.statements]


class _Ref:
    """Placeholder for a temporary or user identifier, numbered on render."""

    __slots__ = ("kind", "key")

    def __init__(self, kind, key):
        self.kind = kind
        self.key = key

    def __eq__(self, other):
        return isinstance(other, _Ref) and (self.kind, self.key) == (other.kind, other.key)

    def __hash__(self):
        return hash((self.kind, self.key))


def _is_temp(atom):
    return isinstance(atom, _Ref) and atom.kind == "t"


def user_identifiers(ast):
    """Names the program declares or assigns (the ones subject to renaming)."""
    names = set()
    for node in ast.walk():
        kind = node.kind
        if kind == "declarator":
            names.add(node.value)
        elif kind == "function":
            if node.value:
                names.add(node.value)
            names.update(p.value for p in node.children[0].children)
        elif kind == "try" and node.value:
            names.add(node.value)
        elif kind in ("assign", "update") and node.children[0].kind == "identifier":
            names.add(node.children[0].value)
        elif kind == "for-in" and node.children[0].kind == "identifier":
            names.add(node.children[0].value)
    return names


class _UnitLowerer:
    def __init__(self, user_names):
        self.user_names = user_names
        self.raw = []  # (kind, parts, depth)
        self.depth = 0
        self.ntemps = 0
        self.nested = []
        self.skipped = 0

    # -- helpers ---------------------------------------------------------
    def name(self, ident):
        if ident in self.user_names:
            return _Ref("v", ident)
        return ident

    def temp(self):
        self.ntemps += 1
        return _Ref("t", self.ntemps)

    def emit(self, kind, *parts):
        self.raw.append((kind, parts, self.depth))

    def op(self, parts, dest=None):
        target = dest if dest is not None else self.temp()
        self.emit(ASSIGN, target, " = ", *parts)
        return target

    def store(self, dest, atom):
        if dest is None or atom == dest:
            return atom
        self.emit(ASSIGN, dest, " = ", atom)
        return dest

    def nested_block(self, fn, *args):
        self.depth += 1
        try:
            fn(*args)
        finally:
            self.depth -= 1

    # -- expressions -----------------------------------------------------
    def expr(self, node, dest=None):
        kind = node.kind
        method = getattr(self, "x_" + kind.replace("-", "_"), None)
        if method is None:
            self.skipped += 1
            return self.store(dest, "undefined")
        return method(node, dest)

    def x_identifier(self, node, dest):
        return self.store(dest, self.name(node.value))

    def x_literal(self, node, dest):
        return self.store(dest, node.value)

    def x_this(self, node, dest):
        return self.store(dest, "this")

    def x_member(self, node, dest):
        obj = self.expr(node.children[0])
        return self.op([obj, "." + node.value], dest)

    def x_index(self, node, dest):
        obj = self.expr(node.children[0])
        idx = self.expr(node.children[1])
        return self.op([obj, "[", idx, "]"], dest)

    def callee_parts(self, callee):
        if callee.kind == "member":
            return [self.expr(callee.children[0]), "." + callee.value]
        if callee.kind == "index":
            obj = self.expr(callee.children[0])
            return [obj, "[", self.expr(callee.children[1]), "]"]
        return [self.expr(callee)]

    def arg_parts(self, args):
        parts = ["("]
        for i, arg in enumerate(args):
            if i:
                parts.append(", ")
            parts.append(self.expr(arg))
        parts.append(")")
        return parts

    def call_parts(self, node):
        parts = self.callee_parts(node.children[0]) + self.arg_parts(node.children[1:])
        if node.kind == "new":
            parts.insert(0, "new ")
        return parts

    def x_call(self, node, dest):
        return self.op(self.call_parts(node), dest)

    x_new = x_call

    def x_binary_op(self, node, dest):
        left = self.expr(node.children[0])
        right = self.expr(node.children[1])
        op = _NORMALIZED_OPS.get(node.value, node.value)
        return self.op([left, f" {op} ", right], dest)

    def x_logical(self, node, dest):
        res = dest if dest is not None else self.temp()
        self.expr(node.children[0], res)
        if node.value == "&&":
            guard = res
        else:
            guard = self.op(["!", res])
        self.emit(GUARD_IF, "if(", guard, ")")
        self.nested_block(self.expr, node.children[1], res)
        return res

    def x_conditional(self, node, dest):
        test, cons, alt = node.children
        cond = self.expr(test)
        neg = self.op(["!", cond])
        res = dest if dest is not None else self.temp()
        self.emit(GUARD_IF, "if(", cond, ")")
        self.nested_block(self.expr, cons, res)
        self.emit(GUARD_IF, "if(", neg, ")")
        self.nested_block(self.expr, alt, res)
        return res

    def x_unary_op(self, node, dest):
        (arg,) = node.children
        op = node.value
        if op in ("-", "+") and arg.kind == "literal" and arg.value[:1].isdigit():
            return self.store(dest, op + arg.value)
        if op == "delete" and arg.kind in ("member", "index"):
            return self.op(["delete "] + self.callee_parts(arg), dest)
        value = self.expr(arg)
        prefix = op + " " if op.isalpha() else op
        return self.op([prefix, value], dest)

    def x_update(self, node, dest):
        op, prefix = node.value
        (target,) = node.children
        arith = " + 1" if op == "++" else " - 1"
        if target.kind == "identifier":
            var = self.name(target.value)
            old = None if prefix else self.op([var])
            self.emit(ASSIGN, var, " = ", var, arith)
            return self.store(dest, var if prefix else old)
        loc = self.callee_parts(target)
        old = self.op(list(loc))
        new = self.op([old, arith])
        self.emit(ASSIGN, *loc, " = ", new)
        return self.store(dest, new if prefix else old)

    def x_assign(self, node, dest):
        target, value = node.children
        op = node.value
        if op != "=":
            base = op[:-1]
            kind = "logical" if base in ("&&", "||", "??") else "binary-op"
            value = Node(kind, [target, value], base, node.line)
        if target.kind == "identifier":
            var = self.name(target.value)
            self.expr(value, var)
            return self.store(dest, var)
        loc = self.callee_parts(target)
        rhs = self.expr(value)
        self.emit(ASSIGN, *loc, " = ", rhs)
        return self.store(dest, rhs)

    def x_sequence(self, node, dest):
        for child in node.children[:-1]:
            self.discard(child)
        return self.expr(node.children[-1], dest)

    def x_function(self, node, dest):
        self.nested.append(node)
        return self.op(["function"], dest)

    def x_object(self, node, dest):
        parts = ["{"]
        for i, prop in enumerate(node.children):
            if i:
                parts.append(", ")
            parts.extend([prop.value + ": ", self.expr(prop.children[0])])
        parts.append("}")
        return self.op(parts, dest)

    def x_array(self, node, dest):
        parts = ["["]
        for i, el in enumerate(node.children):
            if i:
                parts.append(", ")
            parts.append("undefined" if el is None else self.expr(el))
        parts.append("]")
        return self.op(parts, dest)

    def discard(self, node):
        """Lower an expression whose value is unused."""
        kind = node.kind
        if kind in ("call", "new"):
            self.emit(CALL, *self.call_parts(node))
        elif kind == "sequence":
            for child in node.children:
                self.discard(child)
        elif kind in ("identifier", "literal", "this"):
            pass
        elif kind == "function":
            self.nested.append(node)
        else:
            self.expr(node)

    # -- statements ------------------------------------------------------
    def stmt(self, node):
        method = getattr(self, "s_" + node.kind.replace("-", "_"))
        method(node)

    def stmts(self, nodes):
        for node in nodes:
            if node is not None:
                self.stmt(node)

    def body(self, node):
        self.nested_block(self.stmt, node)

    def s_var_decl(self, node):
        for decl in node.children:
            var = self.name(decl.value)
            if decl.children:
                self.expr(decl.children[0], var)
            else:
                self.emit(ASSIGN, var, " = undefined")

    def s_function(self, node):
        self.nested.append(node)

    def s_expr_stmt(self, node):
        self.discard(node.children[0])

    def s_block(self, node):
        self.stmts(node.children)

    def s_empty(self, node):
        pass

    def s_skip(self, node):
        self.skipped += 1
        self.emit(SKIP, "skip")

    def s_if(self, node):
        test, cons = node.children[:2]
        alt = node.children[2] if len(node.children) > 2 else None
        cond = self.expr(test)
        neg = self.op(["!", cond]) if alt is not None else None
        self.emit(GUARD_IF, "if(", cond, ")")
        self.body(cons)
        if alt is not None:
            self.emit(GUARD_IF, "if(", neg, ")")
            self.body(alt)

    def loop(self, test, body, update=None):
        """``while`` guard with the condition recomputed at the end of the body."""
        if test is None:
            cond, recompute = "true", False
        else:
            before = len(self.raw)
            cond = self.expr(test)
            recompute = _is_temp(cond) and len(self.raw) > before
        self.emit(GUARD_WHILE, "while(", cond, ")")
        self.depth += 1
        self.stmt(body)
        if update is not None:
            self.discard(update)
        if recompute:
            self.expr(test, cond)
        self.depth -= 1

    def s_while(self, node):
        self.loop(node.children[0], node.children[1])

    def s_for(self, node):
        init, test, update, body = node.children
        if init is not None:
            if init.kind == "var-decl":
                self.stmt(init)
            else:
                self.discard(init)
        self.loop(test, body, update)

    def s_do_while(self, node):
        body, test = node.children
        guard = self.op(["true"])
        self.emit(GUARD_WHILE, "while(", guard, ")")
        self.depth += 1
        self.stmt(body)
        self.expr(test, guard)
        self.depth -= 1

    def s_for_in(self, node):
        left, obj, body = node.children
        source = self.expr(obj)
        if left.kind == "var-decl":
            key = self.name(left.children[0].value)
            loc = [key]
        elif left.kind == "identifier":
            key = self.name(left.value)
            loc = [key]
        else:
            key = None
            loc = self.callee_parts(left)

        def advance():
            if key is not None:
                self.emit(ASSIGN, key, " = $$next(", source, ")")
                return key
            nxt = self.op(["$$next(", source, ")"])
            self.emit(ASSIGN, *loc, " = ", nxt)
            return nxt

        guard = advance()
        self.emit(GUARD_WHILE, "while(", guard, ")")
        self.depth += 1
        self.stmt(body)
        if key is not None:
            advance()
        else:
            self.op(["$$next(", source, ")"], guard)
            self.emit(ASSIGN, *loc, " = ", guard)
        self.depth -= 1

    def s_return(self, node):
        if node.children:
            value = self.expr(node.children[0])
            self.emit(RET, "return ", value)
        else:
            self.emit(RET, "return")

    def s_break(self, node):
        self.emit(JUMP, "break")

    def s_continue(self, node):
        self.emit(JUMP, "continue")

    def s_throw(self, node):
        value = self.expr(node.children[0])
        self.emit(JUMP, "throw ", value)

    def s_try(self, node):
        block, handler, finalizer = node.children
        self.stmt(block)
        if handler is not None:
            self.stmt(handler)
        if finalizer is not None:
            self.stmt(finalizer)

    def s_switch(self, node):
        disc = self.expr(node.children[0])
        for case in node.children[1:]:
            test, body = case.children[0], case.children[1:]
            if test is None:
                self.stmts(body)
                continue
            value = self.expr(test)
            guard = self.op([disc, " === ", value])
            self.emit(GUARD_IF, "if(", guard, ")")
            self.depth += 1
            self.stmts(body)
            self.depth -= 1

    # -- rendering -------------------------------------------------------
    def render(self, unit_index):
        numbers = {"t": {}, "v": {}}
        prefix = {"t": "$", "v": "v"}
        out = []
        for kind, parts, depth in self.raw:
            chunks = []
            for part in parts:
                if isinstance(part, _Ref):
                    table = numbers[part.kind]
                    if part.key not in table:
                        table[part.key] = len(table)
                    chunks.append(f"{prefix[part.kind]}{table[part.key]}")
                else:
                    chunks.append(part)
            out.append(make_stmt("".join(chunks), depth=depth, unit=unit_index, kind=kind))
        return out, len(numbers["t"])


def _names(tokens):
    names = set()
    for i, tok in enumerate(tokens):
        if tok.kind != IDENTIFIER or tok.text == "undefined" or tok.text.startswith("$$"):
            continue
        if i > 0 and tokens[i - 1].is_punct("."):
            continue
        if i + 1 < len(tokens) and tokens[i + 1].is_punct(":"):
            continue
        names.add(tok.text)
    return names


def analyze(text):
    """Derive ``(kind, reads, writes)`` for one canonical statement text."""
    if text in (BEGIN, END, SKIP):
        return text, frozenset(), frozenset()
    tokens = lex(text)
    first = tokens[0]
    if first.kind == KEYWORD:
        if first.text == "if":
            return GUARD_IF, frozenset(_names(tokens[1:])), frozenset()
        if first.text == "while":
            return GUARD_WHILE, frozenset(_names(tokens[1:])), frozenset()
        if first.text == "return":
            return RET, frozenset(_names(tokens[1:])), frozenset()
        if first.text in ("break", "continue", "throw"):
            return JUMP, frozenset(_names(tokens[1:])), frozenset()
    depth = 0
    for i, tok in enumerate(tokens):
        if tok.kind != PUNCTUATOR:
            continue
        if tok.text in "([{":
            depth += 1
        elif tok.text in ")]}":
            depth -= 1
        elif tok.text == "=" and depth == 0:
            lhs, rhs = tokens[:i], tokens[i + 1:]
            reads = _names(rhs)
            if len(lhs) == 1:
                writes = {lhs[0].text}
            else:
                # member store: the root object is both read and redefined
                writes = {lhs[0].text} if lhs[0].kind == IDENTIFIER else set()
                reads |= _names(lhs)
            return ASSIGN, frozenset(reads), frozenset(writes)
    return CALL, frozenset(_names(tokens)), frozenset()


def make_stmt(text, depth=0, unit=0, kind=None):
    derived_kind, reads, writes = analyze(text)
    return CanonicalStmt(text, kind or derived_kind, reads, writes, depth, unit)


def _lower_unit(lowerer, body_nodes, unit_index, is_function):
    lowerer.stmts(body_nodes)
    if not lowerer.raw and not is_function:
        return [], 0
    stmts, ntemps = lowerer.render(unit_index)
    begin = CanonicalStmt(BEGIN, BEGIN, unit=unit_index)
    end = CanonicalStmt(END, END, unit=unit_index)
    return [begin] + stmts + [end], ntemps


def canonicalize(ast):
    """Lower a ``program`` AST to a :class:`CanonicalProgram`.

    Units are emitted in pre-order: the top level first (only if it has
    statements of its own), then each function body in source order, each
    followed by the functions nested inside it.
    """
    user_names = user_identifiers(ast)
    statements = []
    temp_count = 0
    skipped = 0
    pending = [(ast.children, False)]
    while pending:
        body_nodes, is_function = pending.pop(0)
        lowerer = _UnitLowerer(user_names)
        stmts, ntemps = _lower_unit(lowerer, body_nodes, _unit_count(statements), is_function)
        statements.extend(stmts)
        temp_count += ntemps
        skipped += lowerer.skipped
        children = [(fn.children[1].children, True) for fn in lowerer.nested]
        pending[:0] = children
    return CanonicalProgram(tuple(statements), temp_count, skipped)


def _unit_count(statements):
    return sum(1 for s in statements if s.kind == BEGIN)


def canonicalize_source(source):
    """``canonicalize(parse(lex(source)))``."""
    return canonicalize(parse(lex(source)))


def emit(program):
    """Render a canonical program, one statement per line, two-space guard indent."""
    return "".join("  " * s.depth + s.text + "\n" for s in program.statements)


def parse_canonical(text):
    """Inverse of :func:`emit`."""
    statements = []
    unit = -1
    temps = set()
    for raw in text.splitlines():
        if not raw.strip():
            continue
        stripped = raw.lstrip(" ")
        depth = (len(raw) - len(stripped)) // 2
        body = stripped.rstrip()
        if body == BEGIN and depth == 0:
            unit += 1
        stmt = make_stmt(body, depth=depth, unit=max(unit, 0))
        statements.append(stmt)
        temps.update((stmt.unit, n) for n in stmt.reads | stmt.writes if n.startswith("$"))
    return CanonicalProgram(tuple(statements), len(temps))
