"""Program dependency graph over canonical statements.

Nodes are statement indices. An edge ``a -> b`` means statement ``a``
depends on ``b``: either ``a`` reads a value whose reaching definition is
``b`` (data), or ``b`` is the guard directly enclosing ``a`` (control).
Reaching definitions are computed per unit over the guard structure; loop
bodies are iterated to a fixed point, so the recomputed loop condition
feeds back into its ``while`` guard.
"""

from dataclasses import dataclass

from .canon.lower import ASSIGN, BEGIN, GUARD_KINDS, GUARD_WHILE

PATH_JOIN = "⇐"
PATHSET_JOIN = " ∥ "


@dataclass(frozen=True)
class DependencyGraph:
    """Dependency edges over ``n_nodes`` statements.

    Attributes
    ----------
    edges : frozenset of (int, int)
        ``(a, b)`` when ``a`` depends on ``b``.
    adjacency : tuple of tuple of int
        Sorted dependency targets of every node.
    """

    n_nodes: int
    edges: frozenset
    adjacency: tuple

    @property
    def nodes(self):
        return range(self.n_nodes)

    @classmethod
    def from_edges(cls, n_nodes, edges):
        edges = frozenset(edges)
        adj = [[] for _ in range(n_nodes)]
        for a, b in edges:
            adj[a].append(b)
        return cls(n_nodes, edges, tuple(tuple(sorted(x)) for x in adj))


@dataclass(frozen=True)
class BackwardPathSet:
    anchor: int
    paths: frozenset


def _tree(statements, indices):
    """Nest a flat unit into ``[(index, children)]`` using guard depth."""
    root = []
    stack = [(-1, root)]
    for i in indices:
        depth = statements[i].depth
        while stack[-1][0] >= depth:
            stack.pop()
        children = []
        stack[-1][1].append((i, children))
        if statements[i].kind in GUARD_KINDS:
            stack.append((depth, children))
    return root


def _merge(a, b):
    out = {k: set(v) for k, v in a.items()}
    for k, v in b.items():
        out.setdefault(k, set()).update(v)
    return out


def _weak_write(stmt, name):
    # member stores update the object, they do not replace it
    return stmt.kind == ASSIGN and stmt.text.split(" = ", 1)[0] != name


class _Flow:
    def __init__(self, statements):
        self.statements = statements
        self.edges = set()

    def use(self, i, state):
        for name in self.statements[i].reads:
            for d in state.get(name, ()):
                self.edges.add((i, d))

    def block(self, items, state):
        for i, children in items:
            stmt = self.statements[i]
            if stmt.kind == GUARD_WHILE:
                state = self.loop(i, children, state)
            elif stmt.kind in GUARD_KINDS:
                self.use(i, state)
                state = _merge(state, self.block(children, state))
            else:
                self.use(i, state)
                if stmt.writes:
                    state = dict(state)
                    for name in stmt.writes:
                        if _weak_write(stmt, name):
                            state[name] = set(state.get(name, ())) | {i}
                        else:
                            state[name] = {i}
        return state

    def loop(self, i, children, state):
        entry = state
        while True:
            self.use(i, entry)
            after = _merge(state, self.block(children, entry))
            if after == entry:
                return entry
            entry = after


def build_pdg(canon):
    """Build the dependency graph of a canonical program.

    Examples
    --------
    >>> from jstrack.canon import canonicalize_source
    >>> g = build_pdg(canonicalize_source("x = 1; y = x;"))
    >>> sorted(g.edges)
    [(2, 1)]
    """
    statements = canon.statements
    flow = _Flow(statements)
    units = {}
    for i, stmt in enumerate(statements):
        units.setdefault(stmt.unit, []).append(i)
    for indices in units.values():
        flow.block(_tree(statements, indices), {})
    edges = set(flow.edges)
    # control dependence on the directly enclosing guard
    open_guards = {}  # depth -> most recent guard still in scope
    for i, stmt in enumerate(statements):
        for d in [d for d in open_guards if d >= stmt.depth]:
            del open_guards[d]
        enclosing = open_guards.get(stmt.depth - 1)
        if enclosing is not None and stmt.kind != BEGIN:
            edges.add((i, enclosing))
        if stmt.kind in GUARD_KINDS:
            open_guards[stmt.depth] = i
    return DependencyGraph.from_edges(len(statements), edges)


def backward_paths(g, anchor, n):
    """Simple dependency paths of at most ``n`` nodes starting at ``anchor``.

    Paths shorter than ``n`` are kept only when they cannot be extended, so
    every anchor yields at least one path.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 <= anchor < g.n_nodes:
        raise IndexError(f"anchor {anchor} is not a node")
    found = set()

    def walk(path):
        if len(path) == n:
            found.add(tuple(path))
            return
        extended = False
        for nxt in g.adjacency[path[-1]]:
            if nxt not in path:
                extended = True
                path.append(nxt)
                walk(path)
                path.pop()
        if not extended:
            found.add(tuple(path))

    walk([anchor])
    return BackwardPathSet(anchor, frozenset(found))


def serialize_paths(canon, pathset):
    """One term per anchor: sorted serialized paths joined together."""
    texts = canon.statements
    rendered = sorted(PATH_JOIN.join(texts[i].text for i in p) for p in pathset.paths)
    return PATHSET_JOIN.join(rendered)


def to_dot(canon, g):
    """Graphviz rendering, edges pointing from a statement to what it depends on."""
    lines = ["digraph pdg {", "  node [shape=box, fontname=monospace];"]
    for i, stmt in enumerate(canon.statements):
        label = stmt.text.replace("\\", "\\\\").replace('"', '\\"')
        lines.append(f'  n{i} [label="{i}: {label}"];')
    for a, b in sorted(g.edges):
        lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
