"""Finite simple graphs, rooted trees, metrics, isomorphism and enumeration."""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from functools import lru_cache, total_ordering
from math import factorial

from .errors import CapExceeded, InputError, PreconditionError

__all__ = [
    "Graph", "RootedTree", "INFINITY", "Metrics", "metrics", "components",
    "is_tree", "is_connected", "canonical_form", "isomorphic",
    "enumerate_graphs", "enumerate_trees", "enumerate_rooted_trees",
    "automorphisms", "tree_automorphisms", "rooted_code", "odot",
    "path", "cycle", "complete", "empty", "star", "disjoint_union",
    "graph_to_json", "graph_from_json", "tree_to_json", "tree_from_json",
    "GENERAL_ISO_CAP", "ENUM_CAP",
]

GENERAL_ISO_CAP = 12
ENUM_CAP = 9


@total_ordering
class _Infinity:
    """Distance between vertices in different components."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __gt__(self, other):
        return other is not self

    def __hash__(self):
        return hash("infinity")

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()


class Graph:
    """Simple undirected graph on vertices 0..n-1 (immutable, hashable)."""

    __slots__ = ("n", "edges", "adj", "_key")

    def __init__(self, n, edges=()):
        if not isinstance(n, int) or n < 0:
            raise InputError(f"vertex count must be a non-negative integer, got {n!r}")
        adj = [0] * n
        norm = set()
        for e in edges:
            i, j = e
            if not (0 <= i < n and 0 <= j < n):
                raise InputError(f"edge {e!r} out of range for n={n}")
            if i == j:
                raise InputError(f"self-loop at vertex {i}")
            i, j = min(i, j), max(i, j)
            norm.add((i, j))
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        self.n = n
        self.edges = frozenset(norm)
        self.adj = tuple(adj)
        self._key = (n, self.adj)

    @classmethod
    def from_adjacency(cls, rows):
        n = len(rows)
        return cls(n, [(i, j) for i in range(n) for j in range(i + 1, n) if (rows[i] >> j) & 1])

    def __eq__(self, other):
        return isinstance(other, Graph) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"Graph({self.n}, {sorted(self.edges)})"

    def __len__(self):
        return self.n

    def has_edge(self, i, j):
        return bool((self.adj[i] >> j) & 1)

    def neighbors(self, v):
        row = self.adj[v]
        return [u for u in range(self.n) if (row >> u) & 1]

    def degree(self, v):
        return bin(self.adj[v]).count("1")

    def relabel(self, perm):
        """Graph with vertex v renamed to perm[v]."""
        return Graph(self.n, [(perm[i], perm[j]) for i, j in self.edges])

    def induced(self, vertices):
        vs = list(vertices)
        pos = {v: i for i, v in enumerate(vs)}
        return Graph(len(vs), [(pos[i], pos[j]) for i, j in self.edges if i in pos and j in pos])

    def complement(self):
        return Graph(self.n, [(i, j) for i in range(self.n) for j in range(i + 1, self.n)
                              if not self.has_edge(i, j)])

    def toggle(self, i, j):
        return Graph(self.n, self.edges ^ {(min(i, j), max(i, j))})


# --------------------------------------------------------------------------
# small families

def path(n):
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    if n < 3:
        raise InputError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Graph(n, list(itertools.combinations(range(n), 2)))


def empty(n):
    return Graph(n)


def star(leaves):
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def disjoint_union(*graphs):
    n = 0
    edges = []
    for g in graphs:
        edges.extend((i + n, j + n) for i, j in g.edges)
        n += g.n
    return Graph(n, edges)


# --------------------------------------------------------------------------
# metrics

@dataclass(frozen=True)
class Metrics:
    distances: tuple
    eccentricities: tuple
    diameter: object
    radius: object
    centers: tuple


def bfs(g, src):
    dist = [INFINITY] * g.n
    dist[src] = 0
    queue = deque([src])
    while queue:
        v = queue.popleft()
        row = g.adj[v]
        for u in range(g.n):
            if (row >> u) & 1 and dist[u] is INFINITY:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def metrics(g: Graph) -> Metrics:
    """All-pairs distances, eccentricities, diameter, radius and centers."""
    if g.n == 0:
        return Metrics((), (), 0, 0, ())
    dist = tuple(tuple(bfs(g, v)) for v in range(g.n))
    ecc = tuple(max(row) for row in dist)
    diam = max(ecc)
    rad = min(ecc)
    centers = tuple(v for v in range(g.n) if ecc[v] == rad)
    return Metrics(dist, ecc, diam, rad, centers)


def components(g: Graph) -> list:
    seen = [False] * g.n
    out = []
    for s in range(g.n):
        if seen[s]:
            continue
        comp = []
        stack = [s]
        seen[s] = True
        while stack:
            v = stack.pop()
            comp.append(v)
            for u in g.neighbors(v):
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        out.append(sorted(comp))
    return out


def is_connected(g: Graph) -> bool:
    return g.n > 0 and len(components(g)) == 1


def is_tree(g: Graph) -> bool:
    return g.n > 0 and len(g.edges) == g.n - 1 and is_connected(g)


# --------------------------------------------------------------------------
# canonical form for general graphs (colour refinement + individualisation)

def _refine(g, cells):
    """Split cells by neighbour counts into other cells until stable."""
    cells = [list(c) for c in cells]
    while True:
        where = {}
        for idx, c in enumerate(cells):
            for v in c:
                where[v] = idx
        new = []
        changed = False
        for c in cells:
            if len(c) == 1:
                new.append(c)
                continue
            sig = {}
            for v in c:
                counts = [0] * len(cells)
                row = g.adj[v]
                for u in range(g.n):
                    if (row >> u) & 1:
                        counts[where[u]] += 1
                sig.setdefault(tuple(counts), []).append(v)
            if len(sig) > 1:
                changed = True
                for key in sorted(sig):
                    new.append(sig[key])
            else:
                new.append(c)
        cells = new
        if not changed:
            return cells


def _twins(g, cell):
    """True when all vertices of the cell are pairwise (open or closed) twins."""
    for u, v in itertools.combinations(cell, 2):
        mask = ~((1 << u) | (1 << v))
        if (g.adj[u] & mask) != (g.adj[v] & mask):
            return False
    return True


def canonical_form(g: Graph):
    """A certificate equal for two graphs iff they are isomorphic."""
    if g.n > GENERAL_ISO_CAP:
        raise CapExceeded(f"general graph isomorphism capped at {GENERAL_ISO_CAP} vertices")
    return _canonical(g)


@lru_cache(maxsize=200_000)
def _canonical(g):
    n = g.n
    if n == 0:
        return (0, ())
    degs = {}
    for v in range(n):
        degs.setdefault(g.degree(v), []).append(v)
    start = _refine(g, [degs[d] for d in sorted(degs)])
    best = [None]

    def cert(order):
        pos = {v: i for i, v in enumerate(order)}
        rows = tuple(sum(1 << pos[u] for u in g.neighbors(v)) for v in order)
        return rows

    def search(cells):
        if all(len(c) == 1 for c in cells):
            c = cert([c[0] for c in cells])
            if best[0] is None or c < best[0]:
                best[0] = c
            return
        idx = min((i for i, c in enumerate(cells) if len(c) > 1),
                  key=lambda i: (len(cells[i]), i))
        cell = cells[idx]
        choices = cell[:1] if _twins(g, cell) else cell
        for v in choices:
            rest = [u for u in cell if u != v]
            split = cells[:idx] + [[v], rest] + cells[idx + 1:]
            search(_refine(g, split))

    search(start)
    return (n, best[0])


def isomorphic(g: Graph, h: Graph) -> bool:
    if g.n != h.n or len(g.edges) != len(h.edges):
        return False
    if sorted(g.degree(v) for v in range(g.n)) != sorted(h.degree(v) for v in range(h.n)):
        return False
    if is_tree(g) and is_tree(h):
        return tree_code(g) == tree_code(h)
    return canonical_form(g) == canonical_form(h)


def canonical_graph(g: Graph) -> Graph:
    n, rows = canonical_form(g)
    return Graph.from_adjacency(rows)


@lru_cache(maxsize=None)
def _enumerate(n):
    if n == 0:
        return (Graph(0),)
    if n == 1:
        return (Graph(1),)
    found = {}
    for small in _enumerate(n - 1):
        for mask in range(1 << (n - 1)):
            edges = list(small.edges) + [(i, n - 1) for i in range(n - 1) if (mask >> i) & 1]
            h = Graph(n, edges)
            key = canonical_form(h)
            if key not in found:
                found[key] = Graph.from_adjacency(key[1])
    return tuple(found[k] for k in sorted(found))


def enumerate_graphs(n: int, cap: int = ENUM_CAP):
    """One canonical representative per isomorphism class of order n."""
    if n < 0:
        raise InputError("order must be non-negative")
    if n > cap:
        raise CapExceeded(f"graph enumeration capped at n={cap}")
    return iter(_enumerate(n))


def graphs_up_to(n: int, cap: int = ENUM_CAP):
    out = []
    for m in range(1, n + 1):
        out.extend(enumerate_graphs(m, cap))
    return out


# --------------------------------------------------------------------------
# rooted trees

_CODES: dict = {}


def _code_of(children_codes):
    """Intern a sorted tuple of child codes as a small integer (AHU style)."""
    key = tuple(sorted(children_codes))
    c = _CODES.get(key)
    if c is None:
        c = len(_CODES)
        _CODES[key] = c
    return c


def code_children(code):
    """Inverse of the interning: the sorted child codes of a code."""
    return _CODE_LIST()[code]


def _CODE_LIST():
    if len(_code_list_cache) != len(_CODES):
        _code_list_cache.clear()
        inv = [None] * len(_CODES)
        for k, v in _CODES.items():
            inv[v] = k
        _code_list_cache.extend(inv)
    return _code_list_cache


_code_list_cache: list = []


class RootedTree:
    """Rooted tree given by a parent array (parent[root] == -1)."""

    __slots__ = ("parent", "root", "children", "_codes", "_depths")

    def __init__(self, parent, root=None):
        parent = list(parent)
        n = len(parent)
        if n == 0:
            raise InputError("a rooted tree needs at least one vertex")
        if root is None:
            roots = [v for v in range(n) if parent[v] in (-1, None)]
            if len(roots) != 1:
                raise InputError("exactly one vertex must have no parent")
            root = roots[0]
        if not 0 <= root < n:
            raise InputError("root out of range")
        parent[root] = -1
        children = [[] for _ in range(n)]
        for v, p in enumerate(parent):
            if v == root:
                continue
            if p is None or not 0 <= p < n or p == v:
                raise InputError(f"bad parent {p!r} for vertex {v}")
            children[p].append(v)
        # connectivity / acyclicity: every vertex reaches the root
        depth = [-1] * n
        depth[root] = 0
        order = [root]
        for v in order:
            for c in children[v]:
                depth[c] = depth[v] + 1
                order.append(c)
        if len(order) != n:
            raise InputError("parent array does not describe a tree")
        self.parent = tuple(parent)
        self.root = root
        self.children = tuple(tuple(c) for c in children)
        self._codes = None
        self._depths = tuple(depth)

    def __len__(self):
        return len(self.parent)

    @property
    def n(self):
        return len(self.parent)

    def __repr__(self):
        return f"RootedTree(parent={list(self.parent)}, root={self.root})"

    def __eq__(self, other):
        return isinstance(other, RootedTree) and self.parent == other.parent and self.root == other.root

    def __hash__(self):
        return hash((self.parent, self.root))

    def bfs_order(self):
        order = [self.root]
        for v in order:
            order.extend(self.children[v])
        return order

    def vertex_depth(self, v):
        return self._depths[v]

    @property
    def depth(self):
        return max(self._depths)

    def subtree_depth(self, v):
        best = 0
        stack = [(v, 0)]
        while stack:
            u, d = stack.pop()
            best = max(best, d)
            stack.extend((c, d + 1) for c in self.children[u])
        return best

    def codes(self):
        """Canonical code of every vertex's subtree (AHU)."""
        if self._codes is None:
            codes = [0] * self.n
            for v in reversed(self.bfs_order()):
                codes[v] = _code_of(codes[c] for c in self.children[v])
            self._codes = tuple(codes)
        return self._codes

    def code(self, v=None):
        return self.codes()[self.root if v is None else v]

    def subtree_vertices(self, v):
        out = [v]
        for u in out:
            out.extend(self.children[u])
        return out

    def subtree(self, v):
        """The rooted tree T(v) hanging at v, relabelled in BFS order."""
        vs = self.subtree_vertices(v)
        pos = {u: i for i, u in enumerate(vs)}
        parent = [-1] + [pos[self.parent[u]] for u in vs[1:]]
        return RootedTree(parent, 0)

    def branches(self, v=None):
        v = self.root if v is None else v
        return [self.subtree(c) for c in self.children[v]]

    def to_graph(self):
        return Graph(self.n, [(v, p) for v, p in enumerate(self.parent) if p >= 0])

    def isomorphic(self, other):
        return self.code() == other.code()

    @classmethod
    def from_graph(cls, g: Graph, root: int):
        if not is_tree(g):
            raise PreconditionError("graph is not a tree")
        parent = [-1] * g.n
        seen = {root}
        order = [root]
        for v in order:
            for u in g.neighbors(v):
                if u not in seen:
                    seen.add(u)
                    parent[u] = v
                    order.append(u)
        return cls(parent, root)

    @classmethod
    def from_code(cls, code):
        """Build a tree from an interned code, children in code order."""
        table = _CODE_LIST()
        parent = [-1]
        queue = [(0, code)]
        for v, c in queue:
            for child in table[c]:
                parent.append(v)
                queue.append((len(parent) - 1, child))
        return cls(parent, 0)

    def canonical(self):
        return RootedTree.from_code(self.code())


def rooted_code(t: RootedTree) -> int:
    return t.code()


def code_string(code) -> str:
    """Readable nested-parenthesis form of a code."""
    table = _CODE_LIST()

    def go(c):
        return "(" + "".join(go(x) for x in sorted(table[c], key=lambda x: go(x))) + ")"

    return go(code)


def automorphisms(t: RootedTree) -> int:
    """Size of the automorphism group of a rooted tree.

    Product over vertices of the factorials of multiplicities of repeated
    child codes.
    """
    codes = t.codes()
    total = 1
    for v in range(t.n):
        counts = {}
        for c in t.children[v]:
            counts[codes[c]] = counts.get(codes[c], 0) + 1
        for m in counts.values():
            total *= factorial(m)
    return total


def tree_centers(g: Graph):
    return metrics(g).centers


def tree_code(g: Graph):
    """Canonical code of an unrooted tree (rooted at its center or central edge)."""
    centers = tree_centers(g)
    if len(centers) == 1:
        return ("c", RootedTree.from_graph(g, centers[0]).code())
    a, b = centers
    ca = _half_code(g, a, b)
    cb = _half_code(g, b, a)
    return ("e",) + tuple(sorted((ca, cb)))


def _half_code(g, a, b):
    """Code of the component of a after deleting edge ab, rooted at a."""
    parent = {a: -1}
    order = [a]
    for v in order:
        for u in g.neighbors(v):
            if u not in parent and not (v == a and u == b):
                parent[u] = v
                order.append(u)
    pos = {v: i for i, v in enumerate(order)}
    t = RootedTree([-1] + [pos[parent[v]] for v in order[1:]], 0)
    return t.code()


def tree_automorphisms(g: Graph) -> int:
    """Automorphism count of an unrooted tree."""
    if not is_tree(g):
        raise PreconditionError("not a tree")
    centers = tree_centers(g)
    if len(centers) == 1:
        return automorphisms(RootedTree.from_graph(g, centers[0]))
    a, b = centers
    ta = _half_tree(g, a, b)
    tb = _half_tree(g, b, a)
    swap = 2 if ta.code() == tb.code() else 1
    return automorphisms(ta) * automorphisms(tb) * swap


def _half_tree(g, a, b):
    parent = {a: -1}
    order = [a]
    for v in order:
        for u in g.neighbors(v):
            if u not in parent and not (v == a and u == b):
                parent[u] = v
                order.append(u)
    pos = {v: i for i, v in enumerate(order)}
    return RootedTree([-1] + [pos[parent[v]] for v in order[1:]], 0)


def odot(trees) -> RootedTree:
    """New root whose branches are the given rooted trees."""
    trees = list(trees)
    if not trees:
        raise InputError("odot needs at least one tree")
    parent = [-1]
    for t in trees:
        offset = len(parent)
        order = t.bfs_order()
        pos = {v: offset + i for i, v in enumerate(order)}
        for v in order:
            p = t.parent[v]
            parent.append(0 if p < 0 else pos[p])
    return RootedTree(parent, 0)


def rooted_trees_by_order(n_max):
    """Codes of all rooted trees with at most n_max vertices, grouped by order."""
    by_order = {1: [_code_of(())]}
    for n in range(2, n_max + 1):
        found = set()
        # a rooted tree of order n = root + multiset of subtrees of total order n-1
        for parts in _partitions(n - 1):
            for combo in _multiset_choices(parts, by_order):
                found.add(_code_of(combo))
        by_order[n] = sorted(found)
    return by_order


def _partitions(n, max_part=None):
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for k in range(min(n, max_part), 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def _multiset_choices(parts, by_order):
    groups = {}
    for p in parts:
        groups[p] = groups.get(p, 0) + 1
    pools = [itertools.combinations_with_replacement(by_order[p], m) for p, m in groups.items()]
    for pick in itertools.product(*[list(p) for p in pools]):
        yield tuple(c for grp in pick for c in grp)


def enumerate_rooted_trees(n: int):
    """All rooted trees of order exactly n, one per isomorphism class."""
    return [RootedTree.from_code(c) for c in rooted_trees_by_order(n)[n]]


def enumerate_trees(n: int):
    """All unrooted trees of order n, one per isomorphism class."""
    seen = {}
    for t in enumerate_rooted_trees(n):
        g = t.to_graph()
        seen.setdefault(tree_code(g), g)
    return list(seen.values())


# --------------------------------------------------------------------------
# JSON

def graph_to_json(g: Graph) -> dict:
    return {"n": g.n, "edges": [list(e) for e in sorted(g.edges)]}


def graph_from_json(data) -> Graph:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        return Graph(int(data["n"]), [tuple(e) for e in data.get("edges", [])])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad graph JSON: {exc}") from exc


def tree_to_json(t: RootedTree) -> dict:
    return {"parent": list(t.parent), "root": t.root}


def tree_from_json(data) -> RootedTree:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        return RootedTree(data["parent"], data.get("root"))
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad tree JSON: {exc}") from exc
