"""Diverging and ranked trees, Spoiler strategies on trees, rooted-tree minimization.

Rooted trees are handled mostly through their interned AHU codes (see
``graph._code_of``): two rooted trees are isomorphic iff their codes are
equal, so catalogs, generators and the ranked families are built directly
on codes and only materialized on demand.

The strategies are `efgame.Strategy` objects.  Every strategy is a pure
function of the game position: the phase of play is recovered from the
pebbles already placed, so the exhaustive Duplicator in
`efgame.verify_strategy` can memoize positions freely.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import ceil, comb, log2

from .efgame import Strategy, ValueEngine, verify_strategy
from .errors import CapExceeded, InvariantViolation, PreconditionError
from .graph import (
    INFINITY, Graph, RootedTree, _code_of, code_children, code_string,
    components, graphs_up_to, is_connected, is_tree, isomorphic, metrics,
    tree_automorphisms,
)

__all__ = [
    "is_diverging", "is_diverging_tree", "DivergingCatalog", "enumerate_diverging",
    "gen_diverging_rooted", "gen_diverging_tree", "RankedFamily", "gen_ranked",
    "ranked_counts", "ranked_base", "search_ranked_base", "check_base",
    "rooted_embeds", "ranked_rank",
    "distance_strategy", "diameter_strategy", "cycle_strategy",
    "diverging_strategy", "divergence_break_strategy", "center_strategy",
    "ranked_continuous_strategy", "ranked_root_strategy",
    "ranked_vs_tree_strategy", "ranked_vs_disconnected_strategy",
    "run_strategy", "rooted_value", "minimize_rooted", "minimality_violations",
    "minimization_report", "TreeStrategy",
    "certify_tree_definability", "certify_path_definability",
]

CATALOG_CAP = 4
RANKED_CAP = 2

_LEAF = _code_of(())


# --------------------------------------------------------------------------
# code-level helpers

@lru_cache(maxsize=None)
def code_depth(c: int) -> int:
    kids = code_children(c)
    return 1 + max(code_depth(x) for x in kids) if kids else 0


@lru_cache(maxsize=None)
def code_order(c: int) -> int:
    return 1 + sum(code_order(x) for x in code_children(c))


@lru_cache(maxsize=None)
def code_diverging(c: int) -> bool:
    kids = code_children(c)
    return len(set(kids)) == len(kids) and all(code_diverging(x) for x in kids)


@lru_cache(maxsize=None)
def code_is_path(c: int) -> bool:
    kids = code_children(c)
    return not kids or (len(kids) == 1 and code_is_path(kids[0]))


@lru_cache(maxsize=None)
def code_key(c: int) -> str:
    """Process-independent sort key (interned ids depend on creation order)."""
    return code_string(c)


def path_code(n: int) -> int:
    c = _LEAF
    for _ in range(n - 1):
        c = _code_of((c,))
    return c


def is_diverging(t: RootedTree) -> bool:
    """At every vertex the branches are pairwise non-isomorphic."""
    codes = t.codes()
    for v in range(t.n):
        kids = [codes[c] for c in t.children[v]]
        if len(set(kids)) != len(kids):
            return False
    return True


def is_diverging_tree(g: Graph) -> bool:
    """An unrooted tree is diverging if it is diverging rooted at a center."""
    if not is_tree(g):
        raise PreconditionError("not a tree")
    c = metrics(g).centers[0]
    return is_diverging(RootedTree.from_graph(g, c))


# --------------------------------------------------------------------------
# catalog of diverging rooted trees

@dataclass
class DivergingCatalog:
    """All diverging rooted trees of depth at most ``depth_bound``.

    ``M[j]`` counts trees of depth at most j, ``m[j]`` of depth exactly j and
    ``N[j]`` is the largest order of a tree of depth exactly j.
    """

    depth_bound: int
    codes: tuple
    M: list
    m: list
    N: list

    def __len__(self):
        return len(self.codes)

    def trees(self):
        for c in self.codes:
            yield RootedTree.from_code(c)

    def of_depth(self, j):
        return [c for c in self.codes if code_depth(c) == j]

    def to_json(self):
        return [{"code": code_string(c), "depth": code_depth(c), "order": code_order(c)}
                for c in self.codes]


@lru_cache(maxsize=None)
def _diverging_level(i):
    if i == 0:
        return (_LEAF,)
    below = _diverging_level(i - 1)
    out = []
    for size in range(len(below) + 1):
        for subset in itertools.combinations(below, size):
            out.append(_code_of(subset))
    return tuple(out)


def enumerate_diverging(i: int) -> DivergingCatalog:
    """Every diverging rooted tree of depth <= i, one per isomorphism class.

    A diverging tree of depth <= i is a root over a set (not a multiset) of
    distinct diverging trees of depth <= i-1, which is exactly how the
    levels are generated.
    """
    if i < 0:
        raise PreconditionError("depth bound must be non-negative")
    if i > CATALOG_CAP:
        raise CapExceeded(f"catalog capped at depth {CATALOG_CAP}")
    codes = _diverging_level(i)
    M, m, N = [], [], []
    for j in range(i + 1):
        exact = [c for c in codes if code_depth(c) == j]
        m.append(len(exact))
        M.append(sum(m))
        N.append(max(code_order(c) for c in exact))
    return DivergingCatalog(i, codes, M, m, N)


def max_diverging_order(i: int) -> int:
    """N_i: the largest order of a diverging rooted tree of depth exactly i."""
    if i == 0:
        return 1
    return 1 + sum(code_order(c) for c in _diverging_level(i - 1))


def _max_diverging_code(i):
    if i == 0:
        return _LEAF
    return _code_of(_diverging_level(i - 1))


def _shrink(c):
    """One vertex fewer, same depth, still diverging (c must not be a path)."""
    kids = list(code_children(c))
    pick = min(kids, key=lambda x: (code_depth(x), code_order(x), code_key(x)))
    kids.remove(pick)
    if code_is_path(pick):
        if pick != _LEAF:
            kids.append(path_code(code_order(pick) - 1))
    else:
        kids.append(_shrink(pick))
    return _code_of(kids)


def gen_diverging_rooted(i: int, n: int) -> RootedTree:
    """A diverging rooted tree of depth exactly i and order exactly n.

    Starts from the largest such tree and removes one vertex at a time,
    always in the shallowest branch of least order.
    """
    if i < 0:
        raise PreconditionError("depth must be non-negative")
    if i > CATALOG_CAP:
        raise CapExceeded(f"depth capped at {CATALOG_CAP}")
    top = max_diverging_order(i)
    if not i + 1 <= n <= top:
        raise PreconditionError(f"order {n} outside [{i + 1}, {top}] for depth {i}")
    c = _max_diverging_code(i)
    while code_order(c) > n:
        c = _shrink(c)
        if code_depth(c) != i or not code_diverging(c):
            raise InvariantViolation("shrinking broke depth or divergence")
    return RootedTree.from_code(c)


def gen_diverging_tree(n: int, i: int) -> Graph:
    """A diverging (unrooted) tree of order n and radius i+1.

    The center gets two branches of depth i with orders m and m-1 (n = 2m),
    plus a single-vertex branch when n = 2m+1.  When m-1 is too small for
    depth i, the smaller branch is a path of depth i-1 instead.
    """
    if i < 2:
        raise PreconditionError("radius parameter i must be at least 2")
    top = 2 * max_diverging_order(i)
    if not 2 * i + 2 <= n <= top:
        raise PreconditionError(f"order {n} outside [{2 * i + 2}, {top}] for i={i}")
    m = n // 2
    big = gen_diverging_rooted(i, m).code()
    if m - 1 >= i + 1:
        small = gen_diverging_rooted(i, m - 1).code()
    else:
        small = path_code(m - 1)
    kids = [big, small]
    if n % 2:
        kids.append(_LEAF)
    t = RootedTree.from_code(_code_of(kids))
    g = t.to_graph()
    if g.n != n or metrics(g).radius != i + 1 or not is_diverging_tree(g):
        raise InvariantViolation("generated tree misses its contract")
    return g


# --------------------------------------------------------------------------
# ranked trees

def _parents_to_code(parent):
    return RootedTree(parent, 0).code()


# Four rooted trees of depth 4, drawn as: two root paths of lengths 4 and 3;
# a root edge to a vertex carrying a 3-path and a leaf; a root 2-path whose
# end carries a 2-path and a leaf; a root with paths of lengths 4, 2 and 1.
_BASE_PARENTS = (
    [-1, 0, 1, 2, 3, 0, 5, 6],
    [-1, 0, 1, 2, 3, 1],
    [-1, 0, 1, 2, 3, 2],
    [-1, 0, 1, 2, 3, 0, 5, 0],
)


@lru_cache(maxsize=None)
def rooted_embeds(small: int, big: int) -> bool:
    """Is the rooted tree with code ``small`` a rooted subtree of ``big``?"""
    a = code_children(small)
    b = code_children(big)
    if len(a) > len(b):
        return False
    ok = [[rooted_embeds(x, y) for y in b] for x in a]
    used = [False] * len(b)

    def assign(i):
        if i == len(a):
            return True
        for j in range(len(b)):
            if not used[j] and ok[i][j]:
                used[j] = True
                if assign(i + 1):
                    return True
                used[j] = False
        return False

    return assign(0)


def check_base(codes) -> dict:
    """The four properties required of the base family, checked one by one."""
    codes = list(codes)
    return {
        "order_at_most_8": all(code_order(c) <= 8 for c in codes),
        "depth_4": all(code_depth(c) == 4 for c in codes),
        "diverging": all(code_diverging(c) for c in codes),
        "antichain": all(not rooted_embeds(a, b)
                         for a, b in itertools.permutations(codes, 2)),
        "size": len(codes),
    }


def _base_ok(report):
    return all(v for k, v in report.items() if k != "size") and report["size"] == 4


def search_ranked_base() -> tuple:
    """Find four depth-4 diverging trees of order <= 8, none embedding in another."""
    pool = [c for c in _diverging_level(4)
            if code_depth(c) == 4 and code_order(c) <= 8]
    pool.sort(key=lambda c: (code_order(c), code_key(c)))

    def extend(chosen, start):
        if len(chosen) == 4:
            return chosen
        for idx in range(start, len(pool)):
            c = pool[idx]
            if all(not rooted_embeds(c, d) and not rooted_embeds(d, c) for d in chosen):
                found = extend(chosen + [c], idx + 1)
                if found:
                    return found
        return None

    found = extend([], 0)
    if not found:
        raise InvariantViolation("no valid base quadruple exists")
    return tuple(found)


_BASE_LOG: list = []


@lru_cache(maxsize=None)
def ranked_base() -> tuple:
    """Codes of the four base trees; falls back to a searched quadruple."""
    codes = tuple(_parents_to_code(p) for p in _BASE_PARENTS)
    if _base_ok(check_base(codes)):
        return codes
    _BASE_LOG.append("transcribed base failed verification; using searched quadruple")
    return search_ranked_base()


@dataclass
class RankedFamily:
    """Rank-i family: roots over half-size subsets of the rank-(i-1) family."""

    rank: int
    codes: tuple
    orders: list = field(default_factory=list)

    def __len__(self):
        return len(self.codes)

    def trees(self):
        for c in self.codes:
            yield RootedTree.from_code(c)

    def graphs(self):
        for t in self.trees():
            yield t.to_graph()


@lru_cache(maxsize=None)
def _ranked_codes(i):
    if i == 0:
        return ranked_base()
    below = _ranked_codes(i - 1)
    half = len(below) // 2
    return tuple(_code_of(s) for s in itertools.combinations(below, half))


def gen_ranked(i: int) -> RankedFamily:
    if i < 0:
        raise PreconditionError("rank must be non-negative")
    if i > RANKED_CAP:
        raise CapExceeded(f"ranked families materialized only up to rank {RANKED_CAP}; "
                          "use ranked_counts beyond that")
    codes = _ranked_codes(i)
    return RankedFamily(i, codes, [code_order(c) for c in codes])


@lru_cache(maxsize=None)
def _ranked_order_counts(i):
    """Multiset of orders of the rank-i family as {order: count}."""
    if i <= RANKED_CAP:
        out = {}
        for c in _ranked_codes(i):
            out[code_order(c)] = out.get(code_order(c), 0) + 1
        return out
    below = _ranked_order_counts(i - 1)
    items = [o for o, cnt in sorted(below.items()) for _ in range(cnt)]
    if len(items) > 64:
        raise CapExceeded("order distribution needs the previous family to be small")
    half = len(items) // 2
    # table[j][s]: number of j-subsets with order sum s
    table = [dict() for _ in range(half + 1)]
    table[0][0] = 1
    for o in items:
        for j in range(half, 0, -1):
            for s, cnt in table[j - 1].items():
                table[j][s + o] = table[j].get(s + o, 0) + cnt
    return {1 + s: cnt for s, cnt in table[half].items()}


def ranked_counts(i: int, digit_cap: int = 100000):
    """(M_i, minimum order in the rank-i family), computed without materializing."""
    if i < 0:
        raise PreconditionError("rank must be non-negative")
    M = len(ranked_base())
    sizes = [M]
    for _ in range(i):
        if M > 10 ** 7:
            raise CapExceeded("family size too large to take a binomial of")
        M = comb(M, M // 2)
        if int(M.bit_length() * 0.30103) + 1 > digit_cap:
            raise CapExceeded("family size exceeds the digit cap")
        sizes.append(M)
    if i <= 3:
        min_order = min(_ranked_order_counts(i))
    elif i == 4:
        below = _ranked_order_counts(3)
        need = sizes[3] // 2
        total = 0
        for o in sorted(below):
            take = min(need, below[o])
            total += take * o
            need -= take
            if need == 0:
                break
        min_order = 1 + total
    else:
        min_order = None
    return sizes[i], min_order


def ranked_rank(g: Graph):
    """Rank of a ranked tree (rank >= 1 and materializable), else None."""
    if not is_tree(g):
        return None
    ms = metrics(g)
    if len(ms.centers) != 1:
        return None
    code = RootedTree.from_graph(g, ms.centers[0]).code()
    for i in range(1, RANKED_CAP + 1):
        if code in _ranked_set(i):
            return i
    return None


@lru_cache(maxsize=None)
def _ranked_set(i):
    return frozenset(_ranked_codes(i))


# --------------------------------------------------------------------------
# trees seen from a root

class _View:
    """BFS tree of the component of ``root``: parents, children, codes, heights."""

    def __init__(self, g, root):
        parent = {root: None}
        depth = {root: 0}
        order = [root]
        for v in order:
            for u in g.neighbors(v):
                if u not in parent:
                    parent[u] = v
                    depth[u] = depth[v] + 1
                    order.append(u)
        children = {v: [] for v in order}
        for v in order[1:]:
            children[parent[v]].append(v)
        code, height = {}, {}
        for v in reversed(order):
            kids = children[v]
            code[v] = _code_of(code[c] for c in kids)
            height[v] = 1 + max(height[c] for c in kids) if kids else 0
        self.root = root
        self.parent = parent
        self.depth = depth
        self.order = order
        self.children = children
        self.code = code
        self.height = height

    def subtree(self, v):
        out = [v]
        for u in out:
            out.extend(self.children[u])
        return out

    def descent(self, v):
        """Longest downward path below v (v excluded), lowest ids on ties."""
        out = []
        while self.children[v]:
            v = max(self.children[v], key=lambda c: (self.height[c], -c))
            out.append(v)
        return out

    def path_to(self, x):
        out = [x]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out[::-1]

    def child_codes(self, v):
        return [self.code[c] for c in self.children.get(v, ())]


@lru_cache(maxsize=4096)
def _view(g, root):
    return _View(g, root)


@lru_cache(maxsize=4096)
def _dist(g):
    return metrics(g).distances


@lru_cache(maxsize=4096)
def _dist_without(g, removed):
    cut = Graph(g.n, [(a, b) for a, b in g.edges if a not in removed and b not in removed])
    return metrics(cut).distances


@lru_cache(maxsize=4096)
def _metrics(g):
    return metrics(g)


def _clog(k):
    """Ceiling of log2 k, with 0 for k <= 1."""
    return 0 if k <= 1 else (k - 1).bit_length()


def _farthest(g, x):
    row = _dist(g)[x]
    return max(range(g.n), key=lambda y: (row[y], -y))


def _diametral_from_center(g, v):
    """Vertices of a diametral path through the center v, v excluded.

    One half is listed from v outwards, then the other half, so selecting
    them in order keeps the selected set connected to v.
    """
    view = _view(g, v)
    r = view.height[v]
    halves = [c for c in view.children[v] if view.height[c] == r - 1][:2]
    out = []
    for c in halves:
        out.append(c)
        out.extend(view.descent(c))
    return out


def _diametral_path(g):
    """A longest shortest path of a tree, as a vertex list from one end."""
    dist = _dist(g)
    p, q = max(((a, b) for a in range(g.n) for b in range(g.n)),
               key=lambda ab: (dist[ab[0]][ab[1]], -ab[0], -ab[1]))
    return _view(g, p).path_to(q)


def _shortest_cycle(g):
    best = None
    for a, b in sorted(g.edges):
        prev = {a: None}
        queue = [a]
        for v in queue:
            for u in g.neighbors(v):
                if v == a and u == b:
                    continue
                if u not in prev:
                    prev[u] = v
                    queue.append(u)
        if b in prev:
            cyc = [b]
            while prev[cyc[-1]] is not None:
                cyc.append(prev[cyc[-1]])
            cyc.reverse()
            if best is None or len(cyc) < len(best):
                best = cyc
    return best


# --------------------------------------------------------------------------
# move selectors shared by several strategies

def _distance_move(pos, side, removed=()):
    """Halving step: pebble the middle of the closest pair that is too far apart
    in the other graph.  ``removed`` lists pebble indices whose vertices are
    deleted from both graphs before measuring distances."""
    g, h = pos.graphs
    mine, other = (pos.u, pos.v) if side == 0 else (pos.v, pos.u)
    gm, go = (g, h) if side == 0 else (h, g)
    if removed:
        dm = _dist_without(gm, frozenset(mine[i] for i in removed))
        do = _dist_without(go, frozenset(other[i] for i in removed))
    else:
        dm, do = _dist(gm), _dist(go)
    best = None
    for i, j in itertools.combinations(range(len(mine)), 2):
        if i in removed or j in removed:
            continue
        d = dm[mine[i]][mine[j]]
        if d is INFINITY or not d < do[other[i]][other[j]]:
            continue
        if best is None or d < best[0]:
            best = (d, mine[i], mine[j])
    if best is None or best[0] < 2:
        return None
    d, a, b = best
    for w in range(gm.n):
        if dm[a][w] == d // 2 and dm[w][b] == d - d // 2:
            return side, w
    return None


def _path_move(va, vb, a, b, sa, sb):
    """Go one level down from (a, b) into a child whose branch has no twin."""
    ka = va.children.get(a, [])
    kb = vb.children.get(b, [])
    if not ka and not kb:
        return None
    if not ka:
        return sb, kb[0]
    if not kb:
        return sa, ka[0]
    cb = set(vb.child_codes(b))
    for c in ka:
        if va.code[c] not in cb:
            return sa, c
    ca = set(va.child_codes(a))
    for c in kb:
        if vb.code[c] not in ca:
            return sb, c
    return None


def _ranked_continuous(pos, side, start, i, vs, vo, root_children=None):
    """Continuous play on ranked rooted trees hanging at pebble ``start``.

    For ``i`` levels Spoiler steps to a child whose branch is missing on the
    other side; at the bottom he selects the whole remaining base tree.
    ``root_children`` restricts the children used at the top level.
    """
    mine = pos.pebbles(side)
    other = pos.pebbles(1 - side)
    since = len(mine) - 1 - start
    if since < 0:
        return None
    if since < i:
        a, b = mine[start + since], other[start + since]
        kids = vs.children[a] if (since > 0 or root_children is None) else root_children
        have = set(vo.child_codes(b))
        for c in kids:
            if vs.code[c] not in have:
                return side, c
        return None
    a = mine[start + i]
    if i == 0 and root_children is not None:
        seq = [x for c in root_children for x in vs.subtree(c)]
    else:
        seq = vs.subtree(a)[1:]
    j = since - i
    return (side, seq[j]) if j < len(seq) else None


_FALLBACK = (0, 0)


class TreeStrategy(Strategy):
    """A strategy bound to a pair of graphs, with the lemma's round bound.

    ``bound`` is the number of rounds the lemma promises and ``alternations``
    the number of graph switches it uses (None when unrestricted).
    """

    name = "tree-strategy"
    bound = 0
    alternations = None

    def __init__(self, g, h):
        self.g, self.h = g, h

    def describe(self):
        return {"strategy": self.name, "rounds": self.bound,
                "alternations": self.alternations}


def run_strategy(s: TreeStrategy, rounds=None) -> bool:
    """Play ``s`` against the exhaustive Duplicator within its bound."""
    return verify_strategy(s, s.g, s.h, s.bound if rounds is None else rounds, s.alternations)


# --------------------------------------------------------------------------
# strategies for diverging trees and general opponents

class DistanceStrategy(TreeStrategy):
    """Two pebbled vertices closer in one graph than their images in the other."""

    name = "distance"

    def __init__(self, g, h, pair_g, pair_h, side=0):
        super().__init__(g, h)
        self.pairs = (tuple(pair_g), tuple(pair_h))
        self.side = side
        mine, other = (g, h) if side == 0 else (h, g)
        pm, po = self.pairs if side == 0 else self.pairs[::-1]
        self.k = _dist(mine)[pm[0]][pm[1]]
        if self.k is INFINITY or not self.k < _dist(other)[po[0]][po[1]]:
            raise PreconditionError("pebbled pair is not strictly closer in the playing graph")
        self.bound = _clog(self.k)
        self.alternations = 0

    def start(self, g, h):
        return self.pairs

    def move(self, pos):
        return _distance_move(pos, self.side) or _FALLBACK


class DiameterStrategy(TreeStrategy):
    """Graphs of different diameter: a far pair in the wider graph, then halve."""

    name = "diameter"
    alternations = 1

    def __init__(self, g, h):
        super().__init__(g, h)
        dg, dh = _metrics(g).diameter, _metrics(h).diameter
        if dg == dh:
            raise PreconditionError("diameters are equal")
        self.small = 0 if dg < dh else 1
        self.large = 1 - self.small
        ds = min(dg, dh)
        wide = (g, h)[self.large]
        dist = _dist(wide)
        pairs = [(p, q) for p in range(wide.n) for q in range(p + 1, wide.n)]
        exact = [pq for pq in pairs if dist[pq[0]][pq[1]] == ds + 1]
        far = exact or [pq for pq in pairs if dist[pq[0]][pq[1]] is INFINITY]
        self.far = far[0]
        self.bound = 2 + _clog(ds)

    def move(self, pos):
        m = len(pos.u)
        if m < 2:
            return self.large, self.far[m]
        return _distance_move(pos, self.small) or _FALLBACK


class CycleStrategy(TreeStrategy):
    """A tree against a connected graph with a cycle, all moves in the latter."""

    name = "cycle"
    alternations = 0

    def __init__(self, g, h):
        super().__init__(g, h)
        if is_tree(g) and is_connected(h) and not is_tree(h):
            self.tree_side, self.cyc_side = 0, 1
        elif is_tree(h) and is_connected(g) and not is_tree(g):
            self.tree_side, self.cyc_side = 1, 0
        else:
            raise PreconditionError("need a tree and a connected non-tree")
        cyc = _shortest_cycle((g, h)[self.cyc_side])
        self.cycle = cyc
        self.setup = (cyc[0], cyc[1], cyc[-1])
        self.bound = 3 + _clog(len(cyc) - 2)
        d = _metrics((g, h)[self.tree_side]).diameter
        self.lemma_bound = 3 + _clog(d) if d == _metrics((g, h)[self.cyc_side]).diameter else None

    def move(self, pos):
        m = len(pos.u)
        if m < 3:
            return self.cyc_side, self.setup[m]
        return _distance_move(pos, self.cyc_side, removed=(0,)) or _FALLBACK


def _check_same_diameter_trees(g, h):
    if not (is_tree(g) and is_tree(h)):
        raise PreconditionError("both graphs must be trees")
    if _metrics(g).diameter != _metrics(h).diameter:
        raise PreconditionError("trees must have the same diameter")
    if isomorphic(g, h):
        raise PreconditionError("trees are isomorphic")


class DivergingStrategy(TreeStrategy):
    """Two diverging trees of equal diameter: center, then follow unmatched branches."""

    name = "diverging"

    def __init__(self, g, h):
        super().__init__(g, h)
        _check_same_diameter_trees(g, h)
        if not (is_diverging_tree(g) and is_diverging_tree(h)):
            raise PreconditionError("both trees must be diverging")
        self.x = _metrics(g).centers[0]
        self.r = _metrics(g).radius
        self.bound = self.r + 1

    def move(self, pos):
        g, h = pos.graphs
        m = len(pos.u)
        if m == 0:
            return 0, self.x
        xp = pos.v[0]
        if xp not in _metrics(h).centers:
            if m == 1:
                return 1, _farthest(h, xp)
            return _distance_move(pos, 0) or _FALLBACK
        return _path_move(_view(g, pos.u[0]), _view(h, xp), pos.u[-1], pos.v[-1], 0, 1) \
            or _FALLBACK


class DivergenceBreakStrategy(TreeStrategy):
    """A diverging tree against a non-diverging one of equal diameter.

    Spoiler walks in the non-diverging tree down to a vertex with two
    isomorphic branches and uses the second branch to force a mismatch.
    """

    name = "divergence-break"

    def __init__(self, g, h):
        super().__init__(g, h)
        _check_same_diameter_trees(g, h)
        dg, dh = is_diverging_tree(g), is_diverging_tree(h)
        if dg == dh:
            raise PreconditionError("exactly one tree must be diverging")
        self.d = 0 if dg else 1
        self.nd = 1 - self.d
        tp = (g, h)[self.nd]
        self.xp = _metrics(tp).centers[0]
        vb = _view(tp, self.xp)
        cands = [y for y in vb.order
                 if not code_diverging(vb.code[y])
                 and all(code_diverging(vb.code[c]) for c in vb.children[y])]
        y = min(cands, key=lambda y: (vb.depth[y], y))
        z1 = z2 = None
        for a, b in itertools.combinations(vb.children[y], 2):
            if vb.code[a] == vb.code[b]:
                z1, z2 = a, b
                break
        self.z1, self.z2 = z1, z2
        self.spine = vb.path_to(z1)
        self.r = _metrics(g).radius
        self.bound = self.r + 2

    def move(self, pos):
        graphs = pos.graphs
        t, tp = graphs[self.d], graphs[self.nd]
        st, sn = pos.pebbles(self.d), pos.pebbles(self.nd)
        m = len(st)
        if m == 0:
            return self.nd, self.xp
        x = st[0]
        if x not in _metrics(t).centers:
            if m == 1:
                return self.d, _farthest(t, x)
            return _distance_move(pos, self.nd) or _FALLBACK
        spine = self.spine
        L = len(spine)
        if m < L:
            return self.nd, spine[m]
        va, vb = _view(t, x), _view(tp, self.xp)
        z = st[L - 1]
        ha, hb = va.height[z], vb.height[self.z1]
        j = m - L
        if ha > hb:
            chain = va.descent(z)[:hb + 1]
            return (self.d, chain[j]) if j < len(chain) else _FALLBACK
        if hb > ha:
            chain = vb.descent(self.z1)[:ha + 1]
            return (self.nd, chain[j]) if j < len(chain) else _FALLBACK
        if va.code[z] == vb.code[self.z1] and m == L:
            return self.nd, self.z2
        return _path_move(va, vb, st[-1], sn[-1], self.d, self.nd) or _FALLBACK


class CenterStrategy(TreeStrategy):
    """Equal even diameters and a non-central reply to the center.

    ``admits`` restricts Duplicator's first reply to non-central vertices,
    which is the situation the strategy is meant for.
    """

    name = "center"
    alternations = 0

    def __init__(self, g, h, side=0):
        super().__init__(g, h)
        if not (is_tree(g) and is_tree(h)):
            raise PreconditionError("both graphs must be trees")
        d = _metrics(g).diameter
        if d != _metrics(h).diameter or d % 2:
            raise PreconditionError("need equal even diameters")
        self.side = side
        mine, other = (g, h) if side == 0 else (h, g)
        self.v = _metrics(mine).centers[0]
        self.vp = _metrics(other).centers[0]
        self.seq = _diametral_from_center(mine, self.v)
        self.bound = 1 + d

    def move(self, pos):
        m = len(pos.u)
        if m == 0:
            return self.side, self.v
        return (self.side, self.seq[m - 1]) if m - 1 < len(self.seq) else _FALLBACK

    def admits(self, pos, side, x, y):
        return len(pos.u) > 0 or y != self.vp


# --------------------------------------------------------------------------
# strategies for ranked trees

def _rooted_rank(code):
    for i in range(RANKED_CAP + 1):
        if code in _ranked_set(i):
            return i
    return None


class RankedContinuousStrategy(TreeStrategy):
    """Two rooted trees of the same rank; the roots are pebbled before play."""

    name = "ranked-continuous"
    alternations = 0

    def __init__(self, t1: RootedTree, t2: RootedTree):
        super().__init__(t1.to_graph(), t2.to_graph())
        self.roots = (t1.root, t2.root)
        i1, i2 = _rooted_rank(t1.code()), _rooted_rank(t2.code())
        if i1 is None or i1 != i2:
            raise PreconditionError("rooted trees must belong to the same ranked family")
        if t1.code() == t2.code():
            raise PreconditionError("rooted trees are isomorphic")
        self.rank = i1
        self.bound = i1 + 7

    def start(self, g, h):
        return (self.roots[0],), (self.roots[1],)

    def move(self, pos):
        g, h = pos.graphs
        return _ranked_continuous(pos, 0, 0, self.rank, _view(g, self.roots[0]),
                                  _view(h, self.roots[1])) or _FALLBACK


class RankedRootStrategy(TreeStrategy):
    """Two non-isomorphic ranked trees of the same rank."""

    name = "ranked-root"
    alternations = 0

    def __init__(self, g, h, side=0):
        super().__init__(g, h)
        k1, k2 = ranked_rank(g), ranked_rank(h)
        if k1 is None or k1 != k2:
            raise PreconditionError("need two ranked trees of the same rank")
        if isomorphic(g, h):
            raise PreconditionError("trees are isomorphic")
        self.k = k1
        self.side = side
        mine, other = (g, h) if side == 0 else (h, g)
        self.v = _metrics(mine).centers[0]
        self.vp = _metrics(other).centers[0]
        self.seq = _diametral_from_center(mine, self.v)
        self.bound = 2 * self.k + 9

    def move(self, pos):
        side = self.side
        mine, other = pos.graphs[side], pos.graphs[1 - side]
        m = len(pos.u)
        if m == 0:
            return side, self.v
        if pos.pebbles(1 - side)[0] != self.vp:
            return (side, self.seq[m - 1]) if m - 1 < len(self.seq) else _FALLBACK
        return _ranked_continuous(pos, side, 0, self.k, _view(mine, self.v),
                                  _view(other, self.vp)) or _FALLBACK


def _subset_code(view, root, keep):
    def go(v):
        return _code_of(go(c) for c in view.children[v] if c in keep)
    return go(root)


def _embeds_in_base(code):
    return any(rooted_embeds(code, b) for b in ranked_base())


class RankedVsTreeStrategy(TreeStrategy):
    """A ranked tree against a connected graph that is not a ranked tree of the same rank.

    Modes: ``path`` (trees of different diameter), ``cycle`` (non-trees),
    and for trees of equal diameter ``apex``, ``superset`` or ``descend``
    depending on the shape of the opponent around its center.
    """

    name = "ranked-vs-tree"
    alternations = 0

    def __init__(self, g, h):
        super().__init__(g, h)
        k = ranked_rank(g)
        if k is None:
            raise PreconditionError("first graph must be a ranked tree")
        if not is_connected(h):
            raise PreconditionError("second graph must be connected")
        if is_tree(h) and ranked_rank(h) == k:
            raise PreconditionError("opponent is ranked of the same rank; use ranked_root_strategy")
        self.k = k
        dT = _metrics(g).diameter
        self.v = _metrics(g).centers[0]
        if not is_tree(h):
            cyc = _shortest_cycle(h)
            self.mode = "cycle"
            self.seq = cyc if len(cyc) <= dT + 2 else cyc[:dT + 2]
            self.play_side = 1
            self.bound = dT + 2
            return
        dG = _metrics(h).diameter
        if dG != dT:
            self.mode = "path"
            self.play_side = 0 if dT > dG else 1
            wide = (g, h)[self.play_side]
            self.seq = _diametral_path(wide)[:min(dT, dG) + 2]
            self.bound = dT + 2
            return
        self.bound = 2 * k + 9
        self.c = _metrics(h).centers[0]
        vg = _view(h, self.c)
        self.diam_g = _diametral_from_center(h, self.c)
        self.diam_t = _diametral_from_center(g, self.v)
        for w in vg.order:
            if vg.depth[w] == k and not _embeds_in_base(vg.code[w]):
                keep = set(vg.subtree(w))
                shrinking = True
                while shrinking:
                    shrinking = False
                    leaves = sorted((x for x in keep if x != w
                                     and not any(c in keep for c in vg.children[x])),
                                    key=lambda x: (-vg.depth[x], x))
                    for leaf in leaves:
                        trial = keep - {leaf}
                        if not _embeds_in_base(_subset_code(vg, w, trial)):
                            keep = trial
                            shrinking = True
                            break
                self.mode = "apex"
                self.play_side = 1
                self.spine = vg.path_to(w)
                self.seq = [x for x in vg.subtree(w) if x in keep and x != w]
                return
        for w in vg.order:
            j = vg.depth[w]
            if j > k:
                break
            i = k - j
            kids = vg.children[w]
            counts = {}
            for c in kids:
                counts[vg.code[c]] = counts.get(vg.code[c], 0) + 1
            for hc in _ranked_codes(i):
                branch = code_children(hc)
                if len(kids) > len(branch) and all(b in counts for b in branch):
                    chosen = []
                    for b in branch:
                        chosen.append(next(c for c in kids if vg.code[c] == b))
                    self.mode = "superset"
                    self.play_side = 1
                    self.spine = vg.path_to(w)
                    self.h_code = hc
                    self.h_kids = chosen
                    self.extra = next(c for c in kids if c not in chosen)
                    self.sub_rank = i
                    return
        self.mode = "descend"
        self.play_side = 0

    def move(self, pos):
        g, h = pos.graphs
        m = len(pos.u)
        if self.mode in ("cycle", "path"):
            return (self.play_side, self.seq[m]) if m < len(self.seq) else _FALLBACK
        if self.mode == "descend":
            if m == 0:
                return 0, self.v
            if pos.v[0] != self.c:
                return (0, self.diam_t[m - 1]) if m - 1 < len(self.diam_t) else _FALLBACK
            return _ranked_continuous(pos, 0, 0, self.k, _view(g, self.v),
                                      _view(h, self.c)) or _FALLBACK
        if m == 0:
            return 1, self.c
        if pos.u[0] != self.v:
            return (1, self.diam_g[m - 1]) if m - 1 < len(self.diam_g) else _FALLBACK
        spine = self.spine
        if m < len(spine):
            return 1, spine[m]
        j = len(spine) - 1
        if self.mode == "apex":
            t = m - len(spine)
            return (1, self.seq[t]) if t < len(self.seq) else _FALLBACK
        vg, vt = _view(h, self.c), _view(g, self.v)
        i = self.sub_rank
        if i == 0:
            # the whole copy plus one extra child cannot fit into a base tree
            seq = [self.extra] + [x for c in self.h_kids for x in vg.subtree(c)]
            t = m - len(spine)
            return (1, seq[t]) if t < len(seq) else _FALLBACK
        u = pos.u[j]
        if vt.code[u] != self.h_code:
            return _ranked_continuous(pos, 1, j, i, vg, vt, root_children=self.h_kids) \
                or _FALLBACK
        if m == j + 1:
            return 1, self.extra
        if m == j + 2:
            x = pos.u[j + 1]
            for y in self.h_kids:
                if vg.code[y] == vt.code.get(x):
                    return 1, y
            return _FALLBACK
        return _ranked_continuous(pos, 1, j + 2, i - 1, vg, vt) or _FALLBACK


def _component_plan(t, comp, k):
    """How Spoiler handles one component: ("G", strategy) plays inside it."""
    if not is_tree(comp):
        return "G", RankedVsTreeStrategy(t, comp)
    dT, dG = _metrics(t).diameter, _metrics(comp).diameter
    if dG > dT:
        return "G", RankedVsTreeStrategy(t, comp)
    if dG < dT:
        return "T", "short"
    if ranked_rank(comp) == k:
        return "G", RankedRootStrategy(t, comp, side=1)
    s = RankedVsTreeStrategy(t, comp)
    if s.mode in ("apex", "superset"):
        return "G", s
    return "T", "descend"


class RankedVsDisconnectedStrategy(TreeStrategy):
    """A ranked tree against a disconnected graph."""

    name = "ranked-vs-disconnected"
    alternations = 0

    def __init__(self, g, h):
        super().__init__(g, h)
        k = ranked_rank(g)
        if k is None:
            raise PreconditionError("first graph must be a ranked tree")
        if is_connected(h):
            raise PreconditionError("second graph must be disconnected")
        self.k = k
        self.bound = 2 * k + 10
        self.v = _metrics(g).centers[0]
        self.diam_t = _diametral_from_center(g, self.v)
        comps = components(h)
        code_t = RootedTree.from_graph(g, self.v).code()
        self.comps = comps
        self.where = {x: idx for idx, c in enumerate(comps) for x in c}
        twin = None
        for c in comps:
            sub = h.induced(c)
            if is_tree(sub) and sub.n == g.n:
                cs = _metrics(sub).centers
                if len(cs) == 1 and RootedTree.from_graph(sub, cs[0]).code() == code_t:
                    twin = c
                    break
        if twin is not None:
            self.mode = "twin"
            self.outside = min(x for x in range(h.n) if x not in set(twin))
            sub = h.induced(twin)
            self.vp = twin[_metrics(sub).centers[0]]
            vt, vtp = _view(g, self.v), _view(h, self.vp)
            iso = {}
            stack = [(self.v, self.vp)]
            while stack:
                a, b = stack.pop()
                iso[a] = b
                for ca in vt.children[a]:
                    cb = next(c for c in vtp.children[b] if vtp.code[c] == vt.code[ca])
                    stack.append((ca, cb))
            self.iso = iso
            self.inv = {b: a for a, b in iso.items()}
            self.diam_tp = _diametral_from_center(h, self.vp)
            return
        self.plans = []
        for c in comps:
            sub = h.induced(c)
            self.plans.append(_component_plan(g, sub, k))
        inside = [idx for idx, p in enumerate(self.plans) if p[0] == "G"]
        if inside:
            self.mode = "inside"
            self.comp_idx = inside[0]
            self.sub = self.plans[inside[0]][1]
            comp = comps[inside[0]]
            self.local = {x: i for i, x in enumerate(comp)}
        else:
            self.mode = "outside"

    def move(self, pos):
        from .efgame import GamePosition
        g, h = pos.graphs
        m = len(pos.u)
        if self.mode == "twin":
            if m == 0:
                return 1, self.outside
            if m == 1:
                return 1, self.vp
            if pos.u[1] != self.v:
                t = m - 2
                return (1, self.diam_tp[t]) if t < len(self.diam_tp) else _FALLBACK
            xp = self.iso[pos.u[0]]
            vtp, vt = _view(h, self.vp), _view(g, self.v)
            spine = vtp.path_to(xp)
            for idx in range(2, m):
                j = idx - 1
                if j >= len(spine) or pos.u[idx] != self.inv[spine[j]]:
                    return _ranked_continuous(pos, 1, idx, self.k - j, vtp, vt) or _FALLBACK
            j = m - 1
            return (1, spine[j]) if j < len(spine) else _FALLBACK
        if self.mode == "inside":
            comp = self.comps[self.comp_idx]
            sub_g, sub_h = self.sub.g, self.sub.h
            local_v = tuple(self.local.get(x, 0) for x in pos.v)
            if self.sub.g is g:
                sp = GamePosition((g, sub_h), pos.u, local_v, pos.sides, pos.rounds,
                                  pos.last, pos.budget)
            else:
                sp = GamePosition((sub_g, sub_h), pos.u, local_v, pos.sides, pos.rounds,
                                  pos.last, pos.budget)
            side, x = self.sub.move(sp)
            return (1, comp[x]) if side == 1 else (0, x)
        if m == 0:
            return 0, self.v
        idx = self.where[pos.v[0]]
        kind = self.plans[idx][1]
        if kind == "short":
            return (0, self.diam_t[m - 1]) if m - 1 < len(self.diam_t) else _FALLBACK
        comp = self.comps[idx]
        sub = h.induced(comp)
        c = comp[_metrics(sub).centers[0]]
        if pos.v[0] != c:
            return (0, self.diam_t[m - 1]) if m - 1 < len(self.diam_t) else _FALLBACK
        return _ranked_continuous(pos, 0, 0, self.k, _view(g, self.v), _view(h, c)) \
            or _FALLBACK


# factory names ------------------------------------------------------------

def distance_strategy(g, h, pair_g, pair_h, side=0):
    return DistanceStrategy(g, h, pair_g, pair_h, side)


def diameter_strategy(g, h):
    return DiameterStrategy(g, h)


def cycle_strategy(g, h):
    return CycleStrategy(g, h)


def diverging_strategy(g, h):
    return DivergingStrategy(g, h)


def divergence_break_strategy(g, h):
    return DivergenceBreakStrategy(g, h)


def center_strategy(g, h, side=0):
    return CenterStrategy(g, h, side)


def ranked_continuous_strategy(t1, t2):
    return RankedContinuousStrategy(t1, t2)


def ranked_root_strategy(g, h, side=0):
    return RankedRootStrategy(g, h, side)


def ranked_vs_tree_strategy(g, h):
    return RankedVsTreeStrategy(g, h)


def ranked_vs_disconnected_strategy(g, h):
    return RankedVsDisconnectedStrategy(g, h)


# --------------------------------------------------------------------------
# rooted values and minimization

_TREE_ENGINE = ValueEngine({"k": 8, "order": 40})
_CODE_VALUES = {}


def rooted_value(t: RootedTree, k: int, engine=None) -> int:
    """Id of the k-round value of t with its root pebbled before play."""
    engine = engine or _TREE_ENGINE
    if k > engine.caps["k"]:
        raise CapExceeded(f"rooted values capped at k={engine.caps['k']}")
    if t.n > engine.caps["order"]:
        raise CapExceeded(f"rooted values capped at order {engine.caps['order']}")
    return engine.value(t.to_graph(), (t.root,), k + 1).id


def _code_value(c, k, engine):
    key = (c, k, id(engine))
    hit = _CODE_VALUES.get(key)
    if hit is None:
        t = RootedTree.from_code(c)
        hit = _CODE_VALUES[key] = rooted_value(t, k, engine)
    return hit


@lru_cache(maxsize=None)
def _strict_descendants(c):
    out = set()
    for x in code_children(c):
        out.add(x)
        out |= _strict_descendants(x)
    return frozenset(out)


def _by_size(c):
    return code_order(c), code_key(c)


def minimize_rooted(t: RootedTree, k: int, engine=None) -> RootedTree:
    """Shrink t without changing its rooted k-value.

    Two rules are applied bottom-up until nothing changes: a vertex keeps at
    most k children of each child value, and a subtree whose value equals
    that of a strict descendant is replaced by the smallest such descendant.
    """
    if k < 1:
        raise PreconditionError("k must be at least 1")
    engine = engine or _TREE_ENGINE

    def val(c):
        return _code_value(c, k, engine)

    def step(c):
        kids = sorted((step(x) for x in code_children(c)), key=_by_size)
        groups = {}
        for x in kids:
            groups.setdefault(val(x), []).append(x)
        new = _code_of(x for grp in groups.values() for x in grp[:k])
        target = val(new)
        same = [d for d in _strict_descendants(new) if val(d) == target]
        return min(same, key=_by_size) if same else new

    original = t.code()
    c = original
    while True:
        nxt = step(c)
        if nxt == c:
            break
        c = nxt
    if val(c) != val(original):
        raise InvariantViolation("minimization changed the rooted value")
    return RootedTree.from_code(c)


def minimality_violations(t: RootedTree, k: int, engine=None) -> list:
    """Places where one of the minimization rules still applies (empty if minimal)."""
    engine = engine or _TREE_ENGINE
    codes = t.codes()
    out = []
    for v in range(t.n):
        counts = {}
        for c in t.children[v]:
            counts.setdefault(_code_value(codes[c], k, engine), []).append(c)
        for val, members in counts.items():
            if len(members) > k:
                out.append({"rule": "too-many-children", "vertex": v,
                            "children": sorted(members)})
        mine = _code_value(codes[v], k, engine)
        stack = list(t.children[v])
        while stack:
            u = stack.pop()
            if _code_value(codes[u], k, engine) == mine:
                out.append({"rule": "equal-descendant", "vertex": v, "descendant": u})
                break
            stack.extend(t.children[u])
    return out


def minimization_report(t: RootedTree, k: int, engine=None) -> dict:
    """Minimize t and report the size parameters the structural bounds use.

    ``g`` counts the distinct rooted k-values met among subtrees of the
    minimized tree; a minimal tree has depth below g and at most k*g
    children per vertex.
    """
    engine = engine or _TREE_ENGINE
    small = minimize_rooted(t, k, engine)
    codes = small.codes()
    values = {_code_value(codes[v], k, engine) for v in range(small.n)}
    g = len(values)
    width = max(len(small.children[v]) for v in range(small.n))
    return {
        "k": k, "order_before": t.n, "order_after": small.n,
        "depth": small.depth, "max_children": width, "g": g,
        "depth_ok": small.depth <= g - 1, "width_ok": width <= k * g,
        "violations": minimality_violations(small, k, engine),
        "tree": small,
    }


# --------------------------------------------------------------------------
# certification of definability bounds

def _first_difference(engine, g, h, top):
    try:
        for k in range(top + 1):
            if engine.raw(g, (), k) != engine.raw(h, (), k):
                return k
        return None
    finally:
        engine.memo.pop(h, None)


def _rival_class(g, h):
    if not is_connected(h):
        if _metrics(g).diameter != _metrics(h).diameter:
            return "different-diameter"
        return "disconnected"
    if _metrics(g).diameter != _metrics(h).diameter:
        return "different-diameter"
    if not is_tree(h):
        return "connected-non-tree"
    return "diverging-tree" if is_diverging_tree(h) else "non-diverging-tree"


def _class_strategy(cls, g, h):
    if cls == "different-diameter":
        return DiameterStrategy(g, h)
    if cls == "connected-non-tree":
        return CycleStrategy(g, h)
    if cls == "diverging-tree":
        return DivergingStrategy(g, h)
    if cls == "non-diverging-tree":
        return DivergenceBreakStrategy(g, h)
    return None


def certify_tree_definability(g: Graph, order_bound: int, samples: int = 2, engine=None) -> dict:
    """Check that a diverging tree is separated from every rival up to a given order.

    Every graph of order at most ``order_bound`` not isomorphic to g is
    compared by values up to rank radius + 2; the largest first differing
    rank is reported.  For each rival class the first ``samples`` rivals are
    also played out with the matching explicit strategy.
    """
    if not is_tree(g) or not is_diverging_tree(g):
        raise PreconditionError("input must be a diverging tree")
    if g.n > order_bound:
        raise PreconditionError("tree order exceeds the order bound")
    r = _metrics(g).radius
    target = r + 2
    engine = engine or ValueEngine({"k": max(target, CAPS_K), "order": order_bound})
    worst = 0
    rivals = 0
    failures = []
    per_class = {}
    played = {}
    for h in graphs_up_to(order_bound):
        if h.n == g.n and isomorphic(g, h):
            continue
        rivals += 1
        k = _first_difference(engine, g, h, target)
        cls = _rival_class(g, h)
        per_class[cls] = per_class.get(cls, 0) + 1
        if k is None:
            failures.append(h)
            continue
        worst = max(worst, k)
        if played.get(cls, 0) < samples:
            s = _class_strategy(cls, g, h)
            if s is not None:
                ok = run_strategy(s)
                played[cls] = played.get(cls, 0) + 1
                if not ok:
                    failures.append(h)
    return {
        "order": g.n, "radius": r, "order_bound": order_bound, "bound": target,
        "rivals": rivals, "max_rank": worst, "ok": not failures and worst <= target,
        "rival_classes": per_class, "strategies_played": played,
        "failures": [{"n": x.n, "edges": sorted(x.edges)} for x in failures],
    }


CAPS_K = 7


def certify_path_definability(n: int, order_bound: int, engine=None) -> dict:
    """Bounded definability rank of the path on n vertices against log2 n + 3."""
    from .efgame import bounded_definability_rank
    from .graph import path
    if n < 1:
        raise PreconditionError("path needs at least one vertex")
    engine = engine or ValueEngine({"k": 8, "order": order_bound})
    k = bounded_definability_rank(path(n), order_bound, engine)
    bound = log2(n) + 3
    return {"n": n, "order_bound": order_bound, "rank": k, "bound": bound, "ok": k < bound}
