"""Ehrenfeucht-Fraisse games on graphs.

Values
    ``value(g, pebbles, k)`` is the class of (g, pebbles) under equivalence
    for sentences of quantifier rank k - len(pebbles).  It is computed
    recursively (atomic type at rank 0, set of child values above) and
    hash-consed, so two values are equal iff their ids are equal.

Games
    ``spoiler_wins`` is a direct minimax search over positions, optionally
    with a budget on how often Spoiler may switch graphs.  It shares no code
    with the value recursion and serves as its cross-check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import CapExceeded, IllegalMove, InvariantViolation, PreconditionError
from .formula import (
    TRUE, AtomAdj, AtomEq, Exists, Not, conj, graph_axioms,
)
from .graph import Graph, graphs_up_to, isomorphic

__all__ = [
    "EFValue", "ValueEngine", "value", "distinguishing_rank",
    "distinguishing_rank_alt", "spoiler_wins", "value_formula",
    "defining_formula", "bounded_definability_rank", "GamePosition",
    "Strategy", "PebbleAllStrategy", "verify_strategy", "game_trace",
    "partial_isomorphism", "atomic_type", "CAPS", "realized_values",
    "violation", "spoiler_choice", "duplicator_choice",
]

CAPS = {"k": 7, "order": 10}


# --------------------------------------------------------------------------
# values

@dataclass(frozen=True)
class EFValue:
    """Handle to an interned value: equal handles mean equal classes."""

    id: int
    rank: int
    arity: int

    def __repr__(self):
        return f"EFValue(#{self.id}, rank={self.rank}, pebbles={self.arity})"


def atomic_type(g: Graph, pebbles) -> tuple:
    """Equality/adjacency pattern: per pair i<j, 0 equal, 1 adjacent, 2 neither."""
    out = []
    for i, j in itertools.combinations(range(len(pebbles)), 2):
        a, b = pebbles[i], pebbles[j]
        if a == b:
            out.append(0)
        elif (g.adj[a] >> b) & 1:
            out.append(1)
        else:
            out.append(2)
    return tuple(out)


class ValueEngine:
    """Hash-consing table plus per-graph memo of (pebbles, rank) -> value id."""

    def __init__(self, caps=None):
        self.caps = dict(CAPS if caps is None else caps)
        self.table = {}
        self.entries = []
        self.memo = {}

    def _intern(self, key):
        vid = self.table.get(key)
        if vid is None:
            vid = len(self.entries)
            self.table[key] = vid
            self.entries.append(key)
        return vid

    def raw(self, g: Graph, pebbles: tuple, r: int) -> int:
        memo = self.memo.get(g)
        if memo is None:
            memo = self.memo[g] = {}
        return self._raw(g, tuple(pebbles), r, memo)

    def _raw(self, g, u, r, memo):
        key = (u, r)
        vid = memo.get(key)
        if vid is not None:
            return vid
        s = len(u)
        if r == 0:
            vid = self._intern(("a", s, atomic_type(g, u)))
        else:
            kids = frozenset(self._raw(g, u + (w,), r - 1, memo) for w in range(g.n))
            vid = self._intern(("v", s, r, kids))
        memo[key] = vid
        return vid

    def value(self, g: Graph, pebbles=(), k=0) -> EFValue:
        pebbles = tuple(pebbles)
        if len(pebbles) > k:
            raise PreconditionError("more pebbles than the rank budget")
        if k > self.caps["k"]:
            raise CapExceeded(f"value recursion capped at k={self.caps['k']}")
        if g.n > self.caps["order"]:
            raise CapExceeded(f"value recursion capped at order {self.caps['order']}")
        for p in pebbles:
            if not 0 <= p < g.n:
                raise PreconditionError(f"pebble {p} is not a vertex")
        r = k - len(pebbles)
        return EFValue(self.raw(g, pebbles, r), r, len(pebbles))

    def children(self, v: EFValue):
        key = self.entries[v.id]
        if key[0] == "a":
            return frozenset()
        return frozenset(EFValue(c, v.rank - 1, v.arity + 1) for c in key[3])

    def atomic(self, v: EFValue):
        """Atomic type of a value (read off a child when the rank is positive)."""
        key = self.entries[v.id]
        while key[0] != "a":
            kids = key[3]
            if not kids:
                return None
            key = self.entries[next(iter(kids))]
        s = v.arity
        full = key[2]
        # drop the pairs that involve pebbles beyond the first s
        out = []
        idx = 0
        for i, j in itertools.combinations(range(key[1]), 2):
            if j < s:
                out.append(full[idx])
            idx += 1
        return tuple(out)

    def count_realized(self, graphs, k, s):
        """Number of distinct values of (G, u) with |u| = s over the given graphs."""
        seen = set()
        for g in graphs:
            for u in itertools.product(range(g.n), repeat=s):
                seen.add(self.raw(g, u, k - s))
        return len(seen)


_ENGINE = ValueEngine()


def default_engine():
    return _ENGINE


def value(g: Graph, pebbles=(), k=0) -> EFValue:
    return _ENGINE.value(g, pebbles, k)


def _check_non_iso(g, h):
    if isomorphic(g, h):
        raise PreconditionError("graphs are isomorphic; no distinguishing rank exists")


def distinguishing_rank(g: Graph, h: Graph, engine=None) -> int:
    """Least k such that g and h disagree on some sentence of rank k."""
    engine = engine or _ENGINE
    _check_non_iso(g, h)
    top = max(g.n, h.n) + 1
    for k in range(0, top + 1):
        if engine.value(g, (), k) != engine.value(h, (), k):
            return k
    raise InvariantViolation("no distinguishing rank up to max order + 1")


# --------------------------------------------------------------------------
# direct minimax

def partial_isomorphism(g, h, u, v) -> bool:
    """Does u_i -> v_i preserve equality and adjacency?"""
    for i in range(len(u)):
        for j in range(i):
            if (u[i] == u[j]) != (v[i] == v[j]):
                return False
            if bool((g.adj[u[i]] >> u[j]) & 1) != bool((h.adj[v[i]] >> v[j]) & 1):
                return False
    return True


def _extends(g, h, pairs, x, y):
    for a, b in pairs:
        if (x == a) != (y == b):
            return False
        if bool((g.adj[x] >> a) & 1) != bool((h.adj[y] >> b) & 1):
            return False
    return True


class _Minimax:
    """Game search on positions stored as sets of pebbled pairs."""

    def __init__(self, g, h):
        self.g, self.h = g, h
        self.memo = {}

    def spoiler_wins(self, pairs, r, last, budget):
        if r == 0:
            return False
        key = (pairs, r, last, budget)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        res = self.best_move(pairs, r, last, budget) is not None
        self.memo[key] = res
        return res

    def moves(self, last, budget):
        for side in (0, 1):
            if last is not None and side != last:
                if budget is not None and budget == 0:
                    continue
            yield side

    def best_move(self, pairs, r, last, budget):
        graphs = (self.g, self.h)
        for side in self.moves(last, budget):
            nb = budget
            if last is not None and side != last and budget is not None:
                nb = budget - 1
            mine, theirs = graphs[side], graphs[1 - side]
            for x in range(mine.n):
                if self._refutes(pairs, r, side, x, nb):
                    return side, x
        return None

    def _refutes(self, pairs, r, side, x, budget):
        """Does Spoiler win by playing x in graph ``side``?"""
        g, h = self.g, self.h
        other = h if side == 0 else g
        for y in range(other.n):
            a, b = (x, y) if side == 0 else (y, x)
            if not _extends(g, h, pairs, a, b):
                continue
            new = pairs | {(a, b)}
            if not self.spoiler_wins(new, r - 1, side, budget):
                return False
        return True


def violation(g, h, u, v):
    """First pebble pair (i, j) breaking the partial isomorphism, described, or None."""
    for i in range(len(u)):
        for j in range(i):
            if (u[i] == u[j]) != (v[i] == v[j]):
                return {"pebbles": [j, i], "condition": "equality",
                        "graph0": [u[j], u[i]], "graph1": [v[j], v[i]]}
            if bool((g.adj[u[i]] >> u[j]) & 1) != bool((h.adj[v[i]] >> v[j]) & 1):
                return {"pebbles": [j, i], "condition": "adjacency",
                        "graph0": [u[j], u[i]], "graph1": [v[j], v[i]]}
    return None


def spoiler_choice(g, h, u, v, rounds):
    """A Spoiler move winning in the fewest rounds, or the first vertex of g if none wins."""
    game = _Minimax(g, h)
    pairs = frozenset(zip(u, v))
    for q in range(1, rounds + 1):
        best = game.best_move(pairs, q, None, None)
        if best is not None:
            return best
    return (0, 0)


def duplicator_choice(g, h, u, v, side, x, rounds):
    """Duplicator's answer to x: a reply that survives the remaining rounds if one exists.

    ``rounds`` counts the rounds left including the current one.  Among
    replies keeping a partial isomorphism the lowest surviving vertex is
    chosen; failing that, the lowest legal vertex, and vertex 0 when every
    reply breaks the isomorphism.
    """
    game = _Minimax(g, h)
    pairs = frozenset(zip(u, v))
    other = h if side == 0 else g
    legal = []
    for y in range(other.n):
        a, b = (x, y) if side == 0 else (y, x)
        if _extends(g, h, pairs, a, b):
            legal.append(y)
            if not game.spoiler_wins(pairs | {(a, b)}, rounds - 1, None, None):
                return y
    return legal[0] if legal else 0


def spoiler_wins(g: Graph, h: Graph, k: int, a=None, pebbles=((), ())) -> bool:
    """Does Spoiler win the k-round game (with at most ``a`` graph switches)?"""
    u, v = pebbles
    if not partial_isomorphism(g, h, u, v):
        return True
    game = _Minimax(g, h)
    return game.spoiler_wins(frozenset(zip(u, v)), k, None, a)


def distinguishing_rank_alt(g: Graph, h: Graph, a=None) -> int:
    """Least k such that Spoiler wins the k-round game with at most a switches.

    ``a=None`` lifts the restriction, giving the plain distinguishing rank
    computed by game search instead of values.
    """
    _check_non_iso(g, h)
    if a is not None and a < 0:
        raise PreconditionError("alternation budget must be non-negative")
    game = _Minimax(g, h)
    top = max(g.n, h.n) + 1
    for k in range(1, top + 1):
        if game.spoiler_wins(frozenset(), k, None, a):
            return k
    raise InvariantViolation("Spoiler should win within max order + 1 rounds")


def game_trace(g: Graph, h: Graph, k: int, a=None):
    """One line of optimal play as a JSON-ready move list.

    Spoiler plays a move that wins in the fewest rounds (graph 0 before
    graph 1, lowest vertex first on ties).  Duplicator answers with the reply
    that postpones defeat longest, again lowest vertex first.
    """
    game = _Minimax(g, h)
    pairs = frozenset()
    last, budget = None, a
    moves = []

    def need(prs, r, lst, bud):
        for q in range(1, r + 1):
            if game.spoiler_wins(prs, q, lst, bud):
                return q
        return None

    r = k
    while r > 0:
        q = need(pairs, r, last, budget)
        best = game.best_move(pairs, q if q is not None else r, last, budget)
        if best is None:
            best = (0, 0)
        side, x = best
        nb = budget
        if last is not None and side != last and nb is not None:
            nb -= 1
        other = h if side == 0 else g
        reply, reply_need, broken = None, -1, True
        for y in range(other.n):
            aa, bb = (x, y) if side == 0 else (y, x)
            if not _extends(g, h, pairs, aa, bb):
                continue
            rest = need(pairs | {(aa, bb)}, r - 1, side, nb)
            score = r if rest is None else rest
            if score > reply_need:
                reply, reply_need, broken = y, score, False
        if reply is None:
            reply = 0
        aa, bb = (x, reply) if side == 0 else (reply, x)
        moves.append({"round": k - r + 1, "spoiler": {"graph": side, "vertex": x},
                      "duplicator": {"graph": 1 - side, "vertex": reply},
                      "partial_isomorphism": not broken})
        if broken:
            break
        pairs = pairs | {(aa, bb)}
        last, budget = side, nb
        r -= 1
    return moves


# --------------------------------------------------------------------------
# formulas from values

def realized_values(engine, graphs, s, r):
    seen = set()
    for g in graphs:
        for u in itertools.product(range(g.n), repeat=s):
            seen.add(engine.raw(g, u, r))
    return seen


def _atomic_formula(atype, s):
    lits = []
    for (i, j), code in zip(itertools.combinations(range(s), 2), atype):
        if code == 0:
            lits += [AtomEq(i, j), Not(AtomAdj(i, j))]
        elif code == 1:
            lits += [Not(AtomEq(i, j)), AtomAdj(i, j)]
        else:
            lits += [Not(AtomEq(i, j)), Not(AtomAdj(i, j))]
    return conj(*lits) if lits else TRUE


def value_formula(g: Graph, pebbles=(), k=0, universe=None, order_bound=None, engine=None):
    """Formula with free variables x0..x_{s-1} defining the value of (g, pebbles).

    The negative conjuncts range over the values realised by the universe
    (default: all graphs of order <= order_bound, itself defaulting to |g|).
    The formula is exact on every (h, q) with h in the universe.
    """
    engine = engine or _ENGINE
    pebbles = tuple(pebbles)
    s0 = len(pebbles)
    alpha = engine.value(g, pebbles, k)
    if universe is None:
        bound = order_bound if order_bound is not None else g.n
        universe = graphs_up_to(bound)
    universe = list(universe)
    if not any(isomorphic(g, h) for h in universe if h.n == g.n):
        universe.append(g)
    levels = {}
    for s in range(s0 + 1, k + 1):
        levels[s] = sorted(realized_values(engine, universe, s, k - s))
    built = {}

    def build(vid, s):
        hit = built.get((vid, s))
        if hit is not None:
            return hit
        key = engine.entries[vid]
        if key[0] == "a":
            f = _atomic_formula(key[2], s)
        else:
            kids = key[3]
            parts = []
            for beta in levels[s + 1]:
                sub = Exists(s, build(beta, s + 1))
                parts.append(sub if beta in kids else Not(sub))
            f = conj(*parts) if parts else TRUE
        built[(vid, s)] = f
        return f

    return build(alpha.id, s0)


def _bounded_rank(g, order_bound, engine):
    if g.n > order_bound:
        raise PreconditionError("graph order exceeds the order bound")
    rivals = [h for h in graphs_up_to(order_bound)
              if not (h.n == g.n and isomorphic(g, h))]
    checked = len(rivals)
    k = 0
    while True:
        if k > engine.caps["k"]:
            raise CapExceeded(f"rank search exceeded k={engine.caps['k']}")
        mine = engine.value(g, (), k)
        rivals = [h for h in rivals if engine.value(h, (), k) == mine]
        if not rivals:
            return k, checked
        k += 1


def bounded_definability_rank(g: Graph, order_bound: int, engine=None) -> int:
    """Least k separating g from every non-isomorphic graph of order <= bound."""
    return _bounded_rank(g, order_bound, engine or _ENGINE)[0]


def defining_formula(g: Graph, order_bound: int, engine=None):
    """(sentence, k, certificate) defining g among graphs of order <= bound."""
    engine = engine or _ENGINE
    k, checked = _bounded_rank(g, order_bound, engine)
    body = value_formula(g, (), k, order_bound=order_bound, engine=engine)
    sentence = conj(graph_axioms(), body)
    cert = {"order_bound": order_bound, "k": k, "rivals_checked": checked,
            "scope": "defines g among graphs with at most order_bound vertices"}
    return sentence, k, cert


# --------------------------------------------------------------------------
# strategies

@dataclass(frozen=True)
class GamePosition:
    """Pebbles in both graphs plus bookkeeping for the alternation budget.

    ``sides[i]`` is the graph Spoiler played in for pebble i (None for
    pebbles placed before the game, e.g. tree roots).
    """

    graphs: tuple
    u: tuple
    v: tuple
    sides: tuple
    rounds: int
    last: object = None
    budget: object = None

    def pebbles(self, side):
        return self.u if side == 0 else self.v

    @property
    def moves_made(self):
        return sum(1 for s in self.sides if s is not None)


class Strategy:
    """Spoiler move selector.

    Subclasses implement ``move(pos) -> (graph index, vertex)``.  ``admits``
    lets a strategy restrict Duplicator's replies to those covered by its
    stated hypotheses (by default every reply is considered).
    """

    name = "strategy"

    def check(self, g, h):
        """Raise PreconditionError if the hypotheses fail on (g, h)."""

    def start(self, g, h):
        """Pebble pairs placed before the first round."""
        return (), ()

    def move(self, pos: GamePosition):
        raise NotImplementedError

    def admits(self, pos: GamePosition, side, x, y) -> bool:
        return True


class PebbleAllStrategy(Strategy):
    """Pebble the vertices of one graph in increasing order."""

    name = "pebble-all"

    def __init__(self, side=None):
        self.side = side

    def move(self, pos):
        side = self.side
        if side is None:
            g, h = pos.graphs
            side = 0 if g.n >= h.n else 1
        used = set(pos.pebbles(side))
        n = pos.graphs[side].n
        free = [x for x in range(n) if x not in used]
        return side, (free[0] if free else 0)


def verify_strategy(s: Strategy, g: Graph, h: Graph, k: int, a=None) -> bool:
    """Does ``s`` win within k rounds against every Duplicator reply?"""
    s.check(g, h)
    u0, v0 = s.start(g, h)
    memo = {}
    graphs = (g, h)

    def play(pos):
        if not partial_isomorphism(g, h, pos.u, pos.v):
            return True
        if pos.rounds == 0:
            return False
        key = (pos.u, pos.v, pos.sides, pos.rounds, pos.budget)
        hit = memo.get(key)
        if hit is not None:
            return hit
        side, x = s.move(pos)
        if side not in (0, 1) or not (0 <= x < graphs[side].n):
            raise IllegalMove(f"{s.name}: move {(side, x)} is not a vertex")
        budget = pos.budget
        if pos.last is not None and side != pos.last and budget is not None:
            if budget == 0:
                raise IllegalMove(f"{s.name}: graph switch exceeds the alternation budget")
            budget -= 1
        result = True
        other = graphs[1 - side]
        for y in range(other.n):
            if not s.admits(pos, side, x, y):
                continue
            a_, b_ = (x, y) if side == 0 else (y, x)
            nxt = GamePosition(graphs, pos.u + (a_,), pos.v + (b_,), pos.sides + (side,),
                               pos.rounds - 1, side, budget)
            if not play(nxt):
                result = False
                break
        memo[key] = result
        return result

    start = GamePosition(graphs, tuple(u0), tuple(v0), (None,) * len(u0), k, None, a)
    return play(start)
