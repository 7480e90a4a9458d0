"""Small independent reference implementations used by the tests.

Nothing here imports the package's evaluator or game code, so agreement
with them is evidence rather than a tautology.
"""

from functools import lru_cache
import itertools

import networkx as nx

from fodeflab.formula import AtomAdj, AtomEq, And, Exists, Forall, Not, Or


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def nx_isomorphic(g, h):
    return g.n == h.n and nx.is_isomorphic(to_nx(g), to_nx(h))


def naive_eval(f, g, env=None):
    """Direct recursive model checking, no optimisation."""
    env = dict(env or {})
    if isinstance(f, AtomAdj):
        return g.has_edge(env[f.a], env[f.b])
    if isinstance(f, AtomEq):
        return env[f.a] == env[f.b]
    if isinstance(f, Not):
        return not naive_eval(f.f, g, env)
    if isinstance(f, And):
        return all(naive_eval(a, g, env) for a in f.args)
    if isinstance(f, Or):
        return any(naive_eval(a, g, env) for a in f.args)
    if isinstance(f, Exists):
        return any(naive_eval(f.body, g, {**env, f.var: x}) for x in range(g.n))
    if isinstance(f, Forall):
        return all(naive_eval(f.body, g, {**env, f.var: x}) for x in range(g.n))
    raise TypeError(type(f))


def _partial_iso(g, h, u, v):
    for i, j in itertools.combinations(range(len(u)), 2):
        if (u[i] == u[j]) != (v[i] == v[j]):
            return False
        if g.has_edge(u[i], u[j]) != h.has_edge(v[i], v[j]):
            return False
    for i in range(len(u)):
        if g.has_edge(u[i], u[i]) != h.has_edge(v[i], v[i]):
            return False
    return True


def spoiler_wins(g, h, rounds, alternations=None):
    """Plain minimax over the Ehrenfeucht game, optionally with a switch budget."""

    @lru_cache(maxsize=None)
    def win(u, v, r, last, budget):
        if not _partial_iso(g, h, u, v):
            return True
        if r == 0:
            return False
        for side in (0, 1):
            b = budget
            if last is not None and side != last and b is not None:
                if b == 0:
                    continue
                b -= 1
            mine, other = (g, h) if side == 0 else (h, g)
            for x in range(mine.n):
                ok = True
                for y in range(other.n):
                    nu, nv = (u + (x,), v + (y,)) if side == 0 else (u + (y,), v + (x,))
                    if not win(nu, nv, r - 1, side, b):
                        ok = False
                        break
                if ok:
                    return True
        return False

    return win((), (), rounds, None, alternations)


def minimax_rank(g, h, alternations=None, limit=12):
    for k in range(limit + 1):
        if spoiler_wins(g, h, k, alternations):
            return k
    return None
