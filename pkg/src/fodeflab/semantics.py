"""Model checking of formulas on finite graphs.

Quantifier blocks are evaluated as small constraint problems.  Literals of
the block body that do not depend on deeper quantifiers are lifted out and
used to prune candidate values (a guard ``x ~ t`` restricts ``x`` to the
neighbourhood of ``t``, pairwise distinctness feeds a pigeonhole test).
Lifting is sound because graphs in a quantifier range are never empty.
"""

from __future__ import annotations

from functools import lru_cache

from .errors import InputError, PreconditionError
from .formula import (
    And, AtomAdj, AtomEq, Exists, Forall, Formula, Not, Or, free_vars,
)

__all__ = ["evaluate", "eval_with_witnesses", "holds", "UnassignedVariable"]


class UnassignedVariable(InputError):
    kind = "unassigned-variable"


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# --------------------------------------------------------------------------
# block analysis (purely syntactic, cached per formula node)

def _block(f):
    kind = type(f)
    vars_ = []
    while type(f) is kind:
        vars_.append(f.var)
        f = f.body
    return kind, tuple(vars_), f


def _lift(f, want, inner, out):
    """Collect (literal, required value) pairs implied by ``f == want``."""
    if isinstance(f, And) and want:
        for a in f.args:
            _lift(a, want, inner, out)
    elif isinstance(f, Or) and not want:
        for a in f.args:
            _lift(a, want, inner, out)
    elif isinstance(f, Not):
        _lift(f.f, not want, inner, out)
    elif isinstance(f, (Exists, Forall)):
        _lift(f.body, want, inner | {f.var}, out)
    elif isinstance(f, (AtomAdj, AtomEq)):
        if not (free_vars(f) & inner):
            out.append((f, want))


class _Plan:
    __slots__ = ("vars", "body", "outer", "by_var", "clique", "unary")

    def __init__(self, vars_, body, want):
        self.vars = vars_
        self.body = body
        lits = []
        _lift(body, want, frozenset(), lits)
        block = set(vars_)
        self.outer = []
        self.unary = {v: [] for v in vars_}
        self.by_var = {v: [] for v in vars_}
        seen = set()
        for atom, req in lits:
            if (atom, req) in seen:
                continue
            seen.add((atom, req))
            bv = free_vars(atom) & block
            if not bv:
                self.outer.append((atom, req))
            elif len(bv) == 1:
                (v,) = bv
                self.unary[v].append((atom, req))
            else:
                for v in bv:
                    self.by_var[v].append((atom, req))
        # pairwise distinctness among block variables (for the pigeonhole test)
        diff = {}
        for atom, req in lits:
            if isinstance(atom, AtomEq) and not req and atom.a != atom.b \
                    and atom.a in block and atom.b in block:
                diff.setdefault(atom.a, set()).add(atom.b)
                diff.setdefault(atom.b, set()).add(atom.a)
        clique = []
        for v in sorted(diff, key=lambda v: (-len(diff[v]), v)):
            if all(u in diff[v] for u in clique):
                clique.append(v)
        self.clique = tuple(clique) if len(clique) >= 3 else ()


@lru_cache(maxsize=4096)
def _plan(f, want):
    _, vars_, body = _block(f)
    return _Plan(vars_, body, want)


# --------------------------------------------------------------------------
# evaluator

class _Evaluator:
    def __init__(self, g, optimize=True):
        self.g = g
        self.adj = g.adj
        self.n = g.n
        self.full = (1 << g.n) - 1
        self.optimize = optimize
        self.memo = {}

    def ev(self, f, env):
        t = type(f)
        if t is AtomAdj:
            return bool((self.adj[env[f.a]] >> env[f.b]) & 1)
        if t is AtomEq:
            return env[f.a] == env[f.b]
        if t is Not:
            return not self.ev(f.f, env)
        if t is And:
            for a in f.args:
                if not self.ev(a, env):
                    return False
            return True
        if t is Or:
            for a in f.args:
                if self.ev(a, env):
                    return True
            return False
        if t is Exists or t is Forall:
            if not self.optimize:
                return self._plain(f, env)
            key = (f, tuple(sorted((v, env[v]) for v in free_vars(f))))
            hit = self.memo.get(key)
            if hit is not None:
                return hit
            if t is Exists:
                res = self.search(_plan(f, True), env, True)
            else:
                res = not self.search(_plan(f, False), env, False)
            self.memo[key] = res
            return res
        raise TypeError(f"not a formula: {f!r}")

    def _plain(self, f, env):
        v = f.var
        saved = env.get(v, None)
        has = v in env
        want = isinstance(f, Exists)
        result = not want
        for x in range(self.n):
            env[v] = x
            if self.ev(f.body, env) == want:
                result = want
                break
        if has:
            env[v] = saved
        else:
            env.pop(v, None)
        return result

    # constraint filtering -------------------------------------------------

    def _filter(self, atom, req, var, dom, env):
        """Values of ``var`` in ``dom`` satisfying atom == req (others bound)."""
        a, b = atom.a, atom.b
        other = b if a == var else a
        if a == b:
            if isinstance(atom, AtomEq):
                return dom if req else 0
            return 0 if req else dom
        w = env[other]
        if isinstance(atom, AtomEq):
            bit = 1 << w
            return dom & bit if req else dom & ~bit
        row = self.adj[w]
        return dom & row if req else dom & ~row

    def search(self, plan, env, want):
        """Is there an assignment of the block making the body equal ``want``?"""
        if self.n == 0:
            return False
        saved = {v: env[v] for v in plan.vars if v in env}
        for atom, req in plan.outer:
            if self.ev(atom, env) != req:
                return False
        doms = {}
        for v in plan.vars:
            d = self.full
            for atom, req in plan.unary[v]:
                d = self._filter(atom, req, v, d, env)
            if not d:
                return False
            doms[v] = d
        for v in plan.vars:
            env.pop(v, None)
        try:
            return self._solve(plan, env, want, doms, set(plan.vars))
        finally:
            for v in plan.vars:
                env.pop(v, None)
            env.update(saved)

    def _solve(self, plan, env, want, doms, free):
        if not free:
            return self.ev(plan.body, env) == want
        u = min(free, key=lambda v: (bin(doms[v]).count("1"), plan.vars.index(v)))
        free.discard(u)
        try:
            for val in _bits(doms[u]):
                env[u] = val
                new = self._propagate(plan, env, doms, free, u)
                if new is None:
                    continue
                if plan.clique and not self._hall(plan, new, free):
                    continue
                if self._solve(plan, env, want, new, free):
                    return True
            return False
        finally:
            env.pop(u, None)
            free.add(u)

    def _propagate(self, plan, env, doms, free, u):
        new = None
        for atom, req in plan.by_var[u]:
            a, b = atom.a, atom.b
            pend = [v for v in (a, b) if v in free]
            if not pend:
                if self.ev(atom, env) != req:
                    return None
                continue
            w = pend[0]
            if len(pend) == 2 and a != b:
                continue
            if new is None:
                new = dict(doms)
            d = self._filter(atom, req, w, new[w], env)
            if not d:
                return None
            new[w] = d
        return doms if new is None else new

    def _hall(self, plan, doms, free):
        rest = [v for v in plan.clique if v in free]
        if not rest:
            return True
        union = 0
        for v in rest:
            union |= doms[v]
        return bin(union).count("1") >= len(rest)


def _check_assignment(f, g, env):
    missing = free_vars(f) - set(env)
    if missing:
        raise UnassignedVariable(f"unassigned free variables {sorted(missing)}")
    for v, x in env.items():
        if not (isinstance(x, int) and 0 <= x < g.n):
            raise InputError(f"variable x{v} assigned to non-vertex {x!r}")


def evaluate(f: Formula, g, assignment=None, *, optimize=True) -> bool:
    """Truth value of ``f`` on ``g`` under the assignment (a dict var -> vertex)."""
    env = dict(assignment or {})
    _check_assignment(f, g, env)
    return _Evaluator(g, optimize).ev(f, env)


holds = evaluate


def eval_with_witnesses(f: Formula, g, prefix_witnesses, assignment=None) -> bool:
    """Evaluate ``f`` with some leading existential variables instantiated.

    ``f`` must start with an existential block; every witness variable must
    belong to it.  Remaining block variables are still searched.
    """
    witnesses = dict(prefix_witnesses or {})
    if not witnesses:
        return evaluate(f, g, assignment)
    if not isinstance(f, Exists):
        raise PreconditionError("formula does not begin with an existential block")
    _, vars_, body = _block(f)
    bad = [v for v in witnesses if v not in vars_]
    if bad:
        raise PreconditionError(f"witness variables {bad} are not in the leading existential block")
    env = dict(assignment or {})
    env.update(witnesses)
    rest = tuple(v for v in vars_ if v not in witnesses)
    inner = body
    for v in reversed(rest):
        inner = Exists(v, inner)
    _check_assignment(inner, g, env)
    return _Evaluator(g).ev(inner, env)
