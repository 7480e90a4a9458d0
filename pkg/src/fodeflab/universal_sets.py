"""Universal sets of existential-leaning sentences of bounded rank.

``build_universal(m)`` builds, layer by layer, a family of formulas over the
variables x_1..x_m (variable ids 0..m-1) such that every formula of
quantifier rank k <= m with exactly k bound variables, in which every
maximal alternation starts with an existential quantifier, has an
equivalent member.

Layer 0 holds the perfect DNFs over the atoms x_i ~ x_j, x_i = x_j (i < j).
Layer k is made from layer k-1 in four steps:

1. ``exists x_i A`` for A in layer k-1 with x_i not bound in A;
2. ``forall x_i A`` for A in the universal part of layer k-1, same condition;
3. monotone combinations of step-1 and step-2 formulas using at least one
   step-1 formula (existential part);
4. monotone combinations of step-2 formulas (universal part).

Monotone combinations are unbounded syntactically, so steps 3 and 4 are
enumerated up to equivalence on a finite test domain: every graph of order
at most ``proxy_order`` under every assignment of x_1..x_m.  Each member
carries its truth table on that domain (a bitmask), computed
compositionally from its construction.  Equivalence is therefore bounded
evidence, never a proof, and the proxy order is recorded with the set.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .config import parallel_map
from .errors import CapExceeded, PreconditionError
from .formula import (
    And, AtomAdj, AtomEq, Exists, Forall, Not, classify, conj,
    disj, free_vars, graph_axioms, quantifier_rank, render,
)
from .graph import Graph, graphs_up_to, isomorphic
from .semantics import evaluate

__all__ = [
    "Member", "UniversalSet", "Domain", "build_universal", "universality_check",
    "d_half_upper", "NotFound", "false_form", "perfect_dnfs", "in_class",
    "sample_sentences", "LATTICE_CAP",
]

LATTICE_CAP = 200_000
M_CAP = 2
PROXY_CAP = 6


def false_form():
    """The fixed representation of the false formula: x_1 = x_1 and x_1 != x_1."""
    return And((AtomEq(0, 0), Not(AtomEq(0, 0))))


def _atoms(m):
    out = []
    for i, j in itertools.combinations(range(m), 2):
        out += [AtomAdj(i, j), AtomEq(i, j)]
    return out


def perfect_dnfs(m):
    """All 2^(2^a) perfect DNFs over the a = 2 C(m,2) atoms, in a fixed order.

    The empty disjunction is replaced by the fixed false form.
    """
    atoms = _atoms(m)
    minterms = []
    for signs in itertools.product((True, False), repeat=len(atoms)):
        lits = [a if s else Not(a) for a, s in zip(atoms, signs)]
        minterms.append(conj(*lits) if lits else And(()))
    out = []
    for mask in range(1 << len(minterms)):
        chosen = [minterms[i] for i in range(len(minterms)) if (mask >> i) & 1]
        out.append(disj(*chosen) if chosen else false_form())
    return out


def in_class(f) -> bool:
    """Is every maximal alternation of f existential-first, with at most one switch?"""
    return any(c.kind == "AltSetExists" and c.m <= 1 for c in classify(f))


# --------------------------------------------------------------------------
# test domain

class Domain:
    """Points (graph, assignment of x_1..x_m) with bitmask truth tables."""

    def __init__(self, m, order):
        self.m = m
        self.order = order
        self.graphs = graphs_up_to(order)
        self.points = []
        index = {}
        for gi, g in enumerate(self.graphs):
            for a in itertools.product(range(g.n), repeat=m):
                index[(gi, a)] = len(self.points)
                self.points.append((gi, a))
        self.index = index
        self.full = (1 << len(self.points)) - 1
        # for each variable: masks of points that differ only in that variable
        self.groups = []
        for i in range(m):
            seen = {}
            for p, (gi, a) in enumerate(self.points):
                key = (gi, a[:i] + a[i + 1:])
                seen[key] = seen.get(key, 0) | (1 << p)
            self.groups.append(list(seen.values()))
        # one point per graph, used to read off the truth of a sentence
        self.anchor = [index[(gi, (0,) * m)] for gi in range(len(self.graphs))]
        self._atom_cache = {}

    def atom(self, f):
        hit = self._atom_cache.get(f)
        if hit is not None:
            return hit
        mask = 0
        for p, (gi, a) in enumerate(self.points):
            g = self.graphs[gi]
            x, y = a[f.a], a[f.b]
            if isinstance(f, AtomEq):
                ok = x == y
            else:
                ok = g.has_edge(x, y)
            if ok:
                mask |= 1 << p
        self._atom_cache[f] = mask
        return mask

    def qf(self, f):
        """Truth table of a quantifier-free formula."""
        if isinstance(f, (AtomAdj, AtomEq)):
            return self.atom(f)
        if isinstance(f, Not):
            return self.full & ~self.qf(f.f)
        if isinstance(f, And):
            out = self.full
            for a in f.args:
                out &= self.qf(a)
            return out
        out = 0
        for a in f.args:
            out |= self.qf(a)
        return out

    def exists(self, i, mask):
        out = 0
        for gm in self.groups[i]:
            if mask & gm:
                out |= gm
        return out

    def forall(self, i, mask):
        out = 0
        for gm in self.groups[i]:
            if mask & gm == gm:
                out |= gm
        return out

    def sentence_row(self, mask):
        """Truth per graph (tuple of bools) for a mask of a closed formula."""
        return tuple(bool((mask >> p) & 1) for p in self.anchor)


# --------------------------------------------------------------------------
# construction

@dataclass(frozen=True)
class Member:
    formula: object
    mask: int
    bound: frozenset
    existential: bool
    k: int
    step: str


@dataclass
class UniversalSet:
    m: int
    proxy_order: int
    dedup: bool
    layers: list = field(default_factory=list)  # layers[k] = list of Members
    counts: list = field(default_factory=list)  # per-layer construction counts

    def existential_part(self, k=None):
        k = self.m if k is None else k
        return [x for x in self.layers[k] if x.existential]

    def universal_part(self, k=None):
        k = self.m if k is None else k
        return [x for x in self.layers[k] if not x.existential]

    @property
    def sentences(self):
        """The members of the top layer: closed formulas of rank m."""
        return self.layers[self.m]

    def to_text(self) -> str:
        lines = [f"# universal set m={self.m} proxy_order={self.proxy_order}"]
        for k, layer in enumerate(self.layers):
            for x in layer:
                part = "E" if x.existential else "A"
                bound = ",".join(f"x{v}" for v in sorted(x.bound)) or "-"
                lines.append(f"{k}\t{part}\t{x.step}\t{bound}\t{render(x.formula)}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {"m": self.m, "proxy_order": self.proxy_order, "dedup": self.dedup,
                "layers": self.counts,
                "size": len(self.sentences)}


def _unique(items, dedup):
    if not dedup:
        return list(items)
    seen = set()
    out = []
    for x in items:
        key = (x.mask, x.bound)
        if key not in seen:
            seen.add(key)
            out.append(x)
    return out


def _lattice(gens, cap):
    """All lattice combinations of (mask, formula) generators, up to equal masks.

    Meets of generators first, then joins of those meets; the lattice
    generated by the generators is distributive, so this reaches all of it.
    """
    meets = {}
    for mask, f in gens:
        meets.setdefault(mask, f)
    frontier = list(meets.items())
    while frontier:
        new = []
        for mask, f in frontier:
            for gm, gf in gens:
                x = mask & gm
                if x not in meets:
                    meets[x] = conj(f, gf)
                    new.append((x, meets[x]))
                    if len(meets) > cap:
                        raise CapExceeded(f"monotone closure exceeded {cap} classes")
        frontier = new
    joins = {}
    for mask, f in meets.items():
        for r, fr in list(joins.items()):
            x = r | mask
            if x not in joins:
                joins[x] = disj(fr, f)
        joins.setdefault(mask, f)
        if len(joins) > cap:
            raise CapExceeded(f"monotone closure exceeded {cap} classes")
    return joins


def build_universal(m: int, proxy_order: int = 4, dedup: bool = True,
                    cap: int = LATTICE_CAP) -> UniversalSet:
    if not isinstance(m, int) or m < 1:
        raise PreconditionError("m must be a positive integer")
    if m > M_CAP:
        raise CapExceeded(f"universal sets are materialized only for m <= {M_CAP}")
    if not 1 <= proxy_order <= PROXY_CAP:
        raise CapExceeded(f"proxy order must lie in 1..{PROXY_CAP}")
    dom = Domain(m, proxy_order)
    out = UniversalSet(m, proxy_order, dedup)

    base = [Member(f, dom.qf(f), frozenset(), False, 0, "base") for f in perfect_dnfs(m)]
    layer0 = _unique(base, dedup)
    out.layers.append(layer0)
    out.counts.append({"k": 0, "base": len(base), "kept": len(layer0)})

    for k in range(1, m + 1):
        prev = out.layers[k - 1]
        step1, step2 = [], []
        for x in prev:
            for i in range(m):
                if i in x.bound:
                    continue
                b = x.bound | {i}
                step1.append(Member(Exists(i, x.formula), dom.exists(i, x.mask), b, True, k, "1"))
                if not x.existential:
                    step2.append(Member(Forall(i, x.formula), dom.forall(i, x.mask),
                                        b, False, k, "2"))
        n1, n2 = len(step1), len(step2)
        step1, step2 = _unique(step1, dedup), _unique(step2, dedup)
        layer = []
        c3 = c4 = 0
        groups = sorted({x.bound for x in step1 + step2}, key=sorted)
        for b in groups:
            e = [(x.mask, x.formula) for x in step1 if x.bound == b]
            a = [(x.mask, x.formula) for x in step2 if x.bound == b]
            lat_a = _lattice(a, cap) if a else {}
            lat_ea = _lattice(e + a, cap)
            for mask, f in lat_a.items():
                layer.append(Member(f, mask, b, False, k, "4"))
            c4 += len(lat_a)
            for mask, f in lat_ea.items():
                if mask not in lat_a:
                    layer.append(Member(f, mask, b, True, k, "3"))
                    c3 += 1
        out.layers.append(layer)
        out.counts.append({"k": k, "step1": n1, "step1_kept": len(step1), "step2": n2,
                           "step2_kept": len(step2), "step3": c3, "step4": c4,
                           "groups": len(groups), "kept": len(layer)})
    return out


# --------------------------------------------------------------------------
# checks

def _check_sample(f, m):
    if free_vars(f):
        raise PreconditionError(f"sample {render(f)} is not closed")
    if quantifier_rank(f) > m:
        raise PreconditionError(f"sample {render(f)} has rank above {m}")
    if not in_class(f):
        raise PreconditionError(f"sample {render(f)} is outside the existential-first class")


def universality_check(m: int, sample, proxy_order: int = 4, uset=None) -> dict:
    """Find, for each sample sentence, a member agreeing on all graphs of order <= proxy."""
    sample = list(sample)
    for f in sample:
        _check_sample(f, m)
    uset = uset or build_universal(m, proxy_order)
    dom = Domain(m, uset.proxy_order)
    by_row = {}
    for x in uset.sentences:
        by_row.setdefault(dom.sentence_row(x.mask), x)

    def row(f):
        return tuple(evaluate(f, g) for g in dom.graphs)

    rows = parallel_map(row, sample)
    results, misses = [], []
    for f, r in zip(sample, rows):
        hit = by_row.get(r)
        results.append({"sample": render(f), "match": render(hit.formula) if hit else None,
                        "part": ("E" if hit.existential else "A") if hit else None})
        if hit is None:
            misses.append(render(f))
    return {"m": m, "proxy_order": uset.proxy_order, "checked": len(sample),
            "results": results, "misses": misses, "ok": not misses}


@dataclass(frozen=True)
class NotFound:
    m_cap: int
    order_bound: int

    def to_json(self):
        return {"found": False, "m_cap": self.m_cap, "order_bound": self.order_bound}


def d_half_upper(g: Graph, m_cap: int = 2, order_bound: int = 5):
    """Least m <= m_cap with a member of U_m separating g among graphs of order <= bound.

    Returns a dict with the witness sentence (graph axioms added) or NotFound.
    The witness is re-checked with the model checker before it is returned.
    """
    if m_cap > M_CAP:
        raise CapExceeded(f"m_cap is limited to {M_CAP}")
    if g.n > order_bound:
        raise PreconditionError("graph order exceeds the order bound")
    if order_bound > PROXY_CAP:
        raise CapExceeded(f"order bound is limited to {PROXY_CAP}")
    for m in range(1, m_cap + 1):
        uset = build_universal(m, proxy_order=order_bound)
        dom = Domain(m, order_bound)
        gi = next(i for i, h in enumerate(dom.graphs) if h.n == g.n and isomorphic(g, h))
        target = tuple(i == gi for i in range(len(dom.graphs)))
        for x in uset.sentences:
            if dom.sentence_row(x.mask) != target:
                continue
            sentence = conj(graph_axioms(), x.formula) if m >= 2 else x.formula
            rivals = [h for i, h in enumerate(dom.graphs) if i != gi]
            if not evaluate(sentence, g) or any(evaluate(sentence, h) for h in rivals):
                raise PreconditionError("proxy truth table disagrees with the model checker")
            return {"found": True, "m": m, "sentence": render(sentence),
                    "order_bound": order_bound, "rivals_checked": len(rivals)}
    return NotFound(m_cap, order_bound)


# --------------------------------------------------------------------------
# random samples

def _random_qf(rng, vars_, depth=2):
    if depth == 0 or rng.random() < 0.4:
        if len(vars_) < 2:
            a = vars_[0]
            return AtomEq(a, a) if rng.random() < 0.5 else Not(AtomEq(a, a))
        a, b = rng.sample(vars_, 2)
        atom = AtomAdj(a, b) if rng.random() < 0.5 else AtomEq(a, b)
        return Not(atom) if rng.random() < 0.5 else atom
    parts = [_random_qf(rng, vars_, depth - 1) for _ in range(2)]
    return conj(*parts) if rng.random() < 0.5 else disj(*parts)


def _random_body(rng, m, bound, depth, allow_exists):
    """Random formula in which every alternation chain starts existentially."""
    free = [v for v in range(m) if v not in bound]
    if depth == 0 or not free or rng.random() < 0.25:
        vs = sorted(bound) or [0]
        return _random_qf(rng, vs)
    r = rng.random()
    if r < 0.2:
        parts = [_random_body(rng, m, bound, depth, allow_exists) for _ in range(2)]
        return conj(*parts) if rng.random() < 0.5 else disj(*parts)
    v = rng.choice(free)
    if allow_exists and r < 0.65:
        return Exists(v, _random_body(rng, m, bound | {v}, depth - 1, True))
    return Forall(v, _random_body(rng, m, bound | {v}, depth - 1, False))


def sample_sentences(m: int, count: int, seed: int = 0):
    """Seeded random closed formulas of rank <= m in the existential-first class."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        f = _random_body(rng, m, frozenset(), m, True)
        if not free_vars(f) and quantifier_rank(f) <= m and in_class(f):
            out.append(f)
    return out
