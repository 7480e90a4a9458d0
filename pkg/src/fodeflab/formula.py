"""First-order formulas over the graph vocabulary {adjacency, equality}.

Nodes are hash-consed: building the same formula twice returns the same
object, so equality is identity and large formulas built from shared pieces
are stored as DAGs.  Variables are small non-negative integers and are
printed as ``x0, x1, ...``.
"""

from __future__ import annotations

import itertools
import re
import weakref
from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    ArityError,
    FormulaSyntaxError,
    InputError,
    PreconditionError,
    UnboundVariableError,
)

__all__ = [
    "Formula", "AtomAdj", "AtomEq", "Not", "And", "Or", "Exists", "Forall",
    "TRUE", "FALSE", "PrefixClass",
    "conj", "disj", "implies", "iff", "exists", "forall", "exists_unique",
    "exists_in", "forall_in", "substitute", "free_vars", "all_vars",
    "parse", "render", "quantifier_rank", "alternation_number", "length",
    "nest", "to_nnf", "to_prenex", "is_prenex", "prefix", "classify",
    "qf_to_dnf", "naive_definition", "graph_axioms", "is_quantifier_free",
    "rename_apart", "rename_vars",
]


# --------------------------------------------------------------------------
# AST

_TABLE: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()


class Formula:
    __slots__ = ("__weakref__", "_fv", "_nest")

    def _init_cache(self):
        self._fv = None
        self._nest = None

    def __repr__(self):
        return render(self)

    def __reduce__(self):
        return (parse, (render(self), True))

    # convenience operators
    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return Not(self)


def _intern(cls, key, init):
    full = (cls,) + key
    obj = _TABLE.get(full)
    if obj is None:
        obj = object.__new__(cls)
        obj._init_cache()
        init(obj)
        _TABLE[full] = obj
    return obj


def _var(v):
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise InputError(f"variables are non-negative integers, got {v!r}")
    return v


class AtomAdj(Formula):
    __slots__ = ("a", "b")
    __match_args__ = ("a", "b")

    def __new__(cls, a, b):
        a, b = _var(a), _var(b)

        def init(o):
            o.a, o.b = a, b
        return _intern(cls, (a, b), init)


class AtomEq(Formula):
    __slots__ = ("a", "b")
    __match_args__ = ("a", "b")

    def __new__(cls, a, b):
        a, b = _var(a), _var(b)

        def init(o):
            o.a, o.b = a, b
        return _intern(cls, (a, b), init)


class Not(Formula):
    __slots__ = ("f",)
    __match_args__ = ("f",)

    def __new__(cls, f):
        if not isinstance(f, Formula):
            raise TypeError("Not expects a Formula")

        def init(o):
            o.f = f
        return _intern(cls, (f,), init)


class And(Formula):
    """n-ary conjunction; the empty conjunction is true."""

    __slots__ = ("args",)
    __match_args__ = ("args",)

    def __new__(cls, args=()):
        args = tuple(args)
        if not all(isinstance(a, Formula) for a in args):
            raise TypeError("And expects Formulas")

        def init(o):
            o.args = args
        return _intern(cls, args, init)


class Or(Formula):
    """n-ary disjunction; the empty disjunction is false."""

    __slots__ = ("args",)
    __match_args__ = ("args",)

    def __new__(cls, args=()):
        args = tuple(args)
        if not all(isinstance(a, Formula) for a in args):
            raise TypeError("Or expects Formulas")

        def init(o):
            o.args = args
        return _intern(cls, args, init)


class Exists(Formula):
    __slots__ = ("var", "body")
    __match_args__ = ("var", "body")

    def __new__(cls, var, body):
        var = _var(var)
        if not isinstance(body, Formula):
            raise TypeError("Exists expects a Formula body")

        def init(o):
            o.var, o.body = var, body
        return _intern(cls, (var, body), init)


class Forall(Formula):
    __slots__ = ("var", "body")
    __match_args__ = ("var", "body")

    def __new__(cls, var, body):
        var = _var(var)
        if not isinstance(body, Formula):
            raise TypeError("Forall expects a Formula body")

        def init(o):
            o.var, o.body = var, body
        return _intern(cls, (var, body), init)


TRUE = And(())
FALSE = Or(())

_QUANT = (Exists, Forall)


# --------------------------------------------------------------------------
# builders

def conj(*fs):
    """Flattening conjunction; a single argument is returned unchanged."""
    out = []
    for f in fs:
        if isinstance(f, And):
            out.extend(f.args)
        else:
            out.append(f)
    return out[0] if len(out) == 1 else And(out)


def disj(*fs):
    out = []
    for f in fs:
        if isinstance(f, Or):
            out.extend(f.args)
        else:
            out.append(f)
    return out[0] if len(out) == 1 else Or(out)


def implies(a, b):
    return disj(Not(a), b)


def iff(a, b):
    return And((disj(Not(a), b), disj(a, Not(b))))


def exists(vars_, body):
    for v in reversed(list(vars_)):
        body = Exists(v, body)
    return body


def forall(vars_, body):
    for v in reversed(list(vars_)):
        body = Forall(v, body)
    return body


def exists_in(v, guard, body):
    """Relativized quantifier: exists v (guard and body)."""
    return Exists(v, conj(guard, body))


def forall_in(v, guard, body):
    """Relativized quantifier: forall v (guard implies body)."""
    return Forall(v, implies(guard, body))


def exists_unique(v, body, spare=None):
    """Expand the uniqueness quantifier.

    exists v F  and  forall v forall w (F(v) and F(w) -> v = w); ``spare``
    is the extra variable (a fresh one is chosen when omitted).
    """
    if spare is None:
        spare = max(all_vars(body) | {v}) + 1
    other = substitute(body, {v: spare})
    unique = Forall(v, Forall(spare, implies(conj(body, other), AtomEq(v, spare))))
    return And((Exists(v, body), unique))


# --------------------------------------------------------------------------
# variables and substitution

def free_vars(f: Formula) -> frozenset:
    fv = f._fv
    if fv is not None:
        return fv
    match f:
        case AtomAdj(a, b) | AtomEq(a, b):
            fv = frozenset((a, b))
        case Not(g):
            fv = free_vars(g)
        case And(args) | Or(args):
            fv = frozenset().union(*(free_vars(a) for a in args)) if args else frozenset()
        case Exists(v, body) | Forall(v, body):
            fv = free_vars(body) - {v}
    f._fv = fv
    return fv


@lru_cache(maxsize=None)
def all_vars(f: Formula) -> frozenset:
    match f:
        case AtomAdj(a, b) | AtomEq(a, b):
            return frozenset((a, b))
        case Not(g):
            return all_vars(g)
        case And(args) | Or(args):
            return frozenset().union(*(all_vars(a) for a in args)) if args else frozenset()
        case Exists(v, body) | Forall(v, body):
            return all_vars(body) | {v}


def substitute(f: Formula, mapping: dict) -> Formula:
    """Rename free variables per ``mapping``, renaming bound ones to avoid capture."""
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping:
        return f
    avoid = set(mapping.values()) | set(mapping) | set(all_vars(f))
    counter = itertools.count(max(avoid) + 1)
    memo = {}

    def go(g, m):
        key = (g, tuple(sorted(m.items())))
        hit = memo.get(key)
        if hit is not None:
            return hit
        relevant = {k: v for k, v in m.items() if k in free_vars(g)}
        if not relevant:
            res = g
        else:
            match g:
                case AtomAdj(a, b):
                    res = AtomAdj(relevant.get(a, a), relevant.get(b, b))
                case AtomEq(a, b):
                    res = AtomEq(relevant.get(a, a), relevant.get(b, b))
                case Not(h):
                    res = Not(go(h, relevant))
                case And(args):
                    res = And(go(a, relevant) for a in args)
                case Or(args):
                    res = Or(go(a, relevant) for a in args)
                case Exists(v, body) | Forall(v, body):
                    inner = {k: x for k, x in relevant.items() if k != v}
                    if v in inner.values():
                        nv = next(counter)
                        inner[v] = nv
                        v = nv
                    res = type(g)(v, go(body, inner))
        memo[key] = res
        return res

    return go(f, mapping)


def rename_apart(f: Formula, start=None) -> Formula:
    """Give every quantifier occurrence its own fresh variable."""
    fv = free_vars(f)
    if start is None:
        start = max(all_vars(f) | {-1}) + 1
    counter = itertools.count(start)

    def go(g, m):
        match g:
            case AtomAdj(a, b):
                return AtomAdj(m.get(a, a), m.get(b, b))
            case AtomEq(a, b):
                return AtomEq(m.get(a, a), m.get(b, b))
            case Not(h):
                return Not(go(h, m))
            case And(args):
                return And(go(a, m) for a in args)
            case Or(args):
                return Or(go(a, m) for a in args)
            case Exists(v, body) | Forall(v, body):
                nv = next(counter)
                return type(g)(nv, go(body, {**m, v: nv}))

    del fv
    return go(f, {})


def is_quantifier_free(f: Formula) -> bool:
    return quantifier_rank(f) == 0


# --------------------------------------------------------------------------
# nest sequences, rank, alternation, length

# For every node we keep (qr, bestE, bestA, eps): bestE/bestA is the largest
# alternation count among nest sequences starting with that quantifier (-1 if
# there is none) and eps records whether the empty sequence occurs.

def _nest_info(f: Formula):
    info = f._nest
    if info is not None:
        return info
    match f:
        case AtomAdj() | AtomEq():
            info = (0, -1, -1, True)
        case Not(g):
            q, e, a, eps = _nest_info(g)
            info = (q, a, e, eps)
        case And(args) | Or(args):
            if not args:
                info = (0, -1, -1, True)
            else:
                parts = [_nest_info(a) for a in args]
                info = (max(p[0] for p in parts), max(p[1] for p in parts),
                        max(p[2] for p in parts), any(p[3] for p in parts))
        case Exists(_, body):
            q, e, a, eps = _nest_info(body)
            best = max(e, a + 1 if a >= 0 else -1, 0 if eps else -1)
            info = (q + 1, best, -1, False)
        case Forall(_, body):
            q, e, a, eps = _nest_info(body)
            best = max(a, e + 1 if e >= 0 else -1, 0 if eps else -1)
            info = (q + 1, -1, best, False)
    f._nest = info
    return info


def quantifier_rank(f: Formula) -> int:
    return _nest_info(f)[0]


def alternation_number(f: Formula) -> int:
    _, e, a, eps = _nest_info(f)
    return max(e, a, 0)


def nest(f: Formula) -> set:
    """The set of quantifier nesting strings, e.g. {'EA', 'E'} (small inputs only)."""
    match f:
        case AtomAdj() | AtomEq():
            return {""}
        case Not(g):
            flip = str.maketrans("EA", "AE")
            return {s.translate(flip) for s in nest(g)}
        case And(args) | Or(args):
            return set().union(*(nest(a) for a in args)) if args else {""}
        case Exists(_, body):
            return {"E" + s for s in nest(body)}
        case Forall(_, body):
            return {"A" + s for s in nest(body)}


@lru_cache(maxsize=None)
def length(f: Formula) -> int:
    """Symbol count: variables, relation symbols, connectives, quantifiers.

    Parentheses are not counted; an n-ary conjunction or disjunction counts
    n-1 connective symbols (the empty one counts as a single constant).
    """
    match f:
        case AtomAdj() | AtomEq():
            return 3
        case Not(g):
            return 1 + length(g)
        case And(args) | Or(args):
            if not args:
                return 1
            return sum(length(a) for a in args) + len(args) - 1
        case Exists(_, body) | Forall(_, body):
            return 2 + length(body)


# --------------------------------------------------------------------------
# prefix classes

@dataclass(frozen=True, order=True)
class PrefixClass:
    """One of Sigma, Pi, AltSet, AltSetExists, AltSetForall with index m."""

    kind: str
    m: int

    KINDS = ("Sigma", "Pi", "AltSet", "AltSetExists", "AltSetForall")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown prefix class {self.kind!r}")
        if self.m < 0:
            raise ValueError("class index must be non-negative")

    def __str__(self):
        return f"{self.kind}_{self.m}"


def prefix(f: Formula):
    """Return (blocks, matrix) for a prenex formula, blocks as [(q, [vars])]."""
    blocks = []
    while isinstance(f, _QUANT):
        q = "E" if isinstance(f, Exists) else "A"
        if blocks and blocks[-1][0] == q:
            blocks[-1][1].append(f.var)
        else:
            blocks.append((q, [f.var]))
        f = f.body
    return blocks, f


def is_prenex(f: Formula) -> bool:
    return quantifier_rank(prefix(f)[1]) == 0


def classify(f: Formula) -> set:
    """Minimal memberships in the alternation classes (and Sigma/Pi if prenex).

    Membership is computed from the nest sequences, which are invariant under
    conversion to negation normal form.
    """
    q, e, a, eps = _nest_info(f)
    alt = max(e, a, 0)
    out = {PrefixClass("AltSet", alt)}
    # an "exists-formula" has no maximal-alternation sequence starting with a
    # universal quantifier; quantifier-free formulas count as both kinds
    ex_ok = a < alt or a < 0
    fa_ok = e < alt or e < 0
    out.add(PrefixClass("AltSetExists", alt if ex_ok else alt + 1))
    out.add(PrefixClass("AltSetForall", alt if fa_ok else alt + 1))
    if is_prenex(f):
        blocks, _ = prefix(f)
        if not blocks:
            out |= {PrefixClass("Sigma", 0), PrefixClass("Pi", 0)}
        else:
            b = len(blocks)
            first = blocks[0][0]
            out.add(PrefixClass("Sigma", b if first == "E" else b + 1))
            out.add(PrefixClass("Pi", b if first == "A" else b + 1))
    return out


# --------------------------------------------------------------------------
# normal forms

@lru_cache(maxsize=None)
def _nnf(f: Formula, neg: bool) -> Formula:
    match f:
        case AtomAdj() | AtomEq():
            return Not(f) if neg else f
        case Not(g):
            return _nnf(g, not neg)
        case And(args):
            parts = [_nnf(a, neg) for a in args]
            return Or(parts) if neg else And(parts)
        case Or(args):
            parts = [_nnf(a, neg) for a in args]
            return And(parts) if neg else Or(parts)
        case Exists(v, body):
            return (Forall if neg else Exists)(v, _nnf(body, neg))
        case Forall(v, body):
            return (Exists if neg else Forall)(v, _nnf(body, neg))


def to_nnf(f: Formula) -> Formula:
    """Push negations down to atoms (De Morgan and quantifier duality)."""
    return _nnf(f, False)


def _flip(q):
    return "A" if q == "E" else "E"


class _Prenexer:
    """Pull quantifiers out of an NNF formula whose bound variables are distinct.

    For every node both variants (first block existential / universal) are
    computed; connectives merge their children's blocks turn by turn.
    Universal blocks of a conjunction and existential blocks of a disjunction
    are shared (renamed to common variables), which keeps prefix lengths from
    growing with the number of conjuncts.
    """

    def __init__(self, start):
        self.counter = itertools.count(start)
        self.memo = {}

    def run(self, f):
        v_e = self.variant(f, "E")
        v_a = self.variant(f, "A")
        return v_e if len(v_e[0]) <= len(v_a[0]) else v_a

    def variant(self, f, q):
        key = (f, q)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        res = self._variant(f, q)
        self.memo[key] = res
        return res

    def _variant(self, f, q):
        match f:
            case Exists(v, body) | Forall(v, body):
                mine = "E" if isinstance(f, Exists) else "A"
                best = None
                for start in (mine, _flip(mine)):
                    blocks, matrix = self.variant(body, start)
                    if blocks and blocks[0][0] == mine:
                        blocks = [(mine, (v,) + blocks[0][1])] + list(blocks[1:])
                    else:
                        blocks = [(mine, (v,))] + list(blocks)
                    if best is None or len(blocks) < len(best[0]):
                        best = (blocks, matrix)
                return best
            case And(args) | Or(args):
                if quantifier_rank(f) == 0:
                    return [], f
                shared = "A" if isinstance(f, And) else "E"
                kids = []
                for a in args:
                    own = self.variant(a, q)
                    other = self.variant(a, _flip(q))
                    # finishing turn when merging from a q-turn
                    def turns(var):
                        bl = var[0]
                        if not bl:
                            return 0
                        return len(bl) + (0 if bl[0][0] == q else 1)
                    kids.append(own if turns(own) <= turns(other) else other)
                return self._merge(type(f), kids, q, shared)
            case _:
                return [], f

    def _merge(self, cls, kids, q, shared):
        pending = [list(bl) for bl, _ in kids]
        renames = [dict() for _ in kids]
        out = []
        turn = q
        while any(pending):
            pulled = []
            for i, bl in enumerate(pending):
                if bl and bl[0][0] == turn:
                    pulled.append((i, bl.pop(0)[1]))
            if pulled:
                if turn == shared:
                    width = max(len(vs) for _, vs in pulled)
                    common = tuple(next(self.counter) for _ in range(width))
                    for i, vs in pulled:
                        for old, new in zip(vs, common):
                            renames[i][old] = new
                    vars_ = common
                else:
                    vars_ = tuple(v for _, vs in pulled for v in vs)
                if out and out[-1][0] == turn:
                    out[-1] = (turn, out[-1][1] + vars_)
                else:
                    out.append((turn, vars_))
            turn = _flip(turn)
        matrices = [substitute(m, ren) if ren else m
                    for (_, m), ren in zip(kids, renames)]
        return out, cls(matrices)


def to_prenex(f: Formula) -> Formula:
    """Equivalent prenex formula (closed input).

    The number of quantifier blocks is minimised by merging connective
    children turn by turn; prefix variables are renamed to the lowest
    indices 0, 1, 2, ... in prefix order.
    """
    if free_vars(f):
        raise PreconditionError(
            f"to_prenex needs a closed formula; free variables {sorted(free_vars(f))}")
    g = rename_apart(to_nnf(f))
    start = max(all_vars(g) | {-1}) + 1
    blocks, matrix = _Prenexer(start).run(g)
    order = [v for _, vs in blocks for v in vs]
    # rename in two steps so the targets never clash with live names
    top = max(set(order) | all_vars(matrix) | {-1}) + 1
    tmp = {v: top + i for i, v in enumerate(order)}
    matrix = substitute(matrix, tmp)
    final = {top + i: i for i in range(len(order))}
    matrix = substitute(matrix, final)
    out = matrix
    pos = len(order)
    for qt, vs in reversed(blocks):
        for _ in reversed(vs):
            pos -= 1
            out = (Exists if qt == "E" else Forall)(pos, out)
    return out


def _atoms(f, acc):
    match f:
        case AtomAdj(a, b):
            acc.add(("adj", min(a, b), max(a, b)))
        case AtomEq(a, b):
            acc.add(("eq", min(a, b), max(a, b)))
        case Not(g):
            _atoms(g, acc)
        case And(args) | Or(args):
            for x in args:
                _atoms(x, acc)
        case _:
            raise PreconditionError("qf_to_dnf needs a quantifier-free formula")
    return acc


def _prop_eval(f, val):
    match f:
        case AtomAdj(a, b):
            return val[("adj", min(a, b), max(a, b))]
        case AtomEq(a, b):
            return val[("eq", min(a, b), max(a, b))]
        case Not(g):
            return not _prop_eval(g, val)
        case And(args):
            return all(_prop_eval(x, val) for x in args)
        case Or(args):
            return any(_prop_eval(x, val) for x in args)


def _atom_formula(atom):
    kind, a, b = atom
    return AtomAdj(a, b) if kind == "adj" else AtomEq(a, b)


def qf_to_dnf(f: Formula) -> Formula:
    """Perfect DNF over the atoms of a quantifier-free formula.

    Atoms are symmetric (x~y and y~x are one atom).  An unsatisfiable input
    yields the fixed false form ``x = x and not x = x`` on its lowest variable.
    """
    if quantifier_rank(f) != 0:
        raise PreconditionError("qf_to_dnf needs a quantifier-free formula")
    atoms = sorted(_atoms(f, set()))
    terms = []
    for bits in itertools.product((True, False), repeat=len(atoms)):
        val = dict(zip(atoms, bits))
        if _prop_eval(f, val):
            lits = [_atom_formula(at) if b else Not(_atom_formula(at))
                    for at, b in zip(atoms, bits)]
            terms.append(conj(*lits) if lits else TRUE)
    if not terms:
        v = min(all_vars(f)) if all_vars(f) else 0
        return And((AtomEq(v, v), Not(AtomEq(v, v))))
    return terms[0] if len(terms) == 1 else Or(terms)


# --------------------------------------------------------------------------
# naive definition

def graph_axioms(x=0, y=1) -> Formula:
    """forall x (not x~x and forall y (x~y -> y~x))."""
    return Forall(x, And((Not(AtomAdj(x, x)),
                          Forall(y, implies(AtomAdj(x, y), AtomAdj(y, x))))))


def naive_definition(g) -> Formula:
    """The sentence naming every vertex and every (non-)edge, plus graph axioms.

    exists x0..x_{n-1} forall x_n: vertices distinct, every vertex is one of
    them, and the adjacency pattern is exactly that of ``g``.
    """
    n = g.n
    if n == 0:
        raise PreconditionError("naive_definition needs a non-empty graph")
    parts = [Not(AtomEq(i, j)) for i, j in itertools.combinations(range(n), 2)]
    parts.append(disj(*[AtomEq(n, i) for i in range(n)]))
    for i, j in itertools.combinations(range(n), 2):
        atom = AtomAdj(i, j)
        parts.append(atom if g.has_edge(i, j) else Not(atom))
    body = exists(range(n), Forall(n, conj(*parts)))
    return And((graph_axioms(), body))


# --------------------------------------------------------------------------
# text format

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")
_XVAR = re.compile(r"x(\d+)\Z")
_KEYWORDS = {"adj", "=", "not", "and", "or", "exists", "forall", "implies",
             "iff", "existsU", "existsIn", "forallIn"}


def _tokenize(text):
    pos = 0
    out = []
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:]
            if rest.strip():
                raise FormulaSyntaxError("unexpected character", pos)
            break
        start = m.start(m.lastindex)
        out.append((m.group(m.lastindex), start))
        pos = m.end()
    return out


def _read_sexpr(tokens, text_len):
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise FormulaSyntaxError("unexpected end of input", text_len)
        tok, at = tokens[pos]
        pos += 1
        if tok == "(":
            items = []
            while True:
                if pos >= len(tokens):
                    raise FormulaSyntaxError("unexpected end of input", text_len)
                if tokens[pos][0] == ")":
                    pos += 1
                    return (items, at)
                items.append(read())
        if tok == ")":
            raise FormulaSyntaxError("unexpected ')'", at)
        return (tok, at)

    tree = read()
    if pos != len(tokens):
        raise FormulaSyntaxError("trailing input", tokens[pos][1])
    return tree


class _VarNames:
    def __init__(self, tree):
        used = set()
        self._collect(tree, used)
        self.next = max(used | {-1}) + 1
        self.names = {}

    def _collect(self, node, used):
        item, _ = node
        if isinstance(item, list):
            for sub in item:
                self._collect(sub, used)
        else:
            m = _XVAR.match(item)
            if m:
                used.add(int(m.group(1)))

    def __call__(self, name, at):
        if name in _KEYWORDS:
            raise FormulaSyntaxError(f"keyword {name!r} used as a variable", at)
        m = _XVAR.match(name)
        if m:
            return int(m.group(1))
        if name not in self.names:
            self.names[name] = self.next
            self.next += 1
        return self.names[name]


def parse(text: str, allow_free: bool = False) -> Formula:
    """Parse the parenthesised prefix syntax; sugar is expanded on the fly."""
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaSyntaxError("empty input", 0)
    tree = _read_sexpr(tokens, len(text))
    names = _VarNames(tree)
    base = names.next + 10**6
    spare = [base]

    def fresh():
        spare[0] += 1
        return spare[0]

    def var(node, scope):
        item, at = node
        if isinstance(item, list):
            raise FormulaSyntaxError("expected a variable", at)
        v = names(item, at)
        if v not in scope and not allow_free:
            raise UnboundVariableError(f"unbound variable {item!r} at position {at}")
        return v

    def build(node, scope):
        item, at = node
        if not isinstance(item, list):
            raise FormulaSyntaxError(f"expected '(' but found {item!r}", at)
        if not item:
            raise FormulaSyntaxError("empty form", at)
        head, hat = item[0]
        if isinstance(head, list):
            raise FormulaSyntaxError("operator expected", hat)
        args = item[1:]

        def need(k):
            if len(args) != k:
                raise ArityError(f"{head!r} takes {k} arguments, got {len(args)}", at)

        if head in ("adj", "="):
            need(2)
            a, b = var(args[0], scope), var(args[1], scope)
            return AtomAdj(a, b) if head == "adj" else AtomEq(a, b)
        if head == "not":
            need(1)
            return Not(build(args[0], scope))
        if head in ("and", "or"):
            parts = [build(a, scope) for a in args]
            return And(parts) if head == "and" else Or(parts)
        if head == "implies":
            need(2)
            return implies(build(args[0], scope), build(args[1], scope))
        if head == "iff":
            need(2)
            return iff(build(args[0], scope), build(args[1], scope))
        if head in ("exists", "forall", "existsU"):
            need(2)
            v = names(_leaf(args[0]), args[0][1])
            body = build(args[1], scope | {v})
            if head == "exists":
                return Exists(v, body)
            if head == "forall":
                return Forall(v, body)
            return exists_unique(v, body, fresh())
        if head in ("existsIn", "forallIn"):
            need(3)
            v = names(_leaf(args[0]), args[0][1])
            guard = build(args[1], scope | {v})
            body = build(args[2], scope | {v})
            return exists_in(v, guard, body) if head == "existsIn" else forall_in(v, guard, body)
        raise FormulaSyntaxError(f"unknown operator {head!r}", hat)

    f = build(tree, frozenset())
    if spare[0] > base:
        # compact the helper variables introduced by uniqueness expansion
        f = _compact_spares(f, base, names.next)
    return f


def _leaf(node):
    item, at = node
    if isinstance(item, list):
        raise FormulaSyntaxError("expected a variable", at)
    return item


def _compact_spares(f, base, target):
    big = sorted(v for v in all_vars(f) if v > base)
    mapping = {v: target + i for i, v in enumerate(big)}
    return rename_vars(f, mapping)


def rename_vars(f: Formula, mapping: dict) -> Formula:
    """Rename every occurrence (bound or free); targets must be unused."""
    memo = {}

    def go(g):
        hit = memo.get(g)
        if hit is not None:
            return hit
        match g:
            case AtomAdj(a, b):
                res = AtomAdj(mapping.get(a, a), mapping.get(b, b))
            case AtomEq(a, b):
                res = AtomEq(mapping.get(a, a), mapping.get(b, b))
            case Not(h):
                res = Not(go(h))
            case And(args):
                res = And(go(a) for a in args)
            case Or(args):
                res = Or(go(a) for a in args)
            case Exists(v, body) | Forall(v, body):
                res = type(g)(mapping.get(v, v), go(body))
        memo[g] = res
        return res

    return go(f)


def render(f: Formula) -> str:
    """Canonical text form; parse(render(f)) is f."""
    out = []

    def go(g):
        match g:
            case AtomAdj(a, b):
                out.append(f"(adj x{a} x{b})")
            case AtomEq(a, b):
                out.append(f"(= x{a} x{b})")
            case Not(h):
                out.append("(not ")
                go(h)
                out.append(")")
            case And(args) | Or(args):
                out.append("(and" if isinstance(g, And) else "(or")
                for a in args:
                    out.append(" ")
                    go(a)
                out.append(")")
            case Exists(v, body) | Forall(v, body):
                out.append(f"({'exists' if isinstance(g, Exists) else 'forall'} x{v} ")
                go(body)
                out.append(")")

    go(f)
    return "".join(out)
