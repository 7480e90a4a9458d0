"""Turing machines with a one-way tape, their simulator, and their compilation
into a first-order sentence over graphs.

The sentence ``A_M`` says: there are designated vertices
``x, x', t, t', z, s1..sk, a, b, B, L, H`` such that the neighbourhoods of
``x`` and ``t`` are linearly ordered by ladders (the sets X' and T'), the
neighbourhood Z of ``z`` is a grid of cells (x, t), and the adjacencies of
the cells with ``a, b, B, L, H`` and of the times with ``s1..sk`` spell out a
halting computation of M started on the empty word.

Formulas are built with nested Python closures: a builder receives the depth
``d`` of the next free bound variable and every quantifier binds variable
``base + d``.  Sibling subformulas therefore reuse the same small set of
variable numbers, and uniqueness quantifiers can instantiate their body
twice at different depths without any renaming.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field

from .errors import InputError, InvariantViolation, PreconditionError, Timeout
from .formula import (
    FALSE, TRUE, AtomAdj, AtomEq, Exists, Forall, Formula, Not, alternation_number,
    classify, conj, disj, graph_axioms, iff, implies, length, prefix, quantifier_rank,
    to_prenex,
)
from .graph import Graph
from .semantics import eval_with_witnesses, evaluate

__all__ = [
    "Instruction", "TuringMachine", "ComputationTrace", "CompiledSentence",
    "parse_tm", "run_tm", "compile_tm", "compile_prenex", "build_model",
    "verify_model", "ladder_graph", "coor_graph", "order_gadget", "coor_gadget",
    "leq_formula", "ladder_formula", "coor_formulas", "CORPUS", "corpus_machine", "SYMBOLS", "DEFAULT_MAX_STEPS",
]

SYMBOLS = ("L", "a", "b", "B")
KINDS = ("write", "right", "left")
DEFAULT_MAX_STEPS = 10_000


# --------------------------------------------------------------------------
# machines

@dataclass(frozen=True)
class Instruction:
    state: int
    read: str
    kind: str
    next: int
    write: str | None = None

    def text(self):
        if self.kind == "write":
            return f"s{self.state} {self.read} write {self.write} s{self.next}"
        return f"s{self.state} {self.read} {self.kind} s{self.next}"


@dataclass(frozen=True)
class TuringMachine:
    """States are 1..k; s1 is initial and sk final.

    The instruction table may be partial.  A machine that reaches a state
    and symbol without an instruction is reported as stuck by ``run_tm``.
    """

    k: int
    instructions: tuple

    def __post_init__(self):
        self.validate()

    @property
    def table(self):
        return {(ins.state, ins.read): ins for ins in self.instructions}

    def validate(self, complete=False):
        if self.k < 2:
            raise InputError("a machine needs at least two states")
        seen = set()
        for ins in self.instructions:
            if not 1 <= ins.state <= self.k or not 1 <= ins.next <= self.k:
                raise InputError(f"state out of range in '{ins.text()}'")
            if ins.state == self.k:
                raise InputError(f"the final state s{self.k} has an instruction")
            if ins.read not in SYMBOLS:
                raise InputError(f"unknown symbol {ins.read!r}")
            if ins.kind not in KINDS:
                raise InputError(f"unknown instruction kind {ins.kind!r}")
            if ins.kind == "write":
                if ins.write not in SYMBOLS:
                    raise InputError(f"unknown symbol {ins.write!r}")
                if (ins.read == "L") != (ins.write == "L"):
                    raise InputError("L may only be overwritten by L, and only L by L")
            if ins.kind == "left" and ins.read == "L":
                raise InputError("no left move is allowed on the left end marker")
            key = (ins.state, ins.read)
            if key in seen:
                raise InputError(f"two instructions for s{ins.state} reading {ins.read}")
            seen.add(key)
        if complete:
            missing = [(i, al) for i in range(1, self.k) for al in SYMBOLS
                       if (i, al) not in seen]
            if missing:
                raise InputError(f"instruction table is incomplete: {missing[:4]}")
        return True

    def to_text(self):
        lines = [f"states {self.k}"] + [ins.text() for ins in self.instructions]
        return "\n".join(lines) + "\n"

    def family(self, kind):
        return [ins for ins in self.instructions if ins.kind == kind]


_STATE = re.compile(r"s(\d+)\Z")


def _state(tok, lineno):
    m = _STATE.match(tok)
    if not m:
        raise InputError(f"line {lineno}: expected a state like s1, got {tok!r}")
    return int(m.group(1))


def parse_tm(text: str) -> TuringMachine:
    """Read the one-instruction-per-line format; ``#`` starts a comment.

    An optional ``states K`` line fixes the state count, otherwise it is the
    largest state index mentioned.
    """
    declared = None
    instructions = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "states":
            if len(toks) != 2 or not toks[1].isdigit():
                raise InputError(f"line {lineno}: expected 'states K'")
            declared = int(toks[1])
            continue
        if len(toks) == 5 and toks[2] == "write":
            instructions.append(Instruction(_state(toks[0], lineno), toks[1], "write",
                                            _state(toks[4], lineno), toks[3]))
        elif len(toks) == 4 and toks[2] in ("right", "left"):
            instructions.append(Instruction(_state(toks[0], lineno), toks[1], toks[2],
                                            _state(toks[3], lineno)))
        else:
            raise InputError(f"line {lineno}: cannot read instruction {line!r}")
    if not instructions and declared is None:
        raise InputError("empty machine description")
    k = declared if declared is not None else max(
        max(i.state, i.next) for i in instructions)
    return TuringMachine(k, tuple(instructions))


@dataclass
class ComputationTrace:
    """Configurations at times 0..m; cells are numbered from 1 (cell 1 holds L)."""

    states: list
    heads: list
    tapes: list
    m: int
    omega: int

    def to_json(self):
        return {"m": self.m, "omega": self.omega,
                "steps": [{"time": i, "state": s, "head": h, "tape": "".join(tp)}
                          for i, (s, h, tp) in enumerate(zip(self.states, self.heads,
                                                              self.tapes))]}


def run_tm(m: TuringMachine, max_steps: int = DEFAULT_MAX_STEPS) -> ComputationTrace:
    """Simulate m on the empty word; raise Timeout after max_steps instructions."""
    table = m.table
    tape = ["L", "B"]
    state, head = 1, 2
    states, heads, tapes = [state], [head], [tuple(tape)]
    steps = 0
    while state != m.k:
        if steps >= max_steps:
            raise Timeout(steps)
        sym = tape[head - 1]
        ins = table.get((state, sym))
        if ins is None:
            raise PreconditionError(f"machine is stuck: no instruction for s{state} reading {sym}")
        if ins.kind == "write":
            tape[head - 1] = ins.write
        elif ins.kind == "right":
            head += 1
            if head > len(tape):
                tape.append("B")
        else:
            head -= 1
        state = ins.next
        steps += 1
        states.append(state)
        heads.append(head)
        tapes.append(tuple(tape))
    omega = max(heads)
    tapes = [tp[:omega] + ("B",) * (omega - len(tp)) for tp in tapes]
    return ComputationTrace(states, heads, tapes, steps, omega)


# --------------------------------------------------------------------------
# formula building blocks

class _Builder:
    """Quantifier helpers binding variable ``base + d`` at depth d."""

    def __init__(self, base):
        self.base = base

    def ex(self, d, body):
        v = self.base + d
        return Exists(v, body(v, d + 1))

    def fa(self, d, body):
        v = self.base + d
        return Forall(v, body(v, d + 1))

    def ex_in(self, d, c, body):
        return self.ex(d, lambda v, e: conj(AtomAdj(v, c), body(v, e)))

    def fa_in(self, d, c, body):
        return self.fa(d, lambda v, e: implies(AtomAdj(v, c), body(v, e)))

    def ex_unique(self, d, body):
        """exists v F(v) and forall v, w (F(v) and F(w) -> v = w)."""
        v, w = self.base + d, self.base + d + 1
        unique = Forall(v, Forall(w, implies(conj(body(v, d + 2), body(w, d + 2)),
                                             AtomEq(v, w))))
        return conj(Exists(v, body(v, d + 1)), unique)

    def ex_unique_in(self, d, c, body):
        return self.ex_unique(d, lambda v, e: conj(AtomAdj(v, c), body(v, e)))

    # order on the neighbourhood of a ladder center, read through its partner

    def leq(self, y1, y2, cp, d):
        return self.fa_in(d, cp, lambda z, e: implies(AtomAdj(y1, z), AtomAdj(y2, z)))

    def last(self, v, cp, d):
        return self.fa_in(d, cp, lambda z, e: AtomAdj(v, z))

    def first(self, v, cp, d):
        return self.fa_in(d, cp, lambda z1, e: self.fa_in(
            e, cp, lambda z2, f: implies(conj(AtomAdj(v, z1), AtomAdj(v, z2)),
                                         AtomEq(z1, z2))))

    def second(self, v, cp, d):
        two = self.ex_in(d, cp, lambda z1, e: self.ex_in(
            e, cp, lambda z2, f: conj(Not(AtomEq(z1, z2)), AtomAdj(v, z1), AtomAdj(v, z2))))
        at_most = self.fa_in(d, cp, lambda z1, e: self.fa_in(
            e, cp, lambda z2, f: self.fa_in(
                f, cp, lambda z3, g: implies(
                    conj(AtomAdj(v, z1), AtomAdj(v, z2), AtomAdj(v, z3)),
                    disj(AtomEq(z1, z2), AtomEq(z1, z3), AtomEq(z2, z3))))))
        return conj(two, at_most)

    def succ(self, y, u, c, cp, d):
        """u is the successor of y in the order on N(c); universal, rank 2."""
        return conj(self.leq(y, u, cp, d), Not(AtomEq(y, u)),
                    self.fa_in(d, c, lambda w, e: disj(self.leq(w, y, cp, e),
                                                       self.leq(u, w, cp, e))))


def order_gadget(bld: _Builder, x, xp, d=0) -> Formula:
    """P(x, x'): the neighbourhood X of x is ordered by inclusion of traces on X'."""
    b = bld
    p1 = conj(
        Not(AtomAdj(x, xp)),
        b.fa(d, lambda y, e: Not(conj(AtomAdj(y, x), AtomAdj(y, xp)))),
        b.fa_in(d, x, lambda y1, e: b.fa_in(e, x, lambda y2, f: Not(AtomAdj(y1, y2)))),
        b.fa_in(d, xp, lambda y1, e: b.fa_in(e, xp, lambda y2, f: Not(AtomAdj(y1, y2)))),
    )
    p2 = b.fa_in(d, x, lambda y, e: b.ex_in(e, xp, lambda z, f: AtomAdj(y, z)))
    p3 = b.ex_in(d, x, lambda y, e: b.ex_unique_in(e, xp, lambda z, f: AtomAdj(y, z)))
    p4 = b.ex_in(d, x, lambda y, e: b.fa_in(e, xp, lambda z, f: AtomAdj(y, z)))
    p5 = b.fa_in(d, x, lambda y1, e: b.fa_in(e, x, lambda y2, f: disj(
        b.leq(y1, y2, xp, f), b.leq(y2, y1, xp, f))))
    p6 = b.fa_in(d, x, lambda y1, e: b.fa_in(e, x, lambda y2, f: implies(
        Not(AtomEq(y1, y2)),
        b.ex_in(f, xp, lambda z, g: iff(AtomAdj(y1, z), Not(AtomAdj(y2, z)))))))
    p7 = b.fa_in(d, x, lambda y, e: implies(
        b.ex_in(e, xp, lambda z, f: Not(AtomAdj(y, z))),
        b.ex_in(e, x, lambda yp, f: b.ex_unique_in(
            f, xp, lambda z, g: conj(AtomAdj(yp, z), Not(AtomAdj(y, z)))))))
    p8 = b.fa_in(d, x, lambda y, e: disj(
        b.ex_unique_in(e, xp, lambda z, f: AtomAdj(y, z)),
        b.ex_in(e, x, lambda ym, f: b.ex_unique_in(
            f, xp, lambda z, g: conj(AtomAdj(y, z), Not(AtomAdj(ym, z)))))))
    return conj(p1, p2, p3, p4, p5, p6, p7, p8)


def coor_parts(bld: _Builder, x, xp, t, tp, z, extra=(), d=0) -> dict:
    """Conjuncts C1..C4 of the coordinatization of N(z) by N(x) x N(t).

    ``extra`` lists designated vertices that cells may also be adjacent to
    (the tape symbols and the head in the machine sentence).
    """
    b = bld
    centers = (x, xp, t, tp, z)
    distinct = [Not(AtomEq(p, q)) for i, p in enumerate(centers) for q in centers[i + 1:]]
    outside = [Not(AtomAdj(p, q)) for i, p in enumerate(centers) for q in centers[i + 1:]]
    disjoint = b.fa(d, lambda y, e: conj(*[
        Not(conj(AtomAdj(y, p), AtomAdj(y, q)))
        for i, p in enumerate(centers) for q in centers[i + 1:]]))
    z_indep = b.fa_in(d, z, lambda y1, e: b.fa_in(e, z, lambda y2, f: Not(AtomAdj(y1, y2))))
    z_nbrs = b.fa_in(d, z, lambda y, e: b.fa(e, lambda w, f: implies(
        AtomAdj(y, w),
        disj(AtomEq(w, z), AtomAdj(w, x), AtomAdj(w, t), *[AtomEq(w, c) for c in extra]))))
    no_cross = b.fa(d, lambda y, e: b.fa(e, lambda w, f: implies(
        conj(disj(AtomAdj(y, x), AtomAdj(y, xp)), disj(AtomAdj(w, t), AtomAdj(w, tp))),
        Not(AtomAdj(y, w)))))
    c1 = conj(*distinct, *outside, disjoint, z_indep, z_nbrs, no_cross)
    c2 = conj(order_gadget(b, x, xp, d), order_gadget(b, t, tp, d))
    c3 = b.fa_in(d, z, lambda c, e: conj(
        b.ex_unique_in(e, x, lambda y, f: AtomAdj(c, y)),
        b.ex_unique_in(e, t, lambda u, f: AtomAdj(c, u))))
    c4 = b.fa_in(d, x, lambda y, e: b.fa_in(e, t, lambda u, f: b.ex_unique_in(
        f, z, lambda c, g: conj(AtomAdj(c, y), AtomAdj(c, u)))))
    return {"C1": c1, "C2": c2, "C3": c3, "C4": c4}


def coor_gadget(bld, x, xp, t, tp, z, extra=(), d=0) -> Formula:
    return conj(*coor_parts(bld, x, xp, t, tp, z, extra, d).values())


def leq_formula(y1=0, y2=1, xp=2, base=3) -> Formula:
    """y1 <= y2 in the ladder order read through x' (free variables y1, y2, x')."""
    return _Builder(base).leq(y1, y2, xp, 0)


def ladder_formula(x=0, xp=1, base=2) -> Formula:
    """P(x, x') with free variables x, x'; bound variables start at ``base``."""
    return order_gadget(_Builder(base), x, xp)


def coor_formulas(base=5) -> dict:
    """C1..C4 over the free variables x, x', t, t', z = 0..4."""
    return coor_parts(_Builder(base), 0, 1, 2, 3, 4)


# --------------------------------------------------------------------------
# the machine sentence

def _names(k):
    return ["x", "x'", "t", "t'", "z"] + [f"s{i}" for i in range(1, k + 1)] + \
        ["a", "b", "B", "L", "H"]


class _Sentence:
    """Variable layout and the conjuncts (A1)..(A14) for one machine."""

    def __init__(self, m: TuringMachine):
        k = m.k
        self.m = m
        self.names = _names(k)
        self.var = {n: i for i, n in enumerate(self.names)}
        v = self.var
        self.x, self.xp, self.t, self.tp, self.z = v["x"], v["x'"], v["t"], v["t'"], v["z"]
        self.s = {i: v[f"s{i}"] for i in range(1, k + 1)}
        self.sym = {al: v[al] for al in SYMBOLS}
        self.H = v["H"]
        self.b = _Builder(len(self.names))

    # derived symbols ----------------------------------------------------

    def cell(self, c, col, time):
        """c is the cell (col, time)."""
        return conj(AtomAdj(c, self.z), AtomAdj(c, col), AtomAdj(c, time))

    def is_succ_t(self, t, u, d):
        return conj(AtomAdj(u, self.t), self.b.succ(t, u, self.t, self.tp, d))

    def is_succ_x(self, y, w, d):
        return conj(AtomAdj(w, self.x), self.b.succ(y, w, self.x, self.xp, d))

    def cell_at_next(self, c, t, d):
        """c lies in the row of time t+ (checked inside the cell)."""
        return self.b.ex(d, lambda u, e: conj(AtomAdj(c, u), self.is_succ_t(t, u, e)))

    def val_next(self, col, t, sym, d):
        """VAL(col, t+) = sym."""
        return self.b.ex_in(d, self.z, lambda c, e: conj(
            AtomAdj(c, col), AtomAdj(c, sym), self.cell_at_next(c, t, e)))

    def head_val(self, t, sym, d):
        """VAL(t) = sym: the head cell at time t carries sym."""
        return self.b.ex_in(d, self.z, lambda c, e: conj(
            AtomAdj(c, t), AtomAdj(c, self.H), AtomAdj(c, sym)))

    def head_at(self, col, t, d):
        """HP(t) = col."""
        return self.b.ex_in(d, self.z, lambda c, e: conj(
            AtomAdj(c, col), AtomAdj(c, t), AtomAdj(c, self.H)))

    def head_next_val(self, t, sym, d):
        """VAL(t+) = sym."""
        return self.b.ex_in(d, self.z, lambda c, e: conj(
            AtomAdj(c, self.H), AtomAdj(c, sym), self.cell_at_next(c, t, e)))

    def head_next_at(self, col, t, d):
        """HP(t+) = col."""
        return self.b.ex_in(d, self.z, lambda c, e: conj(
            AtomAdj(c, col), AtomAdj(c, self.H), self.cell_at_next(c, t, e)))

    def head_next_shift(self, col, t, d, right):
        """HP(t+) = col+ (right) or col- (left)."""
        b = self.b

        def shifted(c, e):
            return b.ex_in(e, self.x, lambda w, f: conj(
                AtomAdj(c, w),
                b.succ(col, w, self.x, self.xp, f) if right
                else b.succ(w, col, self.x, self.xp, f)))

        return b.ex_in(d, self.z, lambda c, e: conj(
            AtomAdj(c, self.H), self.cell_at_next(c, t, e), shifted(c, e)))

    def state_next(self, t, s, d):
        """ST(t+) = s."""
        return self.b.ex(d, lambda u, e: conj(AtomAdj(u, s), self.is_succ_t(t, u, e)))

    def is_first_x(self, v, d):
        return self.b.first(v, self.xp, d)

    def at_time0(self, c, d):
        return self.b.ex_in(d, self.t, lambda u, e: conj(AtomAdj(c, u),
                                                         self.b.first(u, self.tp, e)))

    def at_last_col(self, c, d):
        return self.b.ex_in(d, self.x, lambda w, e: conj(AtomAdj(c, w),
                                                         self.b.last(w, self.xp, e)))

    # conjuncts -----------------------------------------------------------

    def a1(self):
        b = self.b
        k = self.m.k
        names = list(range(len(self.names)))
        centers = (self.x, self.xp, self.t, self.tp, self.z)
        distinct = [Not(AtomEq(p, q)) for i, p in enumerate(names) for q in names[i + 1:]]
        outside = [Not(AtomAdj(p, c)) for p in names for c in centers if p != c]
        disjoint = b.fa(0, lambda y, e: conj(*[
            Not(conj(AtomAdj(y, p), AtomAdj(y, q)))
            for i, p in enumerate(centers) for q in centers[i + 1:]]))
        cover = b.fa(0, lambda y, e: disj(*[AtomEq(y, p) for p in names],
                                          *[AtomAdj(y, c) for c in centers]))
        return conj(*distinct, *outside, disjoint, cover)

    def a2(self):
        extra = tuple(self.sym[al] for al in SYMBOLS) + (self.H,)
        return coor_gadget(self.b, self.x, self.xp, self.t, self.tp, self.z, extra)

    def a3(self):
        targets = [self.sym[al] for al in SYMBOLS] + [self.H]
        return self.b.fa(0, lambda y, e: conj(*[
            implies(AtomAdj(y, c), AtomAdj(y, self.z)) for c in targets]))

    def a4(self):
        b = self.b
        syms = [self.sym[al] for al in SYMBOLS]

        def exactly_one(c):
            return disj(*[conj(AtomAdj(c, s), *[Not(AtomAdj(c, r)) for r in syms if r != s])
                          for s in syms])

        return b.fa_in(0, self.x, lambda y, e: b.fa_in(e, self.t, lambda u, f: b.fa_in(
            f, self.z, lambda c, g: implies(conj(AtomAdj(c, y), AtomAdj(c, u)),
                                            exactly_one(c)))))

    def a5(self):
        b = self.b
        return b.fa_in(0, self.t, lambda u, e: b.ex_unique_in(
            e, self.x, lambda y, f: self.head_at(y, u, f)))

    def a6(self):
        b = self.b
        states = list(self.s.values())
        nbrs = b.fa(0, lambda y, e: conj(*[implies(AtomAdj(y, s), AtomAdj(y, self.t))
                                           for s in states]))
        one = b.fa_in(0, self.t, lambda u, e: disj(*[
            conj(AtomAdj(u, s), *[Not(AtomAdj(u, r)) for r in states if r != s])
            for s in states]))
        return conj(nbrs, one)

    def a7(self):
        b = self.b
        L, Bl, H = self.sym["L"], self.sym["B"], self.H
        first_cell = b.ex_in(0, self.z, lambda c, e: conj(
            AtomAdj(c, L),
            b.ex_in(e, self.x, lambda w, f: conj(AtomAdj(c, w), self.is_first_x(w, f))),
            self.at_time0(c, e)))
        blanks = b.fa_in(0, self.x, lambda y, e: disj(
            self.is_first_x(y, e),
            b.ex_in(e, self.z, lambda c, f: conj(AtomAdj(c, y), AtomAdj(c, Bl),
                                                 self.at_time0(c, f)))))
        head = b.ex_in(0, self.z, lambda c, e: conj(
            AtomAdj(c, H),
            b.ex_in(e, self.x, lambda w, f: conj(AtomAdj(c, w), b.second(w, self.xp, f))),
            self.at_time0(c, e)))
        state = b.ex_in(0, self.t, lambda u, e: conj(b.first(u, self.tp, e),
                                                     AtomAdj(u, self.s[1])))
        return conj(first_cell, blanks, head, state)

    def a8(self):
        b = self.b
        return b.fa_in(0, self.t, lambda u, e: iff(AtomAdj(u, self.s[self.m.k]),
                                                   b.last(u, self.tp, e)))

    def a9(self):
        b = self.b

        def same_next(y, u, d):
            return conj(*[implies(
                b.ex_in(d, self.z, lambda c, e: conj(
                    AtomAdj(c, y), AtomAdj(c, u), AtomAdj(c, self.sym[al]))),
                self.val_next(y, u, self.sym[al], d)) for al in SYMBOLS])

        return b.fa_in(0, self.t, lambda u, e: disj(
            b.last(u, self.tp, e),
            b.fa_in(e, self.x, lambda y, f: disj(self.head_at(y, u, f),
                                                 same_next(y, u, f)))))

    def a10(self):
        # the rightmost cell is written on or visited by the head at some time
        b = self.b
        return b.ex_in(0, self.t, lambda u, e: b.ex_in(e, self.z, lambda c, f: conj(
            AtomAdj(c, u), disj(Not(AtomAdj(c, self.sym["B"])), AtomAdj(c, self.H)),
            self.at_last_col(c, f))))

    def a11_one(self, s, sym):
        b = self.b
        return Not(b.ex_in(0, self.t, lambda u, e: conj(
            AtomAdj(u, s), self.head_val(u, sym, e),
            b.ex_in(e, self.z, lambda c, f: conj(AtomAdj(c, u), AtomAdj(c, self.H),
                                                 self.at_last_col(c, f))))))

    def step(self, ins_kind, s, sym, s2, sym2, d=0):
        """(A12)-(A14) for one instruction, with its symbols given as variables."""
        b = self.b

        def body(u, y, e):
            pre = conj(AtomAdj(u, s), self.head_at(y, u, e), self.head_val(u, sym, e))
            if ins_kind == "write":
                post = conj(self.state_next(u, s2, e), self.head_next_val(u, sym2, e),
                            self.head_next_at(y, u, e))
            else:
                post = conj(self.state_next(u, s2, e),
                            self.head_next_shift(y, u, e, ins_kind == "right"),
                            self.val_next(y, u, sym, e))
            return implies(pre, post)

        return b.fa_in(d, self.t, lambda u, e: b.fa_in(e, self.x, lambda y, f: body(u, y, f)))

    def instruction(self, ins):
        s, s2 = self.s[ins.state], self.s[ins.next]
        sym = self.sym[ins.read]
        sym2 = self.sym[ins.write] if ins.kind == "write" else None
        return self.step(ins.kind, s, sym, s2, sym2)

    def conjuncts(self):
        m = self.m
        parts = {"A1": self.a1(), "A2": self.a2(), "A3": self.a3(), "A4": self.a4(),
                 "A5": self.a5(), "A6": self.a6(), "A7": self.a7(), "A8": self.a8(),
                 "A9": self.a9(), "A10": self.a10()}
        parts["A11"] = conj(*[self.a11_one(self.s[i.state], self.sym[i.read])
                              for i in m.family("right")]) if m.family("right") else TRUE
        for name, kind in (("A12", "write"), ("A13", "right"), ("A14", "left")):
            fam = m.family(kind)
            parts[name] = conj(*[self.instruction(i) for i in fam]) if fam else TRUE
        return parts

    # merged instruction families (constant number of quantifiers) -------

    def merged_families(self):
        b = self.b
        m = self.m

        def pairs(rows):
            return lambda *vs: disj(*[conj(*[AtomEq(v, c) for v, c in zip(vs, row)])
                                      for row in rows]) if rows else FALSE

        right = [(self.s[i.state], self.sym[i.read]) for i in m.family("right")]
        sel11 = pairs(right)
        a11 = Not(b.ex_in(0, self.t, lambda u, e: b.ex(e, lambda s, f: b.ex(
            f, lambda c, g: conj(
                sel11(s, c), AtomAdj(u, s), self.head_val(u, c, g),
                b.ex_in(g, self.z, lambda cell, h: conj(
                    AtomAdj(cell, u), AtomAdj(cell, self.H), self.at_last_col(cell, h))))))))
        out = {"A11": a11}
        for name, kind in (("A12", "write"), ("A13", "right"), ("A14", "left")):
            fam = m.family(kind)
            if kind == "write":
                rows = [(self.s[i.state], self.sym[i.read], self.s[i.next], self.sym[i.write])
                        for i in fam]
            else:
                rows = [(self.s[i.state], self.sym[i.read], self.s[i.next], self.sym[i.read])
                        for i in fam]
            sel = pairs(rows)

            def fam_formula(kind=kind, sel=sel):
                return b.fa(0, lambda s, e: b.fa(e, lambda c, f: b.fa(
                    f, lambda s2, g: b.fa(g, lambda c2, h: implies(
                        sel(s, c, s2, c2), self.step(kind, s, c, s2, c2, h))))))

            out[name] = fam_formula()
        return out


@dataclass
class CompiledSentence:
    """A_M together with its parts and measured metrics."""

    machine: TuringMachine
    sentence: Formula
    body: Formula
    existential: Formula
    parts: dict
    names: list
    qr: int
    alt: int
    length: int

    @property
    def k(self):
        return self.machine.k

    def witness_template(self):
        return {name: i for i, name in enumerate(self.names)}

    def metrics(self):
        return {"k": self.k, "qr": self.qr, "alt": self.alt, "length": self.length,
                "classes": sorted(str(c) for c in classify(self.sentence))}


def _assemble(m, parts):
    names = _names(m.k)
    body = conj(*parts.values())
    existential = body
    for v in reversed(range(len(names))):
        existential = Exists(v, existential)
    sentence = conj(graph_axioms(), existential)
    return names, body, existential, sentence


def compile_tm(m: TuringMachine) -> CompiledSentence:
    """Build A_M and check its rank and alternation contracts."""
    sent = _Sentence(m)
    parts = sent.conjuncts()
    names, body, existential, sentence = _assemble(m, parts)
    qr, alt = quantifier_rank(sentence), alternation_number(sentence)
    if qr != m.k + 16:
        raise InvariantViolation(f"quantifier rank {qr}, expected {m.k + 16}")
    if alt != 3:
        raise InvariantViolation(f"alternation number {alt}, expected 3")
    return CompiledSentence(m, sentence, body, existential, parts, names, qr, alt,
                            length(sentence))


def merged_sentence(m: TuringMachine) -> CompiledSentence:
    """A_M with each instruction family folded into one formula.

    Each family quantifies over the state and symbol variables and selects
    the admissible combinations with a disjunction of equalities, so the
    number of quantifiers does not depend on the machine.
    """
    sent = _Sentence(m)
    parts = sent.conjuncts()
    parts.update(sent.merged_families())
    names, body, existential, sentence = _assemble(m, parts)
    return CompiledSentence(m, sentence, body, existential, parts, names,
                            quantifier_rank(sentence), alternation_number(sentence),
                            length(sentence))


def compile_prenex(m: TuringMachine):
    """Prenex form of the merged A_M.

    Returns (formula, info) where info records the block sizes and the
    positions of the designated variables in the prefix.
    """
    merged = merged_sentence(m)
    p = to_prenex(merged.sentence)
    blocks, _ = prefix(p)
    shape = [(q, len(vs)) for q, vs in blocks]
    if [q for q, _ in shape] != ["E", "A", "E", "A"]:
        raise InvariantViolation(f"unexpected prefix shape {shape}")
    if shape[0][1] < m.k:
        raise InvariantViolation("prefix does not begin with k existential quantifiers")
    info = {"k": m.k, "blocks": shape, "alternations": len(shape) - 1,
            "c1": shape[0][1] - m.k, "c2": shape[1][1], "c3": shape[2][1],
            "c4": shape[3][1], "qr": quantifier_rank(p), "length": length(p)}
    return p, info


# --------------------------------------------------------------------------
# models

def build_model(m: TuringMachine, max_steps: int = DEFAULT_MAX_STEPS):
    """The computation graph G_M and the intended designated vertices."""
    tr = run_tm(m, max_steps)
    names = _names(m.k)
    idx = {n: i for i, n in enumerate(names)}
    n0 = len(names)
    w, T = tr.omega, tr.m + 1
    X = list(range(n0, n0 + w))
    Xp = list(range(n0 + w, n0 + 2 * w))
    Tm = list(range(n0 + 2 * w, n0 + 2 * w + T))
    Tp = list(range(n0 + 2 * w + T, n0 + 2 * w + 2 * T))
    zbase = n0 + 2 * w + 2 * T

    def cell(i, tau):
        return zbase + tau * w + i

    n = zbase + w * T
    edges = []
    for i in range(w):
        edges += [(idx["x"], X[i]), (idx["x'"], Xp[i])]
        edges += [(X[i], Xp[j]) for j in range(i + 1)]
    for tau in range(T):
        edges += [(idx["t"], Tm[tau]), (idx["t'"], Tp[tau])]
        edges += [(Tm[tau], Tp[j]) for j in range(tau + 1)]
        edges.append((Tm[tau], idx[f"s{tr.states[tau]}"]))
        for i in range(w):
            c = cell(i, tau)
            edges += [(idx["z"], c), (c, X[i]), (c, Tm[tau]), (c, idx[tr.tapes[tau][i]])]
        edges.append((cell(tr.heads[tau] - 1, tau), idx["H"]))
    g = Graph(n, edges)
    witnesses = {i: i for i in range(n0)}
    layout = {"designated": dict(idx), "X": X, "X'": Xp, "T": Tm, "T'": Tp,
              "Z": [[cell(i, tau) for i in range(w)] for tau in range(T)],
              "trace": tr}
    return g, witnesses, layout


def verify_model(m: TuringMachine, samples: int = 24, seed: int = 0,
                 max_steps: int = DEFAULT_MAX_STEPS) -> dict:
    """Check G_M against A_M and against seeded single-edge perturbations."""
    comp = compile_tm(m)
    g, wit, layout = build_model(m, max_steps)
    axioms_ok = evaluate(graph_axioms(), g)
    model_ok = eval_with_witnesses(comp.existential, g, wit)
    rng = random.Random(seed)
    pairs = [(a, b) for a in range(g.n) for b in range(a + 1, g.n)]
    chosen = rng.sample(pairs, min(samples, len(pairs)))
    perturbed = []
    for a, b in chosen:
        h = g.toggle(a, b)
        perturbed.append({"edge": [a, b], "removed": g.has_edge(a, b),
                          "holds": eval_with_witnesses(comp.existential, h, wit)})
    tr = layout["trace"]
    return {
        "k": m.k, "order": g.n, "running_time": tr.m, "omega": tr.omega,
        "graph_axioms": axioms_ok, "intended_witnesses": model_ok,
        "perturbations": perturbed,
        "all_perturbations_false": all(not p["holds"] for p in perturbed),
        "ok": axioms_ok and model_ok and all(not p["holds"] for p in perturbed)
              and g.n > tr.m,
    }


# --------------------------------------------------------------------------
# canonical gadget graphs

def ladder_graph(s: int):
    """x, x', and the ladder X x X' with x_i ~ x'_j iff j <= i (vertices 0, 1, ...)."""
    if s < 1:
        raise PreconditionError("ladder width must be positive")
    X = list(range(2, 2 + s))
    Xp = list(range(2 + s, 2 + 2 * s))
    edges = [(0, v) for v in X] + [(1, v) for v in Xp]
    edges += [(X[i], Xp[j]) for i in range(s) for j in range(i + 1)]
    return Graph(2 + 2 * s, edges), 0, 1, X, Xp


def coor_graph(sx: int, st: int):
    """Designated x, x', t, t', z (0..4), two ladders and the grid Z = X x T."""
    X = list(range(5, 5 + sx))
    Xp = list(range(5 + sx, 5 + 2 * sx))
    T = list(range(5 + 2 * sx, 5 + 2 * sx + st))
    Tp = list(range(5 + 2 * sx + st, 5 + 2 * sx + 2 * st))
    zb = 5 + 2 * sx + 2 * st
    edges = [(0, v) for v in X] + [(1, v) for v in Xp]
    edges += [(2, v) for v in T] + [(3, v) for v in Tp]
    edges += [(X[i], Xp[j]) for i in range(sx) for j in range(i + 1)]
    edges += [(T[i], Tp[j]) for i in range(st) for j in range(i + 1)]
    Z = {}
    for i in range(sx):
        for j in range(st):
            c = zb + i * st + j
            Z[(i, j)] = c
            edges += [(4, c), (c, X[i]), (c, T[j])]
    return Graph(zb + sx * st, edges), {"X": X, "X'": Xp, "T": T, "T'": Tp, "Z": Z}


# --------------------------------------------------------------------------
# corpus

CORPUS = {
    "m1": "# write a and halt\nstates 2\ns1 B write a s2\n",
    "m2": "# write, step right, halt\nstates 3\ns1 B write a s2\ns2 a right s3\n",
    "m3": ("states 4\ns1 B write a s2\ns2 a right s3\ns3 B write b s2\n"
           "s2 b left s4\n"),
    "m4": ("states 5\ns1 B write a s2\ns2 a right s3\ns3 B write a s4\n"
           "s4 a left s4\ns4 L right s5\n"),
    "m5": ("states 6\ns1 B write b s2\ns2 b right s3\ns3 B right s4\n"
           "s4 B write a s5\ns5 a left s5\ns5 B left s5\ns5 b write a s6\n"),
    "loop": "# never halts\nstates 2\ns1 B write B s1\n",
}


def corpus_machine(name: str) -> TuringMachine:
    if name not in CORPUS:
        raise InputError(f"unknown corpus machine {name!r}")
    return parse_tm(CORPUS[name])
