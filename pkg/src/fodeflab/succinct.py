"""Tower arithmetic, bound recurrences and brute-force succinctness tables.

Big integers are exact up to a digit cap.  Past the cap a calculator returns
a ``Symbolic`` value carrying a readable expression instead of the number;
comparisons involving symbolic values are reported as undecided rather
than guessed.

The table ``q_table(n_max, N)`` lists, for each order n, the least rank of
a sentence that separates some n-vertex graph from every other graph of
order at most N.  These bounded values only approximate the unbounded
succinctness function from below: a separating sentence among small graphs
need not define the graph outright.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from math import comb

from .config import DEFAULT_CAPS
from .efgame import ValueEngine
from .errors import CapExceeded, PreconditionError
from .graph import graph_to_json, graphs_up_to

__all__ = [
    "Symbolic", "render_number", "tower", "tower4", "log_star", "f_bound", "ehrv_bound",
    "ehrv_tower_bound", "universe_size", "l_bound", "g_step", "g_iterate",
    "theorem_bounds", "BoundTable", "q_table", "TABLE_COLUMNS",
]

_LOG10_2 = math.log10(2)


@dataclass(frozen=True)
class Symbolic:
    """A number too large to materialize, kept as an expression."""

    text: str
    tower_height: int | None = None

    def __str__(self):
        return self.text


def _cap(digit_cap):
    return DEFAULT_CAPS["digits"] if digit_cap is None else digit_cap


def _bits(digit_cap):
    """Bit length corresponding to the digit cap (kept as an int for big comparisons)."""
    return int(digit_cap / _LOG10_2)


def _show(x, limit=256):
    if isinstance(x, Symbolic):
        return x.text
    if x.bit_length() > limit:
        return f"<{int(x.bit_length() * _LOG10_2) + 1}-digit integer>"
    return str(x)


def render_number(x) -> str:
    """Decimal text for moderate integers, a digit count for huge ones."""
    return _show(x, limit=12_000)


def _pow(base_log2, e, digit_cap, label=None):
    """base^e where base = 2^base_log2, or Symbolic past the cap."""
    if isinstance(e, Symbolic) or e * base_log2 > _bits(digit_cap):
        return Symbolic(label or f"{1 << base_log2}^({_show(e)})")
    return 1 << (base_log2 * e)


def _mul(a, b, digit_cap):
    if isinstance(a, Symbolic) or isinstance(b, Symbolic):
        return Symbolic(f"{_paren(a)} * {_paren(b)}")
    if a.bit_length() + b.bit_length() > _bits(digit_cap) + 4:
        return Symbolic(f"{_paren(a)} * {_paren(b)}")
    return a * b


def _add(a, c):
    if isinstance(a, Symbolic):
        return Symbolic(f"{a.text} + {c}")
    return a + c


def _paren(x):
    s = _show(x)
    return f"({s})" if " " in s else s


def _leq(a, b):
    """a <= b, or None when either side is symbolic."""
    if isinstance(a, Symbolic) or isinstance(b, Symbolic):
        return None
    return a <= b


# --------------------------------------------------------------------------
# towers

def tower(i: int, digit_cap=None):
    """T(0) = 1, T(i+1) = 2^T(i); symbolic once the digit cap is passed."""
    if not isinstance(i, int) or i < 0:
        raise PreconditionError("tower index must be a non-negative integer")
    cap = _cap(digit_cap)
    t = 1
    for j in range(1, i + 1):
        if t > _bits(cap):
            return Symbolic(f"tower({i})", tower_height=i)
        t = 1 << t
    return t


def tower4(i: int, digit_cap=None):
    """The tower built from 4's: T4(0) = 1, T4(i+1) = 4^T4(i)."""
    if not isinstance(i, int) or i < 0:
        raise PreconditionError("tower index must be a non-negative integer")
    cap = _cap(digit_cap)
    t = 1
    for _ in range(i):
        if 2 * t > _bits(cap):
            return Symbolic(f"tower4({i})")
        t = 1 << (2 * t)
    return t


def log_star(n) -> int:
    """Least i with T(i) >= n."""
    if isinstance(n, Symbolic):
        if n.tower_height is None:
            raise PreconditionError("log* of a symbolic value needs its tower height")
        return n.tower_height
    if not isinstance(n, int) or n < 1:
        raise PreconditionError("log* is defined for integers n >= 1")
    i, t = 0, 1
    while t < n:
        i += 1
        if t >= n.bit_length():
            # 2^t >= 2^bit_length > n
            return i
        t = 1 << t
    return i


# --------------------------------------------------------------------------
# bound recurrences

def _check_ks(k, s):
    if not (isinstance(k, int) and isinstance(s, int)) or k < 1 or not 0 <= s <= k:
        raise PreconditionError("need integers k >= 1 and 0 <= s <= k")


def f_bound(k: int, s: int, digit_cap=None):
    """Bound on the number of rank-k values with s pebbles.

    f(k, k) = 4^C(k,2) and f(k, s) = 2^f(k, s+1).
    """
    _check_ks(k, s)
    cap = _cap(digit_cap)
    v = _pow(2, comb(k, 2), cap)
    for _ in range(k - s):
        v = _pow(1, v, cap)
    return v


def ehrv_bound(k: int, digit_cap=None):
    """The recurrence value f(k, 0), bounding the number of rank-k sentence classes."""
    return f_bound(k, 0, digit_cap)


def ehrv_tower_bound(k: int, digit_cap=None):
    """The closed form T(k + 2 + log* k)."""
    if not isinstance(k, int) or k < 1:
        raise PreconditionError("k must be a positive integer")
    return tower(k + 2 + log_star(k), digit_cap)


def universe_size(k: int, g: int, digit_cap=None):
    """U = sum_{i < g} (k g)^i, the node bound for a tree of depth g, degree k g."""
    if not (isinstance(k, int) and isinstance(g, int)) or k < 1 or g < 1:
        raise PreconditionError("need positive integers k and g")
    cap = _cap(digit_cap)
    if g * math.log10(k * g + 1) > cap:
        return Symbolic(f"sum_(i<{g}) ({k * g})^i")
    return sum((k * g) ** i for i in range(g))


def l_bound(k: int, s: int, digit_cap=None):
    """Length recurrence: l(k,k) = 18 C(k,2), l(k,s) = f(k,s+1) (l(k,s+1) + 10)."""
    _check_ks(k, s)
    cap = _cap(digit_cap)
    v = 18 * comb(k, 2)
    for t in range(k - 1, s - 1, -1):
        v = _mul(f_bound(k, t + 1, cap), _add(v, 10), cap)
    return v


def g_step(x, digit_cap=None):
    """g(x) = x 2^(x+1)."""
    cap = _cap(digit_cap)
    if isinstance(x, Symbolic):
        return Symbolic(f"g({x.text})")
    return _mul(x, _pow(1, x + 1, cap), cap)


def g_iterate(j: int, x, digit_cap=None):
    """The j-fold iterate of g."""
    if not isinstance(j, int) or j < 0:
        raise PreconditionError("iteration count must be a non-negative integer")
    for _ in range(j):
        x = g_step(x, digit_cap)
    return x


def theorem_bounds(k: int, digit_cap=None) -> dict:
    """Evaluate the depth-versus-length recurrences for one k.

    For each s the entry holds f(k,s), l(k,s), the closed forms
    2^(g^(k-s)(9k^2)) and g^(k-s)(9k^2), and whether the inequalities
    could be checked on materialized values (None when symbolic).
    """
    cap = _cap(digit_cap)
    rows = []
    for s in range(k, -1, -1):
        f = f_bound(k, s, cap)
        l = l_bound(k, s, cap)
        gl = g_iterate(k - s, 9 * k * k, cap)
        gf = _pow(1, gl, cap)
        rows.append({"s": s, "f": f, "l": l, "f_closed": gf, "l_closed": gl,
                     "f_ok": _leq(f, gf), "l_ok": _leq(l, gl)})
    top = tower4(k + 2 + log_star(k), cap)
    return {"k": k, "rows": rows, "l0_tower4": top,
            "l0_ok": _leq(rows[-1]["l"], top),
            "ehrv": ehrv_bound(k, cap), "ehrv_tower": ehrv_tower_bound(k, cap)}


# --------------------------------------------------------------------------
# succinctness tables

TABLE_COLUMNS = ("n", "classes", "q_hat", "q_hat_star", "order_bound", "log_star",
                 "log_star_plus_5", "below_log_star_bound", "within_naive_ceiling",
                 "witness")


@dataclass
class BoundTable:
    order_bound: int
    rows: list = field(default_factory=list)
    non_monotone: list = field(default_factory=list)

    def q_hat(self, n):
        return self._row(n)["q_hat"]

    def q_hat_star(self, n):
        return self._row(n)["q_hat_star"]

    def _row(self, n):
        for r in self.rows:
            if r["n"] == n:
                return r
        raise KeyError(n)

    def to_json(self) -> dict:
        return {"order_bound": self.order_bound, "columns": list(TABLE_COLUMNS),
                "rows": self.rows, "non_monotone": self.non_monotone}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for r in self.rows:
            w.writerow([json.dumps(r[c]) if c == "witness" else r[c] for c in TABLE_COLUMNS])
        return buf.getvalue()


def q_table(n_max: int, order_bound: int, caps=None) -> BoundTable:
    """q_hat_N(n) for n = 1..n_max, with N = order_bound.

    All graphs of order <= N are split into classes of equal rank-k value,
    k = 0, 1, ...; an n-vertex graph is separated at rank k once its class
    is a singleton.  Classes without an unresolved candidate are dropped,
    so each rank only re-evaluates graphs that still matter.
    """
    caps = dict(caps or {"n_max": 5, "order": 7, "k": 8})
    if n_max < 1 or order_bound < n_max:
        raise PreconditionError("need 1 <= n_max <= order_bound")
    if n_max > caps["n_max"] or order_bound > caps["order"]:
        raise CapExceeded(f"q table capped at n_max={caps['n_max']}, bound={caps['order']}")
    engine = ValueEngine({"k": caps["k"], "order": order_bound})
    universe = graphs_up_to(order_bound)
    classes = {n: sum(1 for h in universe if h.n == n) for n in range(1, n_max + 1)}
    found = {}
    blocks = [universe]
    k = 0
    while True:
        split = []
        for block in blocks:
            if len(block) == 1:
                split.append(block)
                continue
            parts = {}
            for h in block:
                parts.setdefault(engine.raw(h, (), k), []).append(h)
            split.extend(parts.values())
        for block in split:
            h = block[0]
            if len(block) == 1 and h.n <= n_max and h.n not in found:
                found[h.n] = (k, h)
        if len(found) == n_max:
            break
        blocks = [b for b in split if len(b) > 1
                  and any(h.n <= n_max and h.n not in found for h in b)]
        k += 1
        if k > caps["k"]:
            raise CapExceeded(f"rank search exceeded k={caps['k']}")
    table = BoundTable(order_bound)
    best = 0
    prev = None
    for n in range(1, n_max + 1):
        q, witness = found[n]
        best = max(best, q)
        ls = log_star(n)
        table.rows.append({
            "n": n, "classes": classes[n], "q_hat": q, "q_hat_star": best,
            "order_bound": order_bound, "log_star": ls, "log_star_plus_5": ls + 5,
            "below_log_star_bound": q < ls + 5, "within_naive_ceiling": q <= n + 1,
            "witness": graph_to_json(witness),
        })
        if prev is not None and q < prev:
            table.non_monotone.append({"n": n, "q_hat": q, "previous": prev})
        prev = q
    return table
