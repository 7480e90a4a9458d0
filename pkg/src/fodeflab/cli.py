"""Command-line interface: ``fodeflab <command> ...``.

Results are printed as JSON on stdout.  Failures print a JSON error payload
and exit with 2 (bad input), 3 (cap exceeded or timeout) or 4 (internal
invariant violated).
"""

from __future__ import annotations

import argparse
from argparse import SUPPRESS
import json
import os
import re
import sys

from . import efgame, formula, graph, semantics, succinct, tmcompile, trees, universal_sets
from .config import Config, DEFAULT_CAPS
from .errors import FodefError, InputError

__all__ = ["main", "build_parser", "load_graph", "load_formula", "load_machine"]


# --------------------------------------------------------------------------
# inputs

_NAMED = re.compile(r"([KPCES])(\d+)\Z")


def load_graph(spec: str) -> graph.Graph:
    """A graph from a JSON file ({"n", "edges"} or {"parent"}) or a name like K3, P4, C5, E2, S3."""
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InputError(f"{spec}: not JSON ({exc})") from None
        if isinstance(data, dict) and "parent" in data:
            return graph.tree_from_json(data).to_graph()
        return graph.graph_from_json(data)
    m = _NAMED.match(spec)
    if not m:
        raise InputError(f"no such file and not a graph name: {spec!r}")
    kind, n = m.group(1), int(m.group(2))
    build = {"K": graph.complete, "P": graph.path, "C": graph.cycle,
             "E": graph.empty, "S": graph.star}[kind]
    return build(n)


def load_tree(spec: str) -> graph.RootedTree:
    """A rooted tree from {"parent", "root"} JSON, or a tree graph rooted at its first center."""
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            data = json.load(fh)
        if isinstance(data, dict) and "parent" in data:
            return graph.tree_from_json(data)
    g = load_graph(spec)
    if not graph.is_tree(g):
        raise InputError("input is not a tree")
    return graph.RootedTree.from_graph(g, graph.metrics(g).centers[0])


def load_formula(spec: str, allow_free=False) -> formula.Formula:
    text = spec
    if not spec.lstrip().startswith("(") and os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            text = fh.read()
    return formula.parse(text, allow_free=allow_free)


def load_machine(spec: str) -> tmcompile.TuringMachine:
    if spec in tmcompile.CORPUS:
        return tmcompile.corpus_machine(spec)
    if not os.path.exists(spec):
        raise InputError(f"no such machine file or corpus name: {spec!r}")
    with open(spec, encoding="utf-8") as fh:
        return tmcompile.parse_tm(fh.read())


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# --------------------------------------------------------------------------
# commands

def cmd_check(args, cfg):
    g = load_graph(args.graph)
    f = load_formula(args.formula)
    return {"holds": semantics.evaluate(f, g)}


def cmd_measure(args, cfg):
    f = load_formula(args.formula, allow_free=True)
    return {"qr": formula.quantifier_rank(f), "alt": formula.alternation_number(f),
            "length": formula.length(f),
            "classes": sorted(str(c) for c in formula.classify(f)),
            "free": sorted(formula.free_vars(f))}


def cmd_prenex(args, cfg):
    f = load_formula(args.formula, allow_free=True)
    p = formula.to_prenex(f)
    return {"prenex": formula.render(p), "qr": formula.quantifier_rank(p),
            "alt": formula.alternation_number(p), "length": formula.length(p)}


def _engine(cfg):
    return efgame.ValueEngine({"k": cfg.caps["k"], "order": cfg.caps["order"]})


def cmd_dgame(args, cfg):
    g, h = load_graph(args.g1), load_graph(args.g2)
    if args.alt is None:
        d = efgame.distinguishing_rank(g, h, _engine(cfg))
    else:
        d = efgame.distinguishing_rank_alt(g, h, args.alt)
    return {"D": d, "alt": args.alt, "trace": efgame.game_trace(g, h, d, args.alt)}


def cmd_define(args, cfg):
    g = load_graph(args.graph)
    if args.naive:
        f = formula.naive_definition(g)
        return {"sentence": formula.render(f), "k": formula.quantifier_rank(f),
                "certificate": {"scope": "defines g among all graphs", "naive": True}}
    if args.bound is None:
        raise InputError("--bound is required unless --naive is given")
    f, k, cert = efgame.defining_formula(g, args.bound, _engine(cfg))
    return {"sentence": formula.render(f), "k": k, "certificate": cert}


def cmd_tree_gen(args, cfg):
    if args.ranked is not None:
        fam = trees.gen_ranked(args.ranked)
        return {"kind": "ranked", "rank": args.ranked, "size": len(fam),
                "trees": [graph.graph_to_json(g) for g in fam.graphs()]}
    if args.catalog is not None:
        cat = trees.enumerate_diverging(args.catalog)
        return {"kind": "catalog", "depth_bound": args.catalog, "M": cat.M,
                "trees": cat.to_json()}
    if args.depth is None or args.order is None:
        raise InputError("--diverging needs --depth and --order")
    if args.free:
        g = trees.gen_diverging_tree(args.order, args.depth)
        return {"kind": "diverging-tree", "trees": [graph.graph_to_json(g)]}
    t = trees.gen_diverging_rooted(args.depth, args.order)
    return {"kind": "diverging-rooted", "trees": [graph.tree_to_json(t)]}


def cmd_tree_check(args, cfg):
    g = load_graph(args.tree)
    out = {"order": g.n, "is_tree": graph.is_tree(g), "connected": graph.is_connected(g)}
    if out["is_tree"]:
        ms = graph.metrics(g)
        out.update({"radius": ms.radius, "diameter": ms.diameter,
                    "centers": list(ms.centers),
                    "diverging": trees.is_diverging_tree(g),
                    "automorphisms": graph.tree_automorphisms(g),
                    "ranked_rank": trees.ranked_rank(g)})
        if args.certify is not None:
            out["certificate"] = trees.certify_tree_definability(g, args.certify)
    return out


def cmd_tree_minimize(args, cfg):
    t = load_tree(args.tree)
    rep = trees.minimization_report(t, args.k)
    rep["tree"] = graph.tree_to_json(rep["tree"])
    return rep


def cmd_tm(args, cfg):
    m = load_machine(args.machine)
    action = args.action
    if action == "run":
        return tmcompile.run_tm(m, args.max_steps).to_json()
    if action == "compile":
        c = tmcompile.compile_tm(m)
        if args.out:
            _write(args.out, formula.render(c.sentence) + "\n")
        return c.metrics()
    if action == "prenex":
        p, info = tmcompile.compile_prenex(m)
        if args.out:
            _write(args.out, formula.render(p) + "\n")
        return info
    if action == "model":
        g, wit, layout = tmcompile.build_model(m, args.max_steps)
        layout = dict(layout)
        layout["trace"] = layout["trace"].to_json()
        return {"graph": graph.graph_to_json(g), "witnesses": {str(k): v for k, v in wit.items()},
                "layout": layout}
    out = tmcompile.verify_model(m, samples=args.samples, seed=cfg.seed,
                                 max_steps=args.max_steps)
    return out


def cmd_succinct(args, cfg):
    if args.action == "bounds":
        tb = succinct.theorem_bounds(args.k, cfg.caps["digits"])
        show = succinct.render_number
        rows = [{key: (show(v) if key in ("f", "l", "f_closed", "l_closed") else v)
                 for key, v in r.items()} for r in tb["rows"]]
        return {"k": args.k, "rows": rows, "l0_tower4": show(tb["l0_tower4"]),
                "l0_ok": tb["l0_ok"], "ehrv": show(tb["ehrv"]),
                "ehrv_tower": show(tb["ehrv_tower"])}
    table = succinct.q_table(args.n_max, args.bound)
    if cfg.format == "csv":
        return _Raw(table.to_csv())
    return table.to_json()


def cmd_universal(args, cfg):
    if args.action == "build":
        u = universal_sets.build_universal(args.m, proxy_order=args.proxy_order)
        if args.out:
            _write(args.out, u.to_text())
        return u.summary()
    if args.graph is not None:
        res = universal_sets.d_half_upper(load_graph(args.graph), args.m, args.bound)
        return res.to_json() if isinstance(res, universal_sets.NotFound) else res
    if args.formulas is not None:
        with open(args.formulas, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip() and not ln.startswith("#")]
        sample = [formula.parse(ln) for ln in lines]
    else:
        sample = universal_sets.sample_sentences(args.m, args.sample, cfg.seed)
    rep = universal_sets.universality_check(args.m, sample, args.proxy_order)
    return rep


# --------------------------------------------------------------------------
# interactive play

class _InputEnded(InputError):
    pass


class _Inputs:
    """Move lines from a replay file or the terminal."""

    def __init__(self, replay):
        self.replay = None
        if replay:
            with open(replay, encoding="utf-8") as fh:
                data = json.load(fh)
            self.replay = list(data["inputs"] if isinstance(data, dict) else data)
        self.used = []

    def read(self, prompt):
        if self.replay is not None:
            if not self.replay:
                raise InputError("replay file ended before the game did")
            line = str(self.replay.pop(0))
        else:
            print(prompt, end="", file=sys.stderr, flush=True)
            line = sys.stdin.readline()
            if not line:
                raise _InputEnded("input ended before the game did")
            line = line.strip()
        self.used.append(line)
        return line

    @property
    def interactive(self):
        return self.replay is None


def _parse_move(line, graphs, want_side):
    toks = line.split()
    try:
        nums = [int(t) for t in toks]
    except ValueError:
        raise InputError(f"expected integers, got {line!r}") from None
    if want_side:
        if len(nums) != 2 or nums[0] not in (0, 1):
            raise InputError("enter '<graph 0|1> <vertex>'")
        side, x = nums
    else:
        if len(nums) != 1:
            raise InputError("enter '<vertex>'")
        side, x = None, nums[0]
    return side, x


def cmd_play(args, cfg):
    g, h = load_graph(args.g1), load_graph(args.g2)
    graphs = (g, h)
    src = _Inputs(args.replay)
    u, v, moves = (), (), []
    human_spoiler = args.role == "spoiler"
    for rnd in range(1, args.k + 1):
        left = args.k - rnd + 1
        while True:
            try:
                if human_spoiler:
                    side, x = _parse_move(src.read(f"round {rnd}: your move (graph vertex): "),
                                          graphs, True)
                    if not 0 <= x < graphs[side].n:
                        raise InputError(f"vertex {x} not in graph {side}")
                    y = efgame.duplicator_choice(g, h, u, v, side, x, left)
                else:
                    side, x = efgame.spoiler_choice(g, h, u, v, left)
                    print(f"round {rnd}: Spoiler plays vertex {x} in graph {side}",
                          file=sys.stderr)
                    _, y = _parse_move(src.read("your reply (vertex): "), graphs, False)
                    if not 0 <= y < graphs[1 - side].n:
                        raise InputError(f"vertex {y} not in graph {1 - side}")
                break
            except _InputEnded:
                raise
            except InputError as exc:
                if not src.interactive:
                    raise
                src.used.pop()
                print(f"  {exc}", file=sys.stderr)
        a, b = (x, y) if side == 0 else (y, x)
        u, v = u + (a,), v + (b,)
        moves.append({"round": rnd, "spoiler": {"graph": side, "vertex": x},
                      "duplicator": {"graph": 1 - side, "vertex": y}})
        bad = efgame.violation(g, h, u, v)
        if bad is not None:
            print(f"Spoiler wins in round {rnd}: pebbles {bad['pebbles']} differ in "
                  f"{bad['condition']}", file=sys.stderr)
            break
    else:
        bad = None
        print(f"Duplicator survives all {args.k} rounds", file=sys.stderr)
    out = {"winner": "spoiler" if bad else "duplicator", "role": args.role, "k": args.k,
           "moves": moves, "violation": bad}
    if args.record:
        _write(args.record, json.dumps({"g1": args.g1, "g2": args.g2, "k": args.k,
                                        "role": args.role, "inputs": src.used}, indent=2) + "\n")
    return out


# --------------------------------------------------------------------------
# parser

class _Raw(str):
    """Pre-rendered output (CSV) printed as is."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"usage: {message}")


def build_parser():
    # global options are accepted before or after the subcommand
    common = _Parser(add_help=False, allow_abbrev=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default=SUPPRESS)
    common.add_argument("--seed", type=int, default=SUPPRESS,
                        help="seed for every sampled check")
    common.add_argument("--max-k", type=int, default=SUPPRESS)
    common.add_argument("--max-order", type=int, default=SUPPRESS)
    common.add_argument("--digit-cap", type=int, default=SUPPRESS)
    p = _Parser(prog="fodeflab", description="First-order definability of finite graphs.",
                parents=[common], allow_abbrev=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], allow_abbrev=False, **kw)

    sub.add_parser = add_parser

    s = sub.add_parser("check", help="evaluate a sentence on a graph")
    s.add_argument("graph")
    s.add_argument("formula")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("measure", help="quantifier rank, alternation, length, classes")
    s.add_argument("formula")
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("prenex", help="prenex normal form")
    s.add_argument("formula")
    s.set_defaults(func=cmd_prenex)

    s = sub.add_parser("dgame", help="distinguishing rank with an optimal play trace")
    s.add_argument("g1")
    s.add_argument("g2")
    s.add_argument("--alt", type=int, default=None)
    s.set_defaults(func=cmd_dgame)

    s = sub.add_parser("define", help="defining sentence among bounded-order graphs")
    s.add_argument("graph")
    s.add_argument("--bound", type=int)
    s.add_argument("--naive", action="store_true")
    s.set_defaults(func=cmd_define)

    tree = sub.add_parser("tree", help="diverging and ranked trees")
    tsub = tree.add_subparsers(dest="tree_command", required=True, parser_class=_Parser)
    _tadd = tsub.add_parser
    tsub.add_parser = lambda name, **kw: _tadd(name, parents=[common], allow_abbrev=False, **kw)
    s = tsub.add_parser("gen")
    kind = s.add_mutually_exclusive_group(required=True)
    kind.add_argument("--diverging", action="store_true")
    kind.add_argument("--ranked", type=int, metavar="I")
    kind.add_argument("--catalog", type=int, metavar="I")
    s.add_argument("--depth", type=int)
    s.add_argument("--order", type=int)
    s.add_argument("--free", action="store_true", help="unrooted diverging tree")
    s.set_defaults(func=cmd_tree_gen)
    s = tsub.add_parser("check")
    s.add_argument("tree")
    s.add_argument("--certify", type=int, metavar="N")
    s.set_defaults(func=cmd_tree_check)
    s = tsub.add_parser("minimize")
    s.add_argument("tree")
    s.add_argument("--k", type=int, required=True)
    s.set_defaults(func=cmd_tree_minimize)

    s = sub.add_parser("tm", help="Turing machine compilation")
    s.add_argument("action", choices=("run", "compile", "prenex", "model", "verify"))
    s.add_argument("machine")
    s.add_argument("--max-steps", type=int, default=tmcompile.DEFAULT_MAX_STEPS)
    s.add_argument("--samples", type=int, default=24)
    s.add_argument("--out")
    s.set_defaults(func=cmd_tm)

    s = sub.add_parser("succinct", help="succinctness tables and bound recurrences")
    s.add_argument("action", choices=("table", "bounds"))
    s.add_argument("--n-max", type=int, default=5)
    s.add_argument("--bound", type=int, default=5)
    s.add_argument("--k", type=int, default=3)
    s.set_defaults(func=cmd_succinct)

    s = sub.add_parser("universal", help="universal sentence sets")
    s.add_argument("action", choices=("build", "apply"))
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--proxy-order", type=int, default=4)
    s.add_argument("--out")
    s.add_argument("--graph")
    s.add_argument("--bound", type=int, default=5)
    s.add_argument("--formulas")
    s.add_argument("--sample", type=int, default=10)
    s.set_defaults(func=cmd_universal)

    s = sub.add_parser("play", help="play the game in the terminal")
    s.add_argument("g1")
    s.add_argument("g2")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--role", choices=("spoiler", "duplicator"), required=True)
    s.add_argument("--replay", help="JSON file with recorded inputs")
    s.add_argument("--record", help="write the inputs of this session here")
    s.set_defaults(func=cmd_play)
    return p


def _render(out, fmt):
    if isinstance(out, _Raw):
        return str(out).rstrip("\n")
    if fmt == "text" and isinstance(out, dict):
        return "\n".join(f"{k}: {json.dumps(v) if not isinstance(v, str) else v}"
                         for k, v in out.items())
    if fmt == "csv":
        raise InputError("csv output is only available for 'succinct table'")
    return json.dumps(out, indent=2)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        opt = vars(args)
        cfg = Config(caps={"k": opt.get("max_k", DEFAULT_CAPS["k"]),
                           "order": opt.get("max_order", DEFAULT_CAPS["order"]),
                           "enum_n": DEFAULT_CAPS["enum_n"],
                           "digits": opt.get("digit_cap", DEFAULT_CAPS["digits"])},
                     format=opt.get("format", "json"), seed=opt.get("seed", 0))
        out = args.func(args, cfg)
        print(_render(out, cfg.format))
        return 0
    except FodefError as exc:
        print(json.dumps(exc.to_payload()))
        return exc.exit_code if exc.exit_code != 1 else 4
    except RecursionError as exc:
        print(json.dumps({"error": "cap-exceeded", "message": f"recursion limit: {exc}"}))
        return 3
    except OSError as exc:
        print(json.dumps({"error": "input", "message": str(exc)}))
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort payload
        print(json.dumps({"error": "internal", "message": f"{type(exc).__name__}: {exc}"}))
        return 4


if __name__ == "__main__":
    sys.exit(main())
