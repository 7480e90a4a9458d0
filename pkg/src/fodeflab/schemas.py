"""JSON Schemas for the command-line outputs (draft 2020-12)."""

_GRAPH = {
    "type": "object",
    "required": ["n", "edges"],
    "properties": {
        "n": {"type": "integer", "minimum": 0},
        "edges": {"type": "array", "items": {
            "type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}},
    },
}

_MOVE = {
    "type": "object",
    "required": ["round", "spoiler", "duplicator"],
    "properties": {
        "round": {"type": "integer", "minimum": 1},
        "spoiler": {"type": "object", "required": ["graph", "vertex"]},
        "duplicator": {"type": "object", "required": ["graph", "vertex"]},
    },
}


def _obj(required, **props):
    return {"$schema": "https://json-schema.org/draft/2020-12/schema",
            "type": "object", "required": list(required), "properties": props}


SCHEMAS = {
    "error": _obj(["error", "message"], error={"type": "string"},
                  message={"type": "string"}),
    "check": _obj(["holds"], holds={"type": "boolean"}),
    "measure": _obj(["qr", "alt", "length", "classes"],
                    qr={"type": "integer"}, alt={"type": "integer"},
                    length={"type": "integer"},
                    classes={"type": "array", "items": {"type": "string"}}),
    "prenex": _obj(["prenex", "qr", "alt", "length"], prenex={"type": "string"},
                   qr={"type": "integer"}, alt={"type": "integer"},
                   length={"type": "integer"}),
    "dgame": _obj(["D", "trace"], D={"type": "integer", "minimum": 0},
                  alt={"type": ["integer", "null"]},
                  trace={"type": "array", "items": _MOVE}),
    "define": _obj(["sentence", "k", "certificate"], sentence={"type": "string"},
                   k={"type": "integer"}, certificate={"type": "object"}),
    "tree_gen": _obj(["kind", "trees"], kind={"type": "string"},
                     trees={"type": "array"}),
    "tree_check": _obj(["order", "is_tree"], order={"type": "integer"},
                       is_tree={"type": "boolean"}),
    "tree_minimize": _obj(["k", "order_before", "order_after", "violations", "tree"],
                          k={"type": "integer"}, order_before={"type": "integer"},
                          order_after={"type": "integer"},
                          violations={"type": "array"}, tree={"type": "object"}),
    "tm_run": _obj(["m", "omega", "steps"], m={"type": "integer"},
                   omega={"type": "integer"}, steps={"type": "array"}),
    "tm_compile": _obj(["k", "qr", "alt", "length"], k={"type": "integer"},
                       qr={"type": "integer"}, alt={"type": "integer"},
                       length={"type": "integer"}),
    "tm_prenex": _obj(["k", "blocks", "alternations", "qr"], k={"type": "integer"},
                      blocks={"type": "array"}, alternations={"type": "integer"},
                      qr={"type": "integer"}),
    "tm_model": _obj(["graph", "witnesses", "layout"], graph=_GRAPH,
                     witnesses={"type": "object"}, layout={"type": "object"}),
    "tm_verify": _obj(["ok", "order", "running_time", "perturbations"],
                      ok={"type": "boolean"}, order={"type": "integer"},
                      running_time={"type": "integer"},
                      perturbations={"type": "array"}),
    "succinct_table": _obj(["order_bound", "columns", "rows", "non_monotone"],
                           order_bound={"type": "integer"},
                           columns={"type": "array", "items": {"type": "string"}},
                           rows={"type": "array", "items": {
                               "type": "object",
                               "required": ["n", "q_hat", "q_hat_star", "order_bound"]}},
                           non_monotone={"type": "array"}),
    "succinct_bounds": _obj(["k", "rows"], k={"type": "integer"},
                            rows={"type": "array"}),
    "universal_build": _obj(["m", "proxy_order", "layers", "size"],
                            m={"type": "integer"}, proxy_order={"type": "integer"},
                            layers={"type": "array"}, size={"type": "integer"}),
    "universal_apply": _obj(["found"], found={"type": "boolean"}),
    "universal_check": _obj(["ok", "checked", "misses"], ok={"type": "boolean"},
                            checked={"type": "integer"}, misses={"type": "array"}),
    "play": _obj(["winner", "moves"], winner={"enum": ["spoiler", "duplicator"]},
                 moves={"type": "array"}, violation={"type": ["object", "null"]}),
}
