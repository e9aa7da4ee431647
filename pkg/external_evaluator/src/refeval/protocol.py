"""Evaluation wire protocol: one JSON object per line, UTF-8.

Request:  {"protocol_version": "1", "request_id": str, "graph": {...},
           "data": {dataset_name, max_len, embed_dim, num_classes,
                    epochs, lr, seed, embeddings}}
Response: {"request_id": str, "status": "ok", "fitness": float}
        | {"request_id": str, "status": "error", "message": str}

Responses may be sent in any order; the engine correlates by
request_id. A malformed request yields an error response and the
server stays alive.
"""

from __future__ import annotations

import json

PROTOCOL_VERSION = "1"

GRAPH_KEYS = {"nodes", "input_shape", "output"}
NODE_KEYS = {"id", "fn", "param", "inputs", "shape"}
ONE_INPUT = {"conv", "atte", "linear", "relu", "lnorm", "glu"}
KNOWN_FNS = ONE_INPUT | {"sum"}


class RequestError(ValueError):
    """The request violates the protocol; carries the message to send back."""


def ok_response(request_id: str, fitness: float) -> dict:
    return {"request_id": request_id, "status": "ok", "fitness": float(fitness)}


def error_response(request_id: str, message: str) -> dict:
    return {"request_id": request_id, "status": "error", "message": message}


def encode(obj: dict) -> str:
    return json.dumps(obj) + "\n"


def expected_dim(fn: str, param, in_dims: list[int]) -> int:
    if fn == "conv":
        return int(param[0])
    if fn == "linear":
        return int(param)
    if fn == "sum":
        return max(in_dims)
    if fn == "glu":
        return (in_dims[0] + 1) // 2
    return in_dims[0]  # atte / relu / lnorm keep the width


def validate_graph(graph: dict) -> None:
    """Re-check that the declared shapes are self-consistent."""
    if not isinstance(graph, dict) or set(graph) != GRAPH_KEYS:
        raise RequestError(f"graph must have keys {sorted(GRAPH_KEYS)}")
    b, l, d = graph["input_shape"]
    if min(b, l, d) < 1:
        raise RequestError("input_shape components must be >= 1")
    dims = {0: d}
    for pos, node in enumerate(graph["nodes"], start=1):
        if set(node) != NODE_KEYS:
            raise RequestError(f"node must have keys {sorted(NODE_KEYS)}")
        if node["id"] != pos:
            raise RequestError(f"node ids must be dense and ordered; got {node['id']} at {pos}")
        fn = node["fn"]
        if fn not in KNOWN_FNS:
            raise RequestError(f"unknown function {fn!r}")
        want_arity = 1 if fn in ONE_INPUT else 2
        if len(node["inputs"]) != want_arity:
            raise RequestError(f"{fn} takes {want_arity} input(s)")
        in_dims = []
        for src in node["inputs"]:
            if src not in dims or src >= pos:
                raise RequestError(f"node {pos} reads undefined input {src}")
            in_dims.append(dims[src])
        if fn == "glu" and in_dims[0] < 2:
            raise RequestError(f"node {pos}: glu requires dim >= 2")
        nb, nl, nd = node["shape"]
        if (nb, nl) != (b, l):
            raise RequestError(f"node {pos} changes batch or length")
        if nd != expected_dim(fn, node["param"], in_dims):
            raise RequestError(
                f"node {pos} declares dim {nd}, rule gives {expected_dim(fn, node['param'], in_dims)}"
            )
        dims[pos] = nd
    if graph["output"] not in dims:
        raise RequestError(f"output {graph['output']} is not a node position")


def parse_request(line: str) -> dict:
    try:
        request = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RequestError(f"not valid JSON: {exc}") from exc
    if not isinstance(request, dict):
        raise RequestError("request must be a JSON object")
    if request.get("protocol_version") != PROTOCOL_VERSION:
        raise RequestError("unsupported version")
    if not isinstance(request.get("request_id"), str):
        raise RequestError("request_id must be a string")
    data = request.get("data")
    if not isinstance(data, dict):
        raise RequestError("data section missing")
    for field in ("dataset_name", "max_len", "embed_dim", "num_classes", "epochs", "lr", "seed"):
        if field not in data:
            raise RequestError(f"data.{field} missing")
    validate_graph(request.get("graph"))
    return request


def request_id_of(line: str) -> str:
    """Best-effort request id extraction for error responses."""
    try:
        parsed = json.loads(line)
        rid = parsed.get("request_id") if isinstance(parsed, dict) else None
        return rid if isinstance(rid, str) else "?"
    except json.JSONDecodeError:
        return "?"
