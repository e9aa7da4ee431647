import json

import pytest


def wire_graph(nodes=None, input_shape=(4, 6, 8), output=None):
    """Hand-built graph JSON in the engine's wire schema."""
    nodes = nodes if nodes is not None else []
    return {
        "nodes": nodes,
        "input_shape": list(input_shape),
        "output": len(nodes) if output is None else output,
    }


def conv_chain_graph():
    return wire_graph(
        nodes=[
            {"id": 1, "fn": "conv", "param": [16, 3], "inputs": [0], "shape": [4, 6, 16]},
            {"id": 2, "fn": "relu", "param": None, "inputs": [1], "shape": [4, 6, 16]},
            {"id": 3, "fn": "glu", "param": None, "inputs": [2], "shape": [4, 6, 8]},
        ]
    )


def branching_graph():
    return wire_graph(
        nodes=[
            {"id": 1, "fn": "linear", "param": 32, "inputs": [0], "shape": [4, 6, 32]},
            {"id": 2, "fn": "atte", "param": 4, "inputs": [1], "shape": [4, 6, 32]},
            {"id": 3, "fn": "sum", "param": None, "inputs": [2, 0], "shape": [4, 6, 32]},
            {"id": 4, "fn": "lnorm", "param": None, "inputs": [3], "shape": [4, 6, 32]},
        ]
    )


def make_request(graph, request_id="req-1", seed=0, epochs=2, dataset="toy"):
    return {
        "protocol_version": "1",
        "request_id": request_id,
        "graph": graph,
        "data": {
            "dataset_name": dataset,
            "max_len": graph["input_shape"][1],
            "embed_dim": graph["input_shape"][2],
            "num_classes": 2,
            "epochs": epochs,
            "lr": 0.01,
            "seed": seed,
            "embeddings": "none",
        },
    }


@pytest.fixture
def request_line():
    return json.dumps(make_request(conv_chain_graph())) + "\n"
