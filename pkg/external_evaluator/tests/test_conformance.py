"""Protocol conformance against the search engine's external interface.

Drives the engine strictly through its CLI and the wire protocol: a
full desk search against the shuffling echo evaluator must complete
with correct request/response correlation, and the engine's graph JSON
must survive a wire round-trip unchanged.
"""

import json
import subprocess
import sys

import numpy as np
import pytest

from refeval.glove import GloveError, load_glove
from refeval.server import echo_handler

from conftest import branching_graph, conv_chain_graph, make_request, wire_graph


def refeval_cmd(*extra: str) -> str:
    return " ".join([sys.executable, "-m", "refeval", "--mode", "echo", *extra])


def run_engine_search(tmp_path, name: str, generations: int = 30) -> dict:
    out_dir = tmp_path / name
    config = {
        "preset": "desk",
        "seed": 7,
        "evolution": {"max_generation": generations},
        "data": {"source": "external"},
        "output_dir": str(out_dir),
        "external": refeval_cmd("--shuffle", "4"),
    }
    cfg_path = tmp_path / f"{name}.json"
    cfg_path.write_text(json.dumps(config))
    proc = subprocess.run(
        [sys.executable, "-m", "gridnas", "search", "--config", str(cfg_path)],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    return {
        "history": [json.loads(line) for line in (out_dir / "history.jsonl").open()],
        "history_bytes": (out_dir / "history.jsonl").read_bytes(),
        "best_graph_text": (out_dir / "best_graph.json").read_text(),
        "summary": json.loads((out_dir / "summary.json").read_text()),
    }


def test_full_desk_search_against_shuffling_echo(tmp_path):
    result = run_engine_search(tmp_path, "search_a")
    assert len(result["history"]) == 30
    assert 0.0 <= result["summary"]["best_fitness"] <= 1.0
    # echo fitness is a pure function of the graph, so if request ids were
    # ever mismatched under shuffling, a rerun would diverge
    again = run_engine_search(tmp_path, "search_b")
    assert again["history_bytes"] == result["history_bytes"]
    print("\n[PASS] desk search against the shuffling echo evaluator (30 generations, reproducible)")


def test_correlation_under_deliberate_shuffle():
    graphs = [wire_graph(), conv_chain_graph(), branching_graph()]
    requests = [
        json.dumps(make_request(g, request_id=f"req-{i}")) for i, g in enumerate(graphs)
    ]
    expected = {
        f"req-{i}": echo_handler(make_request(g, request_id=f"req-{i}"))["fitness"]
        for i, g in enumerate(graphs)
    }
    assert len(set(expected.values())) == len(graphs)  # distinct, mismatch would show
    proc = subprocess.run(
        [sys.executable, "-m", "refeval", "--mode", "echo", "--shuffle", "3"],
        input="\n".join(requests) + "\n",
        capture_output=True,
        text=True,
        timeout=60,
    )
    responses = [json.loads(line) for line in proc.stdout.strip().splitlines()]
    assert [r["request_id"] for r in responses] == ["req-2", "req-1", "req-0"]  # reversed
    for response in responses:
        assert response["status"] == "ok"
        assert response["fitness"] == expected[response["request_id"]]
    print("\n[PASS] request ids stay correlated under reversed response order")


def test_engine_graph_json_roundtrips_identically(tmp_path):
    result = run_engine_search(tmp_path, "search_rt", generations=3)
    wire_text = result["best_graph_text"].strip()
    assert json.dumps(json.loads(wire_text)) == wire_text
    print("\n[PASS] engine-emitted graph JSON round-trips byte-identically")


def test_glove_toy_file_examples(tmp_path):
    # exact copy at full coverage
    toy = tmp_path / "toy.txt"
    toy.write_text("a 1.0 2.0 3.0\nb 4.0 5.0 6.0\nc 7.0 8.0 9.0\n")
    table, covered = load_glove(str(toy), ["a", "b", "c"], 3, np.random.default_rng(0))
    assert covered == 3 and table.tolist()[0] == [1.0, 2.0, 3.0]
    # dimension mismatch is an error
    with pytest.raises(GloveError):
        load_glove(str(toy), ["a"], 300, np.random.default_rng(0))
    # exactly the uncovered half is random-initialized
    table, covered = load_glove(str(toy), ["a", "b", "x", "y"], 3, np.random.default_rng(1))
    assert covered == 2
    assert table[0].tolist() == [1.0, 2.0, 3.0] and table[1].tolist() == [4.0, 5.0, 6.0]
    assert np.abs(table[2:]).max() <= 0.1  # noise scale, not copied rows
    print("\n[PASS] toy GloVe file loading satisfies its three examples")
