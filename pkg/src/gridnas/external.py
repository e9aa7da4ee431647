"""Bridge to an out-of-process fitness evaluator.

Wire contract: one JSON object per line over the child's stdin/stdout.
Requests carry a protocol version, a request id, the decoded graph and
the data section; responses echo the request id with either a fitness
or an error message. Responses may arrive in any order (correlation is
by request id only) and up to one generation's worth of requests is
kept in flight.
"""

from __future__ import annotations

import json
import logging
import shlex
import subprocess
from typing import Optional

from .data import DataConfig
from .decoder import decode, graph_to_json, validate
from .errors import EvaluationFailure, GridnasError
from .evaluator import FitnessRecord
from .functions import CatalogConfig, TensorShape
from .genome import Genotype, phenotype_hash

log = logging.getLogger(__name__)

PROTOCOL_VERSION = "1"


class ProtocolError(GridnasError):
    """The external evaluator broke the wire contract."""


def data_section(cfg: DataConfig) -> dict:
    return {
        "dataset_name": cfg.dataset_name,
        "max_len": cfg.max_len,
        "embed_dim": cfg.embed_dim,
        "num_classes": cfg.num_classes,
        "epochs": cfg.epochs,
        "lr": cfg.lr,
        "seed": cfg.seed,
        "embeddings": "none",
    }


class ExternalEvaluatorClient:
    """Spawns the evaluator command and speaks the line protocol to it."""

    def __init__(self, cmd: str):
        self.cmd = cmd
        self.proc = subprocess.Popen(
            shlex.split(cmd),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            encoding="utf-8",
        )
        self._counter = 0

    def _next_id(self) -> str:
        self._counter += 1
        return f"req-{self._counter:08d}"

    def _send(self, request: dict) -> None:
        assert self.proc.stdin is not None
        try:
            self.proc.stdin.write(json.dumps(request) + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, ValueError) as exc:
            raise ProtocolError(f"evaluator process is gone: {exc}") from exc

    def _read_response(self) -> dict:
        assert self.proc.stdout is not None
        while True:
            line = self.proc.stdout.readline()
            if line == "":
                raise ProtocolError("evaluator closed its stdout")
            line = line.strip()
            if not line:
                continue
            try:
                response = json.loads(line)
            except json.JSONDecodeError:
                log.warning("ignoring non-JSON line from evaluator: %r", line[:200])
                continue
            if not isinstance(response, dict) or "request_id" not in response:
                log.warning("ignoring malformed response: %r", line[:200])
                continue
            return response

    def evaluate_graphs(self, graphs: list[dict], data: dict) -> list[float]:
        """Pipeline all requests, then collect and correlate the responses."""
        ids = []
        for graph_json in graphs:
            rid = self._next_id()
            ids.append(rid)
            self._send(
                {
                    "protocol_version": PROTOCOL_VERSION,
                    "request_id": rid,
                    "graph": graph_json,
                    "data": data,
                }
            )
        wanted = set(ids)
        results: dict[str, float] = {}
        while wanted:
            response = self._read_response()
            rid = response["request_id"]
            if rid not in wanted:
                log.warning("response for unknown request %r ignored", rid)
                continue
            wanted.discard(rid)
            if response.get("status") == "ok":
                fitness = float(response.get("fitness", 0.0))
                results[rid] = min(max(fitness, 0.0), 1.0)
            else:
                log.warning(
                    "evaluator error for %s: %s", rid, response.get("message", "<no message>")
                )
                results[rid] = 0.0
        return [results[rid] for rid in ids]

    def close(self) -> None:
        if self.proc.stdin is not None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
        try:
            self.proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self.proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class ExternalFitnessEvaluator:
    """Genotype-level evaluator that delegates training over the bridge.

    Invalid genotypes are scored 0.0 locally without a request; valid
    ones are decoded to graph JSON and shipped out, pipelined per
    generation via `evaluate_many`.
    """

    def __init__(self, data_cfg: DataConfig, catalog: CatalogConfig, cmd: str, use_cache: bool = True):
        self.data_cfg = data_cfg
        self.catalog = catalog
        self.use_cache = use_cache
        self.client = ExternalEvaluatorClient(cmd)
        self.input_shape = TensorShape(data_cfg.batch_size, data_cfg.max_len, data_cfg.embed_dim)
        self.cache: dict[str, float] = {}
        self.records: list[FitnessRecord] = []
        self.calls = 0
        self.generation: Optional[int] = None

    def note_generation(self, generation: int) -> None:
        self.generation = generation

    def evaluate_many(self, genotypes: list[Genotype]) -> list[float]:
        self.calls += len(genotypes)
        hashes = [phenotype_hash(g) for g in genotypes]
        fitnesses: list[Optional[float]] = [None] * len(genotypes)
        to_send: list[int] = []
        for i, (g, h) in enumerate(zip(genotypes, hashes)):
            if self.use_cache and h in self.cache:
                fitnesses[i] = self.cache[h]
            elif not validate(g, self.catalog, self.input_shape).valid:
                fitnesses[i] = 0.0
            else:
                to_send.append(i)
        if to_send:
            graphs = [
                graph_to_json(decode(genotypes[i], self.catalog, self.input_shape))
                for i in to_send
            ]
            try:
                remote = self.client.evaluate_graphs(graphs, data_section(self.data_cfg))
            except ProtocolError as exc:
                raise EvaluationFailure(genotypes[to_send[0]], exc) from exc
            for i, fitness in zip(to_send, remote):
                fitnesses[i] = fitness
        done = [float(f) for f in fitnesses if f is not None]
        assert len(done) == len(genotypes)
        for h, f in zip(hashes, done):
            self.records.append(
                FitnessRecord(phenotype=h, fitness=f, seconds=0.0, generation=self.generation)
            )
            if self.use_cache:
                self.cache[h] = f
        return done

    def __call__(self, genotype: Genotype) -> float:
        return self.evaluate_many([genotype])[0]

    def close(self) -> None:
        self.client.close()
