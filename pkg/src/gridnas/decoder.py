"""Genotype -> architecture decoding with shape inference.

The decoded graph keeps only active nodes, remapped to dense positions
(position 0 is the graph input), with every node's output shape inferred
front to back. Decoding is pure: the same genotype always yields a
structurally identical graph.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

from .errors import CatalogError, DecodeError, ShapeError
from .functions import (
    CatalogConfig,
    Fn,
    ParamValue,
    TensorShape,
    arity,
    describe,
    infer_shape,
)
from .genome import Genotype, active_nodes


@dataclass(frozen=True)
class GraphNode:
    id: int
    function: Fn
    param: ParamValue
    inputs: tuple[int, ...]
    out_shape: TensorShape


@dataclass(frozen=True)
class ArchitectureGraph:
    nodes: tuple[GraphNode, ...]
    input_shape: TensorShape
    output_node: int  # dense position; 0 means the graph input itself


def decode(
    genotype: Genotype, catalog: CatalogConfig, input_shape: TensorShape
) -> ArchitectureGraph:
    """Extract the active subgraph and infer shapes along it.

    Raises CatalogError when an active gene uses a disabled function and
    DecodeError (naming the node) when shape inference fails. A genotype
    whose output is wired straight to the input decodes to the identity
    graph with zero nodes.
    """
    input_shape.validate()
    active = active_nodes(genotype)
    remap = {0: 0}
    for pos, ref in enumerate(active, start=1):
        remap[ref] = pos
    shapes: dict[int, TensorShape] = {0: input_shape}
    nodes: list[GraphNode] = []
    for pos, ref in enumerate(active, start=1):
        gene = genotype.gene(ref)
        if gene.function not in catalog:
            raise CatalogError(
                f"node {ref} uses {gene.function}, not in catalog {catalog.names()}"
            )
        if arity(gene.function) == 2:
            inputs = (remap[gene.in1], remap[gene.in2])
            in_shapes = (shapes[gene.in1], shapes[gene.in2])
        else:
            inputs = (remap[gene.in1],)
            in_shapes = (shapes[gene.in1], None)
        try:
            out_shape = infer_shape(gene.function, gene.param, in_shapes[0], in_shapes[1])
        except ShapeError as exc:
            raise DecodeError(f"node {ref} ({describe(gene.function, gene.param)}): {exc}") from exc
        shapes[ref] = out_shape
        nodes.append(GraphNode(pos, gene.function, gene.param, inputs, out_shape))
    return ArchitectureGraph(
        nodes=tuple(nodes),
        input_shape=input_shape,
        output_node=remap[genotype.output],
    )


def output_shape(graph: ArchitectureGraph) -> TensorShape:
    if graph.output_node == 0:
        return graph.input_shape
    return graph.nodes[graph.output_node - 1].out_shape


@dataclass(frozen=True)
class ValidityReport:
    active_count: int
    bounds_ok: bool
    functions_ok: bool
    decodable: bool
    error: Optional[str] = None

    @property
    def valid(self) -> bool:
        return self.bounds_ok and self.functions_ok and self.decodable


def validate(
    genotype: Genotype, catalog: CatalogConfig, input_shape: TensorShape
) -> ValidityReport:
    """Check active bounds, catalog membership and decodability.

    Report-valued: an invalid genotype is not an error here; evolution
    policy assigns it fitness 0.0.
    """
    count = len(active_nodes(genotype))
    cfg = genotype.config
    bounds_ok = cfg.active_min <= count <= cfg.active_max
    try:
        decode(genotype, catalog, input_shape)
    except CatalogError as exc:
        return ValidityReport(count, bounds_ok, False, False, str(exc))
    except DecodeError as exc:
        return ValidityReport(count, bounds_ok, True, False, str(exc))
    return ValidityReport(count, bounds_ok, True, True)


def graph_to_json(graph: ArchitectureGraph) -> dict:
    return {
        "nodes": [
            {
                "id": n.id,
                "fn": n.function.value,
                "param": list(n.param) if isinstance(n.param, tuple) else n.param,
                "inputs": list(n.inputs),
                "shape": list(n.out_shape),
            }
            for n in graph.nodes
        ],
        "input_shape": list(graph.input_shape),
        "output": graph.output_node,
    }


def graph_from_json(data: dict) -> ArchitectureGraph:
    nodes = []
    for entry in data["nodes"]:
        param = entry["param"]
        if isinstance(param, list):
            param = tuple(param)
        nodes.append(
            GraphNode(
                id=int(entry["id"]),
                function=Fn(entry["fn"]),
                param=param,
                inputs=tuple(int(i) for i in entry["inputs"]),
                out_shape=TensorShape(*entry["shape"]),
            )
        )
    return ArchitectureGraph(
        nodes=tuple(nodes),
        input_shape=TensorShape(*data["input_shape"]),
        output_node=int(data["output"]),
    )


def graph_digest(graph: ArchitectureGraph) -> str:
    """Canonical digest of the decoded graph; equal for equal phenotypes."""
    blob = json.dumps(graph_to_json(graph), separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _shape_label(shape: TensorShape) -> str:
    return f"{shape.batch}x{shape.length}x{shape.dim}"


def to_dot(graph: ArchitectureGraph) -> str:
    """Render the graph in DOT syntax (one vertex per node, plus Input/Output)."""
    lines = ["digraph architecture {", "  rankdir=LR;"]
    lines.append(f'  input [shape=box, label="Input {_shape_label(graph.input_shape)}"];')
    for node in graph.nodes:
        label = f"{describe(node.function, node.param)} {_shape_label(node.out_shape)}"
        lines.append(f'  n{node.id} [label="{label}"];')
    lines.append('  output [shape=box, label="Output"];')
    for node in graph.nodes:
        for src in node.inputs:
            src_name = "input" if src == 0 else f"n{src}"
            lines.append(f"  {src_name} -> n{node.id};")
    out_name = "input" if graph.output_node == 0 else f"n{graph.output_node}"
    lines.append(f"  {out_name} -> output;")
    lines.append("}")
    return "\n".join(lines) + "\n"
