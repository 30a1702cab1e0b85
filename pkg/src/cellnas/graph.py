"""Decoding cell codes into realized DAGs.

Node ids inside a cell: 0 is the cell input, 1..k are the coded layers,
k+1 is the DePooling block. Edges always run from lower to higher id, so
every decoded graph is acyclic by construction.

The default-connection rule guarantees no cell is ever empty: any layer
(and the DePooling block) whose whole incoming row is zero is wired to the
cell input directly, and layer 1 is always fed by the input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from cellnas.genotype import LAYER_CATALOG, CellCode, LayerKind, require_valid

INPUT = 0


@dataclass(frozen=True)
class CellGraph:
    """The DAG realized by one cell code."""

    k: int
    layer_types: tuple[int, ...]
    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]
    pruned: bool

    @property
    def depooling(self) -> int:
        return self.k + 1

    @property
    def layers(self) -> tuple[int, ...]:
        """Ids of layer nodes still present, in position order."""
        return tuple(i for i in range(1, self.k + 1) if i in self.nodes)

    def kind_of(self, node: int) -> LayerKind:
        if not 1 <= node <= self.k:
            raise ValueError(f"node {node} is not a layer")
        return LAYER_CATALOG[self.layer_types[node - 1]]

    def in_degree(self, node: int) -> int:
        return sum(1 for _, dst in self.edges if dst == node)

    def predecessors(self, node: int) -> tuple[int, ...]:
        return tuple(sorted(src for src, dst in self.edges if dst == node))

    def has_path(self, start: int, end: int) -> bool:
        frontier = [start]
        seen = {start}
        while frontier:
            node = frontier.pop()
            if node == end:
                return True
            for src, dst in self.edges:
                if src == node and dst not in seen:
                    seen.add(dst)
                    frontier.append(dst)
        return False


@dataclass(frozen=True)
class ModelSpec:
    """A chain of frozen memory cells plus the current stage's candidate."""

    frozen_cells: tuple[CellCode, ...]
    candidate_cell: CellCode
    layers_per_cell: int

    def __post_init__(self):
        object.__setattr__(self, "frozen_cells", tuple(self.frozen_cells))
        for code in (*self.frozen_cells, self.candidate_cell):
            require_valid(code)
            if code.k != self.layers_per_cell:
                raise ValueError(
                    f"cell has k={code.k}, spec requires {self.layers_per_cell}"
                )

    @property
    def stage_index(self) -> int:
        return len(self.frozen_cells) + 1

    @property
    def cells(self) -> tuple[CellCode, ...]:
        """All cells in chain order: frozen prefix, then the candidate."""
        return (*self.frozen_cells, self.candidate_cell)


def decode(code: CellCode) -> CellGraph:
    """Realize the DAG: bit edges plus default input connections."""
    require_valid(code)
    k = code.k
    edges = {(INPUT, 1)}  # layer 1 is always fed by the cell input
    rows = code.rows()
    targets = list(range(2, k + 1)) + [k + 1]
    for target, row in zip(targets, rows):
        any_set = False
        for source, bit in enumerate(row, start=1):
            if bit:
                edges.add((source, target))
                any_set = True
        if not any_set:
            edges.add((INPUT, target))
    nodes = frozenset(range(k + 2))
    return CellGraph(k, code.layer_types, nodes, frozenset(edges), pruned=False)


def prune_unreachable(graph: CellGraph) -> CellGraph:
    """Drop layers with no directed path to DePooling (they never train).

    Input and DePooling are always kept. Idempotent.
    """
    dep = graph.depooling
    # Walk incoming edges from DePooling; the surviving layers are exactly
    # its ancestors.
    ancestors = {dep}
    frontier = [dep]
    while frontier:
        node = frontier.pop()
        for src, dst in graph.edges:
            if dst == node and src not in ancestors:
                ancestors.add(src)
                frontier.append(src)
    kept = frozenset(
        n for n in graph.nodes if n in (INPUT, dep) or n in ancestors
    )
    edges = frozenset(
        (src, dst) for src, dst in graph.edges if src in kept and dst in kept
    )
    return CellGraph(graph.k, graph.layer_types, kept, edges, pruned=True)


def _node_label(graph: CellGraph, node: int) -> str:
    if node == INPUT:
        return "Input"
    if node == graph.depooling:
        return "DePooling 1x1"
    kind = graph.kind_of(node)
    return f"L{node} {kind.name} ({kind.kernel}x{kind.kernel})"


def _dot_body(graph: CellGraph, prefix: str, lines: list[str]) -> None:
    for node in sorted(graph.nodes):
        lines.append(f'  {prefix}n{node} [label="{_node_label(graph, node)}"];')
    for src, dst in sorted(graph.edges):
        lines.append(f"  {prefix}n{src} -> {prefix}n{dst};")


def export_dot(obj: CellGraph | ModelSpec) -> str:
    """Render a cell graph, or a whole model chain, as a DOT digraph."""
    if isinstance(obj, CellGraph):
        lines = ["digraph cell {"]
        _dot_body(obj, "", lines)
        lines.append("}")
        return "\n".join(lines) + "\n"
    if isinstance(obj, ModelSpec):
        lines = ["digraph model {"]
        cells = obj.cells
        for idx, code in enumerate(cells, start=1):
            graph = prune_unreachable(decode(code))
            lines.append(f"  subgraph cluster_{idx} {{")
            lines.append(f'    label="cell {idx}";')
            for node in sorted(graph.nodes):
                lines.append(
                    f'    c{idx}n{node} [label="{_node_label(graph, node)}"];'
                )
            for src, dst in sorted(graph.edges):
                lines.append(f"    c{idx}n{src} -> c{idx}n{dst};")
            lines.append("  }")
        # Cells are chained: each DePooling feeds the next cell's input.
        for idx in range(1, len(cells)):
            dep = obj.layers_per_cell + 1
            lines.append(f"  c{idx}n{dep} -> c{idx + 1}n0;")
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise TypeError(f"cannot render {type(obj).__name__} as DOT")


def graph_records(graph: CellGraph) -> list[dict]:
    """Node and edge records, one dict each, in deterministic order."""
    records: list[dict] = []
    for node in sorted(graph.nodes):
        if node == INPUT:
            records.append({"type": "node", "id": node, "role": "input"})
        elif node == graph.depooling:
            records.append({"type": "node", "id": node, "role": "depooling"})
        else:
            kind = graph.kind_of(node)
            records.append(
                {
                    "type": "node",
                    "id": node,
                    "role": "layer",
                    "kind": kind.name,
                    "kernel": kind.kernel,
                }
            )
    for src, dst in sorted(graph.edges):
        records.append({"type": "edge", "source": src, "target": dst})
    return records


def dump_graph(graph: CellGraph) -> str:
    """Line-delimited JSON dump, same framing as the worker protocol."""
    return "\n".join(
        json.dumps(record, sort_keys=True, separators=(",", ":"))
        for record in graph_records(graph)
    ) + "\n"


__all__ = [
    "INPUT",
    "CellGraph",
    "ModelSpec",
    "decode",
    "prune_unreachable",
    "export_dot",
    "graph_records",
    "dump_graph",
]
