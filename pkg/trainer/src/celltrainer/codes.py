"""Structural-code parsing and graph decoding for the worker side.

The worker talks to the search engine only over the wire protocol, so it
carries its own reader for the textual code grammar: layer indices
comma-separated, "/", then triangular connection rows joined by "|"
(one row per layer 2..k, then the k-bit DePooling row). Node ids: 0 is the
cell input, 1..k the layers, k+1 the DePooling block.
"""

from __future__ import annotations

from dataclasses import dataclass

INPUT = 0

# index -> (op, kernel, padding); all stride 1, size-preserving
LAYER_TABLE = (
    ("conv", 1, 0),
    ("conv", 3, 1),
    ("conv", 5, 2),
    ("conv", 7, 3),
    ("avgpool", 3, 1),
    ("avgpool", 5, 2),
    ("maxpool", 3, 1),
    ("maxpool", 5, 2),
)


class CodeFormatError(ValueError):
    pass


@dataclass(frozen=True)
class CellStructure:
    """Decoded, pruned cell: only layers with a path to DePooling remain."""

    k: int
    layer_types: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    kept_layers: tuple[int, ...]

    @property
    def depooling(self) -> int:
        return self.k + 1

    def predecessors(self, node: int) -> tuple[int, ...]:
        return tuple(sorted(s for s, d in self.edges if d == node))


def parse_code(text: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    head, sep, tail = text.partition("/")
    if not sep:
        raise CodeFormatError(f"missing '/' in code {text!r}")
    try:
        types = tuple(int(p) for p in head.split(","))
    except ValueError:
        raise CodeFormatError(f"bad layer types in {text!r}") from None
    k = len(types)
    if k < 1:
        raise CodeFormatError("empty layer list")
    for t in types:
        if not 0 <= t < len(LAYER_TABLE):
            raise CodeFormatError(f"unknown layer type {t}")
    rows = tail.split("|")
    expected = list(range(1, k)) + [k]
    if len(rows) != len(expected):
        raise CodeFormatError(f"expected {len(expected)} rows, got {len(rows)}")
    bits: list[int] = []
    for row, want in zip(rows, expected):
        if len(row) != want or any(c not in "01" for c in row):
            raise CodeFormatError(f"bad connection row {row!r}")
        bits.extend(int(c) for c in row)
    return types, tuple(bits)


def decode_structure(text: str) -> CellStructure:
    """Parse, apply default input connections, and prune dead layers."""
    types, bits = parse_code(text)
    k = len(types)
    edges = {(INPUT, 1)}
    pos = 0
    targets = list(range(2, k + 1)) + [k + 1]
    widths = list(range(1, k)) + [k]
    for target, width in zip(targets, widths):
        row = bits[pos : pos + width]
        pos += width
        if any(row):
            for source, bit in enumerate(row, start=1):
                if bit:
                    edges.add((source, target))
        else:
            edges.add((INPUT, target))

    dep = k + 1
    ancestors = {dep}
    frontier = [dep]
    while frontier:
        node = frontier.pop()
        for s, d in edges:
            if d == node and s not in ancestors:
                ancestors.add(s)
                frontier.append(s)
    kept = tuple(i for i in range(1, k + 1) if i in ancestors)
    pruned_edges = frozenset(
        (s, d)
        for s, d in edges
        if (s == INPUT or s in ancestors) and (d == dep or d in ancestors)
    )
    return CellStructure(k, types, pruned_edges, kept)
