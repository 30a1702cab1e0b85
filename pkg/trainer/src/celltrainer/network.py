"""Materialize a model spec into a trainable CNN.

Architecture contract:
  stem   1x1 convolution (stride 1, no padding) -> batch norm -> ReLU
  cells  chained without skips; inside a cell every convolution is
         followed by batch norm + ReLU, every pooling by batch norm, all
         at stride 1 with size-preserving padding; a node with several
         inputs sums them elementwise
  depool each cell ends in a 1x1 convolution -> batch norm -> ReLU that
         gathers the cell's outputs and manages channel width
  head   one fully-connected layer over the flattened features

Channels: the stem outputs 16; each cell's DePooling block doubles the
width until 64, then holds it. Cell-internal layers preserve both spatial
size and channel count, so elementwise sums are always well-formed.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from celltrainer.codes import INPUT, LAYER_TABLE, CellStructure, decode_structure

STEM_CHANNELS = 16
MAX_CHANNELS = 64


@dataclass(frozen=True)
class DatasetMeta:
    name: str
    channels: int
    classes: int
    image_size: int


def _conv_block(c_in: int, c_out: int, kernel: int, padding: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(c_in, c_out, kernel, stride=1, padding=padding),
        nn.BatchNorm2d(c_out),
        nn.ReLU(inplace=True),
    )


def _make_layer(kind_index: int, channels: int) -> nn.Module:
    op, kernel, padding = LAYER_TABLE[kind_index]
    if op == "conv":
        return _conv_block(channels, channels, kernel, padding)
    if op == "avgpool":
        pool = nn.AvgPool2d(kernel, stride=1, padding=padding)
    else:
        pool = nn.MaxPool2d(kernel, stride=1, padding=padding)
    return nn.Sequential(pool, nn.BatchNorm2d(channels))


class Cell(nn.Module):
    """One decoded cell; pruned layers are simply absent."""

    def __init__(self, structure: CellStructure, c_in: int, c_out: int):
        super().__init__()
        self.structure = structure
        self.ops = nn.ModuleDict(
            {
                str(node): _make_layer(structure.layer_types[node - 1], c_in)
                for node in structure.kept_layers
            }
        )
        self.depool = _conv_block(c_in, c_out, kernel=1, padding=0)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        values = {INPUT: x}
        for node in self.structure.kept_layers:
            inputs = [values[p] for p in self.structure.predecessors(node)]
            total = inputs[0]
            for extra in inputs[1:]:
                total = total + extra
            values[node] = self.ops[str(node)](total)
        dep_inputs = [values[p] for p in self.structure.predecessors(self.structure.depooling)]
        total = dep_inputs[0]
        for extra in dep_inputs[1:]:
            total = total + extra
        return self.depool(total)


class RealizedNetwork(nn.Module):
    def __init__(self, cell_texts: list[str], meta: DatasetMeta):
        super().__init__()
        self.meta = meta
        self.stem = _conv_block(meta.channels, STEM_CHANNELS, kernel=1, padding=0)
        cells = []
        channels = STEM_CHANNELS
        for text in cell_texts:
            c_out = min(MAX_CHANNELS, channels * 2)
            cells.append(Cell(decode_structure(text), channels, c_out))
            channels = c_out
        self.cells = nn.ModuleList(cells)
        self.head = nn.Linear(channels * meta.image_size * meta.image_size, meta.classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.stem(x)
        for cell in self.cells:
            x = cell(x)
        return self.head(torch.flatten(x, start_dim=1))


def build_network(model: dict, meta: DatasetMeta) -> RealizedNetwork:
    """Build from the wire-format model object: frozen cells then candidate."""
    texts = list(model["cells"]) + [model["candidate"]]
    k = int(model["k"])
    for text in texts:
        structure = decode_structure(text)
        if structure.k != k:
            raise ValueError(f"cell {text!r} has k={structure.k}, expected {k}")
    return RealizedNetwork(texts, meta)


def parameter_shapes(network: nn.Module) -> list[tuple[str, tuple[int, ...]]]:
    """Deterministic shape listing, used to check architecture determinism."""
    return [(name, tuple(p.shape)) for name, p in network.named_parameters()]
