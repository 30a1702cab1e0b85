"""Two-component structural codes for searched cells.

A cell with k internal layers is encoded as:

* first component: k indices into the 8-entry layer catalog, and
* second component: k*(k+1)/2 connection bits laid out as triangular rows —
  one row per target layer 2..k (bits for source layers 1..target-1, in
  source order) followed by a final k-bit row wiring layers 1..k into the
  cell-terminal DePooling block.

Text form: layer indices comma-separated, "/", then the rows joined by "|",
e.g. "0,1,2,3/1|10|010|1010".
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum


class CodeError(ValueError):
    """Raised when a structural code or its text form is invalid."""


class OpClass(Enum):
    CONVOLUTION = "convolution"
    AVERAGE_POOLING = "average-pooling"
    MAX_POOLING = "max-pooling"


@dataclass(frozen=True)
class LayerKind:
    """One entry of the layer catalog: a square kernel at stride 1.

    Padding is (kernel - 1) // 2, so every kind preserves spatial size.
    """

    index: int
    name: str
    op_class: OpClass
    kernel: int
    padding: int


LAYER_CATALOG: tuple[LayerKind, ...] = (
    LayerKind(0, "conv1x1", OpClass.CONVOLUTION, 1, 0),
    LayerKind(1, "conv3x3", OpClass.CONVOLUTION, 3, 1),
    LayerKind(2, "conv5x5", OpClass.CONVOLUTION, 5, 2),
    LayerKind(3, "conv7x7", OpClass.CONVOLUTION, 7, 3),
    LayerKind(4, "avgpool3x3", OpClass.AVERAGE_POOLING, 3, 1),
    LayerKind(5, "avgpool5x5", OpClass.AVERAGE_POOLING, 5, 2),
    LayerKind(6, "maxpool3x3", OpClass.MAX_POOLING, 3, 1),
    LayerKind(7, "maxpool5x5", OpClass.MAX_POOLING, 5, 2),
)

NUM_LAYER_KINDS = len(LAYER_CATALOG)


def second_component_length(k: int) -> int:
    """Number of connection bits for a cell with k layers: k*(k+1)/2."""
    if k < 1:
        raise CodeError(f"invalid layer count {k}: a cell needs at least one layer")
    return (1 + k) * k // 2


def row_lengths(k: int) -> list[int]:
    """Lengths of the connection rows: 1..k-1 for layer targets, then k."""
    return list(range(1, k)) + [k]


def connection_bit_index(k: int, target: int, source: int) -> int:
    """Zero-based bit position of the edge source -> target.

    Targets are layers 2..k; the DePooling block counts as position k+1.
    Layer 1 has no row (it is always fed by the cell input).
    """
    if k < 1:
        raise CodeError(f"invalid layer count {k}")
    if target == 1:
        raise CodeError("layer 1 has no connection row")
    if not 2 <= target <= k + 1:
        raise CodeError(f"target {target} out of range for k={k}")
    if source < 1 or source >= target:
        raise CodeError(f"source {source} must precede target {target}")
    if target == k + 1:  # DePooling row sits after all layer rows
        offset = k * (k - 1) // 2
    else:
        if source > target - 1:
            raise CodeError(f"source {source} out of range for target {target}")
        offset = (target - 1) * (target - 2) // 2
    return offset + source - 1


@dataclass(frozen=True)
class CellCode:
    """Immutable two-component code. Construction does not validate; use
    :func:`validate` / :func:`require_valid`."""

    layer_types: tuple[int, ...]
    connections: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "layer_types", tuple(self.layer_types))
        object.__setattr__(self, "connections", tuple(self.connections))

    @property
    def k(self) -> int:
        return len(self.layer_types)

    @property
    def depooling_row(self) -> tuple[int, ...]:
        """The final k bits: sources wired into the DePooling block."""
        return self.connections[-self.k :]

    def rows(self) -> list[tuple[int, ...]]:
        """Connection bits split into rows (targets 2..k, then DePooling)."""
        out, pos = [], 0
        for length in row_lengths(self.k):
            out.append(self.connections[pos : pos + length])
            pos += length
        return out


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.problems


def validate(code: CellCode) -> ValidationReport:
    """Check both length invariants and the layer-type alphabet."""
    problems = []
    k = code.k
    if k < 1:
        problems.append("empty first component: a cell needs at least one layer")
    else:
        expected = second_component_length(k)
        if len(code.connections) != expected:
            problems.append(
                f"wrong connection length: expected {expected} bits for k={k}, "
                f"got {len(code.connections)}"
            )
    for i, t in enumerate(code.layer_types):
        if not 0 <= t < NUM_LAYER_KINDS:
            problems.append(f"unknown layer type {t} at slot {i + 1}")
    for i, b in enumerate(code.connections):
        if b not in (0, 1):
            problems.append(f"connection value {b} at bit {i} is not 0/1")
    return ValidationReport(tuple(problems))


def require_valid(code: CellCode) -> CellCode:
    report = validate(code)
    if not report.ok:
        raise CodeError("invalid cell code: " + "; ".join(report.problems))
    return code


def random_code(k: int, rng: random.Random) -> CellCode:
    """Uniform random code: each type over the catalog, each bit over {0,1}."""
    if k < 1:
        raise CodeError(f"invalid layer count {k}")
    types = tuple(rng.randrange(NUM_LAYER_KINDS) for _ in range(k))
    bits = tuple(rng.randrange(2) for _ in range(second_component_length(k)))
    return CellCode(types, bits)


def to_text(code: CellCode) -> str:
    require_valid(code)
    types = ",".join(str(t) for t in code.layer_types)
    rows = "|".join("".join(str(b) for b in row) for row in code.rows())
    return f"{types}/{rows}"


def from_text(text: str) -> CellCode:
    """Parse the textual grammar; rejects malformed or invalid codes."""
    head, sep, tail = text.partition("/")
    if not sep:
        raise CodeError(f"malformed code text {text!r}: missing '/' separator")
    try:
        types = tuple(int(part) for part in head.split(","))
    except ValueError:
        raise CodeError(f"malformed layer types {head!r}") from None
    k = len(types)
    rows = tail.split("|")
    if k >= 1 and len(rows) != k:
        raise CodeError(f"expected {k} connection rows for k={k}, got {len(rows)}")
    expected_lengths = row_lengths(k) if k >= 1 else []
    bits: list[int] = []
    for row, expected in zip(rows, expected_lengths):
        if len(row) != expected:
            raise CodeError(
                f"connection row {row!r} has {len(row)} bits, expected {expected}"
            )
        for ch in row:
            if ch not in "01":
                raise CodeError(f"invalid connection bit {ch!r} in row {row!r}")
            bits.append(int(ch))
    return require_valid(CellCode(types, tuple(bits)))
