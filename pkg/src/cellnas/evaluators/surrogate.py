"""Deterministic surrogate landscape for desk-scale search verification.

The candidate cell's symbols (layer-type indices followed by connection
bits) are scored by an epistatic lookup-free landscape: every position
contributes a splitmix64-keyed pseudo-random value depending on its own
symbol and the next ``epistasis`` symbols cyclically. Frozen prefix cells
salt the keys, so each stage searches a reshaped landscape.

The mixing function and key schedule are part of the package's external
interface (see README) so other implementations can reproduce identical
affinities.
"""

from __future__ import annotations

from dataclasses import dataclass

from cellnas._core import MASK64, nk_affinity, splitmix64
from cellnas.evaluators.base import EvaluationRequest, EvaluationResponse
from cellnas.genotype import to_text
from cellnas.graph import ModelSpec


@dataclass(frozen=True)
class SurrogateLandscape:
    seed: int
    epistasis: int = 3

    def __post_init__(self):
        if self.epistasis < 0:
            raise ValueError(f"epistasis must be >= 0, got {self.epistasis}")


def fold_bytes(data: bytes) -> int:
    """Fold a byte string into a 64-bit salt with splitmix64 steps."""
    h = 0
    for b in data:
        h = splitmix64(h ^ b)
    return h


def prefix_salt(model: ModelSpec) -> int:
    """Salt derived from the frozen prefix; 0 for a stage-1 model."""
    if not model.frozen_cells:
        return 0
    return fold_bytes(";".join(to_text(c) for c in model.frozen_cells).encode())


def surrogate_evaluate(model: ModelSpec, landscape: SurrogateLandscape) -> float:
    """Deterministic affinity in [0, 1) for a model spec."""
    cell = model.candidate_cell
    symbols = bytes(cell.layer_types) + bytes(cell.connections)
    return nk_affinity(
        symbols, landscape.seed & MASK64, landscape.epistasis, prefix_salt(model)
    )


class SurrogateEvaluator:
    """Evaluator interface over a surrogate landscape; ignores dataset,
    budget, and seed fields (the landscape alone defines affinity)."""

    def __init__(self, landscape: SurrogateLandscape):
        self.landscape = landscape

    def evaluate(self, request: EvaluationRequest) -> EvaluationResponse:
        affinity = surrogate_evaluate(request.model, self.landscape)
        return EvaluationResponse(id=request.id, affinity=affinity)

    def evaluate_many(self, requests):
        return [self.evaluate(r) for r in requests]
