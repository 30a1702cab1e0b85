"""Similarity measures and population suppression.

Besides the classic bit-vector coefficients, codes are compared by the
interspecific rule: only the final DePooling row matters (it decides what
the cell outputs), and two codes count as similar when their rows carry
nearly the same number of active outputs wired to the same layer types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from cellnas.genotype import CellCode, CodeError, require_valid

DEFAULT_PROPORTION = 2.0 / 3.0


def _check_lengths(a: Sequence[int], b: Sequence[int]) -> None:
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")


def hamming(a: Sequence[int], b: Sequence[int]) -> int:
    """Number of positions where the two sequences differ."""
    _check_lengths(a, b)
    return sum(1 for x, y in zip(a, b) if x != y)


def jaccard(a: Sequence[int], b: Sequence[int]) -> float:
    """|A ∩ B| / |A ∪ B| over the set-bit index sets; 1.0 when both empty."""
    _check_lengths(a, b)
    sa = {i for i, x in enumerate(a) if x}
    sb = {i for i, x in enumerate(b) if x}
    union = sa | sb
    if not union:
        return 1.0
    return len(sa & sb) / len(union)


def tanimoto(a: Sequence[int], b: Sequence[int]) -> float:
    """A.B / (|A|^2 + |B|^2 - A.B) over 0/1 vectors; 1.0 when both zero."""
    _check_lengths(a, b)
    dot = sum(x * y for x, y in zip(a, b))
    na = sum(x * x for x in a)
    nb = sum(y * y for y in b)
    denom = na + nb - dot
    if denom == 0:
        return 1.0
    return dot / denom


@dataclass(frozen=True)
class SimilarityVerdict:
    similar: bool
    ones_a: int
    ones_b: int
    matched_types: int
    threshold: int


def interspecific_similar(
    x: CellCode, y: CellCode, proportion: float = DEFAULT_PROPORTION
) -> SimilarityVerdict:
    """Decide similarity from the two DePooling rows.

    A position contributes to the match counter when both rows have a 1
    there and the layer types at that slot agree; each such position counts
    once per code (so a fully matching pair of rows reaches S, the total
    number of set bits across both rows). Similar iff the set-bit counts
    differ by less than 2 and the counter reaches ceil(proportion * S).
    """
    require_valid(x)
    require_valid(y)
    if x.k != y.k:
        raise CodeError(f"mismatched layer counts: {x.k} vs {y.k}")
    if not 0.0 < proportion <= 1.0:
        raise ValueError(f"proportion {proportion} outside (0, 1]")
    row_x = x.depooling_row
    row_y = y.depooling_row
    ones_a = sum(row_x)
    ones_b = sum(row_y)
    total_ones = ones_a + ones_b
    matched = sum(
        2
        for i in range(x.k)
        if row_x[i] and row_y[i] and x.layer_types[i] == y.layer_types[i]
    )
    threshold = math.ceil(proportion * total_ones)
    similar = abs(ones_a - ones_b) < 2 and matched >= threshold
    return SimilarityVerdict(similar, ones_a, ones_b, matched, threshold)


def suppress(population, proportion: float = DEFAULT_PROPORTION):
    """Remove the worse member of every similar pair.

    Pairs are resolved in descending-affinity order; a removed antibody is
    inert afterwards (it neither removes nor gets re-checked). Returns
    (kept, removed), both preserving the input order. The population's best
    antibody can never be removed.
    """
    for ab in population:
        if ab.affinity is None:
            raise ValueError(f"antibody {ab.id} is unevaluated")
    order = sorted(population, key=lambda ab: (-ab.affinity, ab.id))
    removed_ids: set[int] = set()
    for i, high in enumerate(order):
        if high.id in removed_ids:
            continue
        for low in order[i + 1 :]:
            if low.id in removed_ids:
                continue
            if interspecific_similar(high.code, low.code, proportion).similar:
                removed_ids.add(low.id)
    kept = [ab for ab in population if ab.id not in removed_ids]
    removed = [ab for ab in population if ab.id in removed_ids]
    return kept, removed
