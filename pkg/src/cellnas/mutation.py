"""Adaptive hypermutation: rate schedule and the three mutation tiers.

Tier regions
    Light     final DePooling row only (the last k connection bits)
    Moderate  the whole connection component
    Drastic   connection component plus the layer-type slots

The rate maps to a discrete count m = max(1, round(rate * region size)),
so every mutation changes at least one position.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from cellnas.genotype import NUM_LAYER_KINDS, CellCode, require_valid


class MutationTier(Enum):
    LIGHT = "light"
    MODERATE = "moderate"
    DRASTIC = "drastic"


@dataclass(frozen=True)
class MutationParams:
    """Rate constants; the high rate k2 applies below average affinity."""

    k1: float = 0.1
    k2: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.k1 < 1.0 or not 0.0 < self.k2 < 1.0:
            raise ValueError(f"rates must lie in (0,1): k1={self.k1}, k2={self.k2}")
        if not self.k1 < self.k2:
            raise ValueError(f"k1 must be < k2, got k1={self.k1}, k2={self.k2}")


def mutation_rate(
    a_prime: float, a_max: float, a_avg: float, params: MutationParams
) -> float:
    """Per-clone mutation rate, inversely tied to affinity.

    Clones below the pool average mutate at k2; above it the rate falls
    linearly from k1 (at the average) to 0 (at the pool maximum).
    """
    for name, value in (("a_prime", a_prime), ("a_max", a_max), ("a_avg", a_avg)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name}={value} outside [0, 1]")
    if a_avg > a_max:
        raise ValueError(f"a_avg={a_avg} exceeds a_max={a_max}")
    if a_prime > a_max:
        raise ValueError(f"a_prime={a_prime} exceeds a_max={a_max}")
    if a_prime < a_avg:
        return params.k2
    if a_max == a_avg:  # degenerate pool: every clone at the same affinity
        return params.k1
    rate = params.k1 * (a_max - a_prime) / (a_max - a_avg)
    return min(max(rate, 0.0), params.k2)


def assign_tier(rank: int, pool_size: int) -> MutationTier:
    """Tier by affinity rank in the clone pool (rank 0 = best).

    Tertiles with ceiling boundaries; pools smaller than 3 degenerate to
    Light for the best and Drastic for the last.
    """
    if pool_size <= 0:
        raise ValueError("empty clone pool")
    if not 0 <= rank < pool_size:
        raise ValueError(f"rank {rank} out of range for pool of {pool_size}")
    if pool_size < 3:
        if rank == 0:
            return MutationTier.LIGHT
        if rank == pool_size - 1:
            return MutationTier.DRASTIC
        return MutationTier.MODERATE
    if rank < math.ceil(pool_size / 3):
        return MutationTier.LIGHT
    if rank < math.ceil(2 * pool_size / 3):
        return MutationTier.MODERATE
    return MutationTier.DRASTIC


def mutation_region_size(code: CellCode, tier: MutationTier) -> int:
    bc = len(code.connections)
    if tier is MutationTier.LIGHT:
        return code.k
    if tier is MutationTier.MODERATE:
        return bc
    return bc + code.k


def mutate(
    code: CellCode, tier: MutationTier, rate: float, rng: random.Random
) -> CellCode:
    """Mutate m = max(1, round(rate * |region|)) distinct positions.

    Connection bits flip; a hit layer slot is resampled uniformly from the
    other 7 kinds, so it always changes. Lengths never change.
    """
    require_valid(code)
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate {rate} outside [0, 1]")
    bc = len(code.connections)
    k = code.k
    if tier is MutationTier.LIGHT:
        region = range(bc - k, bc)
    elif tier is MutationTier.MODERATE:
        region = range(bc)
    else:
        region = range(bc + k)  # positions >= bc address layer-type slots
    m = max(1, int(rate * len(region) + 0.5))
    bits = list(code.connections)
    types = list(code.layer_types)
    for pos in rng.sample(region, m):
        if pos < bc:
            bits[pos] ^= 1
        else:
            slot = pos - bc
            offset = rng.randrange(NUM_LAYER_KINDS - 1)
            types[slot] = (types[slot] + 1 + offset) % NUM_LAYER_KINDS
    return CellCode(tuple(types), tuple(bits))
