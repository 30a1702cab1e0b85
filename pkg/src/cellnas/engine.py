"""The immune-network search loop.

One stage searches one new cell appended to the frozen memory prefix; each
generation runs evaluate -> suppress -> clone -> mutate -> reselect ->
cull -> replenish. Stages repeat until the stage-best affinity stops
improving on the previous two stages (or a stage cap is hit).

Everything is deterministic given the config seed and a deterministic
evaluator: selection and culling break affinity ties by antibody id, and
per-clone mutation draws its own seeded generator.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import random
import warnings
from dataclasses import dataclass, field, fields

from cellnas.evaluators.base import (
    EvaluationBudget,
    EvaluationError,
    EvaluationRequest,
)
from cellnas.evaluators.cache import CachedEvaluator
from cellnas.genotype import CellCode, from_text, random_code, to_text
from cellnas.graph import ModelSpec
from cellnas.mutation import MutationParams, assign_tier, mutate, mutation_rate
from cellnas.similarity import DEFAULT_PROPORTION, suppress

log = logging.getLogger("cellnas.engine")


class ConfigError(ValueError):
    """Raised when a search configuration violates its invariants."""


@dataclass
class Antibody:
    """One candidate: a cell code plus bookkeeping identity."""

    code: CellCode
    id: int
    born_generation: int
    affinity: float | None = None
    error: str | None = None

    @property
    def evaluated(self) -> bool:
        return self.affinity is not None


@dataclass(frozen=True)
class SearchConfig:
    population_size: int = 50
    generations: int = 20
    select_fraction: float = 0.2
    newcomers: int = 5
    clone_factor: int = 5
    stages_max: int = 4
    layers_per_cell: int = 5
    similarity_proportion: float = DEFAULT_PROPORTION
    mutation: MutationParams = MutationParams()
    seed: int = 0
    dataset: str = "surrogate"
    budget: EvaluationBudget = EvaluationBudget()
    same_structure_cells: int | None = None  # accepted but unused

    def __post_init__(self):
        if self.population_size < 1:
            raise ConfigError("population_size must be >= 1")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if not 0.0 < self.select_fraction <= 1.0:
            raise ConfigError(
                f"select_fraction {self.select_fraction} outside (0, 1]"
            )
        if self.newcomers < 0 or self.newcomers >= self.population_size:
            raise ConfigError(
                f"newcomers must satisfy 0 <= a < N, got {self.newcomers}"
            )
        if self.clone_factor < 1:
            raise ConfigError("clone_factor must be >= 1")
        if self.stages_max < 1:
            raise ConfigError("stages_max must be >= 1")
        if self.layers_per_cell < 1:
            raise ConfigError("layers_per_cell must be >= 1")
        if not 0.0 < self.similarity_proportion <= 1.0:
            raise ConfigError(
                f"similarity_proportion {self.similarity_proportion} outside (0, 1]"
            )
        if self.same_structure_cells is not None:
            warnings.warn(
                "same_structure_cells is accepted for compatibility but has "
                "no effect on the search",
                stacklevel=2,
            )

    def snapshot(self) -> dict:
        """JSON-ready snapshot of every field, for manifests and reports."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, MutationParams):
                out[f.name] = {"k1": value.k1, "k2": value.k2}
            elif isinstance(value, EvaluationBudget):
                out[f.name] = {
                    "train_fraction": value.train_fraction,
                    "epochs": value.epochs,
                }
            else:
                out[f.name] = value
        return out


@dataclass
class StageMemory:
    """Frozen best cells of completed stages, in stage order."""

    cells: list[tuple[CellCode, float]] = field(default_factory=list)

    def codes(self) -> tuple[CellCode, ...]:
        return tuple(code for code, _ in self.cells)

    def __len__(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class TerminationDecision:
    stop: bool
    reason: str | None = None
    final_stage: int | None = None


def check_termination(
    stage_bests: list[float], stages_max: int | None = None
) -> TerminationDecision:
    """Stop once a stage fails to beat the best of the two before it.

    The final model is then the memory prefix ending at the best of the
    last three stages (earliest on ties). A stage cap, when given, also
    stops the search, with the final prefix at the overall best stage.
    """
    if not stage_bests:
        raise ValueError("no completed stages")
    s = len(stage_bests)
    if s >= 3 and stage_bests[-1] <= max(stage_bests[-2], stage_bests[-3]):
        window = stage_bests[-3:]
        final = s - 3 + window.index(max(window)) + 1
        return TerminationDecision(True, "no_improvement", final)
    if stages_max is not None and s >= stages_max:
        final = stage_bests.index(max(stage_bests)) + 1
        return TerminationDecision(True, "stages_max", final)
    return TerminationDecision(False)


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class SearchReport:
    """Per-generation records plus a final summary, all JSON-ready."""

    records: list[dict] = field(default_factory=list)
    summary: dict | None = None

    def generation_records(self) -> list[dict]:
        return [r for r in self.records if r.get("type") == "generation"]

    def stage_records(self) -> list[dict]:
        return [r for r in self.records if r.get("type") == "stage"]

    def final_model(self) -> ModelSpec:
        codes = [from_text(t) for t in self.summary["final_cells"]]
        return ModelSpec(
            frozen_cells=tuple(codes[:-1]),
            candidate_cell=codes[-1],
            layers_per_cell=codes[-1].k,
        )

    def to_jsonl(self) -> str:
        lines = [_canonical(r) for r in self.records]
        if self.summary is not None:
            lines.append(_canonical(self.summary))
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())


def run_id_for(config: SearchConfig) -> str:
    """Deterministic run identifier: reports and manifests cross-reference
    each other through it without breaking byte-level reproducibility."""
    digest = hashlib.sha256(_canonical(config.snapshot()).encode()).hexdigest()
    return digest[:16]


def _by_affinity(antibodies):
    """Descending affinity, ties to the older (lower) id."""
    return sorted(antibodies, key=lambda ab: (-ab.affinity, ab.id))


class _SearchState:
    """Mutable counters shared across one search (or one standalone call)."""

    def __init__(self, config: SearchConfig, evaluator, rng: random.Random):
        self.config = config
        self.evaluator = CachedEvaluator(evaluator)
        self.rng = rng
        self.next_id = 1
        self.next_request_id = 1
        self.requested = 0
        self.stage_best: Antibody | None = None

    def adopt_ids(self, population) -> None:
        """Continue id allocation above an externally built population."""
        taken = [ab.id for ab in population]
        if taken:
            self.next_id = max(self.next_id, max(taken) + 1)

    def new_antibody(self, code: CellCode, generation: int) -> Antibody:
        ab = Antibody(code=code, id=self.next_id, born_generation=generation)
        self.next_id += 1
        return ab

    def fresh_random(self, generation: int) -> Antibody:
        return self.new_antibody(
            random_code(self.config.layers_per_cell, self.rng), generation
        )

    @property
    def evaluations(self) -> int:
        """Inner evaluator calls (requests minus cache hits)."""
        return self.evaluator.misses

    def evaluate_all(self, antibodies, memory: StageMemory) -> None:
        """Evaluate every unevaluated antibody against the frozen prefix."""
        todo = [ab for ab in antibodies if not ab.evaluated]
        if not todo:
            return
        requests = []
        for ab in todo:
            spec = ModelSpec(
                frozen_cells=memory.codes(),
                candidate_cell=ab.code,
                layers_per_cell=self.config.layers_per_cell,
            )
            requests.append(
                EvaluationRequest(
                    id=self.next_request_id,
                    model=spec,
                    dataset=self.config.dataset,
                    budget=self.config.budget,
                    seed=self.config.seed,
                )
            )
            self.next_request_id += 1
        self.requested += len(requests)
        try:
            responses = self.evaluator.evaluate_many(requests)
        except EvaluationError as exc:
            codes = ", ".join(to_text(ab.code) for ab in todo)
            raise EvaluationError(f"{exc} (while evaluating: {codes})") from exc
        by_id = {req.id: ab for req, ab in zip(requests, todo)}
        for req, resp in zip(requests, responses):
            ab = by_id[req.id]
            if resp.error is not None:
                log.warning(
                    "evaluation of %s failed (%s); scoring 0",
                    to_text(ab.code),
                    resp.error,
                )
                ab.affinity = 0.0
                ab.error = resp.error
            else:
                ab.affinity = resp.affinity
            if self.stage_best is None or ab.affinity > self.stage_best.affinity:
                self.stage_best = ab

    def run_generation(self, population, memory, stage, generation, sink=None):
        cfg = self.config
        self.evaluate_all(population, memory)

        kept, removed = suppress(population, cfg.similarity_proportion)

        n_selected = math.ceil(cfg.select_fraction * len(kept))
        parents = _by_affinity(kept)[:n_selected]
        pool_size = len(parents) * cfg.clone_factor
        a_max = parents[0].affinity
        a_avg = sum(p.affinity for p in parents) / len(parents)

        clones = []
        rank = 0
        for parent in parents:
            rate = mutation_rate(parent.affinity, a_max, a_avg, cfg.mutation)
            for _ in range(cfg.clone_factor):
                tier = assign_tier(rank, pool_size)
                child_rng = random.Random(self.rng.getrandbits(64))
                child_code = mutate(parent.code, tier, rate, child_rng)
                clones.append(self.new_antibody(child_code, generation))
                rank += 1
        self.evaluate_all(clones, memory)
        clones_kept = _by_affinity(clones)[: math.ceil(cfg.select_fraction * len(clones))]

        merged = kept + clones_kept
        survivors = _by_affinity(merged)[: cfg.population_size - cfg.newcomers]
        next_population = survivors + [
            self.fresh_random(generation + 1)
            for _ in range(cfg.population_size - len(survivors))
        ]

        if sink is not None:
            evaluated = [ab.affinity for ab in population if ab.evaluated]
            sink.append(
                {
                    "type": "generation",
                    "stage": stage,
                    "generation": generation,
                    "best_so_far": self.stage_best.affinity,
                    "population": [
                        [ab.id, ab.affinity] for ab in next_population
                    ],
                    "population_mean": (
                        sum(evaluated) / len(evaluated) if evaluated else None
                    ),
                    "suppressed": [ab.id for ab in removed],
                    "clone_amax": a_max,
                    "clone_aavg": a_avg,
                    "clones_kept": len(clones_kept),
                    "evaluations": self.evaluations,
                }
            )
        return next_population

    def run_stage(self, memory: StageMemory, stage: int, sink=None):
        cfg = self.config
        self.stage_best = None
        population = [self.fresh_random(0) for _ in range(cfg.population_size)]
        for generation in range(cfg.generations):
            population = self.run_generation(
                population, memory, stage, generation, sink
            )
        return self.stage_best


def _as_memory(memory) -> StageMemory:
    """Accept a StageMemory, bare codes, or (code, affinity) pairs."""
    if isinstance(memory, StageMemory):
        return memory
    cells = []
    for item in memory:
        if isinstance(item, CellCode):
            cells.append((item, 0.0))  # affinity unknown for bare codes
        else:
            code, affinity = item
            cells.append((code, affinity))
    return StageMemory(cells)


def run_generation(population, memory, config, evaluator, rng):
    """One generation step, standalone. Returns the next population of
    exactly N antibodies; the best evaluated antibody always survives."""
    state = _SearchState(config, evaluator, rng)
    state.adopt_ids(population)
    return state.run_generation(
        list(population), _as_memory(memory), stage=1, generation=0
    )


def run_stage(memory, config, evaluator, rng):
    """Search one cell on top of the frozen prefix. Returns the best
    antibody ever evaluated in the stage plus its generation records."""
    state = _SearchState(config, evaluator, rng)
    memory = _as_memory(memory)
    sink: list[dict] = []
    best = state.run_stage(memory, stage=len(memory) + 1, sink=sink)
    return best, sink


def run_search(config: SearchConfig, evaluator, rng: random.Random | None = None):
    """Run the full staged search and return its report."""
    rng = rng if rng is not None else random.Random(config.seed)
    state = _SearchState(config, evaluator, rng)
    memory = StageMemory()
    stage_bests: list[float] = []
    report = SearchReport()
    report.records.append(
        {
            "type": "config",
            "run_id": run_id_for(config),
            "config": config.snapshot(),
        }
    )

    decision = TerminationDecision(False)
    for stage in range(1, config.stages_max + 1):
        best = state.run_stage(memory, stage, sink=report.records)
        memory.cells.append((best.code, best.affinity))
        stage_bests.append(best.affinity)
        report.records.append(
            {
                "type": "stage",
                "stage": stage,
                "best_affinity": best.affinity,
                "best_code": to_text(best.code),
                "memory": [to_text(code) for code in memory.codes()],
            }
        )
        decision = check_termination(stage_bests, config.stages_max)
        if decision.stop:
            break

    final_stage = decision.final_stage
    final_cells = [to_text(code) for code in memory.codes()[:final_stage]]
    report.summary = {
        "type": "summary",
        "run_id": run_id_for(config),
        "termination": decision.reason,
        "stages_run": len(stage_bests),
        "final_stage": final_stage,
        "final_cells": final_cells,
        "best_affinity": stage_bests[final_stage - 1],
        "stage_bests": stage_bests,
        "evaluations_requested": state.requested,
        "cache_hits": state.evaluator.hits,
        "evaluations": state.evaluations,
    }
    return report
