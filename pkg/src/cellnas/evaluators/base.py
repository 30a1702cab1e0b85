"""Evaluation request/response types and the evaluator interface."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, runtime_checkable

from cellnas.genotype import from_text, to_text
from cellnas.graph import ModelSpec


class EvaluationError(RuntimeError):
    """An evaluator failed in a way the search cannot recover from."""


class ProtocolError(EvaluationError):
    """A worker violated the wire protocol (malformed message, early exit)."""


@dataclass(frozen=True)
class EvaluationBudget:
    train_fraction: float = 1.0
    epochs: int = 1

    def __post_init__(self):
        if not 0.0 < self.train_fraction <= 1.0:
            raise ValueError(f"train_fraction {self.train_fraction} outside (0, 1]")
        if self.epochs < 1:
            raise ValueError(f"epochs must be positive, got {self.epochs}")


@dataclass(frozen=True)
class EvaluationRequest:
    id: int
    model: ModelSpec
    dataset: str
    budget: EvaluationBudget
    seed: int

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "model": {
                "cells": [to_text(c) for c in self.model.frozen_cells],
                "candidate": to_text(self.model.candidate_cell),
                "k": self.model.layers_per_cell,
            },
            "dataset": self.dataset,
            "budget": {
                "train_fraction": self.budget.train_fraction,
                "epochs": self.budget.epochs,
            },
            "seed": self.seed,
        }


@dataclass(frozen=True)
class EvaluationResponse:
    id: int
    affinity: float | None = None
    error: str | None = None
    metrics: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.affinity is None) == (self.error is None):
            raise ValueError("exactly one of affinity/error must be set")
        if self.affinity is not None and not 0.0 <= self.affinity <= 1.0:
            raise ValueError(f"affinity {self.affinity} outside [0, 1]")


def request_from_wire(message: dict) -> EvaluationRequest:
    """Parse an engine->worker request dict (unknown fields ignored)."""
    try:
        model = message["model"]
        spec = ModelSpec(
            frozen_cells=tuple(from_text(t) for t in model["cells"]),
            candidate_cell=from_text(model["candidate"]),
            layers_per_cell=int(model["k"]),
        )
        budget = EvaluationBudget(
            train_fraction=float(message["budget"]["train_fraction"]),
            epochs=int(message["budget"]["epochs"]),
        )
        return EvaluationRequest(
            id=int(message["id"]),
            model=spec,
            dataset=str(message["dataset"]),
            budget=budget,
            seed=int(message["seed"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"malformed request: {exc}") from exc


def response_from_wire(message: dict) -> EvaluationResponse:
    """Parse a worker->engine response dict (unknown fields ignored)."""
    if "id" not in message:
        raise ProtocolError(f"response without id: {message!r}")
    try:
        rid = int(message["id"])
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"non-integer response id: {message!r}") from exc
    has_affinity = message.get("affinity") is not None
    has_error = message.get("error") is not None
    if has_affinity == has_error:
        raise ProtocolError(
            f"response must carry exactly one of affinity/error: {message!r}"
        )
    metrics = message.get("metrics") or {}
    if not isinstance(metrics, dict):
        raise ProtocolError(f"metrics must be an object: {message!r}")
    try:
        if has_affinity:
            return EvaluationResponse(
                id=rid, affinity=float(message["affinity"]), metrics=metrics
            )
        return EvaluationResponse(id=rid, error=str(message["error"]), metrics=metrics)
    except ValueError as exc:
        raise ProtocolError(str(exc)) from exc


@runtime_checkable
class Evaluator(Protocol):
    """Affinity oracle. evaluate_many may reorder work internally but must
    return responses aligned with the request order."""

    def evaluate(self, request: EvaluationRequest) -> EvaluationResponse: ...

    def evaluate_many(
        self, requests: list[EvaluationRequest]
    ) -> list[EvaluationResponse]: ...
