"""Affinity oracles: surrogate landscape, memoizing cache, worker client."""

from cellnas.evaluators.base import (
    EvaluationBudget,
    EvaluationError,
    EvaluationRequest,
    EvaluationResponse,
    Evaluator,
    ProtocolError,
    request_from_wire,
    response_from_wire,
)
from cellnas.evaluators.cache import CachedEvaluator, cache_key
from cellnas.evaluators.surrogate import (
    SurrogateEvaluator,
    SurrogateLandscape,
    fold_bytes,
    prefix_salt,
    surrogate_evaluate,
)
from cellnas.evaluators.worker import WorkerEvaluator, WorkerHandshake

__all__ = [
    "CachedEvaluator",
    "EvaluationBudget",
    "EvaluationError",
    "EvaluationRequest",
    "EvaluationResponse",
    "Evaluator",
    "ProtocolError",
    "SurrogateEvaluator",
    "SurrogateLandscape",
    "WorkerEvaluator",
    "WorkerHandshake",
    "cache_key",
    "fold_bytes",
    "prefix_salt",
    "request_from_wire",
    "response_from_wire",
    "surrogate_evaluate",
]
