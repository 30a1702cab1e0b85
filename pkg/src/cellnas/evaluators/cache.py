"""Memoizing evaluator wrapper.

The key is the canonical text of the full model (frozen prefix included)
plus dataset and budget; the request seed is deliberately not part of the
key, so re-evaluations of an identical model are free. Errors are never
cached. Concurrent callers asking for the same key trigger at most one
inner evaluation.
"""

from __future__ import annotations

import threading

from cellnas.evaluators.base import EvaluationRequest, EvaluationResponse
from cellnas.genotype import to_text


def cache_key(request: EvaluationRequest) -> tuple:
    model = request.model
    return (
        tuple(to_text(c) for c in model.frozen_cells),
        to_text(model.candidate_cell),
        model.layers_per_cell,
        request.dataset,
        request.budget.train_fraction,
        request.budget.epochs,
    )


class _Pending:
    __slots__ = ("event", "value")

    def __init__(self):
        self.event = threading.Event()
        self.value = None  # (affinity, metrics) once resolved


class CachedEvaluator:
    def __init__(self, inner):
        self._inner = inner
        self._lock = threading.Lock()
        self._store: dict[tuple, _Pending] = {}
        self.hits = 0
        self.misses = 0

    def _replay(self, request: EvaluationRequest, value) -> EvaluationResponse:
        affinity, metrics = value
        return EvaluationResponse(
            id=request.id, affinity=affinity, metrics=dict(metrics)
        )

    def evaluate(self, request: EvaluationRequest) -> EvaluationResponse:
        key = cache_key(request)
        while True:
            with self._lock:
                entry = self._store.get(key)
                if entry is None:
                    entry = _Pending()
                    self._store[key] = entry
                    break
                if entry.event.is_set():
                    self.hits += 1
                    return self._replay(request, entry.value)
            # Another caller is computing this key; wait, then re-check (on
            # failure the key is vacated and we take ownership).
            entry.event.wait()

        try:
            response = self._inner.evaluate(request)
        except Exception:
            with self._lock:
                del self._store[key]
            entry.event.set()
            raise
        self.misses += 1
        if response.error is not None:
            # Errors are not cached: vacate so a retry reaches the inner
            # evaluator again.
            with self._lock:
                del self._store[key]
            entry.event.set()
            return response
        entry.value = (response.affinity, dict(response.metrics))
        entry.event.set()
        return response

    def evaluate_many(self, requests):
        """Batch evaluation: cache misses are forwarded to the inner
        evaluator as one batch (preserving its pipelining), duplicates
        within the batch reach it only once."""
        responses: list[EvaluationResponse | None] = [None] * len(requests)
        owned: dict[tuple, list[int]] = {}
        owned_order: list[tuple] = []
        in_flight: list[int] = []
        with self._lock:
            for idx, req in enumerate(requests):
                key = cache_key(req)
                if key in owned:
                    owned[key].append(idx)
                    continue
                entry = self._store.get(key)
                if entry is None:
                    self._store[key] = _Pending()
                    owned[key] = [idx]
                    owned_order.append(key)
                elif entry.event.is_set():
                    self.hits += 1
                    responses[idx] = self._replay(req, entry.value)
                else:
                    in_flight.append(idx)

        reps = [requests[owned[key][0]] for key in owned_order]
        try:
            inner_responses = self._inner.evaluate_many(reps)
        except Exception:
            with self._lock:
                for key in owned_order:
                    entry = self._store.pop(key, None)
                    if entry is not None:
                        entry.event.set()
            raise

        for key, resp in zip(owned_order, inner_responses):
            indices = owned[key]
            self.misses += 1
            self.hits += len(indices) - 1
            with self._lock:
                entry = self._store[key]
                if resp.error is not None:
                    del self._store[key]
                else:
                    entry.value = (resp.affinity, dict(resp.metrics))
            entry.event.set()
            for i in indices:
                if resp.error is not None:
                    responses[i] = EvaluationResponse(
                        id=requests[i].id, error=resp.error, metrics=dict(resp.metrics)
                    )
                else:
                    responses[i] = self._replay(requests[i], entry.value)

        # Keys being computed by another thread: wait via the single-request
        # path (rare; the engine itself is sequential).
        for idx in in_flight:
            responses[idx] = self.evaluate(requests[idx])
        return responses
