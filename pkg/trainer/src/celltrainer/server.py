"""The stdio worker: handshake, then one response per request id.

Every line written to stdout is a handshake, a response, or a
'#'-prefixed diagnostic comment. A request that fails (unknown dataset,
bad code text, numeric trouble) produces an error response for its id and
the worker keeps serving; only a shutdown message (or closed stdin) ends
the loop.
"""

from __future__ import annotations

import json
import re
import sys
import threading
from concurrent.futures import ThreadPoolExecutor

from celltrainer.codes import CodeFormatError
from celltrainer.data import DatasetUnavailable, dataset_names, load_dataset
from celltrainer.network import build_network
from celltrainer.training import train_and_score

PROTOCOL_VERSION = 1


def _emit(payload: dict, lock: threading.Lock) -> None:
    with lock:
        sys.stdout.write(json.dumps(payload) + "\n")
        sys.stdout.flush()


def _comment(text: str, lock: threading.Lock) -> None:
    with lock:
        sys.stdout.write(f"# {text}\n")
        sys.stdout.flush()


def handle_request(message: dict, dataset_root: str | None, learning_rate: float) -> dict:
    rid = message.get("id")
    try:
        rid = int(rid)
    except (TypeError, ValueError):
        raise CodeFormatError(f"request without usable id: {message!r}") from None
    try:
        dataset = str(message["dataset"])
        budget = message.get("budget", {})
        train_fraction = float(budget.get("train_fraction", 1.0))
        epochs = int(budget.get("epochs", 1))
        seed = int(message.get("seed", 0))
        train_set, test_set, meta = load_dataset(dataset, dataset_root)
        network = build_network(message["model"], meta)
        affinity, metrics = train_and_score(
            network,
            train_set,
            test_set,
            dataset=dataset,
            train_fraction=train_fraction,
            epochs=epochs,
            seed=seed,
            learning_rate=learning_rate,
        )
        return {"id": rid, "affinity": affinity, "metrics": metrics}
    except (DatasetUnavailable, CodeFormatError, KeyError, TypeError, ValueError) as exc:
        return {"id": rid, "error": f"{type(exc).__name__}: {exc}"}
    except RuntimeError as exc:  # torch numeric/memory failures
        return {"id": rid, "error": f"training failed: {exc}"}


def serve(dataset_root: str | None = None, parallelism: int = 1, learning_rate: float = 1e-2) -> int:
    lock = threading.Lock()
    _emit(
        {
            "hello": {
                "protocol": PROTOCOL_VERSION,
                "parallelism": parallelism,
                "datasets": dataset_names(),
            }
        },
        lock,
    )
    executor = ThreadPoolExecutor(max_workers=parallelism) if parallelism > 1 else None
    try:
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            try:
                message = json.loads(line)
            except json.JSONDecodeError:
                # salvage an id when one is visible so the engine can fail
                # just that request
                match = re.search(r'"id"\s*:\s*(\d+)', line)
                if match:
                    _emit(
                        {"id": int(match.group(1)), "error": "unparseable request"},
                        lock,
                    )
                else:
                    _comment(f"skipping unparseable line: {line[:80]!r}", lock)
                continue
            if not isinstance(message, dict):
                _comment(f"skipping non-object message: {line[:80]!r}", lock)
                continue
            if message.get("shutdown"):
                break
            if "id" not in message:
                _comment(f"skipping message without id: {line[:80]!r}", lock)
                continue
            if executor is None:
                _emit(handle_request(message, dataset_root, learning_rate), lock)
            else:
                executor.submit(
                    lambda m=message: _emit(
                        handle_request(m, dataset_root, learning_rate), lock
                    )
                )
    finally:
        if executor is not None:
            executor.shutdown(wait=True)
    return 0
