"""Client for external evaluation workers.

The worker is a child process speaking line-delimited JSON on its standard
streams: it sends one handshake line, then answers each request with a
response carrying the same id (ordering is free — responses are matched by
id, and up to the handshake-declared parallelism may be outstanding).

Failure handling follows the severity of the fault: a worker-reported
error or a timed-out request fails only that evaluation (the engine scores
it 0), while a malformed line, an unknown response id, or a dead worker is
a protocol violation that aborts the search.
"""

from __future__ import annotations

import json
import logging
import queue
import subprocess
import threading
import time
from dataclasses import dataclass

from cellnas.evaluators.base import (
    EvaluationRequest,
    EvaluationResponse,
    ProtocolError,
    response_from_wire,
)

log = logging.getLogger("cellnas.worker")

PROTOCOL_VERSION = 1


@dataclass(frozen=True)
class WorkerHandshake:
    protocol: int
    parallelism: int
    datasets: tuple[str, ...]


def _parse_handshake(message: dict) -> WorkerHandshake:
    hello = message.get("hello")
    if not isinstance(hello, dict):
        raise ProtocolError(f"expected handshake, got {message!r}")
    try:
        protocol = int(hello["protocol"])
        parallelism = int(hello.get("parallelism", 1))
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"malformed handshake: {message!r}") from exc
    if protocol != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {protocol}")
    if parallelism < 1:
        raise ProtocolError(f"declared parallelism {parallelism} < 1")
    datasets = tuple(str(d) for d in hello.get("datasets", []))
    return WorkerHandshake(protocol, parallelism, datasets)


class WorkerEvaluator:
    """Evaluator backed by one worker subprocess."""

    def __init__(
        self,
        command: list[str],
        timeout: float = 300.0,
        handshake_timeout: float = 60.0,
    ):
        self.timeout = timeout
        self._command = list(command)
        try:
            self._proc = subprocess.Popen(
                self._command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ProtocolError(f"cannot launch worker {self._command}: {exc}") from exc
        self._events: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self._closed = False
        self.handshake = self._await_handshake(handshake_timeout)

    # -- reading ---------------------------------------------------------

    def _read_loop(self):
        for line in self._proc.stdout:
            line = line.strip()
            if not line or line.startswith("#"):  # worker diagnostics
                continue
            try:
                message = json.loads(line)
            except json.JSONDecodeError:
                self._events.put(("malformed", line))
                continue
            if not isinstance(message, dict):
                self._events.put(("malformed", line))
                continue
            self._events.put(("message", message))
        self._events.put(("eof", None))

    def _next_event(self, deadline: float):
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            return ("timeout", None)
        try:
            return self._events.get(timeout=remaining)
        except queue.Empty:
            return ("timeout", None)

    def _await_handshake(self, timeout: float) -> WorkerHandshake:
        kind, payload = self._next_event(time.monotonic() + timeout)
        if kind == "message":
            try:
                return _parse_handshake(payload)
            except ProtocolError:
                self._abort()
                raise
        self._abort()
        if kind == "eof":
            raise ProtocolError(
                f"worker exited before handshake (rc={self._proc.poll()})"
            )
        if kind == "timeout":
            raise ProtocolError(f"no handshake within {timeout}s")
        raise ProtocolError(f"unparseable line from worker: {payload!r}")

    # -- writing ---------------------------------------------------------

    def _send(self, payload: dict):
        try:
            self._proc.stdin.write(json.dumps(payload) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self._abort()
            raise ProtocolError(f"worker closed its input: {exc}") from exc

    # -- evaluation ------------------------------------------------------

    def evaluate(self, request: EvaluationRequest) -> EvaluationResponse:
        return self.evaluate_many([request])[0]

    def evaluate_many(self, requests):
        """Pipeline requests, keeping at most the declared parallelism
        outstanding; returns responses aligned with the request order."""
        results: dict[int, EvaluationResponse] = {}
        pending: dict[int, float] = {}  # id -> deadline
        abandoned: set[int] = set()  # timed out; late responses are dropped
        backlog = list(requests)
        next_to_send = 0
        window = self.handshake.parallelism

        while len(results) < len(requests):
            while next_to_send < len(backlog) and len(pending) < window:
                req = backlog[next_to_send]
                next_to_send += 1
                self._send(req.to_wire())
                pending[req.id] = time.monotonic() + self.timeout
            oldest_id = min(pending, key=pending.get)
            kind, payload = self._next_event(pending[oldest_id])
            if kind == "timeout":
                log.warning("request %d timed out after %.1fs", oldest_id, self.timeout)
                results[oldest_id] = EvaluationResponse(
                    id=oldest_id, error=f"timeout after {self.timeout}s"
                )
                del pending[oldest_id]
                abandoned.add(oldest_id)
                continue
            if kind == "eof":
                self._abort()
                raise ProtocolError(
                    f"worker exited with {len(pending)} request(s) outstanding "
                    f"(rc={self._proc.poll()})"
                )
            if kind == "malformed":
                self._abort()
                raise ProtocolError(f"unparseable line from worker: {payload!r}")
            try:
                response = response_from_wire(payload)
            except ProtocolError:
                self._abort()
                raise
            if response.id in pending:
                results[response.id] = response
                del pending[response.id]
            elif response.id in abandoned:
                log.warning("dropping late response for timed-out id %d", response.id)
            else:
                self._abort()
                raise ProtocolError(f"response for unknown id {response.id}")

        return [results[req.id] for req in requests]

    # -- lifecycle -------------------------------------------------------

    def _abort(self):
        self._closed = True
        if self._proc.poll() is None:
            self._proc.kill()
            self._proc.wait()

    def close(self):
        """Ask the worker to shut down; kill it if it lingers."""
        if self._closed:
            return
        self._closed = True
        try:
            self._send_quietly({"shutdown": True})
            self._proc.stdin.close()
        except OSError:
            pass
        try:
            self._proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def _send_quietly(self, payload: dict):
        try:
            self._proc.stdin.write(json.dumps(payload) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()
        return False
