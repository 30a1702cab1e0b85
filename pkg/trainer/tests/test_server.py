"""Protocol conformance of the worker process itself."""

import json
import queue
import subprocess
import sys
import threading

import pytest

REQUEST = {
    "id": 1,
    "model": {"cells": [], "candidate": "0,1/1|10", "k": 2},
    "dataset": "synthetic",
    "budget": {"train_fraction": 0.25, "epochs": 1},
    "seed": 0,
}


class WorkerHarness:
    """Line-oriented chat with a worker subprocess, with read timeouts."""

    def __init__(self, *extra_args):
        self.proc = subprocess.Popen(
            [sys.executable, "-m", "celltrainer", *extra_args],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self.lines: queue.Queue = queue.Queue()
        threading.Thread(target=self._pump, daemon=True).start()

    def _pump(self):
        for line in self.proc.stdout:
            self.lines.put(line.rstrip("\n"))
        self.lines.put(None)

    def send(self, payload):
        self.proc.stdin.write(json.dumps(payload) + "\n")
        self.proc.stdin.flush()

    def send_raw(self, text):
        self.proc.stdin.write(text + "\n")
        self.proc.stdin.flush()

    def read_line(self, timeout=120.0):
        line = self.lines.get(timeout=timeout)
        if line is None:
            raise AssertionError("worker closed stdout")
        return line

    def read_message(self, timeout=120.0):
        while True:
            line = self.read_line(timeout)
            if line.startswith("#"):
                continue
            return json.loads(line)

    def close(self):
        if self.proc.poll() is None:
            self.proc.kill()
        self.proc.wait()


@pytest.fixture
def worker():
    harness = WorkerHarness()
    yield harness
    harness.close()


def test_handshake_comes_first(worker):
    message = worker.read_message()
    hello = message["hello"]
    assert hello["protocol"] == 1
    assert hello["parallelism"] == 1
    assert set(hello["datasets"]) == {"cifar10", "mnist", "synthetic"}


def test_round_trip_scores_synthetic(worker):
    worker.read_message()  # handshake
    worker.send(REQUEST)
    response = worker.read_message()
    assert response["id"] == 1
    assert 0.0 <= response["affinity"] <= 1.0
    assert response["metrics"]["train_examples"] == 160


def test_unknown_dataset_keeps_worker_alive(worker):
    worker.read_message()
    worker.send({**REQUEST, "id": 5, "dataset": "imagenet"})
    response = worker.read_message()
    assert response["id"] == 5
    assert "imagenet" in response["error"]
    # still serving
    worker.send({**REQUEST, "id": 6})
    assert worker.read_message()["id"] == 6


def test_bad_code_text_is_an_error_response(worker):
    worker.read_message()
    worker.send(
        {**REQUEST, "id": 9, "model": {"cells": [], "candidate": "junk", "k": 2}}
    )
    response = worker.read_message()
    assert response["id"] == 9 and "error" in response


def test_malformed_line_with_id_gets_error_response(worker):
    worker.read_message()
    worker.send_raw('{"id": 77, "model": broken')
    response = worker.read_message()
    assert response == {"id": 77, "error": "unparseable request"}


def test_malformed_line_without_id_is_commented(worker):
    worker.read_message()
    worker.send_raw("garbage without an id")
    worker.send({**REQUEST, "id": 8})
    lines = []
    while True:
        line = worker.read_line()
        lines.append(line)
        if not line.startswith("#"):
            break
    assert any(l.startswith("#") for l in lines[:-1])
    assert json.loads(lines[-1])["id"] == 8


def test_every_output_line_is_protocol_clean(worker):
    worker.read_message()
    worker.send_raw("???")
    worker.send({**REQUEST, "id": 2})
    worker.send({"shutdown": True})
    worker.proc.stdin.close()
    seen = []
    while True:
        line = worker.lines.get(timeout=120.0)
        if line is None:
            break
        seen.append(line)
    for line in seen:
        assert line.startswith("#") or isinstance(json.loads(line), dict)


def test_shutdown_exits_cleanly(worker):
    worker.read_message()
    worker.send({"shutdown": True})
    assert worker.proc.wait(timeout=30) == 0


def test_parallel_serving_answers_all_ids():
    harness = WorkerHarness("--parallelism", "2")
    try:
        assert harness.read_message()["hello"]["parallelism"] == 2
        harness.send({**REQUEST, "id": 21})
        harness.send({**REQUEST, "id": 22})
        answered = {harness.read_message()["id"] for _ in range(2)}
        assert answered == {21, 22}
    finally:
        harness.close()
