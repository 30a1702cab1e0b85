"""Worker-client protocol tests against the scripted mock worker."""

import random
import sys
from pathlib import Path

import pytest

from cellnas.evaluators import (
    EvaluationBudget,
    EvaluationRequest,
    ProtocolError,
    WorkerEvaluator,
)
from cellnas.genotype import random_code
from cellnas.graph import ModelSpec

MOCK = str(Path(__file__).parent / "mock_worker.py")


def mock_command(*extra):
    return [sys.executable, MOCK, *extra]


def make_requests(n, dataset="mock", start_id=1):
    rng = random.Random(0)
    out = []
    for i in range(n):
        out.append(
            EvaluationRequest(
                id=start_id + i,
                model=ModelSpec((), random_code(3, rng), 3),
                dataset=dataset,
                budget=EvaluationBudget(),
                seed=0,
            )
        )
    return out


def expected_affinity(request_id):
    return ((request_id * 37) % 101) / 100.0


def test_handshake_fields():
    with WorkerEvaluator(mock_command("--parallelism", "2"), timeout=10) as worker:
        assert worker.handshake.protocol == 1
        assert worker.handshake.parallelism == 2
        assert worker.handshake.datasets == ("mock",)


def test_round_trip_single():
    with WorkerEvaluator(mock_command(), timeout=10) as worker:
        (response,) = worker.evaluate_many(make_requests(1))
        assert response.error is None
        assert 0.0 <= response.affinity <= 1.0
        assert response.affinity == expected_affinity(1)


def test_out_of_order_responses_matched_by_id():
    command = mock_command("--parallelism", "3", "--reorder")
    with WorkerEvaluator(command, timeout=10) as worker:
        requests = make_requests(3, start_id=10)
        responses = worker.evaluate_many(requests)
        assert [r.id for r in responses] == [10, 11, 12]
        for req, resp in zip(requests, responses):
            assert resp.affinity == expected_affinity(req.id)


def test_error_response_surfaced():
    with WorkerEvaluator(mock_command(), timeout=10) as worker:
        (response,) = worker.evaluate_many(make_requests(1, dataset="bad"))
        assert response.affinity is None
        assert "unknown dataset" in response.error


def test_worker_stays_alive_after_error():
    with WorkerEvaluator(mock_command(), timeout=10) as worker:
        (bad,) = worker.evaluate_many(make_requests(1, dataset="bad"))
        assert bad.error is not None
        (good,) = worker.evaluate_many(make_requests(1, start_id=2))
        assert good.affinity == expected_affinity(2)


def test_timeout_marks_request_failed():
    command = mock_command("--parallelism", "2", "--silent-id", "1")
    with WorkerEvaluator(command, timeout=1.5) as worker:
        responses = worker.evaluate_many(make_requests(2))
        assert "timeout" in responses[0].error
        assert responses[1].affinity == expected_affinity(2)


def test_timeout_does_not_starve_the_backlog():
    # with a window of 1, an early timeout must not keep queued requests
    # from ever being sent
    command = mock_command("--parallelism", "1", "--silent-id", "1")
    with WorkerEvaluator(command, timeout=1.5) as worker:
        responses = worker.evaluate_many(make_requests(3))
        assert "timeout" in responses[0].error
        assert responses[1].affinity == expected_affinity(2)
        assert responses[2].affinity == expected_affinity(3)


def test_malformed_line_aborts():
    with WorkerEvaluator(mock_command("--malformed"), timeout=10) as worker:
        with pytest.raises(ProtocolError, match="unparseable"):
            worker.evaluate_many(make_requests(1))


def test_worker_exit_aborts():
    with pytest.raises(ProtocolError, match="exited"):
        WorkerEvaluator(mock_command("--dead"), timeout=5)


def test_missing_handshake_times_out():
    with pytest.raises(ProtocolError, match="handshake"):
        WorkerEvaluator(
            mock_command("--no-handshake"), timeout=5, handshake_timeout=1.0
        )


def test_unknown_response_id_aborts():
    # silent-id plus a shutdown flush makes the mock answer an id the client
    # has already abandoned; a *never-issued* id must abort instead. We craft
    # that with a tiny inline worker.
    inline = (
        "import sys, json\n"
        "print(json.dumps({'hello': {'protocol': 1, 'parallelism': 1}}), flush=True)\n"
        "sys.stdin.readline()\n"
        "print(json.dumps({'id': 999, 'affinity': 0.5}), flush=True)\n"
        "sys.stdin.read()\n"
    )
    with WorkerEvaluator([sys.executable, "-c", inline], timeout=5) as worker:
        with pytest.raises(ProtocolError, match="unknown id"):
            worker.evaluate_many(make_requests(1))


def test_shutdown_exits_cleanly():
    worker = WorkerEvaluator(mock_command(), timeout=10)
    worker.evaluate_many(make_requests(1))
    worker.close()
    assert worker._proc.returncode == 0


def test_bad_protocol_version_rejected():
    inline = (
        "import sys, json\n"
        "print(json.dumps({'hello': {'protocol': 2, 'parallelism': 1}}), flush=True)\n"
        "sys.stdin.read()\n"
    )
    with pytest.raises(ProtocolError, match="protocol"):
        WorkerEvaluator([sys.executable, "-c", inline], timeout=5)
