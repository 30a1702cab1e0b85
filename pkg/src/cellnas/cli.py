"""Command-line surface: search, decode, mutate, similar, report.

Exit codes: 0 success, 2 invalid config or malformed input, 3 evaluator or
worker-protocol failure, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import sys
import traceback
from datetime import datetime, timezone

from cellnas.engine import (
    ConfigError,
    SearchConfig,
    run_id_for,
    run_search,
)
from cellnas.evaluators import (
    EvaluationBudget,
    EvaluationError,
    SurrogateEvaluator,
    SurrogateLandscape,
    WorkerEvaluator,
)
from cellnas.genotype import LAYER_CATALOG, CodeError, from_text, to_text
from cellnas.graph import INPUT, decode, dump_graph, export_dot, prune_unreachable
from cellnas.mutation import MutationParams, MutationTier, mutate
from cellnas.similarity import DEFAULT_PROPORTION, interspecific_similar

CONFIG_ENV = "CELLNAS_CONFIG"

_SEARCH_KEYS = {
    "population_size",
    "generations",
    "select_fraction",
    "newcomers",
    "clone_factor",
    "stages_max",
    "layers_per_cell",
    "similarity_proportion",
    "seed",
    "dataset",
    "same_structure_cells",
}
_EXTRA_KEYS = {
    "k1",
    "k2",
    "train_fraction",
    "epochs",
    "evaluator",
    "landscape_seed",
    "epistasis",
    "worker_timeout",
}


def _parse_override(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep:
        raise ConfigError(f"override {text!r} is not key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw  # bare strings are fine, e.g. dataset=mnist
    return key, value


def load_config(path: str, overrides: list[str]) -> tuple[SearchConfig, dict]:
    """Read the JSON config document and apply key=value overrides.

    Returns the SearchConfig plus the evaluator-selection document
    (evaluator, landscape_seed, epistasis, worker_timeout).
    """
    try:
        with open(path, encoding="utf-8") as fh:
            document = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    for item in overrides:
        key, value = _parse_override(item)
        document[key] = value

    unknown = set(document) - _SEARCH_KEYS - _EXTRA_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    kwargs = {k: document[k] for k in _SEARCH_KEYS if k in document}
    if "k1" in document or "k2" in document:
        kwargs["mutation"] = MutationParams(
            k1=document.get("k1", 0.1), k2=document.get("k2", 0.2)
        )
    if "train_fraction" in document or "epochs" in document:
        kwargs["budget"] = EvaluationBudget(
            train_fraction=document.get("train_fraction", 1.0),
            epochs=document.get("epochs", 1),
        )
    try:
        config = SearchConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    selection = {
        "evaluator": document.get("evaluator", "surrogate"),
        "landscape_seed": document.get("landscape_seed", config.seed),
        "epistasis": document.get("epistasis", 3),
        "worker_timeout": document.get("worker_timeout", 300.0),
    }
    return config, selection


def _build_evaluator(selection: dict):
    name = selection["evaluator"]
    if name == "surrogate":
        landscape = SurrogateLandscape(
            seed=int(selection["landscape_seed"]),
            epistasis=int(selection["epistasis"]),
        )
        return SurrogateEvaluator(landscape), None
    if isinstance(name, str) and name.startswith("worker:"):
        command = shlex.split(name[len("worker:") :])
        if not command:
            raise ConfigError("empty worker command")
        worker = WorkerEvaluator(command, timeout=float(selection["worker_timeout"]))
        return worker, worker
    raise ConfigError(f"unknown evaluator {name!r}")


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def cmd_search(args) -> int:
    config_path = args.config or os.environ.get(CONFIG_ENV)
    if not config_path:
        raise ConfigError(
            f"no config file: pass --config or set ${CONFIG_ENV}"
        )
    config, selection = load_config(config_path, args.set or [])
    if args.evaluator:
        selection["evaluator"] = args.evaluator

    manifest = {
        "run_id": run_id_for(config),
        "seed": config.seed,
        "config": config.snapshot(),
        "evaluator": selection["evaluator"],
        "started": _utcnow(),
        "finished": None,
        "outputs": {"report": args.report, "manifest": args.manifest},
    }
    with open(args.manifest, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")

    evaluator, worker = _build_evaluator(selection)
    try:
        report = run_search(config, evaluator)
    finally:
        if worker is not None:
            worker.close()
    report.write(args.report)
    manifest["finished"] = _utcnow()
    with open(args.manifest, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")

    summary = report.summary
    print(f"run_id: {summary['run_id']}")
    print(f"termination: {summary['termination']}")
    print(f"stages run: {summary['stages_run']}")
    print(f"best affinity: {summary['best_affinity']:.6f}")
    print("final model cells:")
    for i, text in enumerate(summary["final_cells"], start=1):
        print(f"  {i}: {text}")
    print(f"report: {args.report}")
    return 0


def cmd_decode(args) -> int:
    code = from_text(args.code)
    graph = prune_unreachable(decode(code))
    if args.dot:
        sys.stdout.write(export_dot(graph))
        return 0
    if args.json:
        sys.stdout.write(dump_graph(graph))
        return 0
    kept = set(graph.layers)
    print(f"code: {to_text(code)}")
    print(f"layers: {code.k}")
    for i in range(1, code.k + 1):
        kind = LAYER_CATALOG[code.layer_types[i - 1]]
        status = "kept" if i in kept else "pruned (no path to DePooling)"
        print(f"  L{i} {kind.name} ({kind.kernel}x{kind.kernel})  [{status}]")
    dep = graph.depooling
    feeders = graph.predecessors(dep)
    names = ["Input" if n == INPUT else f"L{n}" for n in feeders]
    print(f"DePooling inputs: {len(feeders)} ({', '.join(names)})")
    if (INPUT, dep) in graph.edges:
        print("note: default connection Input -> DePooling is active")
    edge_text = ", ".join(
        f"{'In' if s == INPUT else 'L' + str(s)}->{'DeP' if d == dep else 'L' + str(d)}"
        for s, d in sorted(graph.edges)
    )
    print(f"edges: {edge_text}")
    return 0


def cmd_mutate(args) -> int:
    import random

    code = from_text(args.code)
    tier = MutationTier(args.tier)
    if not 0.0 <= args.rate <= 1.0:
        raise ConfigError(f"rate {args.rate} outside [0, 1]")
    mutated = mutate(code, tier, args.rate, random.Random(args.seed))
    print(to_text(mutated))
    return 0


def cmd_similar(args) -> int:
    x = from_text(args.code1)
    y = from_text(args.code2)
    verdict = interspecific_similar(x, y, args.proportion)
    print(f"similar: {'true' if verdict.similar else 'false'}")
    print(f"ones: {verdict.ones_a} vs {verdict.ones_b}")
    print(f"matched: {verdict.matched_types}")
    print(f"S: {verdict.ones_a + verdict.ones_b}")
    print(f"threshold: {verdict.threshold}")
    return 0


def _read_report(path: str) -> list[dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read report {path}: {exc}") from exc
    records = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"corrupt report record at line {number}: {exc}") from exc
        if not isinstance(record, dict):
            raise ConfigError(f"corrupt report record at line {number}: not an object")
        records.append(record)
    if not records:
        raise ConfigError(f"report {path} is empty")
    return records


def cmd_report(args) -> int:
    records = _read_report(args.path)
    generations = [r for r in records if r.get("type") == "generation"]
    if args.csv:
        print(
            "stage,generation,best_so_far,population_mean,suppressed,"
            "clone_amax,clone_aavg,evaluations"
        )
        for r in generations:
            mean = r.get("population_mean")
            print(
                f"{r['stage']},{r['generation']},{r['best_so_far']},"
                f"{'' if mean is None else mean},{len(r.get('suppressed', []))},"
                f"{r.get('clone_amax', '')},{r.get('clone_aavg', '')},"
                f"{r.get('evaluations', '')}"
            )
        return 0
    by_stage: dict[int, list[dict]] = {}
    for r in generations:
        by_stage.setdefault(r["stage"], []).append(r)
    print(f"{'stage':>5}  {'generations':>11}  {'best':>10}  {'mean':>10}")
    for stage in sorted(by_stage):
        rows = by_stage[stage]
        best = max(r["best_so_far"] for r in rows)
        means = [r["population_mean"] for r in rows if r.get("population_mean") is not None]
        mean = sum(means) / len(means) if means else float("nan")
        print(f"{stage:>5}  {len(rows):>11}  {best:>10.6f}  {mean:>10.6f}")
    summaries = [r for r in records if r.get("type") == "summary"]
    if summaries:
        s = summaries[-1]
        print(
            f"termination: {s.get('termination')}  "
            f"best: {s.get('best_affinity'):.6f}  "
            f"evaluations: {s.get('evaluations')}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellnas",
        description="Immune-network search over cell-based architectures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="run a staged search")
    p.add_argument("--config", help=f"JSON config path (default ${CONFIG_ENV})")
    p.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    p.add_argument(
        "--evaluator",
        help="evaluator override: 'surrogate' or 'worker:<command>'",
    )
    p.add_argument("--report", default="report.jsonl", help="report output path")
    p.add_argument("--manifest", default="manifest.json", help="manifest output path")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("decode", help="decode and prune a cell code")
    p.add_argument("code", help="cell code text, e.g. 0,1,2,3/1|10|010|1010")
    p.add_argument("--dot", action="store_true", help="emit DOT instead of a summary")
    p.add_argument(
        "--json", action="store_true", help="emit line-delimited node/edge records"
    )
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("mutate", help="mutate a cell code")
    p.add_argument("code")
    p.add_argument(
        "--tier",
        choices=[t.value for t in MutationTier],
        default=MutationTier.LIGHT.value,
    )
    p.add_argument("--rate", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_mutate)

    p = sub.add_parser("similar", help="compare two cell codes")
    p.add_argument("code1")
    p.add_argument("code2")
    p.add_argument("--proportion", type=float, default=DEFAULT_PROPORTION)
    p.set_defaults(func=cmd_similar)

    p = sub.add_parser("report", help="summarize a search report")
    p.add_argument("path")
    p.add_argument("--csv", action="store_true", help="one CSV row per generation")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EvaluationError as exc:
        print(f"evaluator failure: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, CodeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:  # pragma: no cover - defensive
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
