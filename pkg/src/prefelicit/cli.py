"""Command-line driver for batch simulation experiments.

``run`` replays the full protocol on randomly generated instances: hidden
basis-vector preferences, a simulated (possibly noisy) decision maker, one
elicitation session per instance, and per-query recommendation scores
written as CSV with an aggregate table on stdout. ``gen-instance`` and
``score`` are the file-level utilities around it.

Exit codes: 0 on success, 1 when some instances failed to solve (their rows
are skipped and the failure is reported), 2 on usage or I/O errors.
"""

from __future__ import annotations

import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import click
import numpy as np

from .elicitation import (
    SessionConfig,
    SimulatedDecisionMaker,
    hidden_weight,
    new_session,
    score,
    step,
)
from .milp import get_backend
from .model import WeightVector, aggregate
from .oracle import best_scalarized
from .problems import (
    generate_allocation,
    generate_knapsack,
    load_instance,
    save_instance,
)

CSV_COLUMNS = ["instance_id", "query_index", "score", "mmer", "wall_time_ms"]


def splitmix64(x: int) -> int:
    """One SplitMix64 output for input x; the documented master-seed to
    per-instance-seed derivation (instance i uses splitmix64(master + i))."""
    z = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return (z ^ (z >> 31)) & 0xFFFFFFFFFFFFFFFF


def instance_seeds(master: int, count: int) -> list[int]:
    return [splitmix64(master + i) for i in range(count)]


@dataclass
class _Task:
    instance_id: int
    problem: str
    shape: dict
    sigma: float
    config_kwargs: dict
    seed: int
    backend_name: str
    time_limit: float
    timing: bool


def _make_instance(problem: str, shape: dict, seed: int):
    if problem == "mkp":
        return generate_knapsack(shape["n"], shape["p"], seed)
    return generate_allocation(shape["n"], shape["m"], shape["r"], shape["b"], seed)


def _run_one(task: _Task) -> dict:
    """One instance end to end; returns rows plus summary facts."""
    backend = get_backend(task.backend_name, time_limit=task.time_limit)
    instance = _make_instance(task.problem, task.shape, task.seed)
    w_hidden = hidden_weight(instance.n, splitmix64(task.seed))
    dm = SimulatedDecisionMaker(w_hidden, task.sigma, rng_seed=splitmix64(task.seed + 1))
    config = SessionConfig(rng_seed=task.seed, **task.config_kwargs)
    x_best = best_scalarized(instance, w_hidden)

    rows = []
    state = new_session(instance, config)
    started = time.perf_counter()
    while not state.finished:
        state = step(state, instance, config, backend, dm)
        elapsed_ms = int(1000 * (time.perf_counter() - started)) if task.timing else 0
        report = state.trace[-1]
        rows.append(
            {
                "instance_id": task.instance_id,
                "query_index": len(state.trace) - 1,
                "score": score(report.argmin_solution, w_hidden, instance, backend, x_best=x_best),
                "mmer": report.value,
                "wall_time_ms": elapsed_ms,
            }
        )
        started = time.perf_counter()
    return {
        "instance_id": task.instance_id,
        "rows": rows,
        "queries": state.query_count,
        "final_score": rows[-1]["score"],
        "asked": dm.asked,
        "wrong": dm.wrong,
    }


def _format_float(v: float) -> str:
    return format(float(v), ".12g")


def _summarize(results: list[dict], sigma: float):
    by_query: dict[int, list[float]] = {}
    for res in results:
        for row in res["rows"]:
            by_query.setdefault(row["query_index"], []).append(row["score"])
    click.echo(f"sigma={sigma}  instances={len(results)}")
    click.echo("query  n    mean   median     q1     q3")
    for q in sorted(by_query):
        s = np.array(by_query[q])
        q1, med, q3 = np.percentile(s, [25, 50, 75])
        click.echo(f"{q:5d} {len(s):3d} {s.mean():7.4f} {med:8.4f} {q1:6.4f} {q3:6.4f}")
    counts = np.bincount([res["queries"] for res in results])
    hist = "  ".join(f"{q}:{c}" for q, c in enumerate(counts) if c)
    click.echo(f"queries-to-termination histogram: {hist}")
    asked = sum(res["asked"] for res in results)
    wrong = sum(res["wrong"] for res in results)
    if asked:
        click.echo(f"wrong answers: {wrong}/{asked} ({100.0 * wrong / asked:.1f}%)")


@click.group()
def main():
    """Preference elicitation experiments over combinatorial instances."""


@main.command("run")
@click.option("--problem", type=click.Choice(["mkp", "map"]), required=True)
@click.option("--instances", type=int, default=50, show_default=True)
@click.option("--n", type=int, default=5, show_default=True, help="criterion count")
@click.option("--p", type=int, default=100, show_default=True, help="MKP item count")
@click.option("--m", type=int, default=50, show_default=True, help="MAP agent count")
@click.option("--r", type=int, default=5, show_default=True, help="MAP resource count")
@click.option("--b", type=int, default=15, show_default=True, help="MAP agents-per-resource bound")
@click.option("--sigma", type=float, multiple=True, default=(0.0,), show_default=True,
              help="DM answer noise; repeat the flag for a sweep")
@click.option("--sample", type=int, default=100, show_default=True)
@click.option("--clusters", type=int, default=20, show_default=True)
@click.option("--max-queries", type=int, default=15, show_default=True)
@click.option("--stop-frac", type=float, default=0.1, show_default=True)
@click.option("--sigma-model", type=float, default=0.05, show_default=True,
              help="likelihood noise used by the Bayesian update")
@click.option("--seed", type=int, default=7, show_default=True, help="master seed")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--backend", type=click.Choice(["highs", "bnb"]), default="highs", show_default=True)
@click.option("--time-limit", type=float, default=60.0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--timing/--no-timing", default=True,
              help="--no-timing writes 0 in wall_time_ms for byte-stable output")
def run_cmd(problem, instances, n, p, m, r, b, sigma, sample, clusters, max_queries,
            stop_frac, sigma_model, seed, out, backend, time_limit, workers, timing):
    """Simulate elicitation sessions on random instances and write scores."""
    shape = {"n": n, "p": p} if problem == "mkp" else {"n": n, "m": m, "r": r, "b": b}
    config_kwargs = {
        "sample_size": sample,
        "cluster_count": clusters,
        "max_queries": max_queries,
        "stop_fraction": stop_frac,
        "sigma_model": sigma_model,
    }
    failures = 0
    all_rows = []
    for sig_index, sig in enumerate(sigma):
        seeds = instance_seeds(seed + sig_index, instances)
        tasks = [
            _Task(i, problem, shape, sig, config_kwargs, seeds[i], backend, time_limit, timing)
            for i in range(instances)
        ]
        results, errors = _execute(tasks, workers)
        failures += errors
        for res in results:
            for row in res["rows"]:
                row["sigma"] = sig
                all_rows.append(row)
        if results:
            _summarize(results, sig)

    all_rows.sort(key=lambda row: (row["sigma"], row["instance_id"], row["query_index"]))
    try:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sigma"] + CSV_COLUMNS)
            for row in all_rows:
                writer.writerow(
                    [
                        _format_float(row["sigma"]),
                        row["instance_id"],
                        row["query_index"],
                        _format_float(row["score"]),
                        _format_float(row["mmer"]),
                        row["wall_time_ms"],
                    ]
                )
    except OSError as exc:
        click.echo(f"cannot write {out}: {exc}", err=True)
        sys.exit(2)
    if failures:
        click.echo(f"{failures} instance(s) failed and were skipped", err=True)
        sys.exit(1)


def _execute(tasks, workers):
    results, errors = [], 0
    if workers <= 1:
        for task in tasks:
            try:
                results.append(_run_one(task))
            except Exception as exc:  # noqa: BLE001 - per-instance isolation
                errors += 1
                click.echo(f"instance {task.instance_id} failed: {exc}", err=True)
        return results, errors
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(_run_one, task): task for task in tasks}
        for future, task in futures.items():
            try:
                results.append(future.result())
            except Exception as exc:  # noqa: BLE001
                errors += 1
                click.echo(f"instance {task.instance_id} failed: {exc}", err=True)
    results.sort(key=lambda res: res["instance_id"])
    return results, errors


@main.command("gen-instance")
@click.option("--problem", type=click.Choice(["mkp", "map"]), required=True)
@click.option("--n", type=int, default=5, show_default=True)
@click.option("--p", type=int, default=100, show_default=True)
@click.option("--m", type=int, default=50, show_default=True)
@click.option("--r", type=int, default=5, show_default=True)
@click.option("--b", type=int, default=15, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def gen_instance_cmd(problem, n, p, m, r, b, seed, out):
    """Generate one instance and write it as JSON."""
    shape = {"n": n, "p": p} if problem == "mkp" else {"n": n, "m": m, "r": r, "b": b}
    try:
        instance = _make_instance(problem, shape, seed)
    except ValueError as exc:
        click.echo(str(exc), err=True)
        sys.exit(2)
    try:
        save_instance(instance, out)
    except OSError as exc:
        click.echo(f"cannot write {out}: {exc}", err=True)
        sys.exit(2)


@main.command("score")
@click.option("--instance", "instance_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--decision", "decision_json", type=str, required=True,
              help="JSON list of 0/1, or @file containing one")
@click.option("--weights", "weights_csv", type=str, required=True,
              help="comma-separated hidden weights (must sum to 1)")
@click.option("--backend", type=click.Choice(["highs", "bnb"]), default="highs", show_default=True)
def score_cmd(instance_path, decision_json, weights_csv, backend):
    """Score a decision vector against the optimum under given weights."""
    try:
        instance = load_instance(instance_path)
        if decision_json.startswith("@"):
            with open(decision_json[1:]) as fh:
                decision_json = fh.read()
        decision = np.array(json.loads(decision_json), dtype=np.int8)
        w = WeightVector(np.array([float(v) for v in weights_csv.split(",")]))
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        click.echo(f"bad input: {exc}", err=True)
        sys.exit(2)
    solution = instance.solution(decision)
    x_best = best_scalarized(instance, w)
    s = score(solution, w, instance, get_backend(backend), x_best=x_best)
    click.echo(f"value {aggregate(w, solution):.6f}  optimum {aggregate(w, x_best):.6f}  score {s:.6f}")


if __name__ == "__main__":
    main()
