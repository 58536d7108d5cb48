"""Experiment harness: batch instance generation, evaluation and summaries.

Everything is file-driven and deterministic: instance seeds derive from a
single master seed, evaluation rows are merged in (instance, method) order
regardless of worker completion order, and CSV schemas are versioned and
validated on read.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from importlib import metadata
from pathlib import Path

import numpy as np

from .channel import ExperimentConfig, config_to_dict, generate_instance, load_instance, save_instance
from .errors import ConfigError, SolveTimeout, ToolkitError
from .lp_export import export_lp
from .partitioners import (
    METHODS,
    approximate_partition,
    brute_force_partition,
    clumped_partition,
    exact_partition,
    power_partition,
)
from .sinr import mean_ci, mrc_sinr

try:
    TOOLKIT_VERSION = metadata.version("mimopart")
except metadata.PackageNotFoundError:
    TOOLKIT_VERSION = "unknown"

MANIFEST_FORMAT = "mimopart-manifest-v1"
RESULTS_SCHEMA = "mimopart-results-v1"
SUMMARY_SCHEMA = "mimopart-summary-v1"

RESULTS_COLUMNS = [
    "schema_version", "instance", "seed", "num_nodes", "num_groups",
    "num_pilots", "method", "status", "objective_b", "min_sinr_db",
    "mean_sinr_db", "max_sinr_db", "solve_time_s",
]

SUMMARY_COLUMNS = [
    "schema_version", "num_nodes", "method", "metric", "n", "mean",
    "ci_lo", "ci_hi",
]

SUMMARY_METRICS = ("objective_b", "min_sinr_db", "mean_sinr_db",
                   "max_sinr_db", "solve_time_s")

DEFAULT_METHODS = ("exact", "approximation", "clumped", "power")


def derive_seeds(master_seed: int, count: int) -> list[int]:
    """Deterministic per-instance seeds derived from the master seed."""
    if count == 0:
        return []
    state = np.random.SeedSequence(master_seed).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


def instance_filename(num_nodes: int, index: int) -> str:
    return f"instance_n{num_nodes:04d}_i{index:04d}.json"


def cmd_generate(config: ExperimentConfig, master_seed: int, count: int,
                 out_dir: str | Path) -> dict:
    """Write `count` instance files plus a manifest; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seeds = derive_seeds(master_seed, count)
    entries = []
    for i, seed in enumerate(seeds):
        instance = generate_instance(replace(config, rng_seed=seed))
        name = instance_filename(config.num_nodes, i)
        save_instance(instance, out / name)
        entries.append({"file": name, "seed": seed})
    manifest = {
        "format": MANIFEST_FORMAT,
        "version": TOOLKIT_VERSION,
        "command": "generate",
        "master_seed": master_seed,
        "count": count,
        "config": config_to_dict(config),
        "instances": entries,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def _blank_row(name: str, method: str, status: str) -> dict:
    return {
        "schema_version": RESULTS_SCHEMA,
        "instance": name,
        "seed": "",
        "num_nodes": "",
        "num_groups": "",
        "num_pilots": "",
        "method": method,
        "status": status,
        "objective_b": "",
        "min_sinr_db": "",
        "mean_sinr_db": "",
        "max_sinr_db": "",
        "solve_time_s": "",
    }


def evaluate_one(path: str, method: str, num_groups: int | None,
                 num_pilots: int | None, timeout: float | None) -> tuple[dict, str | None]:
    """Evaluate a single (instance file, method) task; returns (row, error).

    The row is always produced: failures and exact-solver timeouts are
    recorded with their status rather than dropped.
    """
    name = Path(path).name
    try:
        instance = load_instance(path)
    except (OSError, ValueError, KeyError) as exc:
        return _blank_row(name, method, "error"), f"{name}: {exc}"
    groups = num_groups if num_groups is not None else instance.config.num_groups
    pilots = num_pilots if num_pilots is not None else instance.config.num_pilots
    row = _blank_row(name, method, "ok")
    row.update({
        "seed": instance.config.rng_seed,
        "num_nodes": instance.num_nodes,
        "num_groups": groups,
        "num_pilots": pilots,
    })
    started = time.perf_counter()
    try:
        if method == "exact":
            result = exact_partition(instance.profiles, groups, pilots, time_limit=timeout)
        elif method == "approximation":
            result = approximate_partition(instance.profiles, groups, pilots)
        elif method == "clumped":
            result = clumped_partition(instance.profiles, groups, pilots)
        elif method == "power":
            result = power_partition(instance, groups, pilots)
        elif method == "brute_force":
            result = brute_force_partition(instance.profiles, groups, pilots)
        else:
            raise ValueError(f"unknown method {method!r}")
    except SolveTimeout:
        row["status"] = "timeout"
        row["solve_time_s"] = repr(time.perf_counter() - started)
        return row, None
    except (ToolkitError, ValueError) as exc:
        row["status"] = "error"
        return row, f"{name}/{method}: {exc}"
    report = mrc_sinr(instance, result.partition)
    row.update({
        "objective_b": repr(result.objective_b),
        "min_sinr_db": repr(report.min_db),
        "mean_sinr_db": repr(report.mean_db),
        "max_sinr_db": repr(report.max_db),
        "solve_time_s": repr(result.solve_time),
    })
    return row, None


def list_instance_files(in_dir: str | Path) -> list[Path]:
    files = sorted(p for p in Path(in_dir).glob("*.json") if p.name != "manifest.json")
    if not files:
        raise ConfigError(f"no instance files found in {in_dir}")
    return files


def cmd_evaluate(in_dir: str | Path, methods: list[str],
                 num_groups: int | None, num_pilots: int | None,
                 timeout: float | None, workers: int,
                 out_csv: str | Path) -> dict:
    """Run every (instance, method) task and write the results CSV.

    Rows appear in deterministic (instance, method) order. Returns counters:
    rows, timeouts, errors and the error messages.
    """
    for method in methods:
        if method not in METHODS:
            raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    files = list_instance_files(in_dir)
    tasks = [(str(path), method) for path in files for method in methods]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(
                evaluate_one,
                [t[0] for t in tasks],
                [t[1] for t in tasks],
                [num_groups] * len(tasks),
                [num_pilots] * len(tasks),
                [timeout] * len(tasks),
            ))
    else:
        outcomes = [evaluate_one(path, method, num_groups, num_pilots, timeout)
                    for path, method in tasks]
    rows = [row for row, _ in outcomes]
    errors = [err for _, err in outcomes if err is not None]
    out = Path(out_csv)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=RESULTS_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    method_time = {
        m: sum(float(r["solve_time_s"]) for r in rows
               if r["method"] == m and r["status"] == "ok")
        for m in methods
    }
    manifest = {
        "format": MANIFEST_FORMAT,
        "version": TOOLKIT_VERSION,
        "command": "evaluate",
        "methods": list(methods),
        "num_groups": num_groups,
        "num_pilots": num_pilots,
        "timeout_s": timeout,
        "workers": workers,
        "instances": [p.name for p in files],
        "results": str(out),
        "rows": len(rows),
        "timeouts": sum(1 for r in rows if r["status"] == "timeout"),
        "errors": sum(1 for r in rows if r["status"] == "error"),
        "error_messages": errors,
        "method_solve_time_s": method_time,
    }
    manifest_path = out.with_name(out.stem + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return {
        "rows": len(rows),
        "timeouts": manifest["timeouts"],
        "errors": manifest["errors"],
        "messages": errors,
        "out": str(out),
        "manifest": str(manifest_path),
    }


def read_results(results_csv: str | Path) -> list[dict]:
    """Read and validate a results CSV; parse errors carry line numbers."""
    path = Path(results_csv)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: line 1: empty file") from None
        if header != RESULTS_COLUMNS:
            raise ConfigError(f"{path}: line 1: unexpected header {header!r}")
        rows = []
        for values in reader:
            line = reader.line_num
            if len(values) != len(RESULTS_COLUMNS):
                raise ConfigError(
                    f"{path}: line {line}: expected {len(RESULTS_COLUMNS)} fields, "
                    f"got {len(values)}"
                )
            row = dict(zip(RESULTS_COLUMNS, values))
            if row["schema_version"] != RESULTS_SCHEMA:
                raise ConfigError(
                    f"{path}: line {line}: schema {row['schema_version']!r} "
                    f"does not match {RESULTS_SCHEMA!r}"
                )
            if row["status"] == "ok":
                for metric in SUMMARY_METRICS:
                    try:
                        float(row[metric])
                    except ValueError:
                        raise ConfigError(
                            f"{path}: line {line}: non-numeric {metric}: "
                            f"{row[metric]!r}"
                        ) from None
            rows.append(row)
    return rows


def cmd_summarize(results_csv: str | Path, out_csv: str | Path) -> int:
    """Aggregate results per (node count, method, metric); returns row count.

    Only status=ok rows enter the statistics. Output rows are mean plus a
    two-sided 95% Student-t interval; with a single sample the interval
    fields are left blank.
    """
    rows = [r for r in read_results(results_csv) if r["status"] == "ok"]
    grouped: dict[tuple[int, str], list[dict]] = {}
    for row in rows:
        grouped.setdefault((int(row["num_nodes"]), row["method"]), []).append(row)

    def method_order(name: str) -> tuple[int, str]:
        return (METHODS.index(name) if name in METHODS else len(METHODS), name)

    out = Path(out_csv)
    out.parent.mkdir(parents=True, exist_ok=True)
    written = 0
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for num_nodes, method in sorted(grouped, key=lambda k: (k[0], method_order(k[1]))):
            bucket = grouped[(num_nodes, method)]
            for metric in SUMMARY_METRICS:
                summary = mean_ci([float(r[metric]) for r in bucket])
                writer.writerow([
                    SUMMARY_SCHEMA, num_nodes, method, metric, summary.n,
                    repr(summary.mean),
                    "" if summary.ci_lo is None else repr(summary.ci_lo),
                    "" if summary.ci_hi is None else repr(summary.ci_hi),
                ])
                written += 1
    return written


def cmd_export_lp(instance_path: str | Path, num_groups: int | None,
                  num_pilots: int | None, out_path: str | Path,
                  repaired: bool = True) -> Path:
    """Export the grouping model of one instance file as LP text."""
    instance = load_instance(instance_path)
    groups = num_groups if num_groups is not None else instance.config.num_groups
    pilots = num_pilots if num_pilots is not None else instance.config.num_pilots
    return export_lp(instance.profiles, groups, pilots, out_path, repaired=repaired)
