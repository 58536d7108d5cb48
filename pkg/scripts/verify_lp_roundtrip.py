#!/usr/bin/env python3
"""Offline MILP round-trip check (manual step, not part of the test suite).

Exports the repaired grouping model for a handful of oracle-sized random
instances, solves every exported LP file with an external MILP solver, and
compares each optimum against the branch-and-bound objective at 1e-6.

Solver resolution order:

1. ``highspy`` (pip install highspy) reading the LP file directly;
2. ``scipy.optimize.milp`` (HiGHS bundled with scipy) on the parsed file,
   via the test suite's minimal LP parser.

Usage:
    python scripts/verify_lp_roundtrip.py [--instances N] [--out-dir DIR]

Exit codes: 0 all optima match, 2 any mismatch or solver failure.
"""

from __future__ import annotations

import argparse
import sys
import tempfile
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "tests"))

from mimopart.channel import ExperimentConfig, generate_instance
from mimopart.lp_export import export_lp
from mimopart.partitioners import exact_partition

TOLERANCE = 1e-6


def solve_with_highspy(path: Path):
    import highspy

    solver = highspy.Highs()
    solver.setOptionValue("output_flag", False)
    solver.setOptionValue("mip_rel_gap", 0.0)
    solver.setOptionValue("mip_feasibility_tolerance", 1e-9)
    solver.readModel(str(path))
    solver.run()
    status = solver.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        raise RuntimeError(f"highspy status {status}")
    return solver.getObjectiveValue()


def solve_with_scipy(path: Path):
    from lp_grammar import parse_lp, solve_parsed

    status, value, _ = solve_parsed(parse_lp(path.read_text()))
    if status != 0:
        raise RuntimeError(f"scipy.optimize.milp status {status}")
    return value


def pick_solver():
    try:
        import highspy  # noqa: F401
        return "highspy", solve_with_highspy
    except ImportError:
        pass
    try:
        from scipy.optimize import milp  # noqa: F401
        return "scipy-highs", solve_with_scipy
    except ImportError:
        return None, None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--instances", type=int, default=4,
                        help="number of oracle-sized instances (default 4)")
    parser.add_argument("--out-dir", type=Path, default=None,
                        help="keep exported LP files here (default: temp dir)")
    parser.add_argument("--seed", type=int, default=20240)
    args = parser.parse_args(argv)

    name, solve = pick_solver()
    if solve is None:
        print("no MILP solver available: pip install highspy (or scipy)")
        return 2

    out_dir = args.out_dir or Path(tempfile.mkdtemp(prefix="mimopart_lp_"))
    out_dir.mkdir(parents=True, exist_ok=True)
    print(f"solver: {name}; LP files in {out_dir}")

    rng = np.random.default_rng(args.seed)
    failures = 0
    for i in range(args.instances):
        k = 6 + i % 4
        config = ExperimentConfig(num_nodes=k, rng_seed=int(rng.integers(2 ** 31)))
        instance = generate_instance(config)
        path = export_lp(instance.profiles, 3, 4, out_dir / f"roundtrip_{i}_k{k}.lp")
        expected = exact_partition(instance.profiles, 3, 4).objective_b
        try:
            solved = solve(path)
        except Exception as exc:  # solver-specific failure modes
            print(f"[{i}] K={k}: solver error: {exc}")
            failures += 1
            continue
        delta = abs(solved - expected)
        verdict = "PASS" if delta <= TOLERANCE else "FAIL"
        if verdict == "FAIL":
            failures += 1
        print(f"[{i}] K={k}: external {solved:.12f} vs exact {expected:.12f} "
              f"(|delta| {delta:.2e}) {verdict}")

    print("all optima match" if failures == 0 else f"{failures} mismatches")
    return 0 if failures == 0 else 2


if __name__ == "__main__":
    sys.exit(main())
