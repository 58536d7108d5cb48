import math

import numpy as np
import pytest

from lp_grammar import parse_lp, solve_parsed
from mimopart.geometry import TWO_PI, NodeProfile, group_value
from mimopart.lp_export import build_model, export_lp
from mimopart.partitioners import exact_partition

PI = math.pi


def node(i, theta, sigma=0.0):
    return NodeProfile(node_id=i, theta=theta % TWO_PI, sigma=sigma)


def count_prefix(names, prefix):
    return sum(1 for n in names if n.startswith(prefix))


def rows_by_family(model):
    families = {}
    for row in model.rows:
        family = row.name.rstrip("0123456789_")
        families[family] = families.get(family, 0) + 1
    return families


# ------------------------------------------------------------------ structure

def test_variable_counts_two_nodes():
    model = build_model([node(0, 0.5), node(1, 1.5)], num_groups=1, capacity=2)
    assert count_prefix(model.binaries, "u_") == 2
    assert count_prefix(model.binaries, "Y_") == 4
    assert count_prefix(model.binaries, "m_") == 2
    assert count_prefix(model.free_vars, "t_") == 2
    assert count_prefix(model.free_vars, "s_") == 2
    assert count_prefix(model.free_vars, "v_") == 2
    assert count_prefix(model.free_vars, "z_") == 2
    assert count_prefix(model.free_vars, "T_") == 1
    assert count_prefix(model.free_vars, "S_") == 1
    assert count_prefix(model.nonneg_vars, "d_") == 2
    assert "B" in model.nonneg_vars


def test_constraint_family_counts():
    k, groups, capacity = 3, 2, 3
    nodes = [node(i, 0.3 + 0.7 * i, 0.05 * i) for i in range(k)]
    model = build_model(nodes, groups, capacity)
    families = rows_by_family(model)
    pairs = capacity * (capacity - 1) // 2
    assert families["one_group"] == k
    assert families["capacity"] == groups
    assert families["position_link"] == k * groups
    assert families["one_per_position"] == groups * capacity
    assert families["no_gaps"] == groups * (capacity - 1)
    assert families["angle_select"] == groups * capacity
    assert families["angle_order"] == groups * pairs
    assert families["shift_bound"] == groups * capacity
    assert families["last_angle"] == groups * capacity
    assert families["last_angle_select"] == groups
    assert families["last_shift_select"] == groups
    assert families["pick_last"] == groups
    for aux in ("v_le_t", "v_le_pick", "v_ge_link", "z_le_s", "z_le_pick", "z_ge_link"):
        assert families[aux] == groups * capacity
    assert families["gap"] == groups * (capacity - 1)
    assert families["gap_wrap"] == groups
    assert families["gap_cap"] == groups * capacity
    assert families["min_gap"] == groups * (capacity - 1)
    assert families["min_gap_wrap"] == groups


def test_written_file_parses_and_declares_domains(tmp_path):
    nodes = [node(i, 0.2 + 0.5 * i, 0.1) for i in range(4)]
    path = export_lp(nodes, 2, 3, tmp_path / "model.lp")
    parsed = parse_lp(path.read_text())
    assert parsed.sense == "max"
    assert parsed.objective == {"B": 1.0}
    model = build_model(nodes, 2, 3)
    assert {name for name, *_ in parsed.rows} == {row.name for row in model.rows}
    assert parsed.binaries == set(model.binaries)
    assert parsed.free == set(model.free_vars)
    # every referenced variable is declared binary, free, or default-nonnegative
    declared = parsed.binaries | parsed.free | set(model.nonneg_vars)
    for _, terms, _, _ in parsed.rows:
        assert set(terms) <= declared


def test_full_precision_coefficients(tmp_path):
    theta = 1.2345678901234567
    path = export_lp([node(0, theta, 0.0), node(1, 2.0, 0.25)], 1, 2,
                     tmp_path / "model.lp")
    text = path.read_text()
    assert repr(theta) in text
    assert repr(PI * 0.25) in text  # the tolerance coefficient pi*sigma
    assert repr(TWO_PI) in text


def test_rejects_duplicate_ids():
    with pytest.raises(ValueError):
        build_model([node(0, 0.1), node(0, 0.2)], 1, 2)


# ------------------------------------------------------------------ round trip

def solve_file(path):
    parsed = parse_lp(path.read_text())
    status, value, solution = solve_parsed(parsed)
    return status, value, solution


def test_roundtrip_pair_matches_group_value(tmp_path):
    pair = [node(0, 0.4, 0.05), node(1, 2.2, 0.1)]
    path = export_lp(pair, 1, 2, tmp_path / "pair.lp")
    status, value, _ = solve_file(path)
    assert status == 0
    assert value == pytest.approx(group_value(pair), abs=1e-7)


def test_roundtrip_matches_exact_partitioner(tmp_path):
    rng = np.random.default_rng(44)
    for trial in range(3):
        k = int(rng.integers(3, 6))
        nodes = [
            node(i, rng.uniform(0, TWO_PI), rng.uniform(0, 0.6)) for i in range(k)
        ]
        path = export_lp(nodes, 2, 3, tmp_path / f"m{trial}.lp")
        status, value, _ = solve_file(path)
        expected = exact_partition(nodes, 2, 3).objective_b
        assert status == 0
        assert value == pytest.approx(expected, abs=1e-6)


def test_roundtrip_empty_instance_cap(tmp_path):
    path = export_lp([], 2, 2, tmp_path / "empty.lp")
    status, value, _ = solve_file(path)
    assert status == 0
    assert value == pytest.approx(PI, abs=1e-9)


def test_verbatim_mode_infeasible_on_partial_group(tmp_path):
    # A lone node in a two-position group forces a negative gap under the
    # uncancelled textbook rows; the repaired default stays solvable.
    lone = [node(0, 2.0, 0.0)]
    verbatim = export_lp(lone, 1, 2, tmp_path / "verbatim.lp", repaired=False)
    status, _, _ = solve_file(verbatim)
    assert status == 2  # infeasible
    repaired = export_lp(lone, 1, 2, tmp_path / "repaired.lp")
    status, value, _ = solve_file(repaired)
    assert status == 0
    assert value == pytest.approx(PI, abs=1e-9)


def test_verbatim_mode_matches_on_perfectly_filled_groups(tmp_path):
    # With K == G*P every feasible partition fills every position, so the
    # uncancelled rows never see a partial group and both modes agree.
    rng = np.random.default_rng(45)
    nodes = [
        node(i, rng.uniform(0, TWO_PI), rng.uniform(0, 0.4)) for i in range(4)
    ]
    path = export_lp(nodes, 2, 2, tmp_path / "full.lp", repaired=False)
    status, value, _ = solve_file(path)
    assert status == 0
    assert value == pytest.approx(exact_partition(nodes, 2, 2).objective_b, abs=1e-6)


def test_repair_flag_recorded_in_comment(tmp_path):
    nodes = [node(0, 1.0)]
    assert "repaired=true" in export_lp(nodes, 1, 1, tmp_path / "a.lp").read_text()
    assert "repaired=false" in export_lp(
        nodes, 1, 1, tmp_path / "b.lp", repaired=False
    ).read_text()


def test_solution_assignment_consistent(tmp_path):
    # The MILP's chosen placement must itself score its objective value.
    nodes = [node(0, 0.3), node(1, 0.45), node(2, 3.3), node(3, 4.4)]
    path = export_lp(nodes, 2, 2, tmp_path / "assign.lp")
    status, value, solution = solve_file(path)
    assert status == 0
    by_group = {1: [], 2: []}
    for n in nodes:
        for g in (1, 2):
            if solution[f"u_{n.node_id}_{g}"] > 0.5:
                by_group[g].append(n)
    score = min(group_value(m) for m in by_group.values())
    assert value == pytest.approx(score, abs=1e-6)
