import math

import numpy as np
import pytest

from mimopart.channel import ArrayGeometry, ChannelInstance, ExperimentConfig
from mimopart.errors import ConsistencyError
from mimopart.geometry import NodeProfile, Partition
from mimopart.sinr import aggregate, mean_ci, mrc_sinr, SinrReport


def make_instance(rows, snr_linear=100.0):
    rows = np.asarray(rows, dtype=complex)
    k, m = rows.shape
    config = ExperimentConfig(num_nodes=k, num_antennas=m, array_rows=1, array_cols=m)
    profiles = [NodeProfile(i, 0.1 + 0.01 * i, 0.0) for i in range(k)]
    return ChannelInstance(
        profiles=profiles,
        channel=rows,
        clusters=None,
        snr_linear=snr_linear,
        array_geometry=ArrayGeometry(1, m),
        config=config,
    )


def all_in_one_group(k):
    return Partition(group_of={i: 1 for i in range(k)}, num_groups=1, capacity=k)


def singletons(k):
    return Partition(group_of={i: i + 1 for i in range(k)}, num_groups=k, capacity=1)


# ------------------------------------------------------------------- mrc_sinr

def test_singleton_sinr_is_rho_times_power():
    instance = make_instance(np.ones((1, 100)))
    report = mrc_sinr(instance, singletons(1))
    # rho*||h||^2 = 100*100 -> exactly 40 dB
    assert report.per_node_sinr_db[0] == 40.0


def test_orthogonal_channels_see_no_interference():
    rows = np.zeros((2, 4), dtype=complex)
    rows[0, 0] = 2.0
    rows[1, 1] = 2.0
    instance = make_instance(rows)
    shared = mrc_sinr(instance, all_in_one_group(2))
    alone = mrc_sinr(instance, singletons(2))
    assert shared.per_node_sinr_db == alone.per_node_sinr_db


def test_identical_channels_just_under_zero_db():
    rows = np.ones((2, 100), dtype=complex)
    instance = make_instance(rows)
    report = mrc_sinr(instance, all_in_one_group(2))
    expected_linear = 1e6 / (1e6 + 1e2)
    for value in report.per_node_sinr_db.values():
        assert value == pytest.approx(10 * math.log10(expected_linear), rel=1e-12)
        assert value < 0.0


def test_adding_interferer_never_raises_sinr():
    rng = np.random.default_rng(31)
    for _ in range(40):
        k = int(rng.integers(3, 8))
        m = 16
        rows = (rng.standard_normal((k, m)) + 1j * rng.standard_normal((k, m)))
        instance = make_instance(rows)
        smaller = Partition(
            group_of={i: (1 if i < k - 1 else 2) for i in range(k)},
            num_groups=2, capacity=k,
        )
        bigger = all_in_one_group(k)
        before = mrc_sinr(instance, smaller)
        after = mrc_sinr(instance, bigger)
        for i in range(k - 1):
            assert after.per_node_sinr_db[i] <= before.per_node_sinr_db[i] + 1e-9


def test_phase_rotation_invariance():
    rng = np.random.default_rng(32)
    for _ in range(20):
        rows = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
        instance = make_instance(rows)
        reference = mrc_sinr(instance, all_in_one_group(4))
        rotated_rows = rows.copy()
        rotated_rows[2] *= np.exp(1j * rng.uniform(0, 2 * math.pi))
        rotated = mrc_sinr(make_instance(rotated_rows), all_in_one_group(4))
        for i in range(4):
            assert rotated.per_node_sinr_db[i] == pytest.approx(
                reference.per_node_sinr_db[i], rel=1e-9
            )


def test_aggregates_match_per_node_values():
    rng = np.random.default_rng(33)
    rows = rng.standard_normal((6, 12)) + 1j * rng.standard_normal((6, 12))
    instance = make_instance(rows)
    partition = Partition(
        group_of={i: 1 + i % 2 for i in range(6)}, num_groups=2, capacity=3
    )
    report = mrc_sinr(instance, partition)
    values = list(report.per_node_sinr_db.values())
    assert report.min_db == min(values)
    assert report.max_db == max(values)
    assert report.mean_db == pytest.approx(sum(values) / len(values), rel=1e-12)
    assert report.min_db <= report.mean_db <= report.max_db
    assert set(report.per_node_sinr_db) == {0, 1, 2, 3, 4, 5}


def test_mrc_rejects_mismatched_partition():
    instance = make_instance(np.ones((2, 4)))
    bad = Partition(group_of={0: 1, 5: 1}, num_groups=1, capacity=2)
    with pytest.raises(ConsistencyError):
        mrc_sinr(instance, bad)


# ------------------------------------------------------------------ aggregation

def report(min_db, mean_db=None, max_db=None):
    mean_db = min_db if mean_db is None else mean_db
    max_db = mean_db if max_db is None else max_db
    return SinrReport({0: min_db}, min_db, mean_db, max_db)


def test_aggregate_zero_width_for_identical_reports():
    summary = aggregate([report(12.5)] * 20)
    assert summary["min_db"].mean == 12.5
    assert summary["min_db"].half_width == pytest.approx(0.0, abs=1e-12)


def test_aggregate_two_sample_hand_value():
    summary = aggregate([report(10.0), report(14.0)])
    # t(0.975, 1) * sd / sqrt(2) = 12.7062... * 2.8284.../1.4142... = 25.4124...
    assert summary["min_db"].mean == 12.0
    assert summary["min_db"].half_width == pytest.approx(25.4124094723494, rel=1e-10)


def test_mean_ci_single_sample_flagged():
    summary = mean_ci([3.0])
    assert summary.n == 1
    assert summary.mean == 3.0
    assert summary.ci_lo is None and summary.ci_hi is None and summary.half_width is None


def test_mean_ci_empty_rejected():
    with pytest.raises(ValueError):
        mean_ci([])


def test_mean_ci_coverage_monte_carlo():
    rng = np.random.default_rng(34)
    mu, sd, trials = 3.0, 2.0, 400
    covered = 0
    for _ in range(trials):
        sample = rng.normal(mu, sd, 20)
        summary = mean_ci(list(sample))
        if summary.ci_lo <= mu <= summary.ci_hi:
            covered += 1
    coverage = covered / trials
    assert 0.91 <= coverage <= 0.985
