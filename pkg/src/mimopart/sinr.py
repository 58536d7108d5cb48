"""Uplink SINR under maximum ratio combining, plus cross-instance aggregation.

Only nodes placed in the same group transmit simultaneously, so a node's
interferers are exactly its group mates. With perfect CSI and MRC combining,
node k in group J sees

    SINR_k = rho * ||h_k||^4 / (rho * sum_{j in J, j != k} |h_k^H h_j|^2 + ||h_k||^2)

with rho the per-node transmit SNR. The implementation divides numerator and
denominator by ||h_k||^2 so an interference-free node evaluates to exactly
``rho * ||h_k||^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .channel import ChannelInstance
from .geometry import Partition


@dataclass(frozen=True)
class SinrReport:
    """Per-node SINR in dB for one instance/partition, with aggregates."""

    per_node_sinr_db: dict[int, float]
    min_db: float
    mean_db: float
    max_db: float


@dataclass(frozen=True)
class CiSummary:
    """Sample mean with a two-sided Student-t confidence interval.

    With fewer than two samples the interval is undefined and the ci fields
    are None.
    """

    n: int
    mean: float
    ci_lo: float | None
    ci_hi: float | None
    half_width: float | None


def mrc_sinr(instance: ChannelInstance, partition: Partition) -> SinrReport:
    """SINR of every node under MRC, interferers limited to group mates."""
    groups = partition.members(instance.profiles)
    row_of = {p.node_id: i for i, p in enumerate(instance.profiles)}
    rho = instance.snr_linear
    per_node: dict[int, float] = {}
    for members in groups.values():
        if not members:
            continue
        rows = [row_of[n.node_id] for n in members]
        h = instance.channel[rows]
        gram = h @ h.conj().T
        norms = np.real(np.diag(gram))
        cross = np.abs(gram) ** 2
        np.fill_diagonal(cross, 0.0)
        interference = cross.sum(axis=1)
        for idx, node in enumerate(members):
            linear = rho * norms[idx] / (rho * interference[idx] / norms[idx] + 1.0)
            per_node[node.node_id] = 10.0 * math.log10(linear)
    values = list(per_node.values())
    return SinrReport(
        per_node_sinr_db=per_node,
        min_db=min(values),
        mean_db=sum(values) / len(values),
        max_db=max(values),
    )


def mean_ci(values: list[float], confidence: float = 0.95) -> CiSummary:
    """Mean and two-sided Student-t interval with n-1 degrees of freedom."""
    n = len(values)
    if n == 0:
        raise ValueError("need at least one value")
    mean = float(np.mean(values))
    if n < 2:
        return CiSummary(n=n, mean=mean, ci_lo=None, ci_hi=None, half_width=None)
    sd = float(np.std(values, ddof=1))
    t = float(stats.t.ppf(0.5 + confidence / 2.0, n - 1))
    half = t * sd / math.sqrt(n)
    return CiSummary(n=n, mean=mean, ci_lo=mean - half, ci_hi=mean + half, half_width=half)


def aggregate(reports: list[SinrReport], confidence: float = 0.95) -> dict[str, CiSummary]:
    """Mean and confidence interval of each SINR aggregate across instances."""
    if not reports:
        raise ValueError("need at least one report")
    return {
        "min_db": mean_ci([r.min_db for r in reports], confidence),
        "mean_db": mean_ci([r.mean_db for r in reports], confidence),
        "max_db": mean_ci([r.max_db for r in reports], confidence),
    }
