"""Partitioning strategies over node profiles.

Four strategies plus an enumeration oracle:

* ``exact_partition`` — branch-and-bound search for the partition maximising
  the minimum adjusted angular gap (optimal under the grouping objective).
* ``approximate_partition`` — O(K log K) round-robin assignment over nodes
  sorted by tolerance-shifted angle.
* ``clumped_partition`` — worst-case baseline: angularly adjacent nodes are
  grouped together.
* ``power_partition`` — full-CSI baseline: nodes with similar received power
  are grouped together.
* ``brute_force_partition`` — exhaustive enumeration, used as an independent
  oracle for the exact solver on small instances.

All tie-breaks are by ascending node id, so every strategy is deterministic
under input permutation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .channel import ChannelInstance
from .errors import CapacityError, EnumerationSizeError, SolveTimeout
from .geometry import GAP_CAP, TWO_PI, NodeProfile, Partition, group_value, partition_objective

METHODS = ("exact", "approximation", "clumped", "power", "brute_force")

# Refuse brute-force enumeration beyond this many raw assignments.
MAX_BRUTE_FORCE_ASSIGNMENTS = 10 ** 8

# Powers are compared at this granularity so rows that are equal up to
# normalisation rounding fall back to the node-id tie-break.
_POWER_DECIMALS = 6


@dataclass(frozen=True)
class PartitionResult:
    """A partition, its objective, the producing method and its solve time."""

    partition: Partition
    objective_b: float
    method: str
    solve_time: float


def _require_capacity(num_nodes: int, num_groups: int, capacity: int) -> None:
    if num_groups < 1:
        raise ValueError("num_groups must be >= 1")
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    if num_groups * capacity < num_nodes:
        raise CapacityError(
            f"{num_nodes} nodes exceed {num_groups} groups x {capacity} pilots"
        )


def _result(nodes: list[NodeProfile], group_of: dict[int, int], num_groups: int,
            capacity: int, method: str, solve_time: float) -> PartitionResult:
    partition = Partition(group_of=group_of, num_groups=num_groups, capacity=capacity)
    evaluation = partition_objective(nodes, partition)
    return PartitionResult(partition, evaluation.objective_b, method, solve_time)


def approximate_partition(nodes: list[NodeProfile], num_groups: int,
                          capacity: int) -> PartitionResult:
    """Round-robin partitioning over tolerance-shifted angles, O(K log K).

    The node with the smallest ``theta - pi*sigma`` seeds group 1; the rest
    are sorted ascending by ``theta + pi*sigma`` and dealt to groups
    2, 3, ..., G, 1, 2, ... cyclically. With G*P >= K the deal never
    overfills a group, so the capacity precondition is checked up front.
    """
    _require_capacity(len(nodes), num_groups, capacity)
    start = time.perf_counter()
    group_of: dict[int, int] = {}
    if nodes:
        k = len(nodes)
        theta = np.fromiter((n.theta for n in nodes), dtype=float, count=k)
        tol = math.pi * np.fromiter((n.sigma for n in nodes), dtype=float, count=k)
        ids = np.fromiter((n.node_id for n in nodes), dtype=np.int64, count=k)
        lower = np.lexsort((ids, theta - tol))
        first_id = int(ids[lower[0]])
        group_of[first_id] = 1
        rank = 0
        for i in np.lexsort((ids, theta + tol)):
            node_id = int(ids[i])
            if node_id == first_id:
                continue
            group_of[node_id] = (1 + rank) % num_groups + 1
            rank += 1
    elapsed = time.perf_counter() - start
    return _result(nodes, group_of, num_groups, capacity, "approximation", elapsed)


def _block_partition(ordered_ids: list[int], num_groups: int) -> dict[int, int]:
    """Fill groups with contiguous blocks; sizes differ by at most one,
    earlier groups larger."""
    base, extra = divmod(len(ordered_ids), num_groups)
    group_of: dict[int, int] = {}
    pos = 0
    for g in range(1, num_groups + 1):
        size = base + (1 if g <= extra else 0)
        for node_id in ordered_ids[pos:pos + size]:
            group_of[node_id] = g
        pos += size
    return group_of


def clumped_partition(nodes: list[NodeProfile], num_groups: int,
                      capacity: int) -> PartitionResult:
    """Group angularly adjacent nodes together (worst-case baseline)."""
    _require_capacity(len(nodes), num_groups, capacity)
    start = time.perf_counter()
    ordered = sorted(nodes, key=lambda n: (n.theta, n.node_id))
    group_of = _block_partition([n.node_id for n in ordered], num_groups)
    elapsed = time.perf_counter() - start
    return _result(nodes, group_of, num_groups, capacity, "clumped", elapsed)


def power_partition(instance: ChannelInstance, num_groups: int,
                    capacity: int) -> PartitionResult:
    """Group nodes of similar received power together (full-CSI baseline).

    On per-realization-normalised instances all powers coincide, so the
    ordering degenerates to ascending node id.
    """
    nodes = instance.profiles
    _require_capacity(len(nodes), num_groups, capacity)
    start = time.perf_counter()
    powers = np.sum(np.abs(instance.channel) ** 2, axis=1)
    by_power = sorted(
        range(len(nodes)),
        key=lambda i: (-round(float(powers[i]), _POWER_DECIMALS), nodes[i].node_id),
    )
    group_of = _block_partition([nodes[i].node_id for i in by_power], num_groups)
    elapsed = time.perf_counter() - start
    return _result(nodes, group_of, num_groups, capacity, "power", elapsed)


def brute_force_partition(nodes: list[NodeProfile], num_groups: int,
                          capacity: int) -> PartitionResult:
    """Exhaustive search over all capacity-respecting assignments.

    Ties are resolved towards the lexicographically smallest assignment
    vector (group indices in ascending node-id order). Refuses instances
    with more than MAX_BRUTE_FORCE_ASSIGNMENTS raw assignments.
    """
    _require_capacity(len(nodes), num_groups, capacity)
    if num_groups ** len(nodes) > MAX_BRUTE_FORCE_ASSIGNMENTS:
        raise EnumerationSizeError(
            f"{num_groups}^{len(nodes)} assignments exceed the enumeration bound"
        )
    start = time.perf_counter()
    ordered = sorted(nodes, key=lambda n: n.node_id)
    k = len(ordered)
    best_value = -1.0
    best_assign: list[int] | None = None
    assign = [0] * k
    counts = [0] * (num_groups + 1)
    groups: list[list[NodeProfile]] = [[] for _ in range(num_groups + 1)]

    def recurse(i: int) -> None:
        nonlocal best_value, best_assign
        if i == k:
            value = min(group_value(groups[g]) for g in range(1, num_groups + 1))
            if value > best_value:
                best_value = value
                best_assign = assign.copy()
            return
        for g in range(1, num_groups + 1):
            if counts[g] == capacity:
                continue
            counts[g] += 1
            groups[g].append(ordered[i])
            assign[i] = g
            recurse(i + 1)
            counts[g] -= 1
            groups[g].pop()

    recurse(0)
    assert best_assign is not None
    group_of = {node.node_id: g for node, g in zip(ordered, best_assign)}
    elapsed = time.perf_counter() - start
    return _result(nodes, group_of, num_groups, capacity, "brute_force", elapsed)


def exact_partition(nodes: list[NodeProfile], num_groups: int, capacity: int,
                    time_limit: float | None = None) -> PartitionResult:
    """Optimal partitioning by branch-and-bound.

    Nodes are processed in ascending-angle order and branched on their group.
    Each placement into a nonempty group commits the adjusted gap to that
    group's previous member; the bound is the minimum committed gap so far,
    with every open wraparound counted as the pi cap. A branch is pruned when
    its bound cannot strictly beat the incumbent (seeded from the
    approximation, which is always feasible under the same precondition).
    Group labels are interchangeable, so a node may only open the lowest
    unused group; this removes label symmetry without losing any partition.

    Raises SolveTimeout when `time_limit` seconds elapse before the search
    finishes.
    """
    _require_capacity(len(nodes), num_groups, capacity)
    start = time.perf_counter()
    deadline = None if time_limit is None else start + time_limit

    incumbent = approximate_partition(nodes, num_groups, capacity)
    k = len(nodes)
    if k == 0:
        return PartitionResult(incumbent.partition, incumbent.objective_b,
                               "exact", time.perf_counter() - start)

    order = sorted(nodes, key=lambda n: (n.theta, n.node_id))
    theta = [n.theta for n in order]
    # pi*sigma per node; additions below mirror adjusted_gap's evaluation
    # order so objectives match partition_objective bit for bit.
    tol = [math.pi * n.sigma for n in order]

    best_value = incumbent.objective_b
    best_assign: list[int] | None = None
    assign = [0] * k
    first = [-1] * num_groups
    last = [-1] * num_groups
    counts = [0] * num_groups
    steps = 0

    def search(i: int, bound: float, used: int) -> None:
        nonlocal best_value, best_assign, steps
        steps += 1
        if deadline is not None and steps % 1024 == 0 and time.perf_counter() > deadline:
            raise SolveTimeout(f"exact solver exceeded {time_limit} s")
        if i == k:
            value = bound
            for g in range(used):
                if counts[g] >= 2:
                    f, l = first[g], last[g]
                    wrap = (theta[f] + TWO_PI - theta[l]) + tol[l] + tol[f]
                    if wrap > GAP_CAP:
                        wrap = GAP_CAP
                    if wrap < value:
                        value = wrap
            if value > best_value:
                best_value = value
                best_assign = assign.copy()
            return
        for g in range(min(used + 1, num_groups)):
            c = counts[g]
            if c == capacity:
                continue
            if c == 0:
                child_bound = bound
            else:
                l = last[g]
                gap = (theta[i] - theta[l]) + tol[l] + tol[i]
                if gap > GAP_CAP:
                    gap = GAP_CAP
                child_bound = gap if gap < bound else bound
            if child_bound <= best_value:
                continue
            prev_last = last[g]
            last[g] = i
            counts[g] = c + 1
            if c == 0:
                first[g] = i
            assign[i] = g
            search(i + 1, child_bound, used + 1 if g == used else used)
            last[g] = prev_last
            counts[g] = c
            if c == 0:
                first[g] = -1

    search(0, GAP_CAP, 0)

    if best_assign is None:
        # No strict improvement found: the incumbent is optimal.
        result = _result(nodes, dict(incumbent.partition.group_of), num_groups,
                         capacity, "exact", 0.0)
    else:
        group_of = {order[i].node_id: best_assign[i] + 1 for i in range(k)}
        result = _result(nodes, group_of, num_groups, capacity, "exact", 0.0)
    return PartitionResult(result.partition, result.objective_b, "exact",
                           time.perf_counter() - start)
