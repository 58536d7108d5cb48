"""Mixed-integer model emitter for the grouping problem (CPLEX LP text).

Variables, for node ids k, groups g in 1..G and positions p in 1..P:

* ``u_k_g`` (binary) — node k is placed in group g.
* ``Y_k_g_p`` (binary) — node k occupies position p of group g.
* ``m_g_p`` (binary) — position p is the last occupied position of group g.
* ``t_g_p`` / ``s_g_p`` (free) — angle and angular shift at position p.
* ``T_g`` / ``S_g`` (free) — angle and shift of the last occupied position.
* ``v_g_p`` / ``z_g_p`` (free) — linearisation products ``t*m`` and ``s*m``.
* ``d_g_p``, ``B`` (nonnegative) — position gaps and the max-min objective.

Positions are filled from the front (occupancy is non-increasing in p), gaps
are taken between consecutive positions plus the wraparound from the last
occupied position back to position 1, every gap is capped at pi, and B is the
smallest gap over all groups.

The default, repaired model deactivates the gap and objective-link rows of a
position whose successor is empty (big-M cancellation on the successor's
occupancy) and likewise cancels the angle-ordering row against the later
position of each pair. With ``repaired=False`` the gap, ordering and
objective-link rows are emitted in their uncancelled textbook form; that
variant leaves any group holding between 1 and P-1 nodes infeasible (the gap
row of the last occupied position forces a negative ``d_g_p``), and exists
only for studying the defect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .geometry import TWO_PI, NodeProfile

PI = math.pi

MODEL_COMMENT = "mimopart grouping model"

_LINE_WIDTH = 200


@dataclass(frozen=True)
class LinearRow:
    """One constraint row: sum(terms) sense rhs."""

    name: str
    terms: dict[str, float]
    sense: str  # "<=", ">=" or "="
    rhs: float


@dataclass(frozen=True)
class MilpModel:
    """Objective variable, rows and variable domains of the emitted model."""

    objective_var: str
    rows: list[LinearRow]
    binaries: list[str]
    free_vars: list[str]
    nonneg_vars: list[str]
    repaired: bool
    comment: str


def _fmt(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


class _ModelBuilder:
    def __init__(self) -> None:
        self.rows: list[LinearRow] = []

    def add(self, name: str, terms: dict[str, float], sense: str, rhs: float) -> None:
        """Add a row; rows whose terms all vanished are dropped after checking
        they hold trivially (0 sense rhs)."""
        terms = {v: c for v, c in terms.items() if c != 0.0}
        if not terms:
            ok = (sense == "<=" and 0.0 <= rhs) or \
                 (sense == ">=" and 0.0 >= rhs) or \
                 (sense == "=" and rhs == 0.0)
            if not ok:
                raise ValueError(f"constraint {name} is trivially infeasible")
            return
        self.rows.append(LinearRow(name, terms, sense, rhs))


def build_model(nodes: list[NodeProfile], num_groups: int, capacity: int,
                repaired: bool = True) -> MilpModel:
    """Assemble the grouping model for the given profiles.

    Big-M constants are 2*pi (angle rows) and pi (objective-link rows), the
    same constants used for the caps; angles and tolerances enter as full
    double-precision coefficients.
    """
    if num_groups < 1 or capacity < 1:
        raise ValueError("num_groups and capacity must be >= 1")
    ids = [n.node_id for n in nodes]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate node ids")
    groups = range(1, num_groups + 1)
    positions = range(1, capacity + 1)
    theta = {n.node_id: n.theta for n in nodes}
    tol = {n.node_id: PI * n.sigma for n in nodes}

    b = _ModelBuilder()

    # Placement: each node in exactly one group, at most P per group.
    for k in ids:
        b.add(f"one_group_{k}", {f"u_{k}_{g}": 1.0 for g in groups}, "=", 1.0)
    for g in groups:
        b.add(f"capacity_{g}", {f"u_{k}_{g}": 1.0 for k in ids}, "<=", float(capacity))

    # Ordering skeleton: one position per placed node, one node per position,
    # positions filled from the front.
    for k in ids:
        for g in groups:
            terms = {f"Y_{k}_{g}_{p}": 1.0 for p in positions}
            terms[f"u_{k}_{g}"] = -1.0
            b.add(f"position_link_{k}_{g}", terms, "=", 0.0)
    for g in groups:
        for p in positions:
            b.add(f"one_per_position_{g}_{p}",
                  {f"Y_{k}_{g}_{p}": 1.0 for k in ids}, "<=", 1.0)
    for g in groups:
        for p in positions[:-1]:
            # Occupancy non-increasing: empty positions sit at the end, which
            # is what the last-position selector and wraparound row assume.
            terms = {f"Y_{k}_{g}_{p}": 1.0 for k in ids}
            for k in ids:
                terms[f"Y_{k}_{g}_{p + 1}"] = -1.0
            b.add(f"no_gaps_{g}_{p}", terms, ">=", 0.0)

    # Angles, ordering among occupied positions, and shift bounds.
    for g in groups:
        for p in positions:
            terms = {f"t_{g}_{p}": 1.0}
            for k in ids:
                terms[f"Y_{k}_{g}_{p}"] = -theta[k]
            b.add(f"angle_select_{g}_{p}", terms, "=", 0.0)
    for g in groups:
        for p in positions:
            for q in positions:
                if p >= q:
                    continue
                cancel = q if repaired else p
                terms = {f"t_{g}_{p}": 1.0, f"t_{g}_{q}": -1.0}
                for k in ids:
                    terms[f"Y_{k}_{g}_{cancel}"] = TWO_PI
                b.add(f"angle_order_{g}_{p}_{q}", terms, "<=", TWO_PI)
    for g in groups:
        for p in positions:
            terms = {f"s_{g}_{p}": 1.0}
            for k in ids:
                terms[f"Y_{k}_{g}_{p}"] = -tol[k]
            b.add(f"shift_bound_{g}_{p}", terms, "<=", 0.0)

    # Last occupied position: T_g/S_g via the m selector and the v = t*m,
    # z = s*m linearisation products.
    for g in groups:
        for p in positions:
            b.add(f"last_angle_{g}_{p}", {f"T_{g}": 1.0, f"t_{g}_{p}": -1.0}, ">=", 0.0)
        b.add(f"pick_last_{g}", {f"m_{g}_{p}": 1.0 for p in positions}, "=", 1.0)
        terms = {f"T_{g}": 1.0}
        for p in positions:
            terms[f"v_{g}_{p}"] = -1.0
        b.add(f"last_angle_select_{g}", terms, "<=", 0.0)
        terms = {f"S_{g}": 1.0}
        for p in positions:
            terms[f"z_{g}_{p}"] = -1.0
        b.add(f"last_shift_select_{g}", terms, "=", 0.0)
    for g in groups:
        for p in positions:
            b.add(f"v_le_t_{g}_{p}", {f"v_{g}_{p}": 1.0, f"t_{g}_{p}": -1.0}, "<=", 0.0)
            b.add(f"v_le_pick_{g}_{p}", {f"v_{g}_{p}": 1.0, f"m_{g}_{p}": -TWO_PI}, "<=", 0.0)
            b.add(f"v_ge_link_{g}_{p}",
                  {f"v_{g}_{p}": 1.0, f"t_{g}_{p}": -1.0, f"m_{g}_{p}": -TWO_PI},
                  ">=", -TWO_PI)
            b.add(f"z_le_s_{g}_{p}", {f"z_{g}_{p}": 1.0, f"s_{g}_{p}": -1.0}, "<=", 0.0)
            b.add(f"z_le_pick_{g}_{p}", {f"z_{g}_{p}": 1.0, f"m_{g}_{p}": -PI}, "<=", 0.0)
            b.add(f"z_ge_link_{g}_{p}",
                  {f"z_{g}_{p}": 1.0, f"s_{g}_{p}": -1.0, f"m_{g}_{p}": -PI},
                  ">=", -PI)

    # Gaps between consecutive positions, the wraparound gap, and the cap.
    for g in groups:
        for p in positions[:-1]:
            terms = {
                f"d_{g}_{p}": 1.0,
                f"t_{g}_{p + 1}": -1.0,
                f"t_{g}_{p}": 1.0,
                f"s_{g}_{p + 1}": -1.0,
                f"s_{g}_{p}": -1.0,
            }
            if repaired:
                for k in ids:
                    terms[f"Y_{k}_{g}_{p + 1}"] = TWO_PI
                b.add(f"gap_{g}_{p}", terms, "<=", TWO_PI)
            else:
                b.add(f"gap_{g}_{p}", terms, "<=", 0.0)
        b.add(f"gap_wrap_{g}",
              {f"d_{g}_{capacity}": 1.0, f"t_{g}_1": -1.0, f"T_{g}": 1.0,
               f"s_{g}_1": -1.0, f"S_{g}": -1.0},
              "<=", TWO_PI)
        for p in positions:
            b.add(f"gap_cap_{g}_{p}", {f"d_{g}_{p}": 1.0}, "<=", PI)

    # Objective links: B below every gap of a consecutive occupied pair and
    # below every wraparound gap.
    for g in groups:
        for p in positions[:-1]:
            terms = {"B": 1.0, f"d_{g}_{p}": -1.0}
            cancel = p + 1 if repaired else p
            for k in ids:
                terms[f"Y_{k}_{g}_{cancel}"] = PI
            b.add(f"min_gap_{g}_{p}", terms, "<=", PI)
        b.add(f"min_gap_wrap_{g}", {"B": 1.0, f"d_{g}_{capacity}": -1.0}, "<=", 0.0)

    binaries = ([f"u_{k}_{g}" for k in ids for g in groups]
                + [f"Y_{k}_{g}_{p}" for k in ids for g in groups for p in positions]
                + [f"m_{g}_{p}" for g in groups for p in positions])
    free_vars = ([f"t_{g}_{p}" for g in groups for p in positions]
                 + [f"s_{g}_{p}" for g in groups for p in positions]
                 + [f"v_{g}_{p}" for g in groups for p in positions]
                 + [f"z_{g}_{p}" for g in groups for p in positions]
                 + [f"T_{g}" for g in groups]
                 + [f"S_{g}" for g in groups])
    nonneg_vars = [f"d_{g}_{p}" for g in groups for p in positions] + ["B"]
    comment = (f"{MODEL_COMMENT}: K={len(ids)} G={num_groups} P={capacity} "
               f"repaired={str(repaired).lower()}")
    return MilpModel(
        objective_var="B",
        rows=b.rows,
        binaries=binaries,
        free_vars=free_vars,
        nonneg_vars=nonneg_vars,
        repaired=repaired,
        comment=comment,
    )


def _wrap(parts: list[str]) -> list[str]:
    lines: list[str] = []
    current = ""
    for part in parts:
        if current and len(current) + len(part) + 1 > _LINE_WIDTH:
            lines.append(current)
            current = " " + part
        else:
            current = part if not current else current + " " + part
    if current:
        lines.append(current)
    return lines


def _row_text(row: LinearRow) -> str:
    parts = [f"{row.name}:"]
    first = True
    for var, coef in row.terms.items():
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = var if mag == 1.0 else f"{_fmt(mag)} {var}"
        if first:
            parts.append(body if sign == "+" else f"- {body}")
            first = False
        else:
            parts.append(f"{sign} {body}")
    parts.append(row.sense)
    parts.append(_fmt(row.rhs))
    return "\n".join(" " + line for line in _wrap(parts))


def write_lp(model: MilpModel, destination: str | Path) -> Path:
    """Write the model as CPLEX-style LP text (Maximize / Subject To /
    Bounds / Binary / End)."""
    lines = [f"\\ {model.comment}", "Maximize", f" obj: {model.objective_var}",
             "Subject To"]
    for row in model.rows:
        lines.append(_row_text(row))
    lines.append("Bounds")
    for var in model.free_vars:
        lines.append(f" {var} free")
    lines.append("Binary")
    for var in model.binaries:
        lines.append(f" {var}")
    lines.append("End")
    path = Path(destination)
    path.write_text("\n".join(lines) + "\n")
    return path


def export_lp(nodes: list[NodeProfile], num_groups: int, capacity: int,
              destination: str | Path, repaired: bool = True) -> Path:
    """Build and write the grouping model for `nodes`; returns the path."""
    return write_lp(build_model(nodes, num_groups, capacity, repaired), destination)
