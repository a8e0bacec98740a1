"""Percept-to-anchor correspondence for consecutive frames.

Camera motion is compensated first, then a dissimilarity matrix over
(position, size) pairs is minimized by optimal one-to-one assignment, and
matches at or above the cost threshold are discarded.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Anchor, EngineConfig, EngineError, Percept, Vec2, WorldModel


@dataclass(frozen=True)
class CostMatrix:
    """Dissimilarity of every percept (row) against every tracked anchor (column)."""

    values: np.ndarray  # shape (n_percepts, n_anchors), non-negative
    percept_ids: tuple[int, ...]
    anchor_ids: tuple[str, ...]


@dataclass(frozen=True)
class AlignmentResult:
    """Accepted matches plus the leftovers on both sides.

    Every matched cost is strictly below the threshold; each percept and each
    anchor appears at most once across the three fields.
    """

    matches: tuple[tuple[int, str, float], ...]  # (percept_id, anchor_id, cost)
    unmatched_percepts: tuple[int, ...]
    unmatched_anchors: tuple[str, ...]


def compensate_camera_motion(
    anchors: Iterable[Anchor], pose_prev: Vec2, pose_next: Vec2
) -> tuple[Anchor, ...]:
    """Shift anchor positions opposite to the viewport displacement.

    A static object seen at p while the camera sits at pose_prev appears at
    p - (pose_next - pose_prev) after the camera moves; all other attributes
    are left untouched.
    """
    dx = pose_prev[0] - pose_next[0]
    dy = pose_prev[1] - pose_next[1]
    if dx == 0.0 and dy == 0.0:
        return tuple(anchors)
    shifted = []
    for anchor in anchors:
        x, y = anchor.attributes.position
        attrs = replace(anchor.attributes, position=(x + dx, y + dy))
        shifted.append(replace(anchor, attributes=attrs))
    return tuple(shifted)


def build_cost_matrix(
    percepts: Sequence[Percept], anchors: Sequence[Anchor], config: EngineConfig
) -> CostMatrix:
    """entry(i, j) = psi * (||pos_i - pos_j||^2 + ||size_i - size_j||^2).

    psi is 1 when object types match and ``config.psi_mismatch`` otherwise.
    Either side may be empty, yielding a degenerate matrix.
    """
    n_p, n_a = len(percepts), len(anchors)
    if n_p == 0 or n_a == 0:
        values = np.zeros((n_p, n_a), dtype=float)
    else:
        pp = np.array(
            [[*p.attributes.position, *p.attributes.size] for p in percepts], dtype=float
        )
        aa = np.array(
            [[*a.attributes.position, *a.attributes.size] for a in anchors], dtype=float
        )
        diff = pp[:, None, :] - aa[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        p_types = np.array([p.attributes.object_type for p in percepts])
        a_types = np.array([a.attributes.object_type for a in anchors])
        psi = np.where(p_types[:, None] == a_types[None, :], 1.0, config.psi_mismatch)
        values = psi * dist
    return CostMatrix(
        values=values,
        percept_ids=tuple(p.percept_id for p in percepts),
        anchor_ids=tuple(a.anchor_id for a in anchors),
    )


def _canonicalize(pairs: list[tuple[int, int]], values: np.ndarray) -> list[tuple[int, int]]:
    # Resolve cost ties deterministically: sweep pairwise swaps that keep the
    # total cost exactly equal, handing the lower row the lower column.
    pairs.sort()
    changed = True
    while changed:
        changed = False
        for i in range(len(pairs)):
            ri, ci = pairs[i]
            for k in range(i + 1, len(pairs)):
                rk, ck = pairs[k]
                if ci > ck and values[ri, ci] + values[rk, ck] == values[ri, ck] + values[rk, ci]:
                    pairs[i] = (ri, ck)
                    pairs[k] = (rk, ci)
                    ri, ci = pairs[i]
                    changed = True
    return pairs


def solve_assignment(
    values: np.ndarray, dummy_cost: float | None = None
) -> list[tuple[int, int]]:
    """Minimum-total-cost one-to-one matching of min(rows, cols) pairs.

    Rectangular matrices are padded to square with constant-cost dummies
    (cost-neutral for which real pairs win; dummy pairs are dropped from the
    result). Ties between equal-cost optima are broken toward giving the
    lowest row index the lowest column.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise EngineError("cost matrix must be 2-dimensional")
    n_rows, n_cols = values.shape
    if n_rows == 0 or n_cols == 0:
        return []
    if not np.isfinite(values).all() or (values < 0).any():
        raise EngineError("cost matrix entries must be finite and non-negative")

    n = max(n_rows, n_cols)
    if n_rows == n_cols:
        square = values
    else:
        if dummy_cost is None:
            dummy_cost = 10.0 * float(values.max()) + 1.0
        square = np.full((n, n), dummy_cost, dtype=float)
        square[:n_rows, :n_cols] = values

    rows, cols = linear_sum_assignment(square)
    pairs = [(int(r), int(c)) for r, c in zip(rows, cols) if r < n_rows and c < n_cols]
    return _canonicalize(pairs, values)


def align(
    percepts: Sequence[Percept],
    world_model: WorldModel,
    pose_next: Vec2,
    config: EngineConfig,
) -> AlignmentResult:
    """Camera compensation, cost matrix, assignment, and threshold filtering.

    All tracked entities (named anchors and provisional candidates) take part.
    Assigned pairs with cost >= tau are demoted to unmatched on both sides.
    """
    tracks = compensate_camera_motion(
        world_model.all_tracks(), world_model.camera_pose, pose_next
    )
    cost = build_cost_matrix(percepts, tracks, config)
    pairs = solve_assignment(cost.values, dummy_cost=10.0 * config.tau)

    matches = []
    matched_rows: set[int] = set()
    matched_cols: set[int] = set()
    for r, c in pairs:
        value = float(cost.values[r, c])
        if value < config.tau:
            matches.append((cost.percept_ids[r], cost.anchor_ids[c], value))
            matched_rows.add(r)
            matched_cols.add(c)

    unmatched_p = tuple(
        pid for i, pid in enumerate(cost.percept_ids) if i not in matched_rows
    )
    unmatched_a = tuple(
        aid for j, aid in enumerate(cost.anchor_ids) if j not in matched_cols
    )
    return AlignmentResult(tuple(matches), unmatched_p, unmatched_a)
