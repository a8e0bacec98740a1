from __future__ import annotations

import itertools

import numpy as np
import pytest

from anchorkit.alignment import (
    align,
    build_cost_matrix,
    compensate_camera_motion,
    solve_assignment,
)
from anchorkit.core import Anchor, Attributes, EngineConfig, Percept, WorldModel


def brute_force_assignment(values: np.ndarray) -> tuple[list[tuple[int, int]], float]:
    """Exhaustive oracle: first strict minimum in lexicographic enumeration order."""
    n_rows, n_cols = values.shape
    best_pairs: list[tuple[int, int]] = []
    best_cost = float("inf")
    if n_rows <= n_cols:
        for cols in itertools.permutations(range(n_cols), n_rows):
            cost = sum(values[r, c] for r, c in enumerate(cols))
            if cost < best_cost:
                best_cost = cost
                best_pairs = list(enumerate(cols))
    else:
        for rows in itertools.permutations(range(n_rows), n_cols):
            cost = sum(values[r, c] for c, r in enumerate(rows))
            if cost < best_cost:
                best_cost = cost
                best_pairs = sorted((r, c) for c, r in enumerate(rows))
    return best_pairs, best_cost


def make_anchor(aid, kind="cube", pos=(0.0, 0.0), size=(20.0, 20.0)):
    return Anchor(aid, Attributes(kind, pos, size), 0.5, "visible", 0)


def make_percept(pid, kind="cube", pos=(0.0, 0.0), size=(20.0, 20.0)):
    return Percept(pid, Attributes(kind, pos, size))


class TestCameraCompensation:
    def test_zero_motion_keeps_positions(self):
        anchors = (make_anchor("a0", pos=(10.0, 20.0)),)
        out = compensate_camera_motion(anchors, (5.0, 5.0), (5.0, 5.0))
        assert out[0].attributes.position == (10.0, 20.0)

    def test_positive_x_shift_moves_objects_left(self):
        anchors = (make_anchor("a0", pos=(100.0, 100.0)),)
        out = compensate_camera_motion(anchors, (0.0, 0.0), (10.0, 0.0))
        assert out[0].attributes.position == (90.0, 100.0)

    def test_mixed_shift(self):
        anchors = (make_anchor("a0", pos=(50.0, 50.0)),)
        out = compensate_camera_motion(anchors, (0.0, 0.0), (-5.0, 3.0))
        assert out[0].attributes.position == (55.0, 47.0)

    def test_other_attributes_untouched(self):
        anchor = make_anchor("a0", pos=(1.0, 2.0))
        (out,) = compensate_camera_motion((anchor,), (0.0, 0.0), (4.0, 4.0))
        assert out.attributes.size == anchor.attributes.size
        assert out.confidence == anchor.confidence
        assert out.status == anchor.status


class TestCostMatrix:
    def test_identical_attributes_cost_zero(self):
        cm = build_cost_matrix([make_percept(0)], [make_anchor("a0")], EngineConfig())
        assert cm.values[0, 0] == 0.0

    def test_position_and_size_terms(self):
        # positions 3,4 apart -> 25; heights 2 apart -> 4
        percept = make_percept(0, pos=(103.0, 104.0), size=(20.0, 22.0))
        anchor = make_anchor("a0", pos=(100.0, 100.0), size=(20.0, 20.0))
        cm = build_cost_matrix([percept], [anchor], EngineConfig())
        assert cm.values[0, 0] == pytest.approx(29.0)

    def test_type_mismatch_multiplier(self):
        percept = make_percept(0, kind="cone", pos=(103.0, 104.0), size=(20.0, 22.0))
        anchor = make_anchor("a0", kind="cube", pos=(100.0, 100.0), size=(20.0, 20.0))
        cm = build_cost_matrix([percept], [anchor], EngineConfig(psi_mismatch=5.0))
        assert cm.values[0, 0] == pytest.approx(145.0)

    def test_symmetric_under_swapping_sides(self):
        rng = np.random.default_rng(7)
        kinds = ["cube", "cone", "sphere"]
        a_specs = [(kinds[i % 3], tuple(rng.uniform(0, 300, 2)), tuple(rng.uniform(5, 40, 2))) for i in range(4)]
        b_specs = [(kinds[(i + 1) % 3], tuple(rng.uniform(0, 300, 2)), tuple(rng.uniform(5, 40, 2))) for i in range(5)]
        config = EngineConfig(psi_mismatch=3.0)
        forward = build_cost_matrix(
            [make_percept(i, k, p, s) for i, (k, p, s) in enumerate(a_specs)],
            [make_anchor(f"x{i}", k, p, s) for i, (k, p, s) in enumerate(b_specs)],
            config,
        )
        backward = build_cost_matrix(
            [make_percept(i, k, p, s) for i, (k, p, s) in enumerate(b_specs)],
            [make_anchor(f"x{i}", k, p, s) for i, (k, p, s) in enumerate(a_specs)],
            config,
        )
        assert np.allclose(forward.values, backward.values.T)

    def test_degenerate_shapes(self):
        cm = build_cost_matrix([], [make_anchor("a0")], EngineConfig())
        assert cm.values.shape == (0, 1)
        cm = build_cost_matrix([make_percept(0)], [], EngineConfig())
        assert cm.values.shape == (1, 0)


class TestSolveAssignment:
    def test_zero_diagonal(self):
        assert solve_assignment(np.array([[0.0, 9.0], [9.0, 0.0]])) == [(0, 0), (1, 1)]

    def test_off_diagonal_optimum(self):
        # 1+4=5 on the diagonal beats... no: brute force gives 2+2=4 off it.
        assert solve_assignment(np.array([[1.0, 2.0], [2.0, 4.0]])) == [(0, 1), (1, 0)]

    def test_rectangular_leaves_worst_row_out(self):
        values = np.array([[1.0, 8.0], [2.0, 1.0], [9.0, 9.0]])
        assert solve_assignment(values) == [(0, 0), (1, 1)]

    def test_tie_broken_toward_lowest_row_lowest_column(self):
        assert solve_assignment(np.array([[5.0, 5.0], [5.0, 5.0]])) == [(0, 0), (1, 1)]
        assert solve_assignment(np.ones((3, 3))) == [(0, 0), (1, 1), (2, 2)]

    def test_rejects_bad_entries(self):
        with pytest.raises(ValueError):
            solve_assignment(np.array([[1.0, -2.0]]))
        with pytest.raises(ValueError):
            solve_assignment(np.array([[np.inf]]))

    def test_matches_brute_force_on_random_matrices(self):
        rng = np.random.default_rng(12345)
        for _ in range(200):
            n_rows = int(rng.integers(1, 7))
            n_cols = int(rng.integers(1, 7))
            values = rng.uniform(0.0, 100.0, size=(n_rows, n_cols))
            got = solve_assignment(values)
            want, want_cost = brute_force_assignment(values)
            assert got == want
            assert sum(values[r, c] for r, c in got) == pytest.approx(want_cost)

    def test_matches_brute_force_total_on_tied_integer_matrices(self):
        rng = np.random.default_rng(99)
        for _ in range(200):
            n = int(rng.integers(2, 6))
            values = rng.integers(0, 4, size=(n, n)).astype(float)
            got = solve_assignment(values)
            _, want_cost = brute_force_assignment(values)
            assert sum(values[r, c] for r, c in got) == pytest.approx(want_cost)


class TestAlign:
    def test_no_anchors_all_percepts_unmatched(self):
        result = align(
            [make_percept(0), make_percept(1, pos=(50.0, 50.0))],
            WorldModel(),
            (0.0, 0.0),
            EngineConfig(),
        )
        assert result.matches == ()
        assert result.unmatched_percepts == (0, 1)

    def test_close_same_type_pair_matches(self):
        model = WorldModel(anchors=(make_anchor("cube0", pos=(100.0, 100.0)),))
        result = align([make_percept(0, pos=(103.0, 100.0))], model, (0.0, 0.0), EngineConfig())
        assert result.matches == ((0, "cube0", 9.0),)
        assert result.unmatched_anchors == ()

    def test_pair_at_or_above_tau_is_demoted(self):
        # 84 px apart -> squared distance 7056 >= 6500
        model = WorldModel(anchors=(make_anchor("cube0", pos=(0.0, 0.0)),))
        result = align([make_percept(0, pos=(84.0, 0.0))], model, (0.0, 0.0), EngineConfig())
        assert result.matches == ()
        assert result.unmatched_percepts == (0,)
        assert result.unmatched_anchors == ("cube0",)

    def test_translation_equivariance(self):
        rng = np.random.default_rng(4)
        anchors = tuple(
            make_anchor(f"cube{i}", pos=tuple(rng.uniform(0, 200, 2))) for i in range(4)
        )
        percepts = [make_percept(i, pos=tuple(rng.uniform(0, 200, 2))) for i in range(4)]
        config = EngineConfig()
        base = align(percepts, WorldModel(anchors=anchors), (0.0, 0.0), config)

        def shift_anchor(a, d):
            pos = (a.attributes.position[0] + d, a.attributes.position[1] + d)
            return make_anchor(a.anchor_id, pos=pos)

        def shift_percept(p, d):
            pos = (p.attributes.position[0] + d, p.attributes.position[1] + d)
            return make_percept(p.percept_id, pos=pos)

        shifted = align(
            [shift_percept(p, 37.0) for p in percepts],
            WorldModel(anchors=tuple(shift_anchor(a, 37.0) for a in anchors)),
            (0.0, 0.0),
            config,
        )
        assert [(m[0], m[1]) for m in base.matches] == [(m[0], m[1]) for m in shifted.matches]

    def test_static_scene_under_pure_camera_motion_matches_at_zero_cost(self):
        rng = np.random.default_rng(11)
        world_points = [tuple(rng.uniform(50, 250, 2)) for _ in range(5)]
        pose_prev, pose_next = (12.0, -7.0), (31.0, 5.0)
        anchors = tuple(
            make_anchor(f"cube{i}", pos=(x - pose_prev[0], y - pose_prev[1]))
            for i, (x, y) in enumerate(world_points)
        )
        percepts = [
            make_percept(i, pos=(x - pose_next[0], y - pose_next[1]))
            for i, (x, y) in enumerate(world_points)
        ]
        model = WorldModel(anchors=anchors, camera_pose=pose_prev)
        result = align(percepts, model, pose_next, EngineConfig())
        assert len(result.matches) == 5
        assert all(cost < 1e-18 for _, _, cost in result.matches)
        assert [aid for _, aid, _ in sorted(result.matches)] == [a.anchor_id for a in anchors]
