"""Composition helpers tying simulate, track, and score together."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import Anchor, Box, EngineConfig
from .heuristic import HeuristicTracker
from .metrics import BucketStats, VideoScores, aggregate, score_stream
from .tracker import ANCHORED, AnchoringEngine, FrameInput

TRACKERS = ("aapa", "heuristic")


@dataclass
class TrackRun:
    """Output of one tracker over one detection stream."""

    predictions: list[Box | None]
    world: list[tuple[int, tuple[Anchor, ...]]]


def run_engine_stream(
    frames: Sequence[FrameInput],
    config: EngineConfig,
    target_type: str = "snitch",
    *,
    check_invariants: bool = False,
) -> TrackRun:
    engine = AnchoringEngine(config, check_invariants=check_invariants)
    predictions: list[Box | None] = []
    world: list[tuple[int, tuple[Anchor, ...]]] = []
    for frame in frames:
        engine.step(frame)
        world.append((frame.frame_index, tuple(engine.query(ANCHORED))))
        target = engine.predict(target_type)
        predictions.append(target.box if target is not None else None)
    return TrackRun(predictions=predictions, world=world)


def run_heuristic_stream(
    frames: Sequence[FrameInput], target_type: str = "snitch"
) -> TrackRun:
    tracker = HeuristicTracker(target_type)
    predictions = [tracker.step(frame.percepts) for frame in frames]
    return TrackRun(predictions=predictions, world=[])


def run_tracker(
    frames: Sequence[FrameInput],
    tracker: str,
    config: EngineConfig,
    target_type: str = "snitch",
) -> TrackRun:
    if tracker == "aapa":
        return run_engine_stream(frames, config, target_type)
    if tracker == "heuristic":
        return run_heuristic_stream(frames, target_type)
    raise ValueError(f"unknown tracker {tracker!r} (expected one of {TRACKERS})")


def score_scenarios(
    scenarios: Sequence, config: EngineConfig, target_type: str = "snitch"
) -> tuple[list[tuple[str, BucketStats]], dict[str, int]]:
    """Run both trackers over every scenario and aggregate per-subtask stats."""
    per_tracker: dict[str, list[VideoScores]] = {name: [] for name in TRACKERS}
    for scenario in scenarios:
        frames = scenario.frame_inputs()
        for name in TRACKERS:
            run = run_tracker(frames, name, config, target_type)
            per_tracker[name].append(score_stream(run.predictions, scenario, target_type))
    rows: list[tuple[str, BucketStats]] = []
    excluded: dict[str, int] = {}
    for name in TRACKERS:
        stats, skipped = aggregate(per_tracker[name])
        rows.extend((name, entry) for entry in stats)
        excluded[name] = skipped
    return rows, excluded
