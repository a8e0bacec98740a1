"""Shared data model: percepts, anchors, the world model, and engine configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

Vec2 = tuple[float, float]
Box = tuple[Vec2, Vec2]  # (center, size); image frame: origin top-left, x right, y down

VISIBLE = "visible"
OCCLUDED = "occluded"
OUT_OF_VIEW = "out_of_view"
ATTACHED = "attached"
LOST = "lost"
STATUSES = (VISIBLE, OCCLUDED, OUT_OF_VIEW, ATTACHED, LOST)

# Provisional tracks (not yet promoted to named anchors) use this id prefix.
# Object type names must not start with it.
CANDIDATE_PREFIX = "cand"


class EngineError(ValueError):
    """Base class for engine-level failures."""


class ConfigError(EngineError):
    """Invalid engine configuration."""


@dataclass(frozen=True)
class Attributes:
    """Perceived or estimated attributes of one object.

    ``position`` is the bounding-box center in pixels, ``size`` is
    (width, height) and must be strictly positive. ``extras`` may carry
    additional named feature vectors (e.g. mean color); the default
    alignment cost ignores them.
    """

    object_type: str
    position: Vec2
    size: Vec2
    extras: Mapping[str, tuple[float, ...]] | None = None


@dataclass(frozen=True)
class Percept:
    """One detected object in one frame. ``percept_id`` is unique per frame."""

    percept_id: int
    attributes: Attributes
    detector_score: float = 1.0

    @property
    def box(self) -> Box:
        return (self.attributes.position, self.attributes.size)


@dataclass(frozen=True)
class Anchor:
    """A persistent symbol for one physical object.

    ``anchor_id`` has the form ``typeN`` where N counts first anchorings per
    type. Provisional candidates carry reserved ``candN`` ids instead and are
    kept separately on the world model until their confidence first reaches
    the anchoring threshold.

    Invariant: ``parent`` is set iff ``status == ATTACHED`` iff
    ``parent_offset`` is set.
    """

    anchor_id: str
    attributes: Attributes
    confidence: float
    status: str
    last_seen_frame: int
    parent: str | None = None
    parent_offset: Vec2 | None = None

    @property
    def box(self) -> Box:
        return (self.attributes.position, self.attributes.size)

    @property
    def object_type(self) -> str:
        return self.attributes.object_type


@dataclass(frozen=True)
class WorldModel:
    """The tracked state at one frame: named anchors plus provisional candidates.

    ``camera_pose`` is the viewport translation in a world frame; anchor
    positions are expressed in the image frame implied by it.
    ``next_instance`` holds per-type counters for ``typeN`` id assignment and
    is never decremented, so ids are not reused after pruning.
    """

    frame_index: int = -1
    anchors: tuple[Anchor, ...] = ()
    candidates: tuple[Anchor, ...] = ()
    camera_pose: Vec2 = (0.0, 0.0)
    next_instance: Mapping[str, int] = field(default_factory=dict)
    next_candidate: int = 0

    def anchor_lookup(self) -> dict[str, Anchor]:
        return {a.anchor_id: a for a in self.anchors}

    def all_tracks(self) -> tuple[Anchor, ...]:
        return self.anchors + self.candidates


@dataclass(frozen=True)
class ActionEvent:
    """A named agent action with ordered arguments (anchor ids or role names)."""

    name: str
    arguments: tuple[str, ...]
    frame_index: int = 0


@dataclass(frozen=True)
class ActionRule:
    """Maps an action name to an attachment effect on its argument list.

    ``attach`` binds ``arguments[child_arg]`` below ``arguments[parent_arg]``;
    ``detach`` releases ``arguments[child_arg]`` from its parent.
    """

    action_name: str
    effect: str  # "attach" | "detach"
    child_arg: int
    parent_arg: int | None = None

    def __post_init__(self) -> None:
        if self.effect not in ("attach", "detach"):
            raise ConfigError(f"unknown action effect {self.effect!r}")
        if self.child_arg < 0:
            raise ConfigError("child_arg must be >= 0")
        if self.effect == "attach":
            if self.parent_arg is None or self.parent_arg < 0:
                raise ConfigError("attach rule requires a parent_arg >= 0")
            if self.parent_arg == self.child_arg:
                raise ConfigError("attach rule must use distinct argument slots")


DEFAULT_ACTION_RULES = (
    ActionRule("contain", "attach", child_arg=1, parent_arg=0),
    ActionRule("uncontain", "detach", child_arg=1),
)


@dataclass(frozen=True)
class EngineConfig:
    """Tunable thresholds and the action-rule table.

    ``tau`` is the maximum alignment cost for accepting a percept-anchor
    match. ``psi_mismatch`` multiplies the cost when object types differ
    (1 on a type match). ``kappa_anch`` gates hypothesis reasoning,
    ``kappa_inf`` gates world-state inference.
    """

    tau: float = 6500.0
    psi_mismatch: float = 5.0
    conf_inc: float = 0.1
    conf_dec: float = 0.1
    kappa_anch: float = 0.1
    kappa_inf: float = 0.1
    field_of_view: Vec2 = (360.0, 240.0)
    action_rules: tuple[ActionRule, ...] = DEFAULT_ACTION_RULES

    def __post_init__(self) -> None:
        if not (self.tau > 0):
            raise ConfigError("tau must be > 0")
        if not (self.psi_mismatch >= 1):
            raise ConfigError("psi_mismatch must be >= 1")
        if not (0 < self.conf_inc < 1) or not (0 < self.conf_dec < 1):
            raise ConfigError("conf_inc and conf_dec must lie in (0, 1)")
        if not (0 < self.kappa_anch <= self.kappa_inf <= 1):
            raise ConfigError("thresholds must satisfy 0 < kappa_anch <= kappa_inf <= 1")
        if self.field_of_view[0] <= 0 or self.field_of_view[1] <= 0:
            raise ConfigError("field_of_view must be positive")


def _finite_vec(v: Vec2) -> bool:
    return math.isfinite(v[0]) and math.isfinite(v[1])


def _check_track(track: Anchor, is_candidate: bool, out: list[str]) -> None:
    aid = track.anchor_id
    if not (0.0 <= track.confidence <= 1.0) or not math.isfinite(track.confidence):
        out.append(f"{aid}: confidence {track.confidence} outside [0, 1]")
    if track.status not in STATUSES:
        out.append(f"{aid}: unknown status {track.status!r}")
    if not _finite_vec(track.attributes.position):
        out.append(f"{aid}: non-finite position")
    if track.attributes.size[0] <= 0 or track.attributes.size[1] <= 0:
        out.append(f"{aid}: size components must be > 0")
    has_parent = track.parent is not None
    has_offset = track.parent_offset is not None
    is_attached = track.status == ATTACHED
    if not (has_parent == has_offset == is_attached):
        out.append(
            f"{aid}: parent/status/offset inconsistent "
            f"(parent={track.parent!r}, status={track.status}, offset={track.parent_offset!r})"
        )
    if is_candidate and has_parent:
        out.append(f"{aid}: candidate tracks cannot be attached")


def validate_world_model(model: WorldModel) -> list[str]:
    """Return human-readable descriptions of every broken invariant (empty if none).

    Checked: unique ids, confidence range, status vocabulary, positive sizes,
    finite positions, the parent/status/offset consistency triple, parent
    references resolving to existing anchors, and acyclicity of the
    attachment graph (a self-parent counts as a cycle).
    """
    violations: list[str] = []
    seen: set[str] = set()
    for track in model.all_tracks():
        if track.anchor_id in seen:
            violations.append(f"{track.anchor_id}: duplicate anchor_id")
        seen.add(track.anchor_id)

    for anchor in model.anchors:
        _check_track(anchor, is_candidate=False, out=violations)
    for cand in model.candidates:
        _check_track(cand, is_candidate=True, out=violations)

    by_id = {}
    for anchor in model.anchors:
        by_id.setdefault(anchor.anchor_id, anchor)

    for anchor in model.anchors:
        if anchor.parent is not None and anchor.parent not in by_id:
            violations.append(f"{anchor.anchor_id}: parent {anchor.parent!r} does not resolve")

    # Cycle check: walk parent chains; revisiting a node on the current walk
    # (including the start) means a cycle.
    flagged: set[str] = set()
    for anchor in model.anchors:
        trail = [anchor.anchor_id]
        on_trail = {anchor.anchor_id}
        current = anchor
        while current.parent is not None and current.parent in by_id:
            if current.parent in on_trail:
                if anchor.anchor_id not in flagged:
                    violations.append(
                        f"{anchor.anchor_id}: attachment cycle via {' -> '.join(trail + [current.parent])}"
                    )
                    flagged.add(anchor.anchor_id)
                break
            current = by_id[current.parent]
            trail.append(current.anchor_id)
            on_trail.add(current.anchor_id)

    return violations
