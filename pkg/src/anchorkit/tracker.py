"""Per-frame engine cycle: compensate, apply actions, align, reason, maintain.

``step`` is a pure function on the world model; ``AnchoringEngine`` wraps it
for stream processing. ``query`` exposes confidence-filtered views and
``infer_relations`` derives attachment and overlap facts.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .alignment import align, compensate_camera_motion
from .core import (
    ATTACHED,
    CANDIDATE_PREFIX,
    LOST,
    VISIBLE,
    OCCLUDED,
    OUT_OF_VIEW,
    ActionEvent,
    Anchor,
    EngineConfig,
    EngineError,
    Percept,
    Vec2,
    WorldModel,
    validate_world_model,
)
from .hypothesis import (
    ActionError,
    apply_action,
    boxes_overlap,
    classify_unmatched,
    propagate_attachments,
    update_confidence,
)

ANCHORED = "anchored"
INFERABLE = "inferable"

REASON_MATCHED = "matched"
REASON_OCCLUDED = "occluder_overlap"
REASON_OUT_OF_VIEW = "outside_fov"
REASON_PARENT_FOLLOW = "parent_follow"
REASON_DECAY = "decay"
REASON_PRUNED = "pruned"
REASON_NEWLY_ANCHORED = "newly_anchored"


@dataclass(frozen=True)
class FrameInput:
    """Everything the engine consumes for one frame."""

    frame_index: int
    percepts: tuple[Percept, ...]
    camera_pose: Vec2 = (0.0, 0.0)
    actions: tuple[ActionEvent, ...] = ()


@dataclass(frozen=True)
class HypothesisOutcome:
    """What happened to one tracked entity during a cycle."""

    anchor_id: str
    new_status: str
    new_confidence: float
    new_position: Vec2
    reason: str


def _adopt(anchor: Anchor, percept: Percept, frame_index: int, confidence: float) -> Anchor:
    attrs = replace(
        anchor.attributes,
        position=percept.attributes.position,
        size=percept.attributes.size,
        extras=percept.attributes.extras,
    )
    return replace(
        anchor,
        attributes=attrs,
        confidence=confidence,
        status=VISIBLE,
        last_seen_frame=frame_index,
        parent=None,
        parent_offset=None,
    )


def step(
    model: WorldModel,
    frame: FrameInput,
    config: EngineConfig,
    *,
    check_invariants: bool = False,
) -> tuple[WorldModel, list[HypothesisOutcome]]:
    """Run one full cycle and return the successor model plus per-track outcomes.

    Stage order: camera compensation, action effects, alignment, matched
    updates (with promotion of candidates that reach the anchoring
    threshold), attachment propagation, hypothesis classification of
    unmatched anchors, confidence decay and pruning, then candidate creation
    for unmatched percepts. A matched anchor that was attached detaches
    implicitly and resumes independent tracking.
    """
    if frame.frame_index <= model.frame_index:
        raise EngineError(
            f"frame index must increase (got {frame.frame_index} after {model.frame_index})"
        )
    t = frame.frame_index

    work = replace(
        model,
        anchors=compensate_camera_motion(model.anchors, model.camera_pose, frame.camera_pose),
        candidates=compensate_camera_motion(model.candidates, model.camera_pose, frame.camera_pose),
        camera_pose=frame.camera_pose,
    )

    # Action effects come before alignment so an attach in this frame shields
    # the child from being classified lost below. Events that no longer
    # resolve (pruned anchors, malformed annotations) are skipped, not fatal.
    for event in frame.actions:
        try:
            work = apply_action(work, event, config)
        except ActionError:
            continue

    result = align(frame.percepts, work, frame.camera_pose, config)
    percept_by_id = {p.percept_id: p for p in frame.percepts}
    match_for: dict[str, tuple[Percept, float]] = {
        aid: (percept_by_id[pid], cost) for pid, aid, cost in result.matches
    }

    outcomes: list[HypothesisOutcome] = []
    next_instance = dict(work.next_instance)
    anchors: list[Anchor] = []
    candidates: list[Anchor] = []
    # Ids carrying this frame's match, keyed by their FINAL id so that
    # candidates renamed during promotion are not re-processed as unmatched.
    matched_ids: set[str] = set()

    for anchor in work.anchors:
        if anchor.anchor_id in match_for:
            percept, _cost = match_for[anchor.anchor_id]
            conf, _ = update_confidence(anchor, True, config)
            updated = _adopt(anchor, percept, t, conf)
            anchors.append(updated)
            matched_ids.add(updated.anchor_id)
            outcomes.append(
                HypothesisOutcome(
                    updated.anchor_id, VISIBLE, conf, updated.attributes.position, REASON_MATCHED
                )
            )
        else:
            anchors.append(anchor)

    for cand in work.candidates:
        if cand.anchor_id in match_for:
            percept, _cost = match_for[cand.anchor_id]
            conf, _ = update_confidence(cand, True, config)
            updated = _adopt(cand, percept, t, conf)
            if conf >= config.kappa_anch:
                kind = updated.object_type
                number = next_instance.get(kind, 0)
                next_instance[kind] = number + 1
                promoted = replace(updated, anchor_id=f"{kind}{number}")
                anchors.append(promoted)
                matched_ids.add(promoted.anchor_id)
                outcomes.append(
                    HypothesisOutcome(
                        promoted.anchor_id,
                        VISIBLE,
                        conf,
                        promoted.attributes.position,
                        REASON_NEWLY_ANCHORED,
                    )
                )
            else:
                candidates.append(updated)
                matched_ids.add(updated.anchor_id)
                outcomes.append(
                    HypothesisOutcome(
                        updated.anchor_id, VISIBLE, conf, updated.attributes.position, REASON_MATCHED
                    )
                )
        else:
            candidates.append(cand)

    work = replace(
        work, anchors=tuple(anchors), candidates=tuple(candidates), next_instance=next_instance
    )
    work = propagate_attachments(work)

    surviving: list[Anchor] = []
    pruned_ids: set[str] = set()
    for anchor in work.anchors:
        if anchor.anchor_id in matched_ids:
            surviving.append(anchor)
            continue
        if anchor.parent is not None:
            surviving.append(anchor)
            outcomes.append(
                HypothesisOutcome(
                    anchor.anchor_id,
                    ATTACHED,
                    anchor.confidence,
                    anchor.attributes.position,
                    REASON_PARENT_FOLLOW,
                )
            )
            continue
        if anchor.confidence >= config.kappa_anch:
            status = classify_unmatched(anchor, frame.percepts, config)
            anchor = replace(anchor, status=status)
        conf, prune = update_confidence(anchor, False, config)
        if prune:
            pruned_ids.add(anchor.anchor_id)
            outcomes.append(
                HypothesisOutcome(
                    anchor.anchor_id, anchor.status, conf, anchor.attributes.position, REASON_PRUNED
                )
            )
            continue
        anchor = replace(anchor, confidence=conf)
        surviving.append(anchor)
        reason = {
            OCCLUDED: REASON_OCCLUDED,
            OUT_OF_VIEW: REASON_OUT_OF_VIEW,
        }.get(anchor.status, REASON_DECAY)
        outcomes.append(
            HypothesisOutcome(
                anchor.anchor_id, anchor.status, conf, anchor.attributes.position, reason
            )
        )

    if pruned_ids:
        # Children of pruned parents resume independent tracking in place;
        # they get reclassified on the next cycle.
        surviving = [
            replace(a, parent=None, parent_offset=None, status=LOST)
            if a.parent in pruned_ids
            else a
            for a in surviving
        ]

    surviving_candidates: list[Anchor] = []
    for cand in work.candidates:
        if cand.anchor_id in matched_ids:
            surviving_candidates.append(cand)
            continue
        conf, prune = update_confidence(cand, False, config)
        if prune:
            outcomes.append(
                HypothesisOutcome(
                    cand.anchor_id, LOST, conf, cand.attributes.position, REASON_PRUNED
                )
            )
            continue
        cand = replace(cand, confidence=conf, status=LOST)
        surviving_candidates.append(cand)
        outcomes.append(
            HypothesisOutcome(cand.anchor_id, LOST, conf, cand.attributes.position, REASON_DECAY)
        )

    next_candidate = work.next_candidate
    matched_percept_ids = {pid for pid, _aid, _cost in result.matches}
    for percept in frame.percepts:
        if percept.percept_id in matched_percept_ids:
            continue
        cand = Anchor(
            anchor_id=f"{CANDIDATE_PREFIX}{next_candidate}",
            attributes=percept.attributes,
            confidence=0.0,
            status=VISIBLE,
            last_seen_frame=t,
        )
        next_candidate += 1
        surviving_candidates.append(cand)

    new_model = replace(
        work,
        frame_index=t,
        anchors=tuple(surviving),
        candidates=tuple(surviving_candidates),
        next_candidate=next_candidate,
    )

    if check_invariants:
        broken = validate_world_model(new_model)
        if broken:
            raise EngineError("world model invariants broken: " + "; ".join(broken))
    return new_model, outcomes


def query(model: WorldModel, config: EngineConfig, level: str = ANCHORED) -> list[Anchor]:
    """Anchors above the requested confidence gate, in anchoring order."""
    if level == ANCHORED:
        threshold = config.kappa_anch
    elif level == INFERABLE:
        threshold = config.kappa_inf
    else:
        raise EngineError(f"unknown query level {level!r}")
    return [a for a in model.anchors if a.confidence >= threshold]


def infer_relations(model: WorldModel, config: EngineConfig) -> list[tuple[str, str, str]]:
    """Attachment facts for every edge plus overlap facts between inferable anchors.

    Returns ("attached", child, parent) and ("overlaps", a, b) triples in a
    deterministic order (sorted by anchor id; overlap pairs reported once
    with a < b).
    """
    facts: list[tuple[str, str, str]] = []
    attached = sorted(
        (a.anchor_id, a.parent) for a in model.anchors if a.parent is not None
    )
    facts.extend(("attached", child, parent) for child, parent in attached)

    inferable = sorted(query(model, config, INFERABLE), key=lambda a: a.anchor_id)
    for i, first in enumerate(inferable):
        for second in inferable[i + 1 :]:
            if boxes_overlap(first.box, second.box):
                facts.append(("overlaps", first.anchor_id, second.anchor_id))
    return facts


def predict_target(
    model: WorldModel, config: EngineConfig, target_type: str
) -> Anchor | None:
    """Best current estimate of the designated target object, if any.

    Prefers the earliest-anchored target-type anchor at the anchoring gate;
    before promotion the strongest provisional candidate fills in so the
    localisation channel is comparable with baselines that always predict.
    """
    for anchor in model.anchors:
        if anchor.object_type == target_type and anchor.confidence >= config.kappa_anch:
            return anchor
    best: Anchor | None = None
    for cand in model.candidates:
        if cand.object_type != target_type:
            continue
        if best is None or cand.confidence > best.confidence:
            best = cand
    return best


class AnchoringEngine:
    """Stateful wrapper running one detection stream through ``step``."""

    def __init__(self, config: EngineConfig, *, check_invariants: bool = False):
        self.config = config
        self.model = WorldModel()
        self.check_invariants = check_invariants

    def step(self, frame: FrameInput) -> list[HypothesisOutcome]:
        self.model, outcomes = step(
            self.model, frame, self.config, check_invariants=self.check_invariants
        )
        return outcomes

    def query(self, level: str = ANCHORED) -> list[Anchor]:
        return query(self.model, self.config, level)

    def relations(self) -> list[tuple[str, str, str]]:
        return infer_relations(self.model, self.config)

    def predict(self, target_type: str) -> Anchor | None:
        return predict_target(self.model, self.config, target_type)
