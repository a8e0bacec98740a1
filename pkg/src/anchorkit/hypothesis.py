"""Reasoning about unmatched anchors: occlusion, field-of-view exits, lost-object
decay, confidence bookkeeping, and action-driven attachment effects."""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

from .core import (
    ATTACHED,
    LOST,
    OCCLUDED,
    OUT_OF_VIEW,
    ActionEvent,
    Anchor,
    Box,
    EngineConfig,
    EngineError,
    Percept,
    WorldModel,
)


class ActionError(EngineError):
    """An action event could not be applied to the current world model."""


def _round_conf(value: float) -> float:
    # Keep confidence on a fine grid so repeated fixed increments land exactly
    # on threshold values instead of drifting by float dust.
    return round(value, 9)


def update_confidence(
    anchor: Anchor, was_aligned: bool, config: EngineConfig
) -> tuple[float, bool]:
    """Return (new_confidence, prune_flag) for one cycle.

    Aligned anchors gain ``conf_inc`` capped at 1. Unaligned anchors decay by
    ``conf_dec`` when they are lost or have never reached the anchoring
    threshold; an anchor sustained by a maintaining hypothesis (occluded,
    out of view, attached) keeps its confidence. The prune flag is set iff
    the result dropped below 0.
    """
    c = anchor.confidence
    if was_aligned:
        return min(1.0, _round_conf(c + config.conf_inc)), False
    if anchor.status == LOST or c < config.kappa_anch:
        new = _round_conf(c - config.conf_dec)
        return new, new < 0.0
    return c, False


def _corners(box: Box) -> tuple[float, float, float, float]:
    (cx, cy), (w, h) = box
    return cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0


def boxes_overlap(box_a: Box, box_b: Box) -> bool:
    """True when the boxes share positive area (touching edges do not count)."""
    ax1, ay1, ax2, ay2 = _corners(box_a)
    bx1, by1, bx2, by2 = _corners(box_b)
    return (
        min(ax2, bx2) - max(ax1, bx1) > 0.0
        and min(ay2, by2) - max(ay1, by1) > 0.0
    )


def classify_unmatched(
    anchor: Anchor, percepts: Sequence[Percept], config: EngineConfig
) -> str:
    """Pick the fate of an unmatched, parentless anchor.

    Occluded when its estimated box overlaps any detected box, otherwise out
    of view when its estimated center falls outside [0, W) x [0, H), otherwise
    lost.
    """
    for percept in percepts:
        if boxes_overlap(anchor.box, percept.box):
            return OCCLUDED
    x, y = anchor.attributes.position
    width, height = config.field_of_view
    if not (0.0 <= x < width and 0.0 <= y < height):
        return OUT_OF_VIEW
    return LOST


def _replace_anchor(model: WorldModel, updated: Anchor) -> WorldModel:
    anchors = tuple(
        updated if a.anchor_id == updated.anchor_id else a for a in model.anchors
    )
    return replace(model, anchors=anchors)


def apply_action(model: WorldModel, event: ActionEvent, config: EngineConfig) -> WorldModel:
    """Apply the attachment effect of one action event, if a rule exists.

    Unknown action names are a no-op. Attaching freezes the child's offset to
    its parent at the current estimates and never creates a second parent or
    a cycle; violations raise ``ActionError``.
    """
    rule = next(
        (r for r in config.action_rules if r.action_name == event.name), None
    )
    if rule is None:
        return model

    args = event.arguments
    needed = (rule.child_arg,) if rule.effect == "detach" else (rule.child_arg, rule.parent_arg)
    for idx in needed:
        if idx >= len(args):
            raise ActionError(
                f"action {event.name!r}: argument index {idx} out of range for {args!r}"
            )

    by_id = model.anchor_lookup()
    child_id = args[rule.child_arg]
    if child_id not in by_id:
        raise ActionError(f"action {event.name!r}: unknown anchor {child_id!r}")
    child = by_id[child_id]

    if rule.effect == "detach":
        if child.parent is None:
            return model
        freed = replace(child, parent=None, parent_offset=None, status=LOST)
        return _replace_anchor(model, freed)

    parent_id = args[rule.parent_arg]
    if parent_id not in by_id:
        raise ActionError(f"action {event.name!r}: unknown anchor {parent_id!r}")
    if parent_id == child_id:
        raise ActionError(f"action {event.name!r}: attachment cycle at {child_id!r}")

    # Reject attaches whose parent chain already descends from the child.
    cursor = by_id[parent_id]
    while cursor.parent is not None:
        if cursor.parent == child_id:
            raise ActionError(
                f"action {event.name!r}: attachment cycle "
                f"{child_id!r} -> {parent_id!r} -> ... -> {child_id!r}"
            )
        if cursor.parent not in by_id:
            break
        cursor = by_id[cursor.parent]

    parent = by_id[parent_id]
    cx, cy = child.attributes.position
    px, py = parent.attributes.position
    attached = replace(
        child,
        parent=parent_id,
        parent_offset=(cx - px, cy - py),
        status=ATTACHED,
    )
    return _replace_anchor(model, attached)


def propagate_attachments(model: WorldModel) -> WorldModel:
    """Recompute every attached anchor's position as parent + frozen offset.

    Parents settle before children (chains of any depth), sizes are left at
    the last detected values, and running the pass twice changes nothing.
    """
    by_id = model.anchor_lookup()
    resolved: dict[str, tuple[float, float]] = {}

    def final_position(aid: str, trail: frozenset[str]) -> tuple[float, float]:
        if aid in resolved:
            return resolved[aid]
        anchor = by_id[aid]
        if anchor.parent is None or anchor.parent not in by_id:
            position = anchor.attributes.position
        else:
            if aid in trail:
                raise EngineError(f"attachment cycle during propagation at {aid!r}")
            px, py = final_position(anchor.parent, trail | {aid})
            ox, oy = anchor.parent_offset
            position = (px + ox, py + oy)
        resolved[aid] = position
        return position

    updated = []
    for anchor in model.anchors:
        if anchor.parent is None:
            updated.append(anchor)
            continue
        position = final_position(anchor.anchor_id, frozenset())
        if position == anchor.attributes.position:
            updated.append(anchor)
        else:
            attrs = replace(anchor.attributes, position=position)
            updated.append(replace(anchor, attributes=attrs))
    return replace(model, anchors=tuple(updated))
