from __future__ import annotations

import pytest

from anchorkit.core import (
    ATTACHED,
    LOST,
    OCCLUDED,
    OUT_OF_VIEW,
    VISIBLE,
    ActionEvent,
    ActionRule,
    Anchor,
    Attributes,
    EngineConfig,
    Percept,
    WorldModel,
    validate_world_model,
)
from anchorkit.hypothesis import (
    ActionError,
    apply_action,
    boxes_overlap,
    classify_unmatched,
    propagate_attachments,
    update_confidence,
)


def make_anchor(aid, kind="cube", pos=(100.0, 100.0), conf=0.5, status=VISIBLE,
                parent=None, offset=None, size=(20.0, 20.0)):
    return Anchor(aid, Attributes(kind, pos, size), conf, status, 0, parent, offset)


def make_percept(pid, kind="cube", pos=(100.0, 100.0), size=(20.0, 20.0)):
    return Percept(pid, Attributes(kind, pos, size))


CONFIG = EngineConfig()  # conf+/- = 0.1, kappa_anch = 0.1


class TestUpdateConfidence:
    def test_first_alignment_from_zero(self):
        conf, prune = update_confidence(make_anchor("a", conf=0.0), True, CONFIG)
        assert conf == 0.1 and not prune

    def test_capped_at_one(self):
        conf, prune = update_confidence(make_anchor("a", conf=1.0), True, CONFIG)
        assert conf == 1.0 and not prune

    def test_unanchored_disappearance_decays_below_zero_and_prunes(self):
        conf, prune = update_confidence(make_anchor("a", conf=0.05), False, CONFIG)
        assert conf == pytest.approx(-0.05) and prune

    def test_zero_result_is_not_pruned(self):
        conf, prune = update_confidence(make_anchor("a", conf=0.1, status=LOST), False, CONFIG)
        assert conf == 0.0 and not prune

    def test_lost_anchor_decays_even_above_threshold(self):
        conf, prune = update_confidence(make_anchor("a", conf=0.9, status=LOST), False, CONFIG)
        assert conf == pytest.approx(0.8) and not prune

    @pytest.mark.parametrize("status", [OCCLUDED, OUT_OF_VIEW, ATTACHED])
    def test_maintaining_hypotheses_freeze_confidence(self, status):
        anchor = make_anchor("a", conf=0.6, status=status,
                             parent="p" if status == ATTACHED else None,
                             offset=(0.0, 0.0) if status == ATTACHED else None)
        conf, prune = update_confidence(anchor, False, CONFIG)
        assert conf == 0.6 and not prune

    def test_repeated_increments_land_exactly_on_one(self):
        conf = 0.0
        for _ in range(10):
            conf, _ = update_confidence(make_anchor("a", conf=conf), True, CONFIG)
        assert conf == 1.0


class TestClassifyUnmatched:
    def test_overlapping_detection_means_occluded(self):
        anchor = make_anchor("a", pos=(100.0, 100.0), size=(20.0, 20.0))
        cone = make_percept(0, kind="cone", pos=(105.0, 100.0), size=(40.0, 40.0))
        assert classify_unmatched(anchor, [cone], CONFIG) == OCCLUDED

    def test_touching_edges_do_not_count_as_overlap(self):
        anchor = make_anchor("a", pos=(100.0, 100.0), size=(20.0, 20.0))
        neighbor = make_percept(0, pos=(120.0, 100.0), size=(20.0, 20.0))
        assert not boxes_overlap(anchor.box, neighbor.box)
        assert classify_unmatched(anchor, [neighbor], CONFIG) == LOST

    def test_center_outside_viewport_is_out_of_view(self):
        anchor = make_anchor("a", pos=(400.0, 120.0))
        assert classify_unmatched(anchor, [], CONFIG) == OUT_OF_VIEW

    def test_boundary_is_exclusive(self):
        assert classify_unmatched(make_anchor("a", pos=(360.0, 120.0)), [], CONFIG) == OUT_OF_VIEW
        assert classify_unmatched(make_anchor("a", pos=(359.9, 120.0)), [], CONFIG) == LOST

    def test_in_view_without_overlap_is_lost(self):
        anchor = make_anchor("a", pos=(100.0, 100.0))
        far = make_percept(0, pos=(300.0, 200.0))
        assert classify_unmatched(anchor, [far], CONFIG) == LOST


class TestApplyAction:
    def test_contain_attaches_target_to_container(self):
        model = WorldModel(anchors=(
            make_anchor("cone3", kind="cone", pos=(100.0, 100.0)),
            make_anchor("snitch0", kind="snitch", pos=(100.0, 98.0)),
        ))
        event = ActionEvent("contain", ("cone3", "snitch0"), 5)
        out = apply_action(model, event, CONFIG)
        snitch = out.anchor_lookup()["snitch0"]
        assert snitch.parent == "cone3"
        assert snitch.status == ATTACHED
        assert snitch.parent_offset == (0.0, -2.0)

    def test_pick_up_attaches_object_to_hand(self):
        config = EngineConfig(action_rules=(ActionRule("pick-up", "attach", 1, 0),))
        model = WorldModel(anchors=(
            make_anchor("hand0", kind="hand", pos=(10.0, 10.0)),
            make_anchor("obj0", kind="obj", pos=(12.0, 10.0)),
        ))
        out = apply_action(model, ActionEvent("pick-up", ("hand0", "obj0"), 0), config)
        assert out.anchor_lookup()["obj0"].parent == "hand0"

    def test_unknown_action_is_a_no_op(self):
        model = WorldModel(anchors=(make_anchor("cube0"),))
        out = apply_action(model, ActionEvent("wave", ("cube0",), 0), CONFIG)
        assert out == model

    def test_unknown_anchor_rejected(self):
        model = WorldModel(anchors=(make_anchor("cone0", kind="cone"),))
        with pytest.raises(ActionError, match="unknown anchor"):
            apply_action(model, ActionEvent("contain", ("cone0", "ghost9"), 0), CONFIG)

    def test_argument_index_out_of_range_rejected(self):
        model = WorldModel(anchors=(make_anchor("cone0", kind="cone"),))
        with pytest.raises(ActionError, match="out of range"):
            apply_action(model, ActionEvent("contain", ("cone0",), 0), CONFIG)

    def test_cycle_creating_attach_rejected(self):
        model = WorldModel(anchors=(
            make_anchor("a0"),
            make_anchor("b0"),
        ))
        config = EngineConfig(action_rules=(ActionRule("stick", "attach", 1, 0),))
        model = apply_action(model, ActionEvent("stick", ("a0", "b0"), 0), config)
        with pytest.raises(ActionError, match="cycle"):
            apply_action(model, ActionEvent("stick", ("b0", "a0"), 1), config)
        with pytest.raises(ActionError, match="cycle"):
            apply_action(model, ActionEvent("stick", ("a0", "a0"), 1), config)

    def test_reattach_replaces_parent_never_adds_one(self):
        config = EngineConfig(action_rules=(ActionRule("stick", "attach", 0, 1),))
        model = WorldModel(anchors=(
            make_anchor("plug0"), make_anchor("case0", pos=(150.0, 100.0)),
            make_anchor("case1", pos=(200.0, 100.0)),
        ))
        model = apply_action(model, ActionEvent("stick", ("plug0", "case0"), 0), config)
        model = apply_action(model, ActionEvent("stick", ("plug0", "case1"), 1), config)
        plug = model.anchor_lookup()["plug0"]
        assert plug.parent == "case1"
        assert validate_world_model(model) == []

    def test_detach_clears_and_is_idempotent(self):
        model = WorldModel(anchors=(
            make_anchor("cone0", kind="cone"),
            make_anchor("snitch0", kind="snitch", pos=(101.0, 100.0)),
        ))
        model = apply_action(model, ActionEvent("contain", ("cone0", "snitch0"), 0), CONFIG)
        model = apply_action(model, ActionEvent("uncontain", ("cone0", "snitch0"), 1), CONFIG)
        snitch = model.anchor_lookup()["snitch0"]
        assert snitch.parent is None and snitch.parent_offset is None
        again = apply_action(model, ActionEvent("uncontain", ("cone0", "snitch0"), 2), CONFIG)
        assert again == model


class TestPropagateAttachments:
    def test_static_parent_static_child(self):
        model = WorldModel(anchors=(
            make_anchor("cone0", pos=(200.0, 150.0)),
            make_anchor("snitch0", pos=(1.0, 1.0), status=ATTACHED,
                        parent="cone0", offset=(0.0, -2.0)),
        ))
        out = propagate_attachments(model)
        assert out.anchor_lookup()["snitch0"].attributes.position == (200.0, 148.0)
        assert propagate_attachments(out) == out  # idempotent

    def test_chain_follows_root_motion(self):
        # plug -> case -> hand; hand moved +30 in x, children shift with it
        model = WorldModel(anchors=(
            make_anchor("hand0", pos=(130.0, 100.0)),
            make_anchor("case0", pos=(0.0, 0.0), status=ATTACHED,
                        parent="hand0", offset=(-10.0, 0.0)),
            make_anchor("plug0", pos=(0.0, 0.0), status=ATTACHED,
                        parent="case0", offset=(-5.0, 2.0)),
        ))
        out = propagate_attachments(model)
        case = out.anchor_lookup()["case0"]
        plug = out.anchor_lookup()["plug0"]
        assert case.attributes.position == (120.0, 100.0)
        assert plug.attributes.position == (115.0, 102.0)

    def test_sizes_unchanged(self):
        model = WorldModel(anchors=(
            make_anchor("cone0", pos=(50.0, 50.0)),
            make_anchor("snitch0", pos=(0.0, 0.0), size=(18.0, 18.0),
                        status=ATTACHED, parent="cone0", offset=(2.0, 2.0)),
        ))
        out = propagate_attachments(model)
        assert out.anchor_lookup()["snitch0"].attributes.size == (18.0, 18.0)
