"""Deterministic 2D tabletop scenario generator.

Scenes are viewed top-down: opaque objects pass over one another, and cones
can settle on top of smaller objects, hiding them and carrying them around.
The generator emits ground-truth trajectories, per-frame target labels,
agent-action events, and a detection stream with optional sensor noise
(miss bursts, short-lived ghost detections, center jitter).

Conventions that keep noiseless scenes exactly trackable:

* an object only moves during its own motion event, and movers are drawn
  above everything else, so they stay detected while moving;
* a container settles on its target one full frame before the ``contain``
  action fires, so frozen attachment offsets are exact;
* ``uncontain`` fires on the frame the container is still in place, before
  it retreats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .core import ActionEvent, Attributes, EngineError, Percept, Vec2
from .tracker import FrameInput

LABELS = ("visible", "occluded", "contained", "carried")
MOTION_KINDS = ("slide", "pick_place", "contain", "uncontain")
EVENT_KINDS = MOTION_KINDS + ("rotate",)
GHOST_TYPES = ("cone", "cube", "sphere", "cylinder")

DEFAULT_SIZES = {
    "cone": 40.0,
    "cube": 30.0,
    "sphere": 24.0,
    "cylinder": 26.0,
    "snitch": 18.0,
}


class SimulationError(EngineError):
    """Infeasible scenario configuration or script."""


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    object_type: str
    size: Vec2
    start: Vec2  # world coordinates


@dataclass(frozen=True)
class EventSpec:
    """One scripted event.

    ``slide``/``pick_place`` move the subject to ``dest`` over [start, end].
    ``contain`` moves the subject onto ``target`` (plus ``offset``) over
    [start, end]; the attachment fires at end + 1. ``uncontain`` releases
    ``target`` at ``start`` and then retreats the subject to ``dest``.
    ``rotate`` spins in place and changes nothing.
    """

    kind: str
    subject: str
    start: int
    end: int
    dest: Vec2 | None = None
    target: str | None = None
    offset: Vec2 = (0.0, 0.0)


@dataclass(frozen=True)
class NoiseConfig:
    miss_rate: float = 0.0
    ghost_rate: float = 0.0
    jitter_sigma: float = 0.0
    flicker_burst_length: int = 1
    # Minimum spawn distance between a ghost and the last seen position of
    # any real object. 0 places ghosts anywhere, including inside the
    # association radius of a temporarily missing object, which exercises
    # alignment ambiguity rather than plain flicker.
    ghost_clearance: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    frames: int = 300
    viewport: Vec2 = (360.0, 240.0)
    objects: tuple[ObjectSpec, ...] | None = None
    counts: Mapping[str, int] | None = None
    script: tuple[EventSpec, ...] | None = None
    event_mix: Mapping[str, float] | None = None
    camera: tuple[tuple[int, Vec2], ...] = ((0, (0.0, 0.0)),)
    noise: NoiseConfig = NoiseConfig()
    cover_drop_fraction: float = 0.5


@dataclass(frozen=True)
class SimDetection:
    """Pre-noise detection unit, still tagged with its source object."""

    source: str
    object_type: str
    position: Vec2  # image coordinates
    size: Vec2
    score: float = 1.0


@dataclass(frozen=True)
class ScenarioRecord:
    """Everything a scenario produced: truth, labels, events, detections."""

    seed: int
    frames: int
    viewport: Vec2
    objects: tuple[ObjectSpec, ...]
    camera: tuple[Vec2, ...]
    truth: tuple[Mapping[str, Vec2], ...]  # world coordinates per frame
    labels: tuple[str, ...]
    actions: tuple[ActionEvent, ...]
    detections: tuple[tuple[Percept, ...], ...]
    visibility: tuple[frozenset[str], ...]  # pre-noise detectable object names
    attachments: tuple[tuple[str, str, int, int], ...]  # (child, parent, start, end)

    def object_spec(self, name: str) -> ObjectSpec:
        for spec in self.objects:
            if spec.name == name:
                return spec
        raise KeyError(name)

    def target_name(self, target_type: str) -> str:
        for spec in self.objects:
            if spec.object_type == target_type:
                return spec.name
        raise KeyError(f"no object of type {target_type!r}")

    def image_position(self, frame: int, name: str) -> Vec2:
        wx, wy = self.truth[frame][name]
        cx, cy = self.camera[frame]
        return (wx - cx, wy - cy)

    def target_box(self, frame: int, target_type: str):
        name = self.target_name(target_type)
        return (self.image_position(frame, name), self.object_spec(name).size)

    def first_detection_frame(self, target_type: str) -> int | None:
        for f, percepts in enumerate(self.detections):
            if any(p.attributes.object_type == target_type for p in percepts):
                return f
        return None

    def frame_inputs(self) -> list[FrameInput]:
        by_frame: dict[int, list[ActionEvent]] = {}
        for event in self.actions:
            by_frame.setdefault(event.frame_index, []).append(event)
        return [
            FrameInput(
                frame_index=f,
                percepts=self.detections[f],
                camera_pose=self.camera[f],
                actions=tuple(by_frame.get(f, ())),
            )
            for f in range(self.frames)
        ]


def _lerp_pose(p0: Vec2, p1: Vec2, num: int, den: int) -> Vec2:
    # Multiply before dividing: integer-valued waypoints with divisible spans
    # then interpolate without rounding error.
    return (
        p0[0] + (p1[0] - p0[0]) * num / den,
        p0[1] + (p1[1] - p0[1]) * num / den,
    )


def _camera_pose(waypoints: Sequence[tuple[int, Vec2]], frame: int) -> Vec2:
    if frame <= waypoints[0][0]:
        return waypoints[0][1]
    for (f0, p0), (f1, p1) in zip(waypoints, waypoints[1:]):
        if frame <= f1:
            return _lerp_pose(p0, p1, frame - f0, f1 - f0)
    return waypoints[-1][1]


def _overlap_area(center_a: Vec2, size_a: Vec2, center_b: Vec2, size_b: Vec2) -> float:
    ox = min(center_a[0] + size_a[0] / 2, center_b[0] + size_b[0] / 2) - max(
        center_a[0] - size_a[0] / 2, center_b[0] - size_b[0] / 2
    )
    oy = min(center_a[1] + size_a[1] / 2, center_b[1] + size_b[1] / 2) - max(
        center_a[1] - size_a[1] / 2, center_b[1] - size_b[1] / 2
    )
    if ox <= 0.0 or oy <= 0.0:
        return 0.0
    return ox * oy


def _validate_noise(noise: NoiseConfig) -> None:
    for name in ("miss_rate", "ghost_rate"):
        rate = getattr(noise, name)
        if not (0.0 <= rate <= 1.0):
            raise SimulationError(f"{name} must lie in [0, 1], got {rate}")
    if noise.jitter_sigma < 0:
        raise SimulationError("jitter_sigma must be >= 0")
    if noise.flicker_burst_length < 1:
        raise SimulationError("flicker_burst_length must be >= 1")


def _validate_objects(objects: Sequence[ObjectSpec]) -> None:
    names = [o.name for o in objects]
    if len(set(names)) != len(names):
        raise SimulationError("object names must be unique")
    snitches = [o for o in objects if o.object_type == "snitch"]
    if len(snitches) != 1:
        raise SimulationError(f"exactly one snitch required, got {len(snitches)}")
    for spec in objects:
        if spec.size[0] <= 0 or spec.size[1] <= 0:
            raise SimulationError(f"object {spec.name!r} has non-positive size")


def _validate_script(
    script: Sequence[EventSpec], objects: Sequence[ObjectSpec], config: ScenarioConfig
) -> None:
    by_name = {o.name: o for o in objects}
    motion_windows: list[tuple[int, int, int]] = []
    for i, ev in enumerate(script):
        if ev.kind not in EVENT_KINDS:
            raise SimulationError(f"event {i}: unknown kind {ev.kind!r}")
        if ev.subject not in by_name:
            raise SimulationError(f"event {i}: unknown subject {ev.subject!r}")
        if not (0 <= ev.start <= ev.end < config.frames):
            raise SimulationError(f"event {i}: window [{ev.start}, {ev.end}] out of range")
        if ev.kind in ("slide", "pick_place", "uncontain") and ev.dest is None:
            raise SimulationError(f"event {i}: {ev.kind} requires a destination")
        if ev.kind in ("contain", "uncontain"):
            if ev.target is None or ev.target not in by_name:
                raise SimulationError(f"event {i}: unknown target {ev.target!r}")
            if ev.target == ev.subject:
                raise SimulationError(f"event {i}: subject cannot contain itself")
        if ev.kind == "contain":
            if ev.end + 1 >= config.frames:
                raise SimulationError(f"event {i}: contain must finish before the last frame")
            container = by_name[ev.subject]
            child = by_name[ev.target]
            for axis in (0, 1):
                if abs(ev.offset[axis]) + child.size[axis] / 2 > container.size[axis] / 2 + 1e-9:
                    raise SimulationError(
                        f"event {i}: container {ev.subject!r} cannot fully cover {ev.target!r}"
                    )
        if ev.kind in MOTION_KINDS:
            motion_windows.append((ev.start, ev.end, i))
    motion_windows.sort()
    for (s0, e0, i0), (s1, e1, i1) in zip(motion_windows, motion_windows[1:]):
        if s1 <= e0:
            raise SimulationError(
                f"event {i1}: motion window overlaps event {i0} (one mover at a time)"
            )


def _synthesize(script, objects, config):
    frames = config.frames
    position: dict[str, Vec2] = {o.name: o.start for o in objects}
    attached: dict[str, tuple[str, Vec2]] = {}
    attach_start: dict[str, int] = {}
    attach_log: list[tuple[str, str, int, int]] = []
    actions: list[ActionEvent] = []
    trajectory: list[dict[str, Vec2]] = []
    target_contained: list[bool] = []
    snitch = next(o.name for o in objects if o.object_type == "snitch")

    origin: dict[int, Vec2] = {}
    goal: dict[int, Vec2] = {}
    indexed = list(enumerate(script))

    for f in range(frames):
        # Attachment lifecycle first, mirroring actions-before-alignment.
        for i, ev in indexed:
            if ev.kind == "contain" and f == ev.end + 1:
                if ev.target in attached:
                    raise SimulationError(
                        f"event {i}: contain target {ev.target!r} is already attached"
                    )
                off = (
                    position[ev.target][0] - position[ev.subject][0],
                    position[ev.target][1] - position[ev.subject][1],
                )
                attached[ev.target] = (ev.subject, off)
                attach_start[ev.target] = f
                actions.append(ActionEvent("contain", (ev.subject, ev.target), f))
            elif ev.kind == "uncontain" and f == ev.start:
                state = attached.get(ev.target)
                if state is None or state[0] != ev.subject:
                    raise SimulationError(
                        f"event {i}: uncontain without a matching containment of {ev.target!r}"
                    )
                attach_log.append((ev.target, ev.subject, attach_start.pop(ev.target), f))
                del attached[ev.target]
                actions.append(ActionEvent("uncontain", (ev.subject, ev.target), f))
            elif ev.kind == "rotate" and f == ev.start:
                actions.append(ActionEvent("rotate", (ev.subject,), f))

        for i, ev in indexed:
            if ev.kind not in MOTION_KINDS or not (ev.start <= f <= ev.end):
                continue
            if ev.subject in attached:
                raise SimulationError(
                    f"event {i}: subject {ev.subject!r} cannot move while attached"
                )
            if i not in origin:
                origin[i] = position[ev.subject]
                if ev.kind == "contain":
                    tx, ty = position[ev.target]
                    goal[i] = (tx + ev.offset[0], ty + ev.offset[1])
                else:
                    goal[i] = ev.dest
            span = ev.end - ev.start
            num = f - ev.start if span else 1
            den = span if span else 1
            position[ev.subject] = _lerp_pose(origin[i], goal[i], num, den)
            if ev.kind == "contain" and f == ev.end:
                tx, ty = position[ev.target]
                want = (tx + ev.offset[0], ty + ev.offset[1])
                if want != goal[i]:
                    raise SimulationError(
                        f"event {i}: contain target {ev.target!r} moved during the approach"
                    )

        if attached:
            settled: set[str] = set()

            def settle(name: str) -> None:
                if name in settled:
                    return
                parent, off = attached[name]
                if parent in attached:
                    settle(parent)
                position[name] = (position[parent][0] + off[0], position[parent][1] + off[1])
                settled.add(name)

            for child in list(attached):
                settle(child)

        trajectory.append(dict(position))
        target_contained.append(snitch in attached)

    for child, (parent, _off) in attached.items():
        attach_log.append((child, parent, attach_start[child], frames))
    return trajectory, target_contained, actions, attach_log


def _active_movers(script: Sequence[EventSpec], frame: int) -> set[str]:
    return {
        ev.subject
        for ev in script
        if ev.kind in MOTION_KINDS and ev.start <= frame <= ev.end
    }


def generate(config: ScenarioConfig) -> ScenarioRecord:
    """Build a complete scenario: deterministic in the seed, detections equal
    to ground truth when no noise is configured."""
    _validate_noise(config.noise)
    if not (0.0 < config.cover_drop_fraction < 1.0):
        raise SimulationError("cover_drop_fraction must lie in (0, 1)")
    if config.frames < 2:
        raise SimulationError("need at least two frames")

    rng = np.random.default_rng(config.seed)
    objects = config.objects
    if objects is None:
        objects = _random_layout(rng, config)
    _validate_objects(objects)

    script = config.script
    if script is None:
        script = _random_script(rng, objects, config)
    script = tuple(sorted(script, key=lambda e: (e.start, e.end, e.subject)))
    _validate_script(script, objects, config)

    trajectory, target_contained, actions, attach_log = _synthesize(script, objects, config)
    camera = tuple(_camera_pose(config.camera, f) for f in range(config.frames))

    names = [o.name for o in objects]
    spec_by_name = {o.name: o for o in objects}
    base_layer = {o.name: i for i, o in enumerate(objects)}
    cone_tier = {
        o.name: 500.0 + max(o.size) if o.object_type == "cone" else 0.0 for o in objects
    }
    width, height = config.viewport
    snitch = next(o.name for o in objects if o.object_type == "snitch")

    visibility: list[frozenset[str]] = []
    covered_flags: list[dict[str, bool]] = []
    clean: list[list[SimDetection]] = []
    for f in range(config.frames):
        movers = _active_movers(script, f)
        layer = {
            name: base_layer[name] + cone_tier[name] + (10000.0 if name in movers else 0.0)
            for name in names
        }
        frame_positions = trajectory[f]
        cam = camera[f]
        visible: list[str] = []
        covered: dict[str, bool] = {}
        for name in names:
            spec = spec_by_name[name]
            own_area = spec.size[0] * spec.size[1]
            cover = 0.0
            for other in names:
                if other == name or layer[other] <= layer[name]:
                    continue
                cover = max(
                    cover,
                    _overlap_area(
                        frame_positions[name],
                        spec.size,
                        frame_positions[other],
                        spec_by_name[other].size,
                    )
                    / own_area,
                )
            covered[name] = cover > config.cover_drop_fraction
            ix = frame_positions[name][0] - cam[0]
            iy = frame_positions[name][1] - cam[1]
            in_view = 0.0 <= ix < width and 0.0 <= iy < height
            if name == snitch and not in_view:
                raise SimulationError(
                    f"the target object left the viewport at frame {f}; adjust the script"
                )
            if not covered[name] and in_view:
                visible.append(name)
        visibility.append(frozenset(visible))
        covered_flags.append(covered)
        clean.append(
            [
                SimDetection(
                    source=name,
                    object_type=spec_by_name[name].object_type,
                    position=(
                        frame_positions[name][0] - cam[0],
                        frame_positions[name][1] - cam[1],
                    ),
                    size=spec_by_name[name].size,
                )
                for name in names
                if name in visibility[f]
            ]
        )

    labels: list[str] = []
    for f in range(config.frames):
        if target_contained[f]:
            moved = f > 0 and trajectory[f][snitch] != trajectory[f - 1][snitch]
            labels.append("carried" if moved else "contained")
        elif covered_flags[f][snitch]:
            labels.append("occluded")
        else:
            labels.append("visible")

    noisy = clean
    noise = config.noise
    if noise.miss_rate > 0 or noise.ghost_rate > 0 or noise.jitter_sigma > 0:
        noisy = corrupt(clean, noise, config.seed + 7919, config.viewport)

    detections = tuple(
        tuple(
            Percept(
                percept_id=i,
                attributes=Attributes(
                    object_type=det.object_type, position=det.position, size=det.size
                ),
                detector_score=det.score,
            )
            for i, det in enumerate(frame_dets)
        )
        for frame_dets in noisy
    )

    return ScenarioRecord(
        seed=config.seed,
        frames=config.frames,
        viewport=config.viewport,
        objects=tuple(objects),
        camera=camera,
        truth=tuple(trajectory),
        labels=tuple(labels),
        actions=tuple(actions),
        detections=detections,
        visibility=tuple(visibility),
        attachments=tuple(attach_log),
    )


def corrupt(
    frames: Sequence[Sequence[SimDetection]],
    noise: NoiseConfig,
    seed: int,
    viewport: Vec2 = (360.0, 240.0),
) -> list[list[SimDetection]]:
    """Drop detections in bursts, inject short-lived ghosts, jitter centers.

    Deterministic in the seed. Miss bursts are keyed to the source object;
    burst and ghost lifetimes draw uniformly from 1..flicker_burst_length.
    """
    _validate_noise(noise)
    rng = np.random.default_rng(seed)
    width, height = viewport
    miss_left: dict[str, int] = {}
    last_seen: dict[str, Vec2] = {}
    ghosts: list[list] = []  # [SimDetection, frames_left]
    ghost_counter = 0
    out: list[list[SimDetection]] = []
    for frame_dets in frames:
        for det in frame_dets:
            last_seen[det.source] = det.position
        kept: list[SimDetection] = []
        for det in frame_dets:
            left = miss_left.get(det.source, 0)
            if left > 0:
                miss_left[det.source] = left - 1
                continue
            if noise.miss_rate > 0 and rng.random() < noise.miss_rate:
                burst = int(rng.integers(1, noise.flicker_burst_length + 1))
                miss_left[det.source] = burst - 1
                continue
            kept.append(det)
        if noise.ghost_rate > 0 and rng.random() < noise.ghost_rate:
            spawn = None
            for _try in range(20):
                candidate = (
                    float(rng.uniform(20.0, width - 20.0)),
                    float(rng.uniform(20.0, height - 20.0)),
                )
                if noise.ghost_clearance <= 0 or all(
                    math.hypot(candidate[0] - p[0], candidate[1] - p[1])
                    >= noise.ghost_clearance
                    for p in last_seen.values()
                ):
                    spawn = candidate
                    break
            if spawn is not None:
                ghost = SimDetection(
                    source=f"ghost{ghost_counter}",
                    object_type=str(rng.choice(GHOST_TYPES)),
                    position=spawn,
                    size=(float(rng.uniform(14.0, 40.0)), float(rng.uniform(14.0, 40.0))),
                )
                ghost_counter += 1
                ghosts.append([ghost, int(rng.integers(1, noise.flicker_burst_length + 1))])
        alive: list[list] = []
        for entry in ghosts:
            kept.append(entry[0])
            entry[1] -= 1
            if entry[1] > 0:
                alive.append(entry)
        ghosts = alive
        if noise.jitter_sigma > 0:
            kept = [
                replace(
                    det,
                    position=(
                        det.position[0] + float(rng.normal(0.0, noise.jitter_sigma)),
                        det.position[1] + float(rng.normal(0.0, noise.jitter_sigma)),
                    ),
                )
                for det in kept
            ]
        out.append(kept)
    return out


def h1_violations(record: ScenarioRecord) -> list[str]:
    """Frames where an object moved without being observable.

    An object may move only while detected in consecutive frames itself, or
    while attached (directly or transitively) to a root that is. Returns an
    empty list for compliant scenarios.
    """
    out: list[str] = []
    names = [o.name for o in record.objects]
    for f in range(1, record.frames):
        att = {c: p for (c, p, s, e) in record.attachments if s <= f < e}
        for name in names:
            px, py = record.truth[f - 1][name]
            cx, cy = record.truth[f][name]
            if abs(cx - px) <= 1e-9 and abs(cy - py) <= 1e-9:
                continue
            if name in record.visibility[f] and name in record.visibility[f - 1]:
                continue
            root = name
            hops = 0
            while root in att and hops <= len(names):
                root = att[root]
                hops += 1
            if (
                root != name
                and root in record.visibility[f]
                and root in record.visibility[f - 1]
            ):
                continue
            out.append(f"{name} moved at frame {f} while unobserved")
    return out


# ---------------------------------------------------------------------------
# Layout and script randomization


_DIAG = math.sqrt(0.5)
_DIRECTIONS = (
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (_DIAG, _DIAG),
    (-_DIAG, _DIAG),
    (_DIAG, -_DIAG),
    (-_DIAG, -_DIAG),
)


def _pick_dest(
    rng: np.random.Generator,
    origin: Vec2,
    dist: float,
    half: float,
    viewport: Vec2,
    margin: float = 12.0,
    keep_clear: Sequence[tuple[Vec2, float]] = (),
) -> Vec2:
    width, height = viewport
    lo_x, hi_x = margin + half, width - margin - half
    lo_y, hi_y = margin + half, height - margin - half
    for idx in rng.permutation(len(_DIRECTIONS)):
        dx, dy = _DIRECTIONS[int(idx)]
        dest = (float(origin[0] + dx * dist), float(origin[1] + dy * dist))
        if not (lo_x <= dest[0] <= hi_x and lo_y <= dest[1] <= hi_y):
            continue
        if any(math.hypot(dest[0] - p[0], dest[1] - p[1]) < gap for p, gap in keep_clear):
            continue
        return dest
    raise SimulationError(f"no feasible destination at distance {dist} from {origin}")


def _random_layout(rng: np.random.Generator, config: ScenarioConfig) -> tuple[ObjectSpec, ...]:
    counts = dict(config.counts or {"cone": 2, "cube": 1, "sphere": 1, "cylinder": 1})
    counts.setdefault("snitch", 1)
    if counts["snitch"] != 1:
        raise SimulationError("exactly one snitch required")
    width, height = config.viewport
    margin = 35.0
    specs: list[ObjectSpec] = []
    placed: list[tuple[Vec2, float]] = []
    for object_type in sorted(counts):
        for n in range(counts[object_type]):
            base = DEFAULT_SIZES.get(object_type, 28.0)
            if object_type == "cone":
                side = float(rng.uniform(36.0, 56.0))
            else:
                side = float(base + rng.uniform(-4.0, 4.0))
            size = (side, side)
            for _attempt in range(600):
                x = float(rng.uniform(margin + side / 2, width - margin - side / 2))
                y = float(rng.uniform(margin + side / 2, height - margin - side / 2))
                if all(
                    math.hypot(x - p[0], y - p[1]) >= gap + side / 2 + 12.0
                    for p, gap in placed
                ):
                    break
            else:
                raise SimulationError("could not place objects without crowding")
            specs.append(ObjectSpec(f"{object_type}{n}", object_type, size, (x, y)))
            placed.append(((x, y), side / 2))
    return tuple(specs)


def _random_script(
    rng: np.random.Generator, objects: Sequence[ObjectSpec], config: ScenarioConfig
) -> tuple[EventSpec, ...]:
    mix = dict(config.event_mix or {"slide": 0.45, "pick_place": 0.15, "rotate": 0.1, "contain": 0.3})
    kinds = sorted(mix)
    weights = np.array([mix[k] for k in kinds], dtype=float)
    if weights.sum() <= 0:
        return ()
    weights = weights / weights.sum()

    position = {o.name: o.start for o in objects}
    half = {o.name: max(o.size) / 2 for o in objects}
    contained_by: dict[str, str] = {}
    busy_until = {o.name: 0 for o in objects}
    events: list[EventSpec] = []
    t = 12
    while t < config.frames - 100:
        kind = str(rng.choice(kinds, p=weights))
        free = [o for o in objects if busy_until[o.name] <= t and o.name not in contained_by]
        if not free:
            t += 10
            continue
        if kind == "rotate":
            obj = free[int(rng.integers(len(free)))]
            events.append(EventSpec("rotate", obj.name, t, t + 4))
            t += 12
        elif kind in ("slide", "pick_place"):
            obj = free[int(rng.integers(len(free)))]
            duration = int(rng.integers(18, 31)) if kind == "slide" else int(rng.integers(8, 13))
            dest = _pick_dest(
                rng, position[obj.name], float(rng.uniform(40.0, 80.0)), half[obj.name], config.viewport
            )
            events.append(EventSpec(kind, obj.name, t, t + duration, dest=dest))
            position[obj.name] = dest
            busy_until[obj.name] = t + duration + 4
            t += duration + 8
        else:  # contain combo: approach, dwell, carry, dwell, release
            cones = [
                o for o in free
                if o.object_type == "cone" and o.name not in contained_by.values()
            ]
            targets = [
                o for o in free
                if o.object_type != "cone" or o.size[0] < max(c.size[0] for c in cones) - 6
            ] if cones else []
            targets = [t_ for t_ in targets if t_.name not in contained_by]
            feasible = []
            for cone in cones:
                for tgt in targets:
                    if tgt.name == cone.name:
                        continue
                    if tgt.size[0] <= cone.size[0] - 4 and tgt.size[1] <= cone.size[1] - 4:
                        feasible.append((cone, tgt))
            if not feasible:
                t += 10
                continue
            cone, tgt = feasible[int(rng.integers(len(feasible)))]
            approach_end = t + 24
            carry_start = approach_end + 7
            carry_end = carry_start + 30
            release_start = carry_end + 8
            release_end = release_start + 20
            if release_end >= config.frames - 5:
                break
            carry_dest = _pick_dest(
                rng, position[tgt.name], float(rng.uniform(40.0, 70.0)), half[cone.name], config.viewport
            )
            release_dest = _pick_dest(rng, carry_dest, 70.0, half[cone.name], config.viewport)
            events.append(
                EventSpec("contain", cone.name, t, approach_end, target=tgt.name)
            )
            events.append(EventSpec("slide", cone.name, carry_start, carry_end, dest=carry_dest))
            events.append(
                EventSpec("uncontain", cone.name, release_start, release_end,
                          target=tgt.name, dest=release_dest)
            )
            position[cone.name] = release_dest
            position[tgt.name] = carry_dest
            busy_until[cone.name] = release_end + 4
            busy_until[tgt.name] = release_end + 4
            t = release_end + 10
    return tuple(events)


# ---------------------------------------------------------------------------
# Scenario templates


def _grid_layout(
    rng: np.random.Generator, n_objects: int, snitch_slot: int
) -> tuple[ObjectSpec, ...]:
    slots = [(60.0 + 90.0 * col, 70.0 + 100.0 * row) for row in range(2) for col in range(4)]
    cycle = ("cube", "sphere", "cylinder", "cone")
    specs: list[ObjectSpec] = []
    type_counts: dict[str, int] = {}
    for i in range(n_objects):
        x, y = slots[i % len(slots)]
        x += float(rng.uniform(-6.0, 6.0))
        y += float(rng.uniform(-6.0, 6.0))
        if i == snitch_slot:
            object_type = "snitch"
        else:
            object_type = cycle[i % len(cycle)]
        n = type_counts.get(object_type, 0)
        type_counts[object_type] = n + 1
        side = DEFAULT_SIZES[object_type]
        specs.append(ObjectSpec(f"{object_type}{n}", object_type, (side, side), (x, y)))
    return tuple(specs)


def _static_config(seed: int, frames: int, n_objects: int, noise: NoiseConfig) -> ScenarioConfig:
    rng = np.random.default_rng(seed)
    if not (2 <= n_objects <= 8):
        raise SimulationError("static template supports 2..8 objects")
    objects = _grid_layout(rng, n_objects, snitch_slot=min(6, n_objects - 1))
    return ScenarioConfig(
        seed=seed, frames=frames, objects=objects, script=(), noise=noise
    )


def _camera_config(seed: int, frames: int, n_objects: int, noise: NoiseConfig) -> ScenarioConfig:
    if frames < 260:
        raise SimulationError("camera template needs at least 260 frames")
    rng = np.random.default_rng(seed)
    objects = _grid_layout(rng, n_objects, snitch_slot=min(6, n_objects - 1))
    # Integer waypoint deltas divisible by their spans keep poses exact.
    waypoints = (
        (0, (0.0, 0.0)),
        (50, (0.0, 0.0)),
        (150, (100.0, 0.0)),
        (210, (100.0, 60.0)),
        (300, (10.0, -30.0)),
    )
    return ScenarioConfig(
        seed=seed, frames=frames, objects=objects, script=(), camera=waypoints, noise=noise
    )


def _mixed_config(seed: int, frames: int, noise: NoiseConfig) -> ScenarioConfig:
    if frames < 300:
        raise SimulationError("mixed template needs at least 300 frames")
    rng = np.random.default_rng(seed)
    u = lambda a, b: float(rng.uniform(a, b))
    snitch_pos = (180.0 + u(-15, 15), 120.0 + u(-12, 12))
    cone0 = (70.0 + u(-8, 8), 70.0 + u(-8, 8))
    cone1 = (295.0 + u(-8, 8), 65.0 + u(-8, 8))
    cube0 = (70.0 + u(-8, 8), 180.0 + u(-8, 8))
    sphere0 = (300.0 + u(-8, 8), 185.0 + u(-8, 8))
    objects = (
        ObjectSpec("cone0", "cone", (40.0, 40.0), cone0),
        ObjectSpec("cone1", "cone", (50.0, 50.0), cone1),
        ObjectSpec("cube0", "cube", (30.0, 30.0), cube0),
        ObjectSpec("sphere0", "sphere", (24.0, 24.0), sphere0),
        ObjectSpec("snitch0", "snitch", (18.0, 18.0), snitch_pos),
    )
    viewport = (360.0, 240.0)

    # Occluder pass: the cube crosses straight over the target and parks beyond.
    span = math.hypot(snitch_pos[0] - cube0[0], snitch_pos[1] - cube0[1])
    unit = ((snitch_pos[0] - cube0[0]) / span, (snitch_pos[1] - cube0[1]) / span)
    cube_park = (snitch_pos[0] + 62.0 * unit[0], snitch_pos[1] + 62.0 * unit[1])

    axes = ((11.0, 0.0), (-11.0, 0.0), (0.0, 11.0), (0.0, -11.0))
    delta1 = axes[int(rng.integers(4))]
    settle1 = (snitch_pos[0] + delta1[0], snitch_pos[1] + delta1[1])
    carry1_dest = _pick_dest(rng, settle1, u(60, 80), 20.0, viewport, margin=30.0)
    delta2 = axes[int(rng.integers(4))]
    delta2 = (delta2[0] * 4.0 / 11.0, delta2[1] * 4.0 / 11.0)
    stack1 = (carry1_dest[0] + delta2[0], carry1_dest[1] + delta2[1])
    carry2_dest = _pick_dest(rng, stack1, u(55, 70), 25.0, viewport, margin=30.0)
    cone1_park = _pick_dest(rng, carry2_dest, 70.0, 25.0, viewport, margin=30.0)
    cone0_after = (carry2_dest[0] - delta2[0], carry2_dest[1] - delta2[1])
    cone0_park = _pick_dest(
        rng, cone0_after, 64.0, 20.0, viewport, margin=30.0,
        keep_clear=((cone1_park, 50.0),),
    )
    cube_park2 = _pick_dest(rng, cube_park, 50.0, 15.0, viewport, margin=30.0)
    sphere_dest = _pick_dest(rng, sphere0, 45.0, 12.0, viewport, margin=30.0)

    script = (
        EventSpec("rotate", "sphere0", 8, 9),
        EventSpec("slide", "cube0", 12, 32, dest=cube_park),
        EventSpec("contain", "cone0", 40, 68, target="snitch0", offset=delta1),
        EventSpec("slide", "cone0", 75, 123, dest=carry1_dest),
        EventSpec("contain", "cone1", 130, 158, target="cone0", offset=delta2),
        EventSpec("slide", "cone1", 165, 203, dest=carry2_dest),
        EventSpec("uncontain", "cone1", 210, 230, target="cone0", dest=cone1_park),
        EventSpec("pick_place", "cube0", 234, 242, dest=cube_park2),
        EventSpec("uncontain", "cone0", 246, 266, target="snitch0", dest=cone0_park),
        EventSpec("slide", "sphere0", 272, 290, dest=sphere_dest),
    )
    return ScenarioConfig(seed=seed, frames=frames, objects=objects, script=script, noise=noise)


def _carried_config(seed: int, frames: int, noise: NoiseConfig) -> ScenarioConfig:
    """Carried-heavy scenario with a distractor parked nearer than the
    container at the moment the target disappears (the container approaches
    to ~18-20 px before covering; the distractor sits 15 px out on the far
    side and is never majority-covered)."""
    if frames < 220:
        raise SimulationError("carried template needs at least 220 frames")
    rng = np.random.default_rng(seed)
    sx = 180.0 + float(rng.uniform(-10, 10))
    sy = 120.0 + float(rng.uniform(-10, 10))
    ax = int(rng.choice((-1, 1)))  # container approaches from the -ax side
    cy = int(rng.choice((-1, 1)))  # carry heads along +cy in y
    objects = (
        ObjectSpec("cone0", "cone", (40.0, 40.0), (sx - ax * 140.0, sy)),
        ObjectSpec("cube0", "cube", (30.0, 30.0), (sx, sy - cy * 72.0)),
        ObjectSpec("cylinder0", "cylinder", (26.0, 26.0), (sx - ax * 120.0, sy + cy * 60.0)),
        ObjectSpec("sphere0", "sphere", (16.0, 16.0), (sx + ax * 15.0, sy)),
        ObjectSpec("snitch0", "snitch", (18.0, 18.0), (sx, sy)),
    )
    settle = (sx - ax * 11.0, sy)
    carry_end = (settle[0], sy + cy * 55.0)
    retreat = (settle[0] - ax * 60.0, carry_end[1])
    script = (
        EventSpec("contain", "cone0", 10, 74, target="snitch0", offset=(-ax * 11.0, 0.0)),
        EventSpec("slide", "cone0", 80, 135, dest=carry_end),
        EventSpec("uncontain", "cone0", 150, 176, target="snitch0", dest=retreat),
    )
    return ScenarioConfig(seed=seed, frames=frames, objects=objects, script=script, noise=noise)


def scenario_config_from_json(raw: dict, default_seed: int = 0) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed JSON object.

    Recognized keys mirror the dataclass fields; ``objects`` entries are
    ``{"name", "type", "size": [w, h], "start": [x, y]}`` and ``script``
    entries are ``{"kind", "subject", "start", "end", "dest"?, "target"?,
    "offset"?}``. Omitted sections fall back to random generation.
    """
    if not isinstance(raw, dict):
        raise SimulationError("scenario config must be a JSON object")
    kwargs: dict = {"seed": int(raw.get("seed", default_seed))}
    if "frames" in raw:
        kwargs["frames"] = int(raw["frames"])
    if "viewport" in raw:
        vx, vy = raw["viewport"]
        kwargs["viewport"] = (float(vx), float(vy))
    if "objects" in raw:
        kwargs["objects"] = tuple(
            ObjectSpec(
                name=entry["name"],
                object_type=entry["type"],
                size=(float(entry["size"][0]), float(entry["size"][1])),
                start=(float(entry["start"][0]), float(entry["start"][1])),
            )
            for entry in raw["objects"]
        )
    if "counts" in raw:
        kwargs["counts"] = {str(k): int(v) for k, v in raw["counts"].items()}
    if "script" in raw:
        events = []
        for entry in raw["script"]:
            events.append(
                EventSpec(
                    kind=entry["kind"],
                    subject=entry["subject"],
                    start=int(entry["start"]),
                    end=int(entry["end"]),
                    dest=tuple(map(float, entry["dest"])) if entry.get("dest") else None,
                    target=entry.get("target"),
                    offset=tuple(map(float, entry.get("offset", (0.0, 0.0)))),
                )
            )
        kwargs["script"] = tuple(events)
    if "event_mix" in raw:
        kwargs["event_mix"] = {str(k): float(v) for k, v in raw["event_mix"].items()}
    if "camera" in raw:
        kwargs["camera"] = tuple(
            (int(frame), (float(pose[0]), float(pose[1]))) for frame, pose in raw["camera"]
        )
    if "noise" in raw:
        noise_kwargs = dict(raw["noise"])
        kwargs["noise"] = NoiseConfig(**noise_kwargs)
    if "cover_drop_fraction" in raw:
        kwargs["cover_drop_fraction"] = float(raw["cover_drop_fraction"])
    try:
        return ScenarioConfig(**kwargs)
    except (KeyError, TypeError, ValueError) as exc:
        raise SimulationError(f"malformed scenario config: {exc}") from exc


def build_template(
    template: str,
    seed: int,
    frames: int = 300,
    n_objects: int = 8,
    noise: NoiseConfig = NoiseConfig(),
) -> ScenarioConfig:
    """Named scenario families used by the test suites and the CLI."""
    if template == "static":
        return _static_config(seed, frames, n_objects, noise)
    if template == "camera":
        return _camera_config(seed, frames, n_objects, noise)
    if template == "mixed":
        return _mixed_config(seed, frames, noise)
    if template == "carried":
        return _carried_config(seed, frames, noise)
    if template == "random":
        return ScenarioConfig(seed=seed, frames=frames, noise=noise)
    raise SimulationError(f"unknown template {template!r}")

TEMPLATES = ("static", "camera", "mixed", "carried", "random")
