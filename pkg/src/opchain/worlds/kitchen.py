"""Kinematic kitchen world: a gripper, graspable items, and a sliding drawer.

Policies are straight-line, bounded-velocity pose steppers; orientation moves
by shortest-arc interpolation under an angular velocity cap.  Predicates are
pure functions of the poses: the approach region is a cylinder around the
standoff-to-grasp segment, the grasp region is a position/angle margin around
any candidate grasp pose, and drawer openness is an extension threshold.
A scripted adversary can close the drawer, displace objects, or shove the
gripper, triggered by tick index or by a predicate turning true.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from ..errors import PolicyError
from ..geometry import (
    IDENTITY_QUAT,
    Pose,
    Quat,
    Vec3,
    point_segment_projection,
    quat_step,
    vec_add,
    vec_dist,
    vec_scale,
    vec_step,
    vec_sub,
)
from ..logic import Domain, LogicalState
from .base import WorldModel

POLICY_IDS = (
    "approach",
    "cage",
    "grasp",
    "lift",
    "transport",
    "place",
    "open_drawer",
    "close_drawer",
    "release",
    "retract",
)


def select_grasp(
    current: Pose,
    candidates: Sequence[Pose],
    lambda_p: float,
    lambda_r: float,
) -> Pose:
    """Pick the candidate minimising weighted translation distance plus
    absolute rotation magnitude from the current pose; ties keep list order."""
    if not candidates:
        raise ValueError("no grasp candidates")
    if lambda_p < 0 or lambda_r < 0 or (lambda_p == 0 and lambda_r == 0):
        raise ValueError("weights must be nonnegative and not both zero")
    best = candidates[0]
    best_cost = math.inf
    for cand in candidates:
        cost = lambda_p * current.distance_to(cand) + lambda_r * current.angle_to(cand)
        if cost < best_cost:
            best = cand
            best_cost = cost
    return best


@dataclass(frozen=True)
class ItemConfig:
    name: str
    pose: Pose
    grasps: tuple[Pose, ...]
    standoff_offset: Vec3 = (0.0, 0.0, 0.12)
    approach_radius: float = 0.05
    position_margin: float = 0.012
    angle_margin: float = 0.10
    region: tuple[Vec3, Vec3] | None = None  # placement sampling box


@dataclass(frozen=True)
class DrawerConfig:
    name: str
    position: Vec3  # front face when closed
    axis: Vec3 = (0.0, -1.0, 0.0)  # unit direction of opening
    travel: float = 0.25
    open_threshold: float = 0.8
    handle_offset: Vec3 = (0.0, -0.06, 0.0)
    handle_margin: float = 0.02
    interior_min: Vec3 = (-0.12, 0.0, 0.0)
    interior_max: Vec3 = (0.12, 0.18, 0.08)
    above_offset: Vec3 = (0.0, -0.16, 0.25)
    above_margin: float = 0.03
    initial_extension: float = 0.0


@dataclass(frozen=True)
class AdversaryEvent:
    """One scripted perturbation.

    Triggered either at an absolute tick or a fixed delay after the named
    predicate grounding is first observed true.
    """

    kind: str  # close_drawer | displace_object | shove_gripper
    target: str | None = None
    amount: float = 0.0
    offset: Vec3 = (0.0, 0.0, 0.0)
    at_tick: int | None = None
    after_predicate: tuple[str, tuple[str, ...]] | None = None
    delay: int = 0


@dataclass(frozen=True)
class KitchenConfig:
    gripper: str = "gripper"
    home: Pose = Pose((0.0, -0.4, 0.5))
    home_margin: float = 0.03
    v_max: float = 0.005
    omega_max: float = 0.05
    z_lift: float = 0.30
    lift_clearance: float = 0.05
    pose_noise: float = 0.0
    lambda_p: float = 1.0
    lambda_r: float = 0.2
    max_shove: float = 0.1
    max_displace: float = 0.2
    items: tuple[ItemConfig, ...] = ()
    drawers: tuple[DrawerConfig, ...] = ()
    adversary: tuple[AdversaryEvent, ...] = ()

    def item(self, name: str) -> ItemConfig:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(f"unknown item '{name}'")

    def drawer(self, name: str) -> DrawerConfig:
        for dw in self.drawers:
            if dw.name == name:
                return dw
        raise KeyError(f"unknown drawer '{name}'")


class KitchenWorld(WorldModel):
    """Poses-and-thresholds simulation of the pick-and-stow kitchen task."""

    def __init__(
        self,
        domain: Domain,
        config: KitchenConfig,
        seed: int | None = None,
        randomize_placements: bool = False,
    ):
        self.domain = domain
        self.config = config
        self.randomize_placements = randomize_placements
        self._evaluators = [
            self._compile_predicate(g.schema, g.arguments) for g in domain.groundings
        ]
        self.reseed(seed)

    # setup -------------------------------------------------------------------

    def _compile_predicate(self, schema: str, args: tuple[str, ...]):
        cfg = self.config
        known_items = {it.name for it in cfg.items}
        known_drawers = {dw.name for dw in cfg.drawers}

        def need_gripper(name):
            if name != cfg.gripper:
                raise ValueError(f"{schema}: unknown gripper '{name}'")

        def need_item(name):
            if name not in known_items:
                raise ValueError(f"{schema}: unknown item '{name}'")

        def need_drawer(name):
            if name not in known_drawers:
                raise ValueError(f"{schema}: unknown drawer '{name}'")

        if schema == "in_approach_region":
            need_gripper(args[0]), need_item(args[1])
            return lambda: self._in_approach_region(args[1])
        if schema == "around_obj":
            need_gripper(args[0]), need_item(args[1])
            return lambda: self._around_obj(args[1])
        if schema == "is_attached_to":
            need_gripper(args[0]), need_item(args[1])
            return lambda: self.attachment == args[1]
        if schema == "lifted":
            need_gripper(args[0])
            return lambda: self.gripper.position[2] >= cfg.z_lift
        if schema == "at_home":
            need_gripper(args[0])
            return lambda: (
                vec_dist(self.gripper.position, cfg.home.position) <= cfg.home_margin
            )
        if schema == "above_drawer":
            need_gripper(args[0]), need_drawer(args[1])
            return lambda: (
                vec_dist(self.gripper.position, self._staging_point(args[1]))
                <= cfg.drawer(args[1]).above_margin
            )
        if schema == "drawer_is_open":
            need_drawer(args[0])
            return lambda: (
                self.extension[args[0]] >= cfg.drawer(args[0]).open_threshold
            )
        if schema == "in_drawer":
            need_item(args[0]), need_drawer(args[1])
            return lambda: self._in_drawer(args[0], args[1])
        raise ValueError(f"world cannot evaluate predicate schema '{schema}'")

    def reseed(self, seed: int | None) -> None:
        cfg = self.config
        self.rng = np.random.default_rng(seed)
        self.tick = 0
        self.gripper = cfg.home
        self.attachment: str | None = None
        self._attach_rel: Pose | None = None
        self.item_poses: dict[str, Pose] = {}
        for it in sorted(cfg.items, key=lambda i: i.name):
            pose = it.pose
            if self.randomize_placements and it.region is not None:
                lo, hi = it.region
                pos = tuple(self.rng.uniform(lo[k], hi[k]) for k in range(3))
                pose = Pose(pos, it.pose.orientation)
            self.item_poses[it.name] = pose
        self.extension: dict[str, float] = {
            dw.name: dw.initial_extension for dw in cfg.drawers
        }
        self._pending: dict[int, AdversaryEvent] = dict(enumerate(cfg.adversary))
        self._armed: dict[int, int] = {}  # pending index -> fire tick
        self._arm_triggers()

    # geometry ----------------------------------------------------------------

    def grasp_poses(self, item: str) -> tuple[Pose, ...]:
        base = self.item_poses[item]
        return tuple(base.compose(g) for g in self.config.item(item).grasps)

    def standoff_pose(self, item: str, grasp: Pose) -> Pose:
        off = self.config.item(item).standoff_offset
        return Pose(vec_add(grasp.position, off), grasp.orientation)

    def _front_position(self, drawer: str) -> Vec3:
        dw = self.config.drawer(drawer)
        return vec_add(
            dw.position, vec_scale(dw.axis, self.extension[drawer] * dw.travel)
        )

    def handle_position(self, drawer: str) -> Vec3:
        return vec_add(
            self._front_position(drawer), self.config.drawer(drawer).handle_offset
        )

    def interior_box(self, drawer: str) -> tuple[Vec3, Vec3]:
        front = self._front_position(drawer)
        dw = self.config.drawer(drawer)
        return vec_add(front, dw.interior_min), vec_add(front, dw.interior_max)

    def _staging_point(self, drawer: str) -> Vec3:
        dw = self.config.drawer(drawer)
        return vec_add(dw.position, dw.above_offset)

    def _in_drawer(self, item: str, drawer: str) -> bool:
        lo, hi = self.interior_box(drawer)
        p = self.item_poses[item].position
        return all(lo[k] <= p[k] <= hi[k] for k in range(3))

    def _in_approach_region(self, item: str) -> bool:
        it = self.config.item(item)
        p = self.gripper.position
        for grasp in self.grasp_poses(item):
            standoff = self.standoff_pose(item, grasp)
            radial, t = point_segment_projection(
                p, standoff.position, grasp.position
            )
            if 0.0 <= t <= 1.0 and radial <= it.approach_radius:
                return True
        return False

    def _around_obj(self, item: str) -> bool:
        it = self.config.item(item)
        for grasp in self.grasp_poses(item):
            if (
                self.gripper.distance_to(grasp) <= it.position_margin
                and self.gripper.angle_to(grasp) <= it.angle_margin
            ):
                return True
        return False

    # observation -------------------------------------------------------------

    def observe(self) -> dict:
        return {
            "tick": self.tick,
            "gripper": self.gripper,
            "attachment": self.attachment,
            "items": dict(self.item_poses),
            "extension": dict(self.extension),
        }

    def logical_state(self) -> LogicalState:
        value = 0
        for i, ev in enumerate(self._evaluators):
            if ev():
                value |= 1 << i
        return LogicalState(self.domain.size, value)

    # dynamics ----------------------------------------------------------------

    def step(self, policy_id: str | None, args: tuple[str, ...] = ()) -> None:
        self.tick += 1
        self._fire_due_events()
        if policy_id is not None:
            handler = getattr(self, f"_policy_{policy_id}", None)
            if policy_id not in POLICY_IDS or handler is None:
                raise PolicyError(f"unknown policy '{policy_id}'")
            handler(*args)
        self._sync_attachment()
        self._arm_triggers()

    def inject(self, event: AdversaryEvent) -> None:
        self._apply_event(event)
        self._sync_attachment()

    # policies ----------------------------------------------------------------

    def _move_gripper_toward(self, target: Pose) -> None:
        cfg = self.config
        pos = vec_step(self.gripper.position, target.position, cfg.v_max)
        quat = quat_step(self.gripper.orientation, target.orientation, cfg.omega_max)
        if cfg.pose_noise > 0.0:
            noise = self.rng.normal(0.0, cfg.pose_noise, 3)
            pos = (pos[0] + noise[0], pos[1] + noise[1], pos[2] + noise[2])
        self.gripper = Pose(pos, quat)

    def _best_grasp(self, item: str) -> Pose:
        return select_grasp(
            self.gripper,
            self.grasp_poses(item),
            self.config.lambda_p,
            self.config.lambda_r,
        )

    def _policy_approach(self, item: str) -> None:
        grasp = self._best_grasp(item)
        self._move_gripper_toward(self.standoff_pose(item, grasp))

    def _policy_cage(self, item: str) -> None:
        self._move_gripper_toward(self._best_grasp(item))

    def _policy_grasp(self, item: str) -> None:
        if self._around_obj(item):
            if self.attachment is None:
                self.attachment = item
                self._attach_rel = self.item_poses[item].relative_to(self.gripper)
        else:
            self._move_gripper_toward(self._best_grasp(item))

    def _policy_lift(self, *args: str) -> None:
        cfg = self.config
        x, y, _ = self.gripper.position
        target = Pose((x, y, cfg.z_lift + cfg.lift_clearance), self.gripper.orientation)
        self._move_gripper_toward(target)

    def _policy_transport(self, drawer: str) -> None:
        target = Pose(self._staging_point(drawer), self.gripper.orientation)
        self._move_gripper_toward(target)

    def _policy_place(self, item: str, drawer: str) -> None:
        if self.attachment == item and self._in_drawer(item, drawer):
            self.attachment = None
            self._attach_rel = None
            return
        lo, hi = self.interior_box(drawer)
        center = tuple((lo[k] + hi[k]) / 2.0 for k in range(3))
        self._move_gripper_toward(Pose(center, self.gripper.orientation))

    def _slide_drawer(self, drawer: str, direction: float) -> None:
        cfg = self.config.drawer(drawer)
        handle = self.handle_position(drawer)
        if vec_dist(self.gripper.position, handle) > cfg.handle_margin:
            self._move_gripper_toward(Pose(handle, self.gripper.orientation))
            return
        step = direction * self.config.v_max / cfg.travel
        self._set_extension(drawer, self.extension[drawer] + step)
        # the gripper rides the handle while pulling or pushing
        self.gripper = Pose(self.handle_position(drawer), self.gripper.orientation)

    def _policy_open_drawer(self, drawer: str) -> None:
        self._slide_drawer(drawer, +1.0)

    def _policy_close_drawer(self, drawer: str) -> None:
        self._slide_drawer(drawer, -1.0)

    def _policy_release(self, *args: str) -> None:
        self.attachment = None
        self._attach_rel = None

    def _policy_retract(self, *args: str) -> None:
        self._move_gripper_toward(self.config.home)

    # internal mechanics ------------------------------------------------------

    def _set_extension(self, drawer: str, value: float) -> None:
        dw = self.config.drawer(drawer)
        new = min(1.0, max(0.0, value))
        old = self.extension[drawer]
        if new == old:
            return
        lo, hi = self.interior_box(drawer)
        shift = vec_scale(dw.axis, (new - old) * dw.travel)
        for name, pose in self.item_poses.items():
            if name == self.attachment:
                continue
            p = pose.position
            if all(lo[k] <= p[k] <= hi[k] for k in range(3)):
                self.item_poses[name] = Pose(vec_add(p, shift), pose.orientation)
        self.extension[drawer] = new

    def _sync_attachment(self) -> None:
        if self.attachment is not None and self._attach_rel is not None:
            self.item_poses[self.attachment] = self.gripper.compose(self._attach_rel)

    # adversary ---------------------------------------------------------------

    def _arm_triggers(self) -> None:
        for idx, ev in self._pending.items():
            if idx in self._armed:
                continue
            if ev.at_tick is not None:
                self._armed[idx] = ev.at_tick
            elif ev.after_predicate is not None:
                schema, args = ev.after_predicate
                gi = self.domain.index_of(schema, *args)
                if self._evaluators[gi]():
                    self._armed[idx] = self.tick + ev.delay

    def _fire_due_events(self) -> None:
        due = [idx for idx, when in self._armed.items() if self.tick >= when]
        for idx in due:
            self._apply_event(self._pending.pop(idx))
            del self._armed[idx]

    def _apply_event(self, event: AdversaryEvent) -> None:
        cfg = self.config
        if event.kind == "close_drawer":
            self._set_extension(
                event.target, self.extension[event.target] - event.amount
            )
        elif event.kind == "displace_object":
            if event.target == self.attachment:
                return  # held objects cannot be displaced
            off = _clamp_vec(event.offset, cfg.max_displace)
            pose = self.item_poses[event.target]
            self.item_poses[event.target] = Pose(
                vec_add(pose.position, off), pose.orientation
            )
        elif event.kind == "shove_gripper":
            off = _clamp_vec(event.offset, cfg.max_shove)
            self.gripper = Pose(
                vec_add(self.gripper.position, off), self.gripper.orientation
            )
        else:
            raise ValueError(f"unknown adversary event kind '{event.kind}'")


def _clamp_vec(v: Vec3, max_norm: float) -> Vec3:
    n = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    if n <= max_norm or n == 0.0:
        return v
    s = max_norm / n
    return (v[0] * s, v[1] * s, v[2] * s)
