"""2D kinematic simulation of one robot per instrument-walled arena.

Strokes are resolved analytically when the robot departs for the wall: the
impact wall, offset, and times are computed from the (noisy) heading at
departure, so collision results do not depend on the integrator step size.
The fixed-step loop only interpolates the pose between those anchors,
applies motion behaviors, and runs the fail-safe clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .timing import Aim, JitterModel, MetronomeClock, StrokePlan, window_boundary
from .patterns import StrokeKind

# Sub-nanosecond differences in event times are float roundoff, not physics.
_TIME_EPS = 1e-9


class Instrument(str, Enum):
    FRAME_DRUM = "frame_drum"
    TAMBOURINE = "tambourine"


class Tone(str, Enum):
    BASS = "bass"
    SLAP = "slap"
    JINGLE = "jingle"


class Mode(str, Enum):
    PERFORMING = "performing"
    SPINNING = "spinning"
    CIRCLING = "circling"
    STOPPED = "stopped"
    RECENTERING = "recentering"


class Behavior(str, Enum):
    SPIN = "spin"
    CIRCLE = "circle"
    RECENTER = "recenter"
    SWITCH_INSTRUMENT = "switch_instrument"
    STOP = "stop"
    RESTART = "restart"


# Wall indices, counterclockwise from the far wall.
NORTH, EAST, SOUTH, WEST = 0, 1, 2, 3

DEFAULT_WALLS = (
    Instrument.FRAME_DRUM,
    Instrument.TAMBOURINE,
    Instrument.FRAME_DRUM,
    Instrument.TAMBOURINE,
)


@dataclass(frozen=True)
class Arena:
    side: float = 10.0  # inches
    walls: tuple[Instrument, Instrument, Instrument, Instrument] = DEFAULT_WALLS
    position: tuple[float, float] = (0.0, 0.0)  # room placement, UI layout only

    def __post_init__(self) -> None:
        drums = sum(1 for w in self.walls if w is Instrument.FRAME_DRUM)
        if drums != 2:
            raise ValueError("arena needs exactly 2 frame drums and 2 tambourines")
        if self.walls[0] is not self.walls[2] or self.walls[1] is not self.walls[3]:
            raise ValueError("opposite walls must carry identical instruments")


@dataclass(frozen=True)
class SimParams:
    robot_radius: float = 1.45  # 73 mm sphere
    speed: float = 20.0  # inches/second
    heading_sigma_deg: float = 2.0
    restitution: float = 0.4
    base_intensity: float = 0.9
    bass_threshold_fraction: float = 0.3  # of wall half-width
    bass_target_offset: float = 0.0  # inches from wall midpoint
    slap_target_offset: float = 3.2
    circle_radius: float = 2.5


@dataclass(frozen=True)
class SoundEvent:
    time: float
    robot_id: int
    wall: int
    instrument: Instrument
    tone: Tone
    intensity: float
    purposeful: bool
    stroke_index: int  # 1 or 2 (rebound of a double)
    nominal_time: Optional[float] = None
    pattern_id: Optional[str] = None
    event_index: Optional[int] = None
    unintended_double: bool = False


@dataclass(frozen=True)
class SimEvent:
    time: float
    robot_id: int
    kind: str
    detail: dict = field(default_factory=dict)


@dataclass
class _Segment:
    t0: float
    t1: float
    p0: tuple[float, float]
    p1: tuple[float, float]

    def pos_at(self, t: float) -> tuple[float, float]:
        if self.t1 <= self.t0:
            return self.p1
        a = min(max((t - self.t0) / (self.t1 - self.t0), 0.0), 1.0)
        return (
            self.p0[0] + a * (self.p1[0] - self.p0[0]),
            self.p0[1] + a * (self.p1[1] - self.p0[1]),
        )


@dataclass
class RobotState:
    id: int
    x: float
    y: float
    heading: float = 0.0
    speed: float = 0.0
    mode: Mode = Mode.PERFORMING
    primary_wall: int = NORTH
    base_hue: float = 0.0
    hue: float = 0.0
    last_collision_time: float = 0.0
    plans: list[StrokePlan] = field(default_factory=list)
    # Stroke bookkeeping
    segments: list[_Segment] = field(default_factory=list)
    pending_sounds: list[SoundEvent] = field(default_factory=list)
    returning: bool = False
    # Fail-safe / composition bookkeeping
    armed: bool = False  # plans scheduled for the current window
    rest_pending: bool = False
    suppress_strokes: bool = False
    # Behavior bookkeeping
    behavior_until: float = 0.0
    circle_angle: float = 0.0

    @property
    def busy_with_stroke(self) -> bool:
        return bool(self.segments)


def impact_tone(instrument: Instrument, impact_offset: float, arena: Arena | None = None,
                params: SimParams | None = None) -> Tone:
    """Tone produced by a strike at ``impact_offset`` inches from the wall midpoint."""
    side = arena.side if arena else 10.0
    half = side / 2.0
    if abs(impact_offset) > half:
        raise ValueError(f"impact offset {impact_offset} exceeds wall half-width {half}")
    if instrument is Instrument.TAMBOURINE:
        return Tone.JINGLE
    threshold = (params.bass_threshold_fraction if params else 0.3) * half
    return Tone.BASS if abs(impact_offset) <= threshold else Tone.SLAP


def _contact_bounds(arena: Arena, params: SimParams) -> tuple[float, float]:
    return params.robot_radius, arena.side - params.robot_radius


def _wall_target(state: RobotState, arena: Arena, params: SimParams, aim: Aim
                 ) -> tuple[float, float]:
    """Point on the primary wall's contact plane the robot aims for."""
    lo, hi = _contact_bounds(arena, params)
    mid = arena.side / 2.0
    offset = params.bass_target_offset if aim is Aim.CENTER else params.slap_target_offset
    along = min(max(mid + offset, lo), hi)
    w = state.primary_wall
    if w == NORTH:
        return (along, hi)
    if w == SOUTH:
        return (along, lo)
    if w == EAST:
        return (hi, along)
    return (lo, along)


def _ray_exit(x: float, y: float, dx: float, dy: float, lo: float, hi: float
              ) -> tuple[float, int]:
    """Distance to, and index of, the first contact plane crossed by the ray."""
    best = math.inf
    wall = -1
    if dx > 0:
        d = (hi - x) / dx
        if d < best:
            best, wall = d, EAST
    elif dx < 0:
        d = (lo - x) / dx
        if d < best:
            best, wall = d, WEST
    if dy > 0:
        d = (hi - y) / dy
        if d < best:
            best, wall = d, NORTH
    elif dy < 0:
        d = (lo - y) / dy
        if d < best:
            best, wall = d, SOUTH
    if wall < 0:
        raise ValueError("ray has no exit (zero direction)")
    return best, wall


def execute_stroke(
    plan: StrokePlan,
    state: RobotState,
    arena: Arena,
    params: SimParams,
    jitter: JitterModel,
    rng: np.random.Generator,
    departure_time: float,
) -> tuple[list[SoundEvent], RobotState, np.random.Generator]:
    """Resolve one stroke from the robot's current pose.

    Fills the state's motion segments and pending sound list; the returned
    events carry their (possibly future) impact timestamps.
    """
    lo, hi = _contact_bounds(arena, params)
    tx, ty = _wall_target(state, arena, params, plan.aim)
    vx, vy = tx - state.x, ty - state.y
    aimed_dist = math.hypot(vx, vy)
    noise = math.radians(rng.normal(0.0, params.heading_sigma_deg))

    # Timing deviations come from the jitter model alone; heading noise only
    # moves where the strike lands.
    impact_time = plan.scheduled_time
    if aimed_dist < 1e-9:
        # Already at the target contact point; strike in place.
        wall = state.primary_wall
        ix, iy = tx, ty
        heading = state.heading
    else:
        heading = math.atan2(vy, vx) + noise
        dx, dy = math.cos(heading), math.sin(heading)
        dist, wall = _ray_exit(state.x, state.y, dx, dy, lo, hi)
        ix, iy = state.x + dist * dx, state.y + dist * dy

    if wall in (NORTH, SOUTH):
        offset = ix - arena.side / 2.0
    else:
        offset = iy - arena.side / 2.0
    instrument = arena.walls[wall]
    tone = impact_tone(instrument, offset, arena, params)
    purposeful = wall == state.primary_wall
    intensity = params.base_intensity

    unintended = False
    if plan.stroke is StrokeKind.DOUBLE:
        is_double = True
    else:
        unintended = rng.random() < jitter.early_power_cut_prob
        is_double = unintended

    events = [
        SoundEvent(
            time=impact_time,
            robot_id=state.id,
            wall=wall,
            instrument=instrument,
            tone=tone,
            intensity=intensity,
            purposeful=purposeful,
            stroke_index=1,
            nominal_time=plan.nominal_time,
            pattern_id=plan.pattern_id,
            event_index=plan.event_index,
            unintended_double=unintended,
        )
    ]
    state.heading = heading
    state.segments = [_Segment(departure_time, impact_time, (state.x, state.y), (ix, iy))]
    if is_double:
        delay = plan.bounce_fraction * plan.note_duration_s
        rebound_speed = params.restitution * params.speed
        out = rebound_speed * (delay / 2.0)
        if aimed_dist < 1e-9:
            bx, by = ix, iy
        else:
            bx = ix - out * math.cos(heading)
            by = iy - out * math.sin(heading)
        second_time = impact_time + delay
        events.append(
            SoundEvent(
                time=second_time,
                robot_id=state.id,
                wall=wall,
                instrument=instrument,
                tone=tone,
                intensity=plan.rebound_intensity * intensity,
                purposeful=purposeful,
                stroke_index=2,
                nominal_time=plan.nominal_time,
                pattern_id=plan.pattern_id,
                event_index=plan.event_index,
                unintended_double=unintended,
            )
        )
        state.segments.append(
            _Segment(impact_time, impact_time + delay / 2.0, (ix, iy), (bx, by))
        )
        state.segments.append(
            _Segment(impact_time + delay / 2.0, second_time, (bx, by), (ix, iy))
        )
    state.pending_sounds.extend(events)
    state.returning = False
    state.speed = params.speed
    return events, state, rng


def failsafe_check(state: RobotState, now: float, clock: MetronomeClock) -> bool:
    """True when the fail-safe should fire: armed, performing, and silent too long."""
    if state.mode is not Mode.PERFORMING or not state.armed:
        return False
    return now - state.last_collision_time > 4.0 * clock.beat_duration


def turn_around(state: RobotState, now: float) -> SimEvent:
    """Fail-safe action: reverse, abandon the window, ask for a rest window next."""
    state.heading += math.pi
    state.plans = []
    state.segments = []
    state.returning = False
    state.speed = 0.0
    state.rest_pending = True
    state.armed = False
    state.last_collision_time = now
    return SimEvent(time=now, robot_id=state.id, kind="turnaround", detail={})


def apply_motion_behavior(
    state: RobotState,
    behavior: Behavior,
    now: float,
    clock: MetronomeClock,
    arena: Arena,
    params: SimParams,
) -> tuple[bool, Optional[str]]:
    """Apply a motion command; returns (accepted, rejection_reason)."""
    cx = cy = arena.side / 2.0
    if behavior is Behavior.SWITCH_INSTRUMENT:
        state.primary_wall = (state.primary_wall + 1) % 4
        return True, None
    if behavior is Behavior.STOP:
        if state.mode is Mode.STOPPED:
            return False, "already stopped"
        state.mode = Mode.STOPPED
        _abandon_motion(state)
        return True, None
    if behavior is Behavior.RESTART:
        if state.mode is not Mode.STOPPED:
            return False, "restart is only legal while stopped"
        state.mode = Mode.PERFORMING
        state.armed = False
        # Give the robot a full window before the fail-safe can fire.
        state.last_collision_time = _next_boundary_after(clock, now)
        return True, None
    if behavior is Behavior.RECENTER:
        if state.mode is Mode.RECENTERING:
            return False, "already recentering"
        state.mode = Mode.RECENTERING
        _abandon_motion(state)
        state.heading = math.atan2(cy - state.y, cx - state.x)
        state.speed = params.speed
        return True, None
    if behavior in (Behavior.SPIN, Behavior.CIRCLE):
        if state.mode is not Mode.PERFORMING:
            return False, f"{behavior.value} requires performing mode"
        state.behavior_until = _next_boundary_after(clock, now)
        # Abandon this window's strokes but keep plans for the window after
        # the behavior ends.
        keep = [p for p in state.plans if p.scheduled_time >= state.behavior_until - _TIME_EPS]
        _abandon_motion(state)
        state.plans = keep
        if behavior is Behavior.SPIN:
            state.mode = Mode.SPINNING
        else:
            state.mode = Mode.CIRCLING
            state.circle_angle = math.atan2(state.y - cy, state.x - cx)
            if not math.isfinite(state.circle_angle):
                state.circle_angle = 0.0
        return True, None
    return False, f"unknown behavior {behavior}"


def _abandon_motion(state: RobotState) -> None:
    state.plans = []
    state.segments = []
    state.pending_sounds = []
    state.returning = False
    state.armed = False
    state.speed = 0.0


def _next_boundary_after(clock: MetronomeClock, t: float) -> float:
    b = window_boundary(clock, t)
    if b <= t + _TIME_EPS:
        b += clock.window_duration
    return b


def step(
    state: RobotState,
    arena: Arena,
    params: SimParams,
    jitter: JitterModel,
    clock: MetronomeClock,
    t0: float,
    dt: float,
    rng: np.random.Generator,
) -> tuple[list[SoundEvent], list[SimEvent]]:
    """Advance one robot from t0 to t0 + dt."""
    t1 = t0 + dt
    sounds: list[SoundEvent] = []
    sims: list[SimEvent] = []
    cx = cy = arena.side / 2.0
    lo, hi = _contact_bounds(arena, params)

    if state.mode is Mode.SPINNING:
        state.speed = 0.0
        state.heading += (2.0 * math.pi / clock.window_duration) * dt
    elif state.mode is Mode.CIRCLING:
        omega = params.speed / params.circle_radius
        state.circle_angle += omega * dt
        state.x = cx + params.circle_radius * math.cos(state.circle_angle)
        state.y = cy + params.circle_radius * math.sin(state.circle_angle)
        state.heading = state.circle_angle + math.pi / 2.0
        state.speed = params.speed
    elif state.mode is Mode.RECENTERING:
        dist = math.hypot(cx - state.x, cy - state.y)
        travel = params.speed * dt
        if travel >= dist:
            state.x, state.y = cx, cy
            state.speed = 0.0
            state.mode = Mode.STOPPED
        else:
            state.x += travel * (cx - state.x) / dist
            state.y += travel * (cy - state.y) / dist
    elif state.mode is Mode.PERFORMING:
        _advance_performing(state, arena, params, jitter, clock, t0, t1, rng, sims)

    # Emit strikes whose impact time has arrived.
    if state.pending_sounds:
        due = [e for e in state.pending_sounds if e.time <= t1 + _TIME_EPS]
        if due:
            state.pending_sounds = [
                e for e in state.pending_sounds if e.time > t1 + _TIME_EPS
            ]
            for e in due:
                state.last_collision_time = max(state.last_collision_time, e.time)
            sounds.extend(due)

    # Containment: clamp and record a graze for any residual excursion.
    clamped = False
    if state.x < lo or state.x > hi:
        state.x = min(max(state.x, lo), hi)
        clamped = True
    if state.y < lo or state.y > hi:
        state.y = min(max(state.y, lo), hi)
        clamped = True
    if clamped and not state.busy_with_stroke:
        sims.append(SimEvent(time=t1, robot_id=state.id, kind="clamped", detail={}))
        state.last_collision_time = max(state.last_collision_time, t1)

    if failsafe_check(state, t1, clock):
        sims.append(turn_around(state, t1))

    return sounds, sims


def _advance_performing(
    state: RobotState,
    arena: Arena,
    params: SimParams,
    jitter: JitterModel,
    clock: MetronomeClock,
    t0: float,
    t1: float,
    rng: np.random.Generator,
    sims: list[SimEvent],
) -> None:
    cx = cy = arena.side / 2.0
    t = t0
    while t < t1 - _TIME_EPS or (t == t0 and not state.busy_with_stroke):
        if state.busy_with_stroke:
            # Follow the precomputed anchors; shed finished segments.
            while state.segments and state.segments[0].t1 <= t1 + _TIME_EPS:
                seg = state.segments.pop(0)
                state.x, state.y = seg.p1
                t = max(t, seg.t1)
            if state.segments:
                state.x, state.y = state.segments[0].pos_at(t1)
                return
            state.returning = True
            state.heading = math.atan2(cy - state.y, cx - state.x)
            if t >= t1 - _TIME_EPS:
                return
            continue

        # Drop plans that are already unreachable.
        while state.plans and state.plans[0].scheduled_time < t - _TIME_EPS:
            missed = state.plans.pop(0)
            sims.append(
                SimEvent(
                    time=t,
                    robot_id=state.id,
                    kind="stroke_skipped",
                    detail={
                        "pattern": missed.pattern_id,
                        "event_index": missed.event_index,
                    },
                )
            )

        if not state.plans or state.suppress_strokes:
            _coast_toward_center(state, params, t1 - t, cx, cy)
            return

        plan = state.plans[0]
        tx, ty = _wall_target(state, arena, params, plan.aim)
        aimed = math.hypot(tx - state.x, ty - state.y)
        t_dep = plan.scheduled_time - aimed / params.speed
        if t_dep > t1:
            # Not yet time to go; keep drifting back toward the center.
            _coast_toward_center(state, params, min(t_dep, t1) - t, cx, cy)
            return
        # Walk the pre-departure motion up to the departure instant.
        t_dep = max(t_dep, t)
        _coast_toward_center(state, params, t_dep - t, cx, cy)
        state.plans.pop(0)
        execute_stroke(plan, state, arena, params, jitter, rng, t_dep)
        t = t_dep


def _coast_toward_center(
    state: RobotState, params: SimParams, duration: float, cx: float, cy: float
) -> None:
    if duration <= 0:
        return
    if not state.returning:
        state.speed = 0.0
        return
    dist = math.hypot(cx - state.x, cy - state.y)
    travel = params.speed * duration
    if travel >= dist:
        state.x, state.y = cx, cy
        state.returning = False
        state.speed = 0.0
    else:
        state.x += travel * (cx - state.x) / dist
        state.y += travel * (cy - state.y) / dist
        state.speed = params.speed
