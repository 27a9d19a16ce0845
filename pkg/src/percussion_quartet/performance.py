"""Quartet orchestration: clock, step loop, control commands, lights, event log.

The loop is the single time authority and the single writer of the event
log; the whole log is a pure function of (config, timestamped commands).
Pattern selection for a window happens one boundary early (leader first,
then followers in id order) so robots have travel time to land the window's
first stroke exactly on the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from . import arena as arena_mod
from .arena import (
    Arena,
    Behavior,
    Mode,
    RobotState,
    SimParams,
    apply_motion_behavior,
)
from .composer import Role, SelectionContext, select_next
from .eventlog import (
    EventLog,
    FORMAT_VERSION,
    KIND_COMMAND,
    KIND_LIGHT,
    KIND_SIM,
    KIND_SOUND,
)
from .patterns import PatternLibrary, load_default_library, load_library
from .timing import JitterModel, MetronomeClock, schedule_window

_EPS = 1e-9

N_ROBOTS = 4

DEFAULT_BASE_HUES = (0.0, 90.0, 180.0, 270.0)
# Seven selectable ensemble colors, one per control key.
DEFAULT_PALETTE = (0.0, 45.0, 120.0, 180.0, 210.0, 270.0, 315.0)
DEFAULT_ARENA_POSITIONS = ((0.0, 0.0), (14.0, 0.0), (0.0, 14.0), (14.0, 14.0))

# Hue drift: one step per second, a triangle excursion around the base hue.
_HUE_TRIANGLE = (0, 8, 16, 24, 16, 8, 0, -8, -16, -24, -16, -8)
# Per-robot spread applied on top of a palette color so robots stay distinct.
_PALETTE_SPREAD = 12.0


def _drift_hue(base: float, second: int) -> float:
    return (base + _HUE_TRIANGLE[second % len(_HUE_TRIANGLE)]) % 360.0


class CommandKind(str, Enum):
    SET_COLOR = "set_color"
    SPIN = "spin"
    CIRCLE = "circle"
    SWITCH_INSTRUMENT = "switch_instrument"
    RECENTER = "recenter"
    STOP = "stop"
    RESTART = "restart"


@dataclass(frozen=True)
class ControlCommand:
    kind: CommandKind
    palette_index: Optional[int] = None

    def to_payload(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.palette_index is not None:
            out["palette_index"] = self.palette_index
        return out

    @classmethod
    def from_payload(cls, payload: dict) -> "ControlCommand":
        return cls(
            kind=CommandKind(payload["kind"]),
            palette_index=payload.get("palette_index"),
        )


class ConfigError(ValueError):
    """Invalid performance configuration, reported before any simulation."""


@dataclass(frozen=True)
class PerformanceConfig:
    seed: int = 0
    bpm: float = 60.0
    duration: float = 60.0
    dt: float = 0.005
    jitter: JitterModel = JitterModel()
    params: SimParams = SimParams()
    colors: tuple[float, float, float, float] = DEFAULT_BASE_HUES
    palette: tuple[float, ...] = DEFAULT_PALETTE
    arena_positions: tuple[tuple[float, float], ...] = DEFAULT_ARENA_POSITIONS
    leader_id: int = 0
    patterns_path: Optional[str] = None  # None = bundled default library
    command_script: tuple[tuple[float, ControlCommand], ...] = ()
    # Test/demo hooks; kept in the config so logs replay identically.
    pinned_pattern: Optional[str] = None
    suppress_strokes: tuple[int, ...] = ()

    def validate(self) -> None:
        if self.bpm <= 0:
            raise ConfigError("bpm must be positive")
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if not 0 < self.dt <= 0.010 + _EPS:
            raise ConfigError("dt must be in (0, 0.010] seconds")
        if len(self.colors) != N_ROBOTS or len(set(self.colors)) != N_ROBOTS:
            raise ConfigError("need 4 pairwise-distinct base colors")
        if len(self.arena_positions) != N_ROBOTS:
            raise ConfigError("need 4 arena placements")
        if not self.palette:
            raise ConfigError("palette must not be empty")
        if not 0 <= self.leader_id < N_ROBOTS:
            raise ConfigError("leader_id must be a robot id")
        for rid in self.suppress_strokes:
            if not 0 <= rid < N_ROBOTS:
                raise ConfigError("suppress_strokes must name robot ids")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "bpm": self.bpm,
            "duration": self.duration,
            "dt": self.dt,
            "jitter": {
                "per_stroke_sigma": self.jitter.per_stroke_sigma,
                "drift_per_stroke": self.jitter.drift_per_stroke,
                "early_power_cut_prob": self.jitter.early_power_cut_prob,
            },
            "params": {
                "robot_radius": self.params.robot_radius,
                "speed": self.params.speed,
                "heading_sigma_deg": self.params.heading_sigma_deg,
                "restitution": self.params.restitution,
                "base_intensity": self.params.base_intensity,
                "bass_threshold_fraction": self.params.bass_threshold_fraction,
                "bass_target_offset": self.params.bass_target_offset,
                "slap_target_offset": self.params.slap_target_offset,
                "circle_radius": self.params.circle_radius,
            },
            "colors": list(self.colors),
            "palette": list(self.palette),
            "arena_positions": [list(p) for p in self.arena_positions],
            "leader_id": self.leader_id,
            "patterns_path": self.patterns_path,
            "pinned_pattern": self.pinned_pattern,
            "suppress_strokes": list(self.suppress_strokes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PerformanceConfig":
        return cls(
            seed=d["seed"],
            bpm=d["bpm"],
            duration=d["duration"],
            dt=d["dt"],
            jitter=JitterModel(**d["jitter"]),
            params=SimParams(**d["params"]),
            colors=tuple(d["colors"]),
            palette=tuple(d["palette"]),
            arena_positions=tuple(tuple(p) for p in d["arena_positions"]),
            leader_id=d["leader_id"],
            patterns_path=d.get("patterns_path"),
            pinned_pattern=d.get("pinned_pattern"),
            suppress_strokes=tuple(d.get("suppress_strokes", ())),
        )


class Performance:
    """A running (or runnable) quartet performance."""

    def __init__(self, config: PerformanceConfig, library: Optional[PatternLibrary] = None):
        config.validate()
        self.config = config
        if library is not None:
            self.library = library
        elif config.patterns_path:
            self.library = load_library(config.patterns_path)
        else:
            self.library = load_default_library()
        if config.pinned_pattern and config.pinned_pattern not in self.library.by_id:
            raise ConfigError(f"pinned pattern '{config.pinned_pattern}' not in library")

        self.clock = MetronomeClock(bpm=config.bpm)
        self.log = EventLog()
        center = 5.0  # arena side / 2; per-arena coordinates
        self.arenas = [
            Arena(position=tuple(config.arena_positions[i])) for i in range(N_ROBOTS)
        ]
        self.robots = [
            RobotState(
                id=i,
                x=center,
                y=center,
                base_hue=config.colors[i],
                hue=config.colors[i],
                suppress_strokes=i in config.suppress_strokes,
            )
            for i in range(N_ROBOTS)
        ]
        self.rngs = [
            np.random.default_rng(np.random.SeedSequence((config.seed, i)))
            for i in range(N_ROBOTS)
        ]
        self.own_previous: list[Optional[str]] = [None] * N_ROBOTS
        self.command_queue: list[tuple[float, ControlCommand]] = list(
            config.command_script
        )
        self._cmd_cursor = 0
        self._cmd_seq = 0
        self.t = 0.0
        self._step_index = 0
        self._boundary_index = 1  # boundary 0 is handled at setup
        self._last_second = 0
        self.finished = False

        self.log.append(
            KIND_SIM,
            0.0,
            {
                "event": "begin",
                "format_version": FORMAT_VERSION,
                "config": config.to_dict(),
            },
        )
        # Select the first two windows so robots can depart ahead of t=0 and
        # of the first boundary.
        self._select_for_window(0, 0.0)
        self._select_for_window(1, 0.0)
        self._update_arming(window_index=0, boundary_time=0.0)

    # -- selection ---------------------------------------------------------

    def _selection_order(self) -> list[int]:
        others = [i for i in range(N_ROBOTS) if i != self.config.leader_id]
        return [self.config.leader_id] + others

    def _select_for_window(self, window_index: int, log_time: float) -> None:
        window_start = window_index * self.clock.window_duration
        if window_start >= self.config.duration - _EPS:
            return
        leader_choice: Optional[str] = self.own_previous[self.config.leader_id]
        for rid in self._selection_order():
            robot = self.robots[rid]
            if robot.mode is not Mode.PERFORMING:
                continue
            is_leader = rid == self.config.leader_id
            if self.config.pinned_pattern:
                pid = self.config.pinned_pattern
            else:
                ctx = SelectionContext(
                    role=Role.LEADER if is_leader else Role.FOLLOWER,
                    own_previous=self.own_previous[rid],
                    leader_current=None if is_leader else leader_choice,
                    rng=self.rngs[rid],
                )
                pid, _ = select_next(self.library, ctx)
            if is_leader:
                leader_choice = pid
            self.own_previous[rid] = pid
            self.log.append(
                KIND_SIM,
                log_time,
                {
                    "event": "selection",
                    "robot": rid,
                    "pattern": pid,
                    "window": window_index,
                    "role": "leader" if is_leader else "follower",
                },
            )
            plans, _ = schedule_window(
                self.library.by_id[pid],
                window_start,
                self.clock,
                self.config.jitter,
                self.rngs[rid],
                robot_id=rid,
            )
            robot.plans.extend(plans)

    def _update_arming(self, window_index: int, boundary_time: float) -> None:
        window_end = (window_index + 1) * self.clock.window_duration
        for robot in self.robots:
            actionable = any(p.scheduled_time < window_end - _EPS for p in robot.plans)
            if actionable and not robot.armed:
                robot.last_collision_time = max(
                    robot.last_collision_time, boundary_time
                )
            robot.armed = actionable

    def _process_boundary(self, k: int) -> None:
        b = k * self.clock.window_duration
        for robot in self.robots:
            if robot.mode in (Mode.SPINNING, Mode.CIRCLING) and robot.behavior_until <= b + _EPS:
                robot.mode = Mode.PERFORMING
                robot.speed = 0.0
            if robot.rest_pending:
                # The window starting now is the one-window rest that follows
                # a fail-safe turnaround; its plans were already abandoned.
                robot.rest_pending = False
                self.log.append(
                    KIND_SIM,
                    b,
                    {"event": "rest_window", "robot": robot.id, "window": k},
                )
        self._select_for_window(k + 1, b)
        self._update_arming(window_index=k, boundary_time=b)

    # -- commands ----------------------------------------------------------

    def submit_command(self, cmd: ControlCommand, submitted_t: Optional[float] = None) -> None:
        self.command_queue.append((self.t if submitted_t is None else submitted_t, cmd))

    def _apply_command(self, submitted_t: float, cmd: ControlCommand, t_applied: float) -> None:
        seq = self._cmd_seq
        self._cmd_seq += 1
        payload: dict = {
            "command": cmd.to_payload(),
            "submitted_t": submitted_t,
            "cmd_seq": seq,
        }
        if cmd.kind is CommandKind.SET_COLOR:
            idx = cmd.palette_index
            if idx is None or not 0 <= idx < len(self.config.palette):
                payload.update(accepted=False, reason="palette index out of range")
                self.log.append(KIND_COMMAND, t_applied, payload)
                return
            payload["accepted"] = True
            self.log.append(KIND_COMMAND, t_applied, payload)
            base = self.config.palette[idx]
            for robot in self.robots:
                robot.base_hue = (base + robot.id * _PALETTE_SPREAD) % 360.0
                robot.hue = robot.base_hue
                self.log.append(
                    KIND_LIGHT,
                    t_applied,
                    {"robot": robot.id, "hue": robot.hue, "cause": "set_color"},
                )
            return

        behavior = Behavior(cmd.kind.value)
        rejections = {}
        for rid, robot in enumerate(self.robots):
            ok, reason = apply_motion_behavior(
                robot, behavior, t_applied, self.clock, self.arenas[rid], self.config.params
            )
            if not ok:
                rejections[str(rid)] = reason
        payload["accepted"] = len(rejections) < N_ROBOTS
        if rejections:
            payload["rejections"] = rejections
        self.log.append(KIND_COMMAND, t_applied, payload)

    # -- stepping ----------------------------------------------------------

    def step(self) -> None:
        """Advance the simulation by one fixed step."""
        if self.finished:
            raise RuntimeError("performance already finished")
        t0 = self.t
        self._step_index += 1
        t1 = min(self._step_index * self.config.dt, self.config.duration)

        # Commands first: a command stamped on a boundary takes effect before
        # that boundary's selections.
        while self._cmd_cursor < len(self.command_queue):
            submitted_t, cmd = self.command_queue[self._cmd_cursor]
            if submitted_t > t1 + _EPS:
                break
            self._cmd_cursor += 1
            self._apply_command(submitted_t, cmd, t1)

        while True:
            b = self._boundary_index * self.clock.window_duration
            if b > t1 + _EPS or b >= self.config.duration - _EPS:
                break
            self._process_boundary(self._boundary_index)
            self._boundary_index += 1

        # Light drift: one tick per whole simulation second.
        while self._last_second + 1 <= math.floor(t1 + _EPS):
            s = self._last_second + 1
            self._last_second = s
            if s > self.config.duration + _EPS:
                break
            for robot in self.robots:
                robot.hue = _drift_hue(robot.base_hue, s)
                self.log.append(
                    KIND_LIGHT,
                    float(s),
                    {"robot": robot.id, "hue": robot.hue, "cause": "tick"},
                )

        sounds = []
        sims = []
        for rid, robot in enumerate(self.robots):
            s, e = arena_mod.step(
                robot,
                self.arenas[rid],
                self.config.params,
                self.config.jitter,
                self.clock,
                t0,
                t1 - t0,
                self.rngs[rid],
            )
            sounds.extend(s)
            sims.extend(e)
        for ev in sorted(sounds, key=lambda e: (e.time, e.robot_id, e.stroke_index)):
            self.log.append(
                KIND_SOUND,
                ev.time,
                {
                    "robot": ev.robot_id,
                    "wall": ev.wall,
                    "instrument": ev.instrument.value,
                    "tone": ev.tone.value,
                    "intensity": ev.intensity,
                    "purposeful": ev.purposeful,
                    "stroke_index": ev.stroke_index,
                    "nominal_t": ev.nominal_time,
                    "pattern": ev.pattern_id,
                    "event_index": ev.event_index,
                    "unintended_double": ev.unintended_double,
                },
            )
        for ev in sorted(sims, key=lambda e: (e.time, e.robot_id, e.kind)):
            self.log.append(
                KIND_SIM,
                ev.time,
                {"event": ev.kind, "robot": ev.robot_id, **ev.detail},
            )

        self.t = t1
        if t1 >= self.config.duration - _EPS:
            self.log.append(KIND_SIM, self.config.duration, {"event": "end"})
            self.finished = True

    def run_to_end(self) -> EventLog:
        while not self.finished:
            self.step()
        return self.log

    def snapshot(self) -> dict:
        w = self.clock.window_duration
        return {
            "t": self.t,
            "clock_phase": (self.t % w) / w,
            "robots": [
                {
                    "id": r.id,
                    "x": r.x,
                    "y": r.y,
                    "heading": r.heading,
                    "mode": r.mode.value,
                    "hue": r.hue,
                    "primary_wall": r.primary_wall,
                    "arena_position": list(self.config.arena_positions[r.id]),
                }
                for r in self.robots
            ],
        }


def run(
    config: PerformanceConfig,
    commands: Optional[list[tuple[float, ControlCommand]]] = None,
    library: Optional[PatternLibrary] = None,
) -> EventLog:
    """Simulate a full performance offline and return its event log."""
    if commands:
        config = replace(
            config,
            command_script=tuple(config.command_script) + tuple(commands),
        )
    return Performance(config, library=library).run_to_end()


def replay_commands(log: EventLog) -> list[tuple[float, ControlCommand]]:
    """Recover the submitted command stream from a log's command records."""
    out = []
    for record in log.of_kind(KIND_COMMAND):
        payload = record["payload"]
        out.append(
            (payload["submitted_t"], ControlCommand.from_payload(payload["command"]))
        )
    return out


def verify_log(log: EventLog) -> Optional[int]:
    """Re-simulate from the log's embedded config; return the first divergent
    sequence number, or None when the log is faithful."""
    from .eventlog import first_divergence

    begin = log.begin_record()
    config = PerformanceConfig.from_dict(begin["payload"]["config"])
    config = replace(config, command_script=tuple(replay_commands(log)))
    fresh = Performance(config).run_to_end()
    return first_divergence(log, fresh)
