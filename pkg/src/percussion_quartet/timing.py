"""Metronome clock, per-window stroke scheduling, and the timing jitter model.

Jitter is drawn per stroke from a zero-mean truncated normal and accumulated
across the window, so late strokes wander further from the grid than early
ones; the accumulator resets at every window boundary, which is what makes
the ensemble drift apart and snap back together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .patterns import Pattern, StrokeKind, WINDOW_BEATS


@dataclass(frozen=True)
class MetronomeClock:
    bpm: float = 60.0
    epoch: float = 0.0
    window_beats: float = WINDOW_BEATS

    @property
    def beat_duration(self) -> float:
        return 60.0 / self.bpm

    @property
    def window_duration(self) -> float:
        return self.window_beats * self.beat_duration


@dataclass(frozen=True)
class JitterModel:
    per_stroke_sigma: float = 0.05  # seconds
    drift_per_stroke: float = 0.0  # seconds
    early_power_cut_prob: float = 0.05

    def __post_init__(self) -> None:
        if self.per_stroke_sigma < 0:
            raise ValueError("per_stroke_sigma must be >= 0")
        if not 0.0 <= self.early_power_cut_prob <= 1.0:
            raise ValueError("early_power_cut_prob must be in [0, 1]")


class Aim(str, Enum):
    """Where on the primary instrument a stroke is aimed."""

    CENTER = "center"  # bass register on a frame drum
    EDGE = "edge"  # slap register


@dataclass(frozen=True)
class StrokePlan:
    robot_id: int
    scheduled_time: float
    nominal_time: float
    stroke: StrokeKind
    pattern_id: str
    event_index: int
    note_duration_s: float
    aim: Aim = Aim.CENTER
    bounce_fraction: float = 0.5
    rebound_intensity: float = 0.6


def window_boundary(clock: MetronomeClock, t: float) -> float:
    """Smallest window boundary >= t."""
    if t < clock.epoch:
        raise ValueError(f"t={t} precedes clock epoch {clock.epoch}")
    k = math.ceil((t - clock.epoch) / clock.window_duration - 1e-12)
    return clock.epoch + k * clock.window_duration


def _truncated_normal(rng: np.random.Generator, sigma: float) -> float:
    # +/- 3 sigma truncation keeps strokes ordered within a window.
    if sigma == 0.0:
        rng.normal()  # keep the stream aligned with the jittered case
        return 0.0
    while True:
        x = rng.normal(0.0, sigma)
        if abs(x) <= 3.0 * sigma:
            return x


def schedule_window(
    pattern: Pattern,
    window_start: float,
    clock: MetronomeClock,
    jitter: JitterModel,
    rng: np.random.Generator,
    robot_id: int = 0,
) -> tuple[list[StrokePlan], np.random.Generator]:
    """Stroke plans for one window starting at ``window_start``.

    The pattern repeats as needed to tile the window; rests consume time but
    yield no plans. Alternates center/edge aim across the window's strokes.
    """
    beat = clock.beat_duration
    repeats = int(round(clock.window_beats / pattern.duration_beats))
    plans: list[StrokePlan] = []
    offset = 0.0
    stroke_ordinal = 0
    for rep in range(repeats):
        rep_start = window_start + rep * pattern.duration_beats * beat
        for i, ev in enumerate(pattern.events):
            if ev.rest:
                continue
            nominal = rep_start + ev.onset_beats * beat
            offset += _truncated_normal(rng, jitter.per_stroke_sigma)
            offset += jitter.drift_per_stroke
            aim = Aim.CENTER if stroke_ordinal % 2 == 0 else Aim.EDGE
            plans.append(
                StrokePlan(
                    robot_id=robot_id,
                    scheduled_time=nominal + offset,
                    nominal_time=nominal,
                    stroke=ev.stroke,
                    pattern_id=pattern.id,
                    event_index=rep * len(pattern.events) + i,
                    note_duration_s=ev.duration_beats * beat,
                    aim=aim,
                    bounce_fraction=ev.bounce_fraction,
                    rebound_intensity=ev.rebound_intensity,
                )
            )
            stroke_ordinal += 1
    return plans, rng
