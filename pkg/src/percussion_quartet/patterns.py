"""Rhythm pattern data model, category taxonomy, and the pattern-library file format.

A pattern library is a YAML document with three top-level fields:
``note_values`` (name -> duration in beats), ``transitions`` (category ->
list of categories a performer may move to next), and ``patterns`` (the
rhythms themselves).  See docs/pattern-format.md and the bundled
``data/default_library.yaml`` for the full format.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Union

import jsonschema
import yaml

WINDOW_BEATS = 4.0

# Tolerance for float comparisons on beat arithmetic. Durations are small
# multiples of 0.25 so anything tighter than 1e-9 is noise, not music.
_BEAT_EPS = 1e-9


class NoteKind(str, Enum):
    LONG = "long"
    SHORT = "short"
    SHORTEST = "shortest"


class StrokeKind(str, Enum):
    SINGLE = "single"
    DOUBLE = "double"


class Evenness(str, Enum):
    EVEN = "even"
    UNEVEN = "uneven"


class Speed(str, Enum):
    QUICK = "quick"
    SLOW = "slow"


Category = tuple[Evenness, Speed]

ALL_CATEGORIES: tuple[Category, ...] = (
    (Evenness.EVEN, Speed.QUICK),
    (Evenness.EVEN, Speed.SLOW),
    (Evenness.UNEVEN, Speed.QUICK),
    (Evenness.UNEVEN, Speed.SLOW),
)

DEFAULT_NOTE_VALUES: dict[NoteKind, float] = {
    NoteKind.LONG: 1.0,
    NoteKind.SHORT: 0.5,
    NoteKind.SHORTEST: 0.25,
}

# Double strokes: where in the host note the rebound lands, and how much
# softer it is than the first hit.
DEFAULT_BOUNCE_FRACTION = 0.5
DEFAULT_REBOUND_INTENSITY = 0.6


class LibraryError(ValueError):
    """Raised when a pattern file fails parsing or validation."""


@dataclass(frozen=True)
class PatternEvent:
    """One slot in a pattern: a stroke or a rest, with a resolved duration."""

    onset_beats: float
    note: NoteKind
    duration_beats: float
    stroke: StrokeKind = StrokeKind.SINGLE
    rest: bool = False
    bounce_fraction: float = DEFAULT_BOUNCE_FRACTION
    rebound_intensity: float = DEFAULT_REBOUND_INTENSITY


@dataclass(frozen=True)
class Pattern:
    id: str
    events: tuple[PatternEvent, ...]
    evenness: Evenness
    speed: Speed
    origin: str = "authored"

    @property
    def category(self) -> Category:
        return (self.evenness, self.speed)

    @property
    def duration_beats(self) -> float:
        last = self.events[-1]
        return last.onset_beats + last.duration_beats


@dataclass(frozen=True)
class CompatibilityMatrix:
    """Which pattern categories may follow which when a performer picks its next pattern."""

    entries: dict[Category, frozenset[Category]]

    def reachable(self, category: Category) -> frozenset[Category]:
        return self.entries.get(category, frozenset())


@dataclass(frozen=True)
class PatternLibrary:
    patterns: tuple[Pattern, ...]
    transitions: CompatibilityMatrix
    note_values: dict[NoteKind, float]
    by_id: dict[str, Pattern] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "by_id", {p.id: p for p in self.patterns})

    def categories(self) -> set[Category]:
        return {p.category for p in self.patterns}


def derive_evenness(events: Iterable[PatternEvent]) -> Evenness:
    values = {e.duration_beats for e in events}
    return Evenness.EVEN if len(values) == 1 else Evenness.UNEVEN


def derive_speed(events: Iterable[PatternEvent]) -> Speed:
    events = list(events)
    quick = sum(1 for e in events if e.duration_beats <= 0.5 + _BEAT_EPS)
    slow = sum(1 for e in events if e.duration_beats >= 1.0 - _BEAT_EPS)
    total = len(events)
    if quick > total / 2:
        return Speed.QUICK
    if slow > total / 2:
        return Speed.SLOW
    raise LibraryError("speed is ambiguous: no majority of quick or slow note values")


def pattern_duration_seconds(pattern: Pattern, bpm: float) -> float:
    """Seconds spanned by one full selection window of this pattern.

    The pattern repeats to fill the window, so the answer depends only on
    the tempo: WINDOW_BEATS beats at ``bpm``.
    """
    if bpm <= 0:
        raise ValueError(f"bpm must be positive, got {bpm}")
    return WINDOW_BEATS * (60.0 / bpm)


def _schema() -> dict:
    text = (
        importlib.resources.files("percussion_quartet")
        .joinpath("data/pattern_schema.json")
        .read_text()
    )
    return json.loads(text)


def _category_from_str(s: str) -> Category:
    even_s, speed_s = s.split("/")
    return (Evenness(even_s), Speed(speed_s))


def _category_to_str(c: Category) -> str:
    return f"{c[0].value}/{c[1].value}"


def _parse_pattern(raw: dict, note_values: dict[NoteKind, float]) -> Pattern:
    pid = raw["id"]
    events = []
    onset = 0.0
    for i, ev in enumerate(raw["events"]):
        note = NoteKind(ev["note"])
        duration = note_values[note]
        declared_onset = ev.get("onset")
        if declared_onset is not None and abs(declared_onset - onset) > _BEAT_EPS:
            raise LibraryError(
                f"pattern '{pid}' event {i}: onset {declared_onset} leaves a gap "
                f"(expected {onset})"
            )
        stroke = StrokeKind(ev.get("stroke", "single"))
        events.append(
            PatternEvent(
                onset_beats=onset,
                note=note,
                duration_beats=duration,
                stroke=stroke,
                rest=bool(ev.get("rest", False)),
                bounce_fraction=float(ev.get("bounce_fraction", DEFAULT_BOUNCE_FRACTION)),
                rebound_intensity=float(
                    ev.get("rebound_intensity", DEFAULT_REBOUND_INTENSITY)
                ),
            )
        )
        onset += duration
    evenness = (
        Evenness(raw["evenness"]) if "evenness" in raw else derive_evenness(events)
    )
    if "speed" in raw:
        speed = Speed(raw["speed"])
    else:
        try:
            speed = derive_speed(events)
        except LibraryError as exc:
            raise LibraryError(f"pattern '{pid}': {exc}") from exc
    return Pattern(
        id=pid,
        events=tuple(events),
        evenness=evenness,
        speed=speed,
        origin=raw.get("origin", "authored"),
    )


def _validate_pattern(pattern: Pattern) -> None:
    pid = pattern.id
    if not pattern.events:
        raise LibraryError(f"pattern '{pid}' has no events")
    for ev in pattern.events:
        if ev.duration_beats <= 0:
            raise LibraryError(f"pattern '{pid}': non-positive note duration")
        if ev.onset_beats < 0:
            raise LibraryError(f"pattern '{pid}': negative onset")
        if ev.stroke is StrokeKind.DOUBLE:
            if not 0.0 < ev.bounce_fraction < 1.0:
                raise LibraryError(f"pattern '{pid}': bounce_fraction outside (0, 1)")
            if not 0.0 < ev.rebound_intensity < 1.0:
                raise LibraryError(f"pattern '{pid}': rebound_intensity outside (0, 1)")
    total = pattern.duration_beats
    if total - WINDOW_BEATS > _BEAT_EPS:
        raise LibraryError(
            f"pattern '{pid}' does not tile 4-beat window: spans {total} beats"
        )
    ratio = WINDOW_BEATS / total
    if abs(ratio - round(ratio)) > _BEAT_EPS:
        raise LibraryError(
            f"pattern '{pid}' does not tile 4-beat window: spans {total} beats"
        )
    derived_even = derive_evenness(pattern.events)
    if derived_even is not pattern.evenness:
        raise LibraryError(
            f"pattern '{pid}' declared {pattern.evenness.value} but note values derive "
            f"{derived_even.value}"
        )
    derived_speed = derive_speed(pattern.events)
    if derived_speed is not pattern.speed:
        raise LibraryError(
            f"pattern '{pid}' declared {pattern.speed.value} but note values derive "
            f"{derived_speed.value}"
        )


def _validate_transitions(
    matrix: CompatibilityMatrix, present: set[Category]
) -> None:
    for cat in present:
        if not matrix.reachable(cat):
            raise LibraryError(
                f"category {_category_to_str(cat)} has no outgoing transitions"
            )
    for cat, nexts in matrix.entries.items():
        if not nexts:
            raise LibraryError(
                f"category {_category_to_str(cat)} has no outgoing transitions"
            )
    # No dead ends: from any populated category the composition must be able
    # to reach every populated category eventually.
    for start in present:
        seen = {start}
        frontier = [start]
        while frontier:
            nxt = frontier.pop()
            for cat in matrix.reachable(nxt):
                if cat not in seen:
                    seen.add(cat)
                    frontier.append(cat)
        missing = present - seen
        if missing:
            raise LibraryError(
                f"dead-end category: {_category_to_str(start)} cannot reach "
                f"{_category_to_str(sorted(missing)[0])}"
            )


def load_library(source: Union[str, Path, IO[str]]) -> PatternLibrary:
    """Parse and validate a pattern-library file.

    Raises LibraryError naming the first violated invariant.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise LibraryError(f"malformed pattern file: {exc}") from exc
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        raise LibraryError(f"pattern file schema violation: {exc.message}") from exc

    note_values = {NoteKind(k): float(v) for k, v in doc["note_values"].items()}
    for kind in NoteKind:
        if kind not in note_values:
            raise LibraryError(f"note_values missing '{kind.value}'")
        if note_values[kind] <= 0:
            raise LibraryError(f"note value '{kind.value}' must be positive")

    patterns = []
    seen_ids: set[str] = set()
    for raw in doc["patterns"]:
        pattern = _parse_pattern(raw, note_values)
        if pattern.id in seen_ids:
            raise LibraryError(f"duplicate pattern id '{pattern.id}'")
        seen_ids.add(pattern.id)
        _validate_pattern(pattern)
        patterns.append(pattern)
    if not patterns:
        raise LibraryError("library contains no patterns")

    entries = {
        _category_from_str(src): frozenset(_category_from_str(dst) for dst in dsts)
        for src, dsts in doc["transitions"].items()
    }
    matrix = CompatibilityMatrix(entries=entries)
    present = {p.category for p in patterns}
    _validate_transitions(matrix, present)

    return PatternLibrary(
        patterns=tuple(patterns), transitions=matrix, note_values=note_values
    )


def dump_library(lib: PatternLibrary) -> str:
    """Serialize a library back to the pattern-file format (round-trip safe)."""
    doc = {
        "note_values": {k.value: v for k, v in lib.note_values.items()},
        "transitions": {
            _category_to_str(src): sorted(_category_to_str(d) for d in dsts)
            for src, dsts in sorted(lib.transitions.entries.items())
        },
        "patterns": [
            {
                "id": p.id,
                "evenness": p.evenness.value,
                "speed": p.speed.value,
                "origin": p.origin,
                "events": [
                    _dump_event(e) for e in p.events
                ],
            }
            for p in lib.patterns
        ],
    }
    return yaml.safe_dump(doc, sort_keys=False)


def _dump_event(e: PatternEvent) -> dict:
    out: dict = {"onset": e.onset_beats, "note": e.note.value}
    if e.stroke is not StrokeKind.SINGLE:
        out["stroke"] = e.stroke.value
        if e.bounce_fraction != DEFAULT_BOUNCE_FRACTION:
            out["bounce_fraction"] = e.bounce_fraction
        if e.rebound_intensity != DEFAULT_REBOUND_INTENSITY:
            out["rebound_intensity"] = e.rebound_intensity
    if e.rest:
        out["rest"] = True
    return out


def default_library_path() -> Path:
    return Path(
        str(
            importlib.resources.files("percussion_quartet").joinpath(
                "data/default_library.yaml"
            )
        )
    )


def load_default_library() -> PatternLibrary:
    return load_library(default_library_path())
