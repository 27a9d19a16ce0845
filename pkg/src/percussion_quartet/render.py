"""Render an event log to a standard MIDI file or a mixed WAV file.

MIDI output is format 0 at 480 ticks per beat, one percussion track on
channel 10. Audio output mixes bundled one-shot samples (synthesized
deterministically at load, one per tone) at the logged event times.
"""

from __future__ import annotations

import io
import json
import math
import struct
import wave
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .arena import Tone
from .eventlog import EventLog

TICKS_PER_BEAT = 480
SAMPLE_RATE = 48000

PERCUSSION_CHANNEL = 9  # MIDI channel 10
NOTE_GATE_TICKS = 60

# General-percussion keymap entries approximating the three tones:
# low tom for bass, snare for slap, tambourine for jingle.
DEFAULT_KEYS = {Tone.BASS: 41, Tone.SLAP: 38, Tone.JINGLE: 54}
ACCIDENTAL_VELOCITY_SCALE = 0.5


class RenderError(ValueError):
    """Malformed log record or unusable tone map / sample bank."""


@dataclass(frozen=True)
class ToneMap:
    keys: dict[Tone, int] = field(default_factory=lambda: dict(DEFAULT_KEYS))
    accidental_scale: float = ACCIDENTAL_VELOCITY_SCALE

    def __post_init__(self) -> None:
        for tone in Tone:
            key = self.keys.get(tone)
            if key is None or not 0 <= key <= 127:
                raise RenderError(f"tone map needs a valid percussion key for {tone.value}")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ToneMap":
        doc = json.loads(Path(path).read_text())
        keys = {Tone(k): int(v) for k, v in doc["keys"].items()}
        return cls(keys=keys, accidental_scale=float(doc.get("accidental_scale", ACCIDENTAL_VELOCITY_SCALE)))


def _vlq(value: int) -> bytes:
    """MIDI variable-length quantity."""
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def _log_bpm(log: EventLog) -> float:
    return float(log.begin_record()["payload"]["config"]["bpm"])


def to_midi(log: EventLog, tone_map: Optional[ToneMap] = None) -> bytes:
    """Serialize the log's sound events as a format-0 standard MIDI file."""
    tone_map = tone_map or ToneMap()
    bpm = _log_bpm(log)
    beat = 60.0 / bpm

    # (tick, order, message) triples; order keeps offs ahead of ons at a tick.
    messages: list[tuple[int, int, bytes]] = []
    tempo = round(60_000_000 / bpm)
    messages.append((0, 0, b"\xff\x51\x03" + tempo.to_bytes(3, "big")))
    for record in log.sound_events():
        payload = record["payload"]
        try:
            tone = Tone(payload["tone"])
            intensity = float(payload["intensity"])
            purposeful = bool(payload["purposeful"])
        except (KeyError, ValueError, TypeError) as exc:
            raise RenderError(f"malformed sound record seq={record['seq']}: {exc}") from exc
        tick = round(record["t"] / beat * TICKS_PER_BEAT)
        key = tone_map.keys[tone]
        scale = 1.0 if purposeful else tone_map.accidental_scale
        velocity = min(127, max(1, round(intensity * scale * 127)))
        status_on = 0x90 | PERCUSSION_CHANNEL
        status_off = 0x80 | PERCUSSION_CHANNEL
        messages.append((tick, 2, bytes((status_on, key, velocity))))
        messages.append((tick + NOTE_GATE_TICKS, 1, bytes((status_off, key, 0))))

    messages.sort(key=lambda m: (m[0], m[1]))
    track = io.BytesIO()
    prev_tick = 0
    for tick, _, msg in messages:
        track.write(_vlq(tick - prev_tick))
        track.write(msg)
        prev_tick = tick
    track.write(b"\x00\xff\x2f\x00")  # end of track
    body = track.getvalue()

    out = io.BytesIO()
    out.write(b"MThd" + struct.pack(">IHHH", 6, 0, 1, TICKS_PER_BEAT))
    out.write(b"MTrk" + struct.pack(">I", len(body)) + body)
    return out.getvalue()


def _envelope(n: int, attack: float, decay: float) -> np.ndarray:
    t = np.arange(n) / SAMPLE_RATE
    env = np.exp(-t / decay)
    ramp = np.minimum(1.0, t / max(attack, 1e-4))
    return env * ramp


def default_sample_bank(rate: int = SAMPLE_RATE) -> dict[Tone, np.ndarray]:
    """Deterministic synthesized one-shots: one sample per tone."""
    rng = np.random.default_rng(1234)
    t = np.arange(int(0.30 * rate)) / rate

    bass = np.sin(2 * math.pi * (80.0 - 30.0 * t) * t) * _envelope(len(t), 0.002, 0.12)

    noise = rng.standard_normal(int(0.12 * rate))
    body = np.sin(2 * math.pi * 190.0 * np.arange(len(noise)) / rate)
    slap = (0.7 * noise + 0.5 * body) * _envelope(len(noise), 0.001, 0.03)

    jn = rng.standard_normal(int(0.20 * rate))
    shimmer = sum(
        np.sin(2 * math.pi * f * np.arange(len(jn)) / rate) for f in (4200.0, 5600.0, 6900.0)
    )
    jingle = (0.5 * jn + 0.4 * shimmer) * _envelope(len(jn), 0.001, 0.08)

    bank = {}
    for tone, wave_ in ((Tone.BASS, bass), (Tone.SLAP, slap), (Tone.JINGLE, jingle)):
        peak = float(np.max(np.abs(wave_)))
        bank[tone] = (wave_ / peak).astype(np.float64)
    return bank


def to_audio(
    log: EventLog,
    sample_bank: Optional[dict[Tone, np.ndarray]] = None,
    rate: int = SAMPLE_RATE,
    accidental_scale: float = ACCIDENTAL_VELOCITY_SCALE,
) -> bytes:
    """Mix the log's sound events into 16-bit mono WAV bytes."""
    bank = sample_bank if sample_bank is not None else default_sample_bank(rate)
    for tone in Tone:
        if tone not in bank:
            raise RenderError(f"sample bank is missing a sample for tone '{tone.value}'")

    events = log.sound_events()
    end = 0.0
    for record in events:
        tone = Tone(record["payload"]["tone"])
        end = max(end, record["t"] + len(bank[tone]) / rate)
    n = int(math.ceil(end * rate)) + 1
    mix = np.zeros(n, dtype=np.float64)
    for record in events:
        payload = record["payload"]
        tone = Tone(payload["tone"])
        gain = float(payload["intensity"])
        if not payload["purposeful"]:
            gain *= accidental_scale
        start = int(round(record["t"] * rate))
        sample = bank[tone]
        mix[start : start + len(sample)] += gain * sample

    peak = float(np.max(np.abs(mix))) if n else 0.0
    if peak > 0:
        mix *= 0.9 / peak
    pcm = (mix * 32767.0).astype("<i2")

    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(pcm.tobytes())
    return buf.getvalue()
