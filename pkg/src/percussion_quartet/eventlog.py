"""Canonical ordered event log and its newline-delimited serialization.

One JSON object per line with fields ``seq``, ``t``, ``kind``, ``payload``.
The serialized form is the replay and test oracle: the same configuration
and command timings must produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

FORMAT_VERSION = 1

KIND_SOUND = "sound"
KIND_LIGHT = "light"
KIND_COMMAND = "command"
KIND_SIM = "sim"


@dataclass
class EventLog:
    records: list[dict] = field(default_factory=list)
    _next_seq: int = 0

    def append(self, kind: str, t: float, payload: dict) -> dict:
        record = {"seq": self._next_seq, "t": t, "kind": kind, "payload": payload}
        self._next_seq += 1
        self.records.append(record)
        return record

    def __iter__(self) -> Iterator[dict]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def of_kind(self, kind: str) -> list[dict]:
        return [r for r in self.records if r["kind"] == kind]

    def sound_events(self) -> list[dict]:
        return self.of_kind(KIND_SOUND)

    def to_ndjson(self) -> str:
        return "".join(
            json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n"
            for r in self.records
        )

    @classmethod
    def from_ndjson(cls, text: str) -> "EventLog":
        log = cls()
        for i, line in enumerate(text.splitlines()):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"malformed log line {i}: {exc}") from exc
            for key in ("seq", "t", "kind", "payload"):
                if key not in record:
                    raise ValueError(f"log record {i} is missing '{key}'")
            log.records.append(record)
        if log.records:
            log._next_seq = log.records[-1]["seq"] + 1
        return log

    def begin_record(self) -> dict:
        for r in self.records:
            if r["kind"] == KIND_SIM and r["payload"].get("event") == "begin":
                return r
        raise ValueError("log has no begin record")


def first_divergence(a: EventLog, b: EventLog) -> int | None:
    """Sequence number of the first record where the two logs differ, if any."""
    for ra, rb in zip(a.records, b.records):
        if ra != rb:
            return ra["seq"]
    if len(a.records) != len(b.records):
        shorter = a if len(a.records) < len(b.records) else b
        longer = b if shorter is a else a
        return longer.records[len(shorter.records)]["seq"]
    return None
