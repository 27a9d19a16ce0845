"""Wire protocol between the live engine (``serve`` mode) and clients.

One JSON object per text frame over a browser-compatible full-duplex
socket. Server messages carry ``kind``, ``seq``, ``t`` plus kind-specific
fields; the only client message is a control command. Decoding tolerates
unknown extra fields for forward compatibility; a malformed frame yields
an Error message and the connection stays open.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Union

from .performance import ControlCommand

PROTOCOL_VERSION = 1

ERR_MALFORMED = "malformed"
ERR_UNSUPPORTED = "unsupported"


class BridgeError(ValueError):
    """Frame that cannot be decoded; ``code`` feeds the Error reply."""

    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class Snapshot:
    seq: int
    t: float
    clock_phase: float
    robots: tuple[dict, ...]
    protocol_version: int = PROTOCOL_VERSION
    kind: str = field(default="snapshot", init=False)


@dataclass(frozen=True)
class SoundMessage:
    seq: int
    t: float
    event: dict
    kind: str = field(default="sound", init=False)


@dataclass(frozen=True)
class LightMessage:
    seq: int
    t: float
    event: dict
    kind: str = field(default="light", init=False)


@dataclass(frozen=True)
class CommandAck:
    seq: int
    t: float
    command_id: Optional[Union[int, str]]
    accepted: bool
    detail: str = ""
    kind: str = field(default="command_ack", init=False)


@dataclass(frozen=True)
class ErrorMessage:
    seq: int
    t: float
    code: str
    detail: str = ""
    kind: str = field(default="error", init=False)


ServerMessage = Union[Snapshot, SoundMessage, LightMessage, CommandAck, ErrorMessage]


@dataclass(frozen=True)
class CommandMessage:
    command: ControlCommand
    client_time: float = 0.0
    command_id: Optional[Union[int, str]] = None
    kind: str = field(default="command", init=False)


def encode_server(msg: ServerMessage) -> str:
    doc: dict = {"kind": msg.kind, "seq": msg.seq, "t": msg.t}
    if isinstance(msg, Snapshot):
        doc["protocol_version"] = msg.protocol_version
        doc["clock_phase"] = msg.clock_phase
        doc["robots"] = list(msg.robots)
    elif isinstance(msg, (SoundMessage, LightMessage)):
        doc["event"] = msg.event
    elif isinstance(msg, CommandAck):
        doc["command_id"] = msg.command_id
        doc["accepted"] = msg.accepted
        doc["detail"] = msg.detail
    elif isinstance(msg, ErrorMessage):
        doc["code"] = msg.code
        doc["detail"] = msg.detail
    else:  # pragma: no cover - exhaustive over ServerMessage
        raise TypeError(f"not a server message: {msg!r}")
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _parse_frame(text: Union[str, bytes]) -> dict:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BridgeError(ERR_MALFORMED, f"frame is not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BridgeError(ERR_MALFORMED, f"frame is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise BridgeError(ERR_MALFORMED, "frame must be a JSON object")
    return doc


def decode_server(text: Union[str, bytes]) -> ServerMessage:
    doc = _parse_frame(text)
    try:
        kind = doc["kind"]
        seq = int(doc["seq"])
        t = float(doc["t"])
        if kind == "snapshot":
            return Snapshot(
                seq=seq,
                t=t,
                clock_phase=float(doc["clock_phase"]),
                robots=tuple(doc["robots"]),
                protocol_version=int(doc["protocol_version"]),
            )
        if kind == "sound":
            return SoundMessage(seq=seq, t=t, event=doc["event"])
        if kind == "light":
            return LightMessage(seq=seq, t=t, event=doc["event"])
        if kind == "command_ack":
            return CommandAck(
                seq=seq,
                t=t,
                command_id=doc.get("command_id"),
                accepted=bool(doc["accepted"]),
                detail=str(doc.get("detail", "")),
            )
        if kind == "error":
            return ErrorMessage(seq=seq, t=t, code=str(doc["code"]), detail=str(doc.get("detail", "")))
    except BridgeError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise BridgeError(ERR_MALFORMED, f"bad server frame: {exc}") from exc
    raise BridgeError(ERR_UNSUPPORTED, f"unknown server message kind {kind!r}")


def encode_client(msg: CommandMessage) -> str:
    doc: dict = {
        "kind": msg.kind,
        "command": msg.command.to_payload(),
        "client_time": msg.client_time,
    }
    if msg.command_id is not None:
        doc["command_id"] = msg.command_id
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def decode_client(text: Union[str, bytes]) -> CommandMessage:
    doc = _parse_frame(text)
    kind = doc.get("kind")
    if kind != "command":
        raise BridgeError(ERR_UNSUPPORTED, f"unknown client message kind {kind!r}")
    try:
        command = ControlCommand.from_payload(doc["command"])
        client_time = float(doc.get("client_time", 0.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise BridgeError(ERR_MALFORMED, f"bad command frame: {exc}") from exc
    command_id = doc.get("command_id")
    if command_id is not None and not isinstance(command_id, (int, str)):
        raise BridgeError(ERR_MALFORMED, "command_id must be an integer or string")
    return CommandMessage(command=command, client_time=client_time, command_id=command_id)
