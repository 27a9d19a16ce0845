"""Command-line entry point: run/replay performances, render outputs,
validate pattern files, and serve the live-control bridge.

Exit codes:
  0  success
  2  usage error (unknown flag, missing argument)
  3  unreadable or unparsable input file
  4  validation failure (pattern library or configuration)
  5  port already in use
  6  replay verification found a divergence
"""

from __future__ import annotations

import errno
import json
import sys
from pathlib import Path
from typing import Optional

import click

from .eventlog import EventLog
from .patterns import LibraryError, load_default_library, load_library
from .performance import (
    ConfigError,
    ControlCommand,
    PerformanceConfig,
    run as run_performance,
    verify_log,
)
from .render import to_audio, to_midi
from .timing import JitterModel

EXIT_INPUT = 3
EXIT_VALIDATION = 4
EXIT_PORT = 5
EXIT_DIVERGENCE = 6

PATTERNS_ENV = "QUARTET_PATTERNS"


def _load_library_option(path: Optional[str]):
    """Library from --patterns, else $QUARTET_PATTERNS, else the bundled set."""
    try:
        if path is not None:
            return load_library(path), str(path)
        return load_default_library(), None
    except OSError as exc:
        click.echo(f"error: cannot read pattern file: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except LibraryError as exc:
        click.echo(f"error: invalid pattern file: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)


def _read_log(path: str) -> EventLog:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        click.echo(f"error: cannot read log: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        return EventLog.from_ndjson(text)
    except ValueError as exc:
        click.echo(f"error: malformed log: {exc}", err=True)
        sys.exit(EXIT_INPUT)


def _read_script(path: str) -> list[tuple[float, ControlCommand]]:
    """Command script: NDJSON, either log command records or
    ``{"t": <seconds>, "command": {...}}`` lines."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        click.echo(f"error: cannot read script: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    out = []
    for i, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            if "payload" in doc:  # a command record sliced from a log
                payload = doc["payload"]
                t = float(payload.get("submitted_t", doc["t"]))
                cmd = ControlCommand.from_payload(payload["command"])
            else:
                t = float(doc["t"])
                cmd = ControlCommand.from_payload(doc["command"])
        except (ValueError, KeyError, TypeError) as exc:
            click.echo(f"error: bad script line {i}: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        out.append((t, cmd))
    return out


def _write_outputs(log: EventLog, out_log, out_midi, out_wav) -> None:
    if out_log:
        Path(out_log).write_text(log.to_ndjson())
    if out_midi:
        Path(out_midi).write_bytes(to_midi(log))
    if out_wav:
        Path(out_wav).write_bytes(to_audio(log))


patterns_option = click.option(
    "--patterns",
    type=click.Path(),
    default=None,
    envvar=PATTERNS_ENV,
    help=f"Pattern library YAML (default: ${PATTERNS_ENV} or the bundled set).",
)


@click.group()
@click.version_option(package_name="percussion-quartet")
def main() -> None:
    """Simulate, replay, render, and live-serve a four-robot percussion quartet."""


@main.command("run")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--duration", type=float, default=60.0, show_default=True, help="Seconds.")
@click.option("--bpm", type=float, default=60.0, show_default=True)
@click.option("--jitter-sigma", type=float, default=0.05, show_default=True, help="Per-stroke timing sigma, seconds.")
@click.option("--script", "script_path", type=click.Path(), default=None, help="NDJSON command script.")
@click.option("--out-log", type=click.Path(), default=None)
@click.option("--out-midi", type=click.Path(), default=None)
@click.option("--out-wav", type=click.Path(), default=None)
@patterns_option
def run_cmd(seed, duration, bpm, jitter_sigma, script_path, out_log, out_midi, out_wav, patterns):
    """Simulate a performance offline and write the requested artifacts."""
    library, patterns_path = _load_library_option(patterns)
    commands = _read_script(script_path) if script_path else []
    try:
        config = PerformanceConfig(
            seed=seed,
            bpm=bpm,
            duration=duration,
            jitter=JitterModel(per_stroke_sigma=jitter_sigma),
            patterns_path=patterns_path,
        )
        log = run_performance(config, commands=commands, library=library)
    except ConfigError as exc:
        click.echo(f"error: invalid configuration: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    _write_outputs(log, out_log, out_midi, out_wav)
    sounds = len(log.sound_events())
    click.echo(f"simulated {duration:g}s: {len(log)} records, {sounds} sound events")


@main.command("replay")
@click.argument("log_path", type=click.Path())
@click.option("--verify", is_flag=True, help="Re-simulate and compare against the log.")
@click.option("--out-midi", type=click.Path(), default=None)
@click.option("--out-wav", type=click.Path(), default=None)
def replay_cmd(log_path, verify, out_midi, out_wav):
    """Re-render artifacts from an existing log; optionally verify it."""
    log = _read_log(log_path)
    if verify:
        try:
            divergent = verify_log(log)
        except (KeyError, ValueError, ConfigError) as exc:
            click.echo(f"error: log cannot be re-simulated: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        if divergent is not None:
            click.echo(f"verify FAILED: first divergent record seq={divergent}", err=True)
            sys.exit(EXIT_DIVERGENCE)
        click.echo("verify OK: log matches re-simulation")
    _write_outputs(log, None, out_midi, out_wav)


@main.command("validate")
@click.argument("patterns_path", type=click.Path())
def validate_cmd(patterns_path):
    """Lint a pattern library file."""
    try:
        library = load_library(patterns_path)
    except OSError as exc:
        click.echo(f"error: cannot read pattern file: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    except LibraryError as exc:
        click.echo(f"invalid: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo(
        f"ok: {len(library.patterns)} patterns, matrix covers {len(library.transitions.entries)} categories"
    )


@main.command("serve")
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--duration", type=float, default=3600.0, show_default=True, help="Seconds before the performance ends.")
@click.option("--jitter-sigma", type=float, default=0.05, show_default=True)
@click.option("--static-dir", type=click.Path(), default=None, help="Directory of browser-client assets to serve.")
@click.option("--time-scale", type=float, default=1.0, show_default=True, help="Wall-clock speed multiplier.")
@patterns_option
def serve_cmd(port, host, seed, duration, jitter_sigma, static_dir, time_scale, patterns):
    """Run live mode: simulation paced to the wall clock plus the UI bridge."""
    from .server import serve_forever  # deferred: pulls in asyncio/websockets

    library, patterns_path = _load_library_option(patterns)
    if static_dir is None:
        bundled = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
        static_dir = bundled if bundled.is_dir() else None
    try:
        config = PerformanceConfig(
            seed=seed,
            duration=duration,
            jitter=JitterModel(per_stroke_sigma=jitter_sigma),
            patterns_path=patterns_path,
        )
    except ConfigError as exc:
        click.echo(f"error: invalid configuration: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo(f"serving on ws://{host}:{port}{'' if static_dir is None else ' (static: ' + str(static_dir) + ')'}")
    try:
        serve_forever(
            config,
            library=library,
            static_dir=static_dir,
            host=host,
            port=port,
            time_scale=time_scale,
        )
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            click.echo(f"error: port {port} is already in use", err=True)
            sys.exit(EXIT_PORT)
        raise
    except KeyboardInterrupt:
        click.echo("stopped")


if __name__ == "__main__":
    main()
