"""Host side of the shared-folder protocol.

The guest and the bridge meet in one directory: the guest drops a single
Mac OS Roman line into the input file, the bridge consumes it, asks the
model for a reply, frames it, and publishes the framed lines to the output
file (CR-terminated, written via temp-file-and-rename so the guest never
sees a half-written reply).

Turn detection is deliberately stateless: a new turn is a non-empty input
file whose bytes held still across consecutive polls (shared folders sync
lazily, so a single read can catch a file mid-flight), and consuming a turn
means truncating the input file to zero. An empty input file is therefore
the unambiguous "ready for the next message" signal on both sides.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from . import client
from .chunker import ChunkPolicy, FramedReply, chunk_reply
from .codec import DEFAULT_POLICY, EncodePolicy, decode_bytes, encode_text
from .history import ChatHistory

__all__ = [
    "PollPolicy",
    "SharePaths",
    "TranscriptWriter",
    "TurnRecord",
    "await_input",
    "publish_reply",
    "run_loop",
    "run_turn",
]

log = logging.getLogger(__name__)

MAX_INPUT_BYTES = 4096
DEFAULT_FAILURE_LINE = "Robot brain freeze..."

COMPLETED = "completed"
GENERATION_FAILED = "generation_failed"


@dataclass(frozen=True)
class SharePaths:
    dir: Path
    input_name: str = "input.txt"
    output_name: str = "output.txt"

    def __post_init__(self):
        if self.input_name == self.output_name:
            raise ValueError("input and output file names must differ")

    @property
    def input_path(self) -> Path:
        return self.dir / self.input_name

    @property
    def output_path(self) -> Path:
        return self.dir / self.output_name


@dataclass(frozen=True)
class PollPolicy:
    interval: float = 0.25
    stability_reads: int = 2

    def __post_init__(self):
        if self.interval <= 0:
            raise ValueError("poll interval must be positive")
        if self.stability_reads < 1:
            raise ValueError("stability_reads must be >= 1")


@dataclass(frozen=True)
class TurnRecord:
    turn_id: int
    user_text: str
    reply_lines: FramedReply
    started_at: float
    finished_at: float
    outcome: str
    failure_reason: str | None = None

    def to_json_line(self) -> str:
        doc = {
            "turn_id": self.turn_id,
            "user_text": self.user_text,
            "user_hex": encode_text(self.user_text).hex(),
            "lines": self.reply_lines.texts(),
            "lines_hex": [line.bytes.hex() for line in self.reply_lines.lines],
            "outcome": self.outcome,
            "failure_reason": self.failure_reason,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }
        return json.dumps(doc, ensure_ascii=True, sort_keys=False)


class TranscriptWriter:
    """Append-only JSON Lines sink, flushed after every record."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, record: TurnRecord) -> None:
        self._fh.write(record.to_json_line() + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "TranscriptWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except FileNotFoundError:
        return b""


def await_input(
    paths: SharePaths,
    poll: PollPolicy,
    stop: threading.Event | None = None,
) -> str | None:
    """Block until the guest's next message arrives, then consume it.

    A message counts as arrived once the input file is non-empty and its
    raw bytes were identical across ``poll.stability_reads`` consecutive
    polls. Consuming truncates the file to zero length. Returns the first
    line, decoded, with its trailing separator stripped; returns None only
    if ``stop`` was set while waiting.
    """
    prev: bytes | None = None
    stable = 0
    while True:
        if stop is not None and stop.is_set():
            return None
        data = _read_bytes(paths.input_path)
        if data:
            stable = stable + 1 if data == prev else 1
            prev = data
            if stable >= poll.stability_reads:
                break
        else:
            prev = None
            stable = 0
        time.sleep(poll.interval)

    with open(paths.input_path, "wb"):
        pass  # consume: the empty file signals "ready for next input"

    if len(data) > MAX_INPUT_BYTES:
        log.warning(
            "input of %d bytes exceeds %d; truncating", len(data), MAX_INPUT_BYTES
        )
        data = data[:MAX_INPUT_BYTES]

    text = decode_bytes(data)
    if text.endswith("\r\n"):
        text = text[:-2]
    elif text.endswith(("\r", "\n")):
        text = text[:-1]
    return text.replace("\r\n", "\r").replace("\n", "\r").split("\r", 1)[0]


def publish_reply(paths: SharePaths, reply: FramedReply) -> None:
    """Write the framed lines, each CR-terminated, atomically."""
    payload = b"".join(line.bytes + b"\r" for line in reply.lines)
    fd, tmp_name = tempfile.mkstemp(dir=paths.dir, prefix=".reply-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_name, paths.output_path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def run_turn(
    paths: SharePaths,
    poll: PollPolicy,
    history: ChatHistory,
    gen_cfg: client.GenerationConfig,
    chunk_policy: ChunkPolicy,
    *,
    turn_id: int = 1,
    encode_policy: EncodePolicy = DEFAULT_POLICY,
    failure_line: str = DEFAULT_FAILURE_LINE,
    stop: threading.Event | None = None,
) -> tuple[TurnRecord | None, ChatHistory]:
    """Run one full turn: wait, generate, frame, publish.

    Returns the turn's record plus the updated history. A failed generation
    publishes ``failure_line`` instead and leaves the history exactly as it
    was (the open turn is rolled back). IO errors propagate to the loop.
    """
    user_text = await_input(paths, poll, stop=stop)
    if user_text is None:
        return None, history
    started = time.time()

    opened = history.begin_turn(user_text)
    try:
        result = client.generate(opened, gen_cfg)
    except (client.TransportError, client.ServerError, client.MalformedResponse) as exc:
        log.warning("turn %d: generation failed: %s", turn_id, exc)
        reply = chunk_reply(failure_line, chunk_policy, encode_policy)
        publish_reply(paths, reply)
        record = TurnRecord(
            turn_id=turn_id,
            user_text=user_text,
            reply_lines=reply,
            started_at=started,
            finished_at=time.time(),
            outcome=GENERATION_FAILED,
            failure_reason=f"{type(exc).__name__}: {exc}",
        )
        return record, history

    completed = opened.complete_turn(result.text)
    reply = chunk_reply(result.text, chunk_policy, encode_policy)
    publish_reply(paths, reply)
    record = TurnRecord(
        turn_id=turn_id,
        user_text=user_text,
        reply_lines=reply,
        started_at=started,
        finished_at=time.time(),
        outcome=COMPLETED,
    )
    return record, completed


def run_loop(
    paths: SharePaths,
    poll: PollPolicy,
    history: ChatHistory,
    gen_cfg: client.GenerationConfig,
    chunk_policy: ChunkPolicy,
    transcript: TranscriptWriter | None = None,
    *,
    encode_policy: EncodePolicy = DEFAULT_POLICY,
    failure_line: str = DEFAULT_FAILURE_LINE,
    stop: threading.Event | None = None,
    max_turns: int | None = None,
) -> ChatHistory:
    """Serve turns until ``stop`` is set (or ``max_turns`` have completed).

    Every finished turn is appended to the transcript before the next wait
    begins, so a shutdown between turns loses nothing.
    """
    turn_id = 0
    while max_turns is None or turn_id < max_turns:
        if stop is not None and stop.is_set():
            break
        record, history = run_turn(
            paths,
            poll,
            history,
            gen_cfg,
            chunk_policy,
            turn_id=turn_id + 1,
            encode_policy=encode_policy,
            failure_line=failure_line,
            stop=stop,
        )
        if record is None:
            break
        turn_id += 1
        log.info("turn %d %s: %r -> %d line(s)", record.turn_id, record.outcome,
                 record.user_text, len(record.reply_lines.lines))
        if transcript is not None:
            transcript.append(record)
    return history
