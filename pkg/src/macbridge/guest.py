"""Guest simulator: the emulator-side console program, minus the emulator.

Plays the protocol counterparty to the bridge daemon: writes one-line user
inputs to the shared folder, then re-reads the output file a bounded number
of times (the share syncs lazily, so early reads may see nothing or a
partial file). If the reply never shows up it gives up and shows the doze
message, leaving the user to re-enter their input; the abandoned reply, if
it arrives later, is wiped before the next input goes out.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

from .codec import EncodePolicy, decode_bytes, encode_text
from .exchange import SharePaths

__all__ = [
    "EmbeddedNewline",
    "GuestPolicy",
    "GuestReply",
    "InputTooLong",
    "poll_reply",
    "run_console",
    "send_input",
]

QUIT_COMMAND = "/quit"


class InputTooLong(ValueError):
    def __init__(self, length: int, limit: int):
        self.length = length
        self.limit = limit
        super().__init__(f"input is {length} characters; the console takes at most {limit}")


class EmbeddedNewline(ValueError):
    """Programmatic input contained a line separator; the prompt is single-line."""


@dataclass(frozen=True)
class GuestPolicy:
    max_read_attempts: int = 10
    attempt_interval: float = 0.5
    doze_message: str = "Robot dozed off..."
    max_input_chars: int = 253

    def __post_init__(self):
        if self.max_read_attempts < 1:
            raise ValueError("max_read_attempts must be >= 1")
        if self.max_input_chars < 1:
            raise ValueError("max_input_chars must be >= 1")
        encode_text(self.doze_message, EncodePolicy.reject())  # must be displayable


@dataclass(frozen=True)
class GuestReply:
    dozed: bool
    lines: tuple[str, ...]
    attempts_used: int

    def __post_init__(self):
        if self.dozed and self.lines:
            raise ValueError("a dozed reply carries no lines")
        if not self.dozed and not self.lines:
            raise ValueError("a delivered reply carries at least one line")


def _read_file(path: Path) -> bytes:
    """All guest reads funnel through here so tests can count them."""
    try:
        return path.read_bytes()
    except FileNotFoundError:
        return b""


def send_input(
    paths: SharePaths,
    text: str,
    policy: GuestPolicy,
    *,
    interactive: bool = False,
) -> None:
    """Clear any stale reply, then write ``text`` + CR to the input file.

    Interactive mode strips embedded line separators (terminal pastes);
    programmatic mode rejects them so tests stay strict.
    """
    if "\r" in text or "\n" in text:
        if not interactive:
            raise EmbeddedNewline("input must be a single line")
        text = text.replace("\r", "").replace("\n", "")
    if len(text) > policy.max_input_chars:
        raise InputTooLong(len(text), policy.max_input_chars)

    with open(paths.output_path, "wb"):
        pass  # a reply from an abandoned turn must never be shown
    tmp = paths.input_path.with_name(paths.input_path.name + ".tmp")
    tmp.write_bytes(encode_text(text) + b"\r")
    tmp.replace(paths.input_path)


def poll_reply(paths: SharePaths, policy: GuestPolicy) -> GuestReply:
    """Re-read the output file until a reply lands or attempts run out.

    A reply is accepted when the file is non-empty, CR-terminated, and not
    caught mid-sync: if the previous attempt saw different non-empty bytes
    (a partially visible file), the read must repeat identically before it
    counts. Each attempt is exactly one read.
    """
    prev: bytes | None = None
    for attempt in range(1, policy.max_read_attempts + 1):
        data = _read_file(paths.output_path)
        if data and data.endswith(b"\r") and (not prev or prev == data):
            segments = data.split(b"\r")[:-1]  # trailing CR leaves an empty tail
            lines = tuple(decode_bytes(seg) for seg in segments)
            return GuestReply(dozed=False, lines=lines, attempts_used=attempt)
        prev = data
        if attempt < policy.max_read_attempts:
            time.sleep(policy.attempt_interval)
    return GuestReply(dozed=True, lines=(), attempts_used=policy.max_read_attempts)


def run_console(
    paths: SharePaths,
    policy: GuestPolicy,
    *,
    input_fn=input,
    print_fn=print,
) -> None:
    """Interactive chat loop: prompt, send, poll, print each line.

    Every reply line prints as its own chat message; a dozed turn prints
    the doze message verbatim and re-prompts. EOF or /quit ends the
    session without touching the share.
    """
    while True:
        try:
            text = input_fn("You: ")
        except EOFError:
            break
        if text is None or text.strip() == QUIT_COMMAND:
            break
        if not text.strip():
            continue
        try:
            send_input(paths, text, policy, interactive=True)
        except InputTooLong as exc:
            print_fn(f"(too long: {exc.length} characters, max {exc.limit})")
            continue
        reply = poll_reply(paths, policy)
        if reply.dozed:
            print_fn(policy.doze_message)
        else:
            for line in reply.lines:
                print_fn(f"Robot: {line}")
