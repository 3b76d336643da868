"""macbridge: a shared-folder chat bridge between a legacy Mac-style guest
console and an OpenAI-compatible inference backend.

The host daemon watches a shared directory for one-line Mac OS Roman
inputs, asks the model for a reply, frames it into byte-bounded CR-
terminated lines, and writes them back; the guest console (real or
simulated) re-reads the reply with a bounded retry budget and dozes off
when the host is too slow.
"""

__version__ = "0.1.0"

from .chunker import BreakKind, ChunkPolicy, EncodedLine, FramedReply, chunk_reply, reconstruct
from .client import GenerationConfig, GenerationResult, build_request, generate
from .codec import EncodePolicy, UnmappableCharacter, decode_bytes, encode_text, is_encodable
from .exchange import PollPolicy, SharePaths, TurnRecord, await_input, publish_reply, run_loop, run_turn
from .guest import GuestPolicy, GuestReply, poll_reply, run_console, send_input
from .history import ChatHistory, ChatMessage, Round

__all__ = [
    "BreakKind",
    "ChatHistory",
    "ChatMessage",
    "ChunkPolicy",
    "EncodePolicy",
    "EncodedLine",
    "FramedReply",
    "GenerationConfig",
    "GenerationResult",
    "GuestPolicy",
    "GuestReply",
    "PollPolicy",
    "Round",
    "SharePaths",
    "TurnRecord",
    "UnmappableCharacter",
    "await_input",
    "build_request",
    "chunk_reply",
    "decode_bytes",
    "encode_text",
    "generate",
    "is_encodable",
    "poll_reply",
    "publish_reply",
    "reconstruct",
    "run_console",
    "run_loop",
    "run_turn",
    "send_input",
]
