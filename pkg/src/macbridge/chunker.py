"""Reply framing: split model output into byte-bounded display lines.

The guest console reads the reply file line by line into a fixed C string
buffer, so every emitted line's Mac OS Roman encoding must fit the line
budget (253 bytes by default). Rather than cutting mid-word, each line is
broken greedily: take the longest prefix that fits, then back off to the
best break position inside it, preferring sentence punctuation over clause
punctuation over whitespace, with a hard cut only as a last resort.

Breaks never drop payload: punctuation stays at the end of its line and
whitespace consumed at a break collapses to the single space that
:func:`reconstruct` reinserts, which is what the round-trip tests assert.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .codec import DEFAULT_POLICY, EncodePolicy, UnmappableCharacter, decode_bytes, encode_text, is_encodable

__all__ = [
    "BreakKind",
    "ChunkPolicy",
    "EncodedLine",
    "FramedReply",
    "chunk_reply",
    "reconstruct",
]


class BreakKind(enum.Enum):
    """Why a line ended where it did."""

    SENTENCE_PUNCT = "sentence_punct"
    CLAUSE_PUNCT = "clause_punct"
    WHITESPACE = "whitespace"
    HARD = "hard"
    END = "end"


@dataclass(frozen=True)
class EncodedLine:
    """One display line, already transcoded for the guest."""

    bytes: bytes
    byte_len: int

    @classmethod
    def from_bytes(cls, data: bytes) -> "EncodedLine":
        return cls(bytes=data, byte_len=len(data))

    @property
    def text(self) -> str:
        return decode_bytes(self.bytes)


@dataclass(frozen=True)
class FramedReply:
    """Ordered lines plus the break kind that ended each one."""

    lines: tuple[EncodedLine, ...]
    break_kinds: tuple[BreakKind, ...]

    def __post_init__(self):
        if len(self.lines) != len(self.break_kinds):
            raise ValueError("lines and break_kinds must have equal length")
        if any(line.byte_len == 0 for line in self.lines):
            raise ValueError("framed lines must be non-empty")

    def texts(self) -> list[str]:
        return [line.text for line in self.lines]


@dataclass(frozen=True)
class ChunkPolicy:
    """Framing parameters.

    ``max_line_bytes`` counts payload only; the guest's terminator byte is
    assumed to live outside the budget. The horizontal ellipsis counts as
    sentence punctuation since casual model output leans on it.
    """

    max_line_bytes: int = 253
    sentence_punct: frozenset[str] = frozenset({".", "!", "?", "…"})
    clause_punct: frozenset[str] = frozenset({",", ";", ":"})
    empty_reply_fallback: str = "..."

    def __post_init__(self):
        if self.max_line_bytes < 1:
            raise ValueError("max_line_bytes must be >= 1")
        if self.sentence_punct & self.clause_punct:
            raise ValueError("punctuation sets must be disjoint")
        fallback = self.empty_reply_fallback
        if not fallback or fallback.isspace():
            raise ValueError("empty_reply_fallback must have visible content")
        if len(fallback) > self.max_line_bytes:
            raise ValueError("empty_reply_fallback does not fit max_line_bytes")


DEFAULT_CHUNK_POLICY = ChunkPolicy()


def _skip_whitespace(text: str, start: int) -> int:
    while start < len(text) and text[start].isspace():
        start += 1
    return start


def _best_break(text: str, prefix_len: int, policy: ChunkPolicy) -> tuple[BreakKind, int] | None:
    """Best break inside the longest fitting prefix: highest priority kind,
    rightmost position of that kind. None means a hard cut is forced.

    A cut at ``i`` emits ``text[:i]``. Punctuation only counts as a break
    when followed by whitespace (so "3.14" never splits), and a whitespace
    cut lands at the start of its run; either way the run after the cut is
    consumed by the caller, never emitted. Requires len(text) > prefix_len.
    """
    sent = clause = ws = 0
    for i in range(1, prefix_len + 1):
        here, after = text[i - 1], text[i]
        if after.isspace():
            if here in policy.sentence_punct:
                sent = i
            elif here in policy.clause_punct:
                clause = i
            elif not here.isspace():
                ws = i
    if sent:
        return BreakKind.SENTENCE_PUNCT, sent
    if clause:
        return BreakKind.CLAUSE_PUNCT, clause
    if ws:
        return BreakKind.WHITESPACE, ws
    return None


def chunk_reply(
    text: str,
    policy: ChunkPolicy = DEFAULT_CHUNK_POLICY,
    encode_policy: EncodePolicy = DEFAULT_POLICY,
) -> FramedReply:
    """Frame ``text`` into lines whose encodings fit ``policy.max_line_bytes``.

    Empty or all-whitespace input produces a single fallback line so the
    guest never waits on an empty reply file. Under a reject encode policy,
    :class:`UnmappableCharacter` propagates with the position in ``text``.
    """
    if encode_policy.on_unmappable == "reject":
        for i, ch in enumerate(text):
            if not is_encodable(ch):
                raise UnmappableCharacter(i, ch)

    if not text or text.isspace():
        line = EncodedLine.from_bytes(encode_text(policy.empty_reply_fallback, encode_policy))
        return FramedReply(lines=(line,), break_kinds=(BreakKind.END,))

    lines: list[EncodedLine] = []
    kinds: list[BreakKind] = []
    rest = text
    while rest:
        # 1 char == 1 byte under Mac OS Roman, so byte budgets are char budgets.
        if len(rest) <= policy.max_line_bytes:
            lines.append(EncodedLine.from_bytes(encode_text(rest, encode_policy)))
            kinds.append(BreakKind.END)
            break
        prefix_len = policy.max_line_bytes
        found = _best_break(rest, prefix_len, policy)
        if found is None:
            lines.append(EncodedLine.from_bytes(encode_text(rest[:prefix_len], encode_policy)))
            kinds.append(BreakKind.HARD)
            rest = rest[prefix_len:]
            continue
        kind, cut = found
        lines.append(EncodedLine.from_bytes(encode_text(rest[:cut], encode_policy)))
        kinds.append(kind)
        rest = rest[_skip_whitespace(rest, cut):]

    return FramedReply(lines=tuple(lines), break_kinds=tuple(kinds))


def reconstruct(reply: FramedReply) -> str:
    """Rejoin a framed reply: space after soft breaks, nothing after hard ones.

    For a reply produced by :func:`chunk_reply` this equals the input with
    each whitespace run consumed at a line break collapsed to one space.
    """
    parts = []
    for line, kind in zip(reply.lines, reply.break_kinds):
        parts.append(line.text)
        if kind in (BreakKind.SENTENCE_PUNCT, BreakKind.CLAUSE_PUNCT, BreakKind.WHITESPACE):
            parts.append(" ")
    return "".join(parts)
