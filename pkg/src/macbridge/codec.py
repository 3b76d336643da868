"""Mac OS Roman transcoding.

The guest side of the bridge only understands the classic Mac single-byte
encoding, so every byte that crosses the shared folder goes through this
module. The byte -> character mapping is total: all 256 byte values decode,
and decoding can never fail. Encoding direction is partial (most of Unicode
has no Mac OS Roman byte) and is governed by an :class:`EncodePolicy`.

The authoritative 256-entry table lives in ``data/mac_roman.txt`` and is
parsed once at import time.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

__all__ = [
    "EncodePolicy",
    "UnmappableCharacter",
    "decode_bytes",
    "encode_text",
    "is_encodable",
]

SUBSTITUTE = "substitute"
REJECT = "reject"


class UnmappableCharacter(ValueError):
    """A character with no Mac OS Roman byte was hit under a reject policy."""

    def __init__(self, position: int, character: str):
        self.position = position
        self.character = character
        super().__init__(
            f"character {character!r} (U+{ord(character):04X}) at position "
            f"{position} has no Mac OS Roman encoding"
        )


@dataclass(frozen=True)
class EncodePolicy:
    """What to do with characters that have no Mac OS Roman byte.

    ``substitute`` replaces each unmappable character with
    ``substitution_byte`` (default ``0x3F``, "?"); ``reject`` raises
    :class:`UnmappableCharacter`. The live bridge substitutes so user emoji
    can never crash a turn; tests mostly reject to keep assertions strict.
    """

    on_unmappable: str = SUBSTITUTE
    substitution_byte: int = 0x3F

    def __post_init__(self):
        if self.on_unmappable not in (SUBSTITUTE, REJECT):
            raise ValueError(f"unknown policy {self.on_unmappable!r}")
        if not 0 <= self.substitution_byte <= 0xFF:
            raise ValueError("substitution_byte must be a single octet")

    @classmethod
    def substitute(cls, substitution_byte: int = 0x3F) -> "EncodePolicy":
        return cls(SUBSTITUTE, substitution_byte)

    @classmethod
    def reject(cls) -> "EncodePolicy":
        return cls(REJECT)


def _load_table() -> tuple[str, ...]:
    text = (
        importlib.resources.files("macbridge")
        .joinpath("data/mac_roman.txt")
        .read_text(encoding="ascii")
    )
    table: list[str] = []
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        byte_hex, scalar_hex, _name = line.split("\t", 2)
        byte = int(byte_hex, 16)
        if byte != len(table):
            raise RuntimeError(f"mac_roman.txt out of order at {byte_hex}")
        table.append(chr(int(scalar_hex, 16)))
    if len(table) != 256:
        raise RuntimeError(f"mac_roman.txt has {len(table)} entries, want 256")
    if len(set(table)) != 256:
        raise RuntimeError("mac_roman.txt mapping is not injective")
    return tuple(table)


BYTE_TO_CHAR: tuple[str, ...] = _load_table()
CHAR_TO_BYTE: dict[str, int] = {ch: b for b, ch in enumerate(BYTE_TO_CHAR)}

DEFAULT_POLICY = EncodePolicy.substitute()


def encode_text(text: str, policy: EncodePolicy = DEFAULT_POLICY) -> bytes:
    """Encode ``text`` to Mac OS Roman bytes, one byte per character."""
    out = bytearray(len(text))
    for i, ch in enumerate(text):
        b = CHAR_TO_BYTE.get(ch)
        if b is None:
            if policy.on_unmappable == REJECT:
                raise UnmappableCharacter(i, ch)
            b = policy.substitution_byte
        out[i] = b
    return bytes(out)


def decode_bytes(data: bytes) -> str:
    """Decode Mac OS Roman bytes; total, never fails."""
    return "".join(BYTE_TO_CHAR[b] for b in data)


def is_encodable(ch: str) -> bool:
    """True iff the single character ``ch`` has a Mac OS Roman byte."""
    return ch in CHAR_TO_BYTE
