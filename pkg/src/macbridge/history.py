"""Conversation state: pinned style priming plus a sliding window of rounds.

The priming prefix is a fixed set of example messages that keeps the model
in its casual register; it is never touched by truncation. Completed
user/assistant rounds slide through a window of the most recent
``window_rounds`` (10 by default), so old context falls away while the
conversation stays on topic.

Histories are immutable; ``begin_turn`` and ``complete_turn`` return new
values. That makes turn rollback on a failed generation a non-event: the
caller simply keeps the history it already had.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

__all__ = [
    "ChatHistory",
    "ChatMessage",
    "NoOpenTurn",
    "Round",
    "TurnAlreadyOpen",
    "ROLES",
]

ROLES = ("system", "user", "assistant")


class TurnAlreadyOpen(RuntimeError):
    """begin_turn was called while a user message is still awaiting its reply."""


class NoOpenTurn(RuntimeError):
    """complete_turn (or a request build) was called with no pending user message."""


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"role must be one of {ROLES}, got {self.role!r}")

    def as_dict(self) -> dict[str, str]:
        return {"role": self.role, "content": self.content}


@dataclass(frozen=True)
class Round:
    """One completed user/assistant exchange."""

    user: ChatMessage
    assistant: ChatMessage

    def __post_init__(self):
        if self.user.role != "user" or self.assistant.role != "assistant":
            raise ValueError("round roles are fixed as user/assistant")


@dataclass(frozen=True)
class ChatHistory:
    priming: tuple[ChatMessage, ...] = ()
    rounds: tuple[Round, ...] = ()
    window_rounds: int = 10
    pending_user: ChatMessage | None = None

    def __post_init__(self):
        if self.window_rounds < 1:
            raise ValueError("window_rounds must be >= 1")
        if len(self.rounds) > self.window_rounds:
            raise ValueError("rounds exceed the window")

    @classmethod
    def new(cls, priming: list[ChatMessage] | tuple[ChatMessage, ...] = (), window_rounds: int = 10) -> "ChatHistory":
        return cls(priming=tuple(priming), window_rounds=window_rounds)

    def begin_turn(self, user_text: str) -> "ChatHistory":
        """Open a turn with the user's message; rounds are untouched."""
        if self.pending_user is not None:
            raise TurnAlreadyOpen("a turn is already open; complete it first")
        return replace(self, pending_user=ChatMessage("user", user_text))

    def complete_turn(self, assistant_text: str) -> "ChatHistory":
        """Close the open turn, appending a round and sliding the window."""
        if self.pending_user is None:
            raise NoOpenTurn("no open turn to complete")
        rounds = self.rounds + (
            Round(self.pending_user, ChatMessage("assistant", assistant_text)),
        )
        if len(rounds) > self.window_rounds:
            rounds = rounds[len(rounds) - self.window_rounds:]
        return replace(self, rounds=rounds, pending_user=None)

    def render_messages(self) -> list[ChatMessage]:
        """Messages in send order: priming, windowed rounds, pending user."""
        out = list(self.priming)
        for r in self.rounds:
            out.append(r.user)
            out.append(r.assistant)
        if self.pending_user is not None:
            out.append(self.pending_user)
        return out
