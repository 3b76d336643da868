"""Chat-completions client for an OpenAI-compatible inference server.

Builds the request body straight from the rendered history, POSTs it to
``<endpoint_url>/chat/completions`` and hands back the first choice's
content. Deliberately has no retry or backoff: recovery from a slow or dead
backend is the guest's job (re-read attempts, then the doze message), and
client-side retries would distort that timing.

Servers are allowed to overshoot ``max_tokens`` (older models do); the
reply is returned whole and the chunker downstream is the only length
enforcer.
"""

from __future__ import annotations

from dataclasses import dataclass

import requests

from .history import ChatHistory, NoOpenTurn

__all__ = [
    "GenerationConfig",
    "GenerationResult",
    "MalformedResponse",
    "ServerError",
    "TransportError",
    "build_request",
    "generate",
]


class TransportError(ConnectionError):
    """Could not reach the inference server (connect failure or timeout)."""


class ServerError(RuntimeError):
    """The server answered with an HTTP error status."""

    def __init__(self, status: int, body_excerpt: str):
        self.status = status
        self.body_excerpt = body_excerpt
        super().__init__(f"inference server returned {status}: {body_excerpt}")


class MalformedResponse(RuntimeError):
    """The server's JSON did not carry a usable assistant message."""


@dataclass(frozen=True)
class GenerationConfig:
    endpoint_url: str
    model_id: str = "Llama-2-13b-chat"
    temperature: float = 0.8
    max_tokens: int = 60
    request_timeout: float = 30.0
    api_key: str | None = None

    def __post_init__(self):
        if not 0 <= self.temperature <= 2:
            raise ValueError("temperature must be within [0, 2]")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.request_timeout <= 0:
            raise ValueError("request_timeout must be positive")


@dataclass(frozen=True)
class GenerationResult:
    text: str
    finish_reason: str | None = None
    usage: dict | None = None


def build_request(history: ChatHistory, cfg: GenerationConfig) -> dict:
    """Chat-completions request body for the history's open turn."""
    if history.pending_user is None:
        raise NoOpenTurn("cannot build a request without an open turn")
    return {
        "model": cfg.model_id,
        "messages": [m.as_dict() for m in history.render_messages()],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
    }


def _completions_url(endpoint_url: str) -> str:
    return endpoint_url.rstrip("/") + "/chat/completions"


def generate(history: ChatHistory, cfg: GenerationConfig) -> GenerationResult:
    """Run one completion and return the assistant text, right-trimmed."""
    body = build_request(history, cfg)
    headers = {"Content-Type": "application/json"}
    if cfg.api_key:
        headers["Authorization"] = f"Bearer {cfg.api_key}"
    try:
        resp = requests.post(
            _completions_url(cfg.endpoint_url),
            json=body,
            headers=headers,
            timeout=cfg.request_timeout,
        )
    except (requests.ConnectionError, requests.Timeout) as exc:
        raise TransportError(f"inference server unreachable: {exc}") from exc

    if resp.status_code >= 400:
        raise ServerError(resp.status_code, resp.text[:200])

    try:
        payload = resp.json()
    except ValueError as exc:
        raise MalformedResponse(f"response is not JSON: {resp.text[:200]!r}") from exc

    choices = payload.get("choices")
    if not choices:
        raise MalformedResponse("response has no choices")
    message = choices[0].get("message") or {}
    content = message.get("content")
    if content is None:
        raise MalformedResponse("first choice has no message content")

    return GenerationResult(
        text=str(content).rstrip(),
        finish_reason=choices[0].get("finish_reason"),
        usage=payload.get("usage"),
    )
