"""Deterministic chat-completions stub for tests and demos.

Answers POST <anything>/chat/completions with schema-valid JSON in one of
five modes: scripted replies served in order (cycling), echo of the last
user message, overlong output that ignores max_tokens the way older models
do, a delayed response for exercising the guest's doze path, and a plain
HTTP failure. Every request body is recorded and exposed on GET /requests
so tests can assert exactly what the client sent.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, HTTPServer

__all__ = ["MockScript", "MockServer", "serve"]

SCRIPTED = "scripted"
ECHO = "echo"
OVERLONG = "overlong"
DELAYED = "delayed"
FAIL = "fail"

_OVERLONG_SENTENCE = (
    "Dude I am not even close to done talking, there is so much more to say "
    "about absolutely nothing at all."
)
_DELAYED_REPLY = "zzz... huh? oh hey, sorry, I nodded off."


@dataclass(frozen=True)
class MockScript:
    mode: str
    replies: tuple[str, ...] = ()
    multiplier: int = 5
    delay: float = 0.0
    status: int = 500

    def __post_init__(self):
        if self.mode not in (SCRIPTED, ECHO, OVERLONG, DELAYED, FAIL):
            raise ValueError(f"unknown mock mode {self.mode!r}")
        if self.mode == SCRIPTED and not self.replies:
            raise ValueError("scripted mode needs at least one reply")
        if self.multiplier < 1:
            raise ValueError("multiplier must be >= 1")

    @classmethod
    def scripted(cls, replies: list[str] | tuple[str, ...]) -> "MockScript":
        return cls(SCRIPTED, replies=tuple(replies))

    @classmethod
    def echo(cls) -> "MockScript":
        return cls(ECHO)

    @classmethod
    def overlong(cls, multiplier: int = 5) -> "MockScript":
        return cls(OVERLONG, multiplier=multiplier)

    @classmethod
    def delayed(cls, delay: float, reply: str = _DELAYED_REPLY) -> "MockScript":
        return cls(DELAYED, delay=delay, replies=(reply,))

    @classmethod
    def fail(cls, status: int = 500) -> "MockScript":
        return cls(FAIL, status=status)


def _overlong_text(max_tokens: int, multiplier: int) -> str:
    """Strictly more than max_tokens * multiplier characters, with break points."""
    target = max_tokens * multiplier
    parts = []
    total = -1
    while total <= target:
        parts.append(_OVERLONG_SENTENCE)
        total += len(_OVERLONG_SENTENCE) + 1
    return " ".join(parts)


class _Handler(BaseHTTPRequestHandler):
    server: "MockServer"

    def log_message(self, fmt, *args):  # keep test output quiet
        pass

    def _send_json(self, status: int, doc) -> None:
        body = json.dumps(doc).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/requests":
            self._send_json(200, self.server.requests)
        else:
            self._send_json(404, {"error": f"no such path: {self.path}"})

    def do_POST(self):
        if not self.path.endswith("/chat/completions"):
            self._send_json(404, {"error": f"no such path: {self.path}"})
            return
        length = int(self.headers.get("Content-Length", "0"))
        try:
            body = json.loads(self.rfile.read(length) or b"{}")
        except ValueError:
            self._send_json(400, {"error": "request body is not JSON"})
            return
        self.server.requests.append(body)

        script = self.server.script
        n = self.server.served_count
        self.server.served_count += 1

        if script.mode == FAIL:
            self._send_json(script.status, {"error": "scripted failure"})
            return
        if script.mode == DELAYED:
            time.sleep(script.delay)
            content = script.replies[0]
        elif script.mode == SCRIPTED:
            content = script.replies[n % len(script.replies)]
        elif script.mode == ECHO:
            users = [m for m in body.get("messages", []) if m.get("role") == "user"]
            content = users[-1]["content"] if users else ""
        else:
            content = _overlong_text(int(body.get("max_tokens", 16)), script.multiplier)

        self._send_json(200, {
            "id": f"mock-{n}",
            "object": "chat.completion",
            "created": 0,
            "model": body.get("model", "mock"),
            "choices": [{
                "index": 0,
                "message": {"role": "assistant", "content": content},
                "finish_reason": "stop",
            }],
            "usage": {"prompt_tokens": 0, "completion_tokens": 0, "total_tokens": 0},
        })


class MockServer(HTTPServer):
    """One-request-at-a-time stub server; the bridge is strictly serial anyway."""

    def __init__(self, script: MockScript, bind_address=("127.0.0.1", 0)):
        super().__init__(bind_address, _Handler)
        self.script = script
        self.requests: list[dict] = []
        self.served_count = 0
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        """Endpoint base URL; the client appends /chat/completions itself."""
        host, port = self.server_address[:2]
        return f"http://{host}:{port}/v1"

    def start(self) -> "MockServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def close(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)


def serve(script: MockScript, bind_address=("127.0.0.1", 0)) -> MockServer:
    """Start a mock server in a background thread and return its handle."""
    return MockServer(script, bind_address).start()
