"""HTTP facade that lets a browser act as the protocol guest.

POST /api/turn runs a full guest cycle over the real shared folder: write
the input file, poll the output file, give up into a doze after the
attempt budget. Going through the file protocol rather than calling into
the pipeline directly means the UI exercises the same encoding, framing
and sync behaviour as the emulator-side console would.

Turns are strictly serialized per share directory; a second request while
one is in flight gets 409. Transcript and config reads are always allowed.
"""

from __future__ import annotations

import json
import mimetypes
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from . import guest
from .chunker import ChunkPolicy
from .exchange import SharePaths

__all__ = ["GatewayState", "GatewayServer", "serve_gateway"]

SCREEN = {"width": 640, "height": 480, "monochrome": True}


@dataclass
class GatewayState:
    paths: SharePaths
    guest_policy: guest.GuestPolicy
    chunk_policy: ChunkPolicy = field(default_factory=ChunkPolicy)
    static_dir: Path | None = None
    turns: list[dict] = field(default_factory=list)
    turn_lock: threading.Lock = field(default_factory=threading.Lock)
    transcript_lock: threading.Lock = field(default_factory=threading.Lock)

    def handle_turn(self, text: str) -> dict:
        """One guest cycle; caller must hold turn_lock."""
        guest.send_input(self.paths, text, self.guest_policy)
        reply = guest.poll_reply(self.paths, self.guest_policy)
        with self.transcript_lock:
            turn_id = len(self.turns) + 1
            response = {
                "lines": list(reply.lines),
                "dozed": reply.dozed,
                "turn_id": turn_id,
            }
            self.turns.append({"request": {"text": text}, "response": response})
        return response

    def get_transcript(self) -> list[dict]:
        with self.transcript_lock:
            return list(self.turns)

    def get_config(self) -> dict:
        return {
            "doze_message": self.guest_policy.doze_message,
            "max_input_chars": self.guest_policy.max_input_chars,
            "max_line_bytes": self.chunk_policy.max_line_bytes,
            "screen": SCREEN,
        }


class _Handler(BaseHTTPRequestHandler):
    server: "GatewayServer"

    def log_message(self, fmt, *args):
        pass

    def _send_json(self, status: int, doc) -> None:
        body = json.dumps(doc).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        state = self.server.state
        if self.path == "/api/transcript":
            self._send_json(200, state.get_transcript())
        elif self.path == "/api/config":
            self._send_json(200, state.get_config())
        else:
            self._send_static()

    def _send_static(self):
        state = self.server.state
        if state.static_dir is None:
            self._send_json(404, {"error": "no UI assets configured"})
            return
        rel = self.path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (state.static_dir / rel).resolve()
        if not target.is_relative_to(state.static_dir.resolve()) or not target.is_file():
            self._send_json(404, {"error": f"no such asset: {self.path}"})
            return
        body = target.read_bytes()
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        if self.path != "/api/turn":
            self._send_json(404, {"error": f"no such path: {self.path}"})
            return
        state = self.server.state
        length = int(self.headers.get("Content-Length", "0"))
        try:
            body = json.loads(self.rfile.read(length) or b"{}")
        except ValueError:
            self._send_json(400, {"error": "request body is not JSON"})
            return
        text = body.get("text")
        if not isinstance(text, str) or not text.strip():
            self._send_json(400, {"error": "body must carry a non-empty 'text' string"})
            return

        if not state.turn_lock.acquire(blocking=False):
            self._send_json(409, {"error": "a turn is already in flight"})
            return
        try:
            response = state.handle_turn(text)
        except (guest.InputTooLong, guest.EmbeddedNewline) as exc:
            self._send_json(400, {"error": str(exc)})
            return
        except OSError as exc:
            self._send_json(500, {"error": f"share directory IO failed: {exc}"})
            return
        finally:
            state.turn_lock.release()
        self._send_json(200, response)


class GatewayServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, state: GatewayState, bind_address=("127.0.0.1", 0)):
        super().__init__(bind_address, _Handler)
        self.state = state
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "GatewayServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def close(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)


def serve_gateway(state: GatewayState, bind_address=("127.0.0.1", 0)) -> GatewayServer:
    """Start the gateway in a background thread and return its handle."""
    return GatewayServer(state, bind_address).start()
