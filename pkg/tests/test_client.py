import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from macbridge.client import (
    GenerationConfig,
    MalformedResponse,
    ServerError,
    TransportError,
    build_request,
    generate,
)
from macbridge.history import ChatHistory, NoOpenTurn
from macbridge.mockserver import MockScript

from conftest import PRIMING


def cfg_for(server, **kw):
    return GenerationConfig(endpoint_url=server.url, **kw)


def open_history(text="hi"):
    return ChatHistory.new(PRIMING).begin_turn(text)


def test_build_request_carries_config_and_messages():
    h = open_history("what's up")
    cfg = GenerationConfig(endpoint_url="http://example.invalid/v1")
    body = build_request(h, cfg)
    assert body["model"] == "Llama-2-13b-chat"
    assert body["temperature"] == 0.8
    assert body["max_tokens"] == 60
    assert body["messages"] == [m.as_dict() for m in h.render_messages()]
    assert len(body["messages"]) == len(PRIMING) + 1


def test_build_request_requires_open_turn():
    with pytest.raises(NoOpenTurn):
        build_request(ChatHistory.new(PRIMING), GenerationConfig(endpoint_url="http://x/v1"))


def test_build_request_with_full_window():
    h = ChatHistory.new(PRIMING)
    for i in range(10):
        h = h.begin_turn(f"u{i}").complete_turn(f"a{i}")
    h = h.begin_turn("now")
    body = build_request(h, GenerationConfig(endpoint_url="http://x/v1"))
    assert len(body["messages"]) == len(PRIMING) + 21


def test_build_request_does_not_mutate_history():
    h = open_history()
    before = h.render_messages()
    build_request(h, GenerationConfig(endpoint_url="http://x/v1"))
    assert h.render_messages() == before


def test_generate_returns_scripted_text(mock_factory):
    server = mock_factory(MockScript.scripted(["hey hey"]))
    result = generate(open_history(), cfg_for(server))
    assert result.text == "hey hey"
    assert result.finish_reason == "stop"


def test_generate_trims_trailing_whitespace(mock_factory):
    server = mock_factory(MockScript.scripted(["padded out   \n"]))
    assert generate(open_history(), cfg_for(server)).text == "padded out"


def test_generate_returns_overlong_reply_whole(mock_factory):
    server = mock_factory(MockScript.overlong(5))
    result = generate(open_history(), cfg_for(server, max_tokens=60))
    assert len(result.text) > 300  # never truncated client-side


class _HeaderEcho(BaseHTTPRequestHandler):
    seen_headers: list = []

    def log_message(self, fmt, *args):
        pass

    def do_POST(self):
        self.rfile.read(int(self.headers.get("Content-Length", "0")))
        type(self).seen_headers.append(dict(self.headers))
        body = json.dumps({"choices": [{"message": {"role": "assistant", "content": "ok"},
                                        "finish_reason": "stop"}]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def test_generate_sends_bearer_token():
    _HeaderEcho.seen_headers = []
    server = HTTPServer(("127.0.0.1", 0), _HeaderEcho)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        host, port = server.server_address[:2]
        cfg = GenerationConfig(endpoint_url=f"http://{host}:{port}/v1", api_key="sesame")
        assert generate(open_history(), cfg).text == "ok"
        cfg_plain = GenerationConfig(endpoint_url=f"http://{host}:{port}/v1")
        generate(open_history(), cfg_plain)
    finally:
        server.shutdown()
        server.server_close()
    with_key, without_key = _HeaderEcho.seen_headers
    assert with_key.get("Authorization") == "Bearer sesame"
    assert "Authorization" not in without_key


def test_unreachable_endpoint_raises_transport_error():
    cfg = GenerationConfig(endpoint_url="http://127.0.0.1:9/v1", request_timeout=0.5)
    with pytest.raises(TransportError):
        generate(open_history(), cfg)


def test_http_failure_raises_server_error(mock_factory):
    server = mock_factory(MockScript.fail(500))
    with pytest.raises(ServerError) as err:
        generate(open_history(), cfg_for(server))
    assert err.value.status == 500


class _JunkHandler(BaseHTTPRequestHandler):
    payload: bytes = b"{}"

    def log_message(self, fmt, *args):
        pass

    def do_POST(self):
        self.rfile.read(int(self.headers.get("Content-Length", "0")))
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(self.payload)))
        self.end_headers()
        self.wfile.write(self.payload)


@pytest.fixture
def junk_server():
    server = HTTPServer(("127.0.0.1", 0), _JunkHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()
    server.server_close()


@pytest.mark.parametrize("payload", [
    b"not json at all",
    json.dumps({"choices": []}).encode(),
    json.dumps({"nothing": True}).encode(),
    json.dumps({"choices": [{"message": {"role": "assistant"}}]}).encode(),
])
def test_malformed_responses_raise(junk_server, payload):
    _JunkHandler.payload = payload
    host, port = junk_server.server_address[:2]
    cfg = GenerationConfig(endpoint_url=f"http://{host}:{port}/v1")
    with pytest.raises(MalformedResponse):
        generate(open_history(), cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        GenerationConfig(endpoint_url="http://x/v1", temperature=2.5)
    with pytest.raises(ValueError):
        GenerationConfig(endpoint_url="http://x/v1", max_tokens=0)
    with pytest.raises(ValueError):
        GenerationConfig(endpoint_url="http://x/v1", request_timeout=0)
