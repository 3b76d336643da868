import threading

import pytest

from macbridge import mockserver
from macbridge.chunker import ChunkPolicy
from macbridge.exchange import DEFAULT_FAILURE_LINE, PollPolicy, SharePaths, run_loop
from macbridge.guest import GuestPolicy
from macbridge.history import ChatHistory, ChatMessage

# Small intervals keep the polling tests fast; semantics don't depend on them.
FAST_POLL = PollPolicy(interval=0.004, stability_reads=2)
FAST_GUEST = GuestPolicy(max_read_attempts=100, attempt_interval=0.004)

PRIMING = (
    ChatMessage("system", "keep it casual and short"),
    ChatMessage("user", "hey"),
    ChatMessage("assistant", "yo. whats up"),
)


@pytest.fixture
def share(tmp_path):
    d = tmp_path / "share"
    d.mkdir()
    return SharePaths(dir=d)


@pytest.fixture
def mock_factory():
    servers = []

    def start(script):
        server = mockserver.serve(script)
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.close()


class ListSink:
    """Transcript stand-in collecting TurnRecords in memory."""

    def __init__(self):
        self.records = []

    def append(self, record):
        self.records.append(record)


class BridgeHarness:
    """Runs the exchange loop in a thread against a share directory."""

    def __init__(self, share, gen_cfg, *, poll=FAST_POLL, history=None,
                 chunk=None, failure_line=DEFAULT_FAILURE_LINE, max_turns=None):
        self.share = share
        self.sink = ListSink()
        self.stop = threading.Event()
        self.final_history = None
        self.error = None
        history = history if history is not None else ChatHistory.new(PRIMING)
        chunk = chunk if chunk is not None else ChunkPolicy()

        def run():
            try:
                self.final_history = run_loop(
                    share, poll, history, gen_cfg, chunk, self.sink,
                    failure_line=failure_line, stop=self.stop, max_turns=max_turns,
                )
            except BaseException as exc:  # surfaced by __exit__
                self.error = exc

        self.thread = threading.Thread(target=run, daemon=True)

    @property
    def records(self):
        return self.sink.records

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.stop.set()
        self.thread.join(timeout=30)
        assert not self.thread.is_alive(), "bridge loop did not shut down"
        if exc_type is None and self.error is not None:
            raise self.error
