import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from macbridge.history import ChatHistory, ChatMessage, NoOpenTurn, Round, TurnAlreadyOpen

PRIMING = (
    ChatMessage("system", "stay casual"),
    ChatMessage("user", "hi"),
    ChatMessage("assistant", "hey hey"),
)


def run_turns(history, n, start=1):
    for i in range(start, start + n):
        history = history.begin_turn(f"u{i}").complete_turn(f"a{i}")
    return history


def test_begin_sets_pending_only():
    h = ChatHistory.new(PRIMING).begin_turn("hello")
    assert h.pending_user == ChatMessage("user", "hello")
    assert h.rounds == ()


def test_begin_with_full_window_keeps_rounds():
    h = run_turns(ChatHistory.new(), 10)
    h2 = h.begin_turn("hi")
    assert len(h2.rounds) == 10


def test_begin_twice_is_an_error():
    h = ChatHistory.new().begin_turn("one")
    with pytest.raises(TurnAlreadyOpen):
        h.begin_turn("two")


def test_complete_without_begin_is_an_error():
    with pytest.raises(NoOpenTurn):
        ChatHistory.new().complete_turn("reply")


def test_complete_appends_round_and_clears_pending():
    h = ChatHistory.new().begin_turn("q").complete_turn("a")
    assert h.pending_user is None
    assert h.rounds == (Round(ChatMessage("user", "q"), ChatMessage("assistant", "a")),)


def test_window_drops_oldest_on_eleventh_round():
    h = run_turns(ChatHistory.new(), 10)
    assert [r.user.content for r in h.rounds] == [f"u{i}" for i in range(1, 11)]
    h = h.begin_turn("u11").complete_turn("a11")
    assert len(h.rounds) == 10
    assert [r.user.content for r in h.rounds] == [f"u{i}" for i in range(2, 12)]


def test_priming_never_truncated():
    h = run_turns(ChatHistory.new(PRIMING), 25)
    assert h.priming == PRIMING
    assert h.render_messages()[:3] == list(PRIMING)


def test_render_order_priming_rounds_pending():
    h = run_turns(ChatHistory.new(PRIMING), 2).begin_turn("now")
    rendered = h.render_messages()
    assert rendered[:3] == list(PRIMING)
    assert [m.content for m in rendered[3:]] == ["u1", "a1", "u2", "a2", "now"]


def test_render_length_arithmetic():
    h = run_turns(ChatHistory.new(PRIMING), 2)
    assert len(h.render_messages()) == 3 + 4
    h = h.begin_turn("x")
    assert len(h.render_messages()) == 3 + 4 + 1


def test_render_length_after_fifteen_turns():
    h = run_turns(ChatHistory.new(PRIMING), 15)
    assert len(h.render_messages()) == len(PRIMING) + 2 * 10
    assert len(h.render_messages()) == len(PRIMING) + 2 * 10
    h = h.begin_turn("more")
    assert len(h.render_messages()) == len(PRIMING) + 2 * 10 + 1


def test_custom_window_size():
    h = run_turns(ChatHistory.new(window_rounds=3), 5)
    assert [r.user.content for r in h.rounds] == ["u3", "u4", "u5"]


def test_immutability_of_values():
    h0 = ChatHistory.new(PRIMING)
    h1 = h0.begin_turn("q")
    assert h0.pending_user is None  # old value untouched
    h2 = h1.complete_turn("a")
    assert h1.pending_user is not None
    assert h2.rounds != h1.rounds


def test_validation():
    with pytest.raises(ValueError):
        ChatMessage("narrator", "hm")
    with pytest.raises(ValueError):
        Round(ChatMessage("assistant", "a"), ChatMessage("assistant", "b"))
    with pytest.raises(ValueError):
        ChatHistory.new(window_rounds=0)


@settings(max_examples=200, deadline=None)
@given(ops=st.lists(st.sampled_from(["begin", "complete"]), max_size=40))
def test_state_machine_alternation(ops):
    """begin/complete must strictly alternate; invariants hold throughout."""
    h = ChatHistory.new(PRIMING, window_rounds=5)
    open_turn = False
    for i, op in enumerate(ops):
        if op == "begin":
            if open_turn:
                with pytest.raises(TurnAlreadyOpen):
                    h.begin_turn(f"t{i}")
            else:
                h = h.begin_turn(f"t{i}")
                open_turn = True
        else:
            if not open_turn:
                with pytest.raises(NoOpenTurn):
                    h.complete_turn(f"r{i}")
            else:
                h = h.complete_turn(f"r{i}")
                open_turn = False
        assert len(h.rounds) <= 5
        assert h.priming == PRIMING
        rendered = h.render_messages()
        assert rendered[:3] == list(PRIMING)
        # retained rounds are the most recent, in order
        users = [r.user.content for r in h.rounds]
        assert users == sorted(users, key=lambda s: int(s[1:]))
