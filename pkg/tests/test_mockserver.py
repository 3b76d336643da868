import json
import time
import urllib.error
import urllib.request

import pytest

from macbridge.mockserver import MockScript


def post_chat(url, body):
    req = urllib.request.Request(
        url + "/chat/completions",
        data=json.dumps(body).encode(),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    with urllib.request.urlopen(req) as resp:
        return resp.status, json.loads(resp.read())


BODY = {
    "model": "Llama-2-13b-chat",
    "messages": [{"role": "user", "content": "ping"}],
    "temperature": 0.8,
    "max_tokens": 60,
}


def test_scripted_replies_in_order_cycling(mock_factory):
    server = mock_factory(MockScript.scripted(["one", "two"]))
    got = [post_chat(server.url, BODY)[1]["choices"][0]["message"]["content"] for _ in range(3)]
    assert got == ["one", "two", "one"]
    assert server.served_count == 3


def test_echo_returns_last_user_message(mock_factory):
    server = mock_factory(MockScript.echo())
    body = dict(BODY, messages=[
        {"role": "user", "content": "first"},
        {"role": "assistant", "content": "mid"},
        {"role": "user", "content": "ping"},
    ])
    _, doc = post_chat(server.url, body)
    assert doc["choices"][0]["message"]["content"] == "ping"


def test_overlong_exceeds_budget(mock_factory):
    server = mock_factory(MockScript.overlong(5))
    _, doc = post_chat(server.url, dict(BODY, max_tokens=60))
    assert len(doc["choices"][0]["message"]["content"]) > 300


def test_delayed_sleeps_before_answering(mock_factory):
    server = mock_factory(MockScript.delayed(0.2, reply="slow one"))
    t0 = time.monotonic()
    _, doc = post_chat(server.url, BODY)
    assert time.monotonic() - t0 >= 0.2
    assert doc["choices"][0]["message"]["content"] == "slow one"


def test_fail_returns_status(mock_factory):
    server = mock_factory(MockScript.fail(503))
    with pytest.raises(urllib.error.HTTPError) as err:
        post_chat(server.url, BODY)
    assert err.value.code == 503


def test_requests_are_recorded_and_exposed(mock_factory):
    server = mock_factory(MockScript.scripted(["ok"]))
    post_chat(server.url, BODY)
    assert server.requests[0]["temperature"] == 0.8
    assert server.requests[0]["max_tokens"] == 60
    with urllib.request.urlopen(server.url.rsplit("/", 1)[0] + "/requests") as resp:
        recorded = json.loads(resp.read())
    assert recorded == server.requests


def test_response_is_schema_valid(mock_factory):
    server = mock_factory(MockScript.scripted(["ok"]))
    _, doc = post_chat(server.url, BODY)
    assert doc["object"] == "chat.completion"
    choice = doc["choices"][0]
    assert choice["message"]["role"] == "assistant"
    assert choice["finish_reason"] == "stop"
    assert set(doc["usage"]) == {"prompt_tokens", "completion_tokens", "total_tokens"}


def test_script_validation():
    with pytest.raises(ValueError):
        MockScript.scripted([])
    with pytest.raises(ValueError):
        MockScript("nonsense")
    with pytest.raises(ValueError):
        MockScript.overlong(0)
