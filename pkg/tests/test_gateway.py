import json

import httpx
import pytest

from animstudio.gateway import (
    AuthFailure,
    GatewayClient,
    GatewayConfig,
    ReplayMiss,
    Selection,
    TransportFailure,
    request_hash,
)
from animstudio.model import CodeBundle
from animstudio.patching import EditScriptInvalid


def chat_body(text: str) -> dict:
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


def make_client(tmp_path, mode="record", responder=None, **overrides):
    config = GatewayConfig(
        base_url="http://llm.test/v1",
        mode=mode,
        fixtures_dir=str(tmp_path / "fixtures"),
        max_retries=overrides.pop("max_retries", 2),
        **overrides,
    )
    transport = httpx.MockTransport(responder) if responder else None
    return GatewayClient(config, transport=transport)


MESSAGES = [{"role": "user", "content": "hello"}]


def test_record_then_replay_identical(tmp_path, monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "secret-key")
    calls = []

    def responder(request):
        calls.append(request)
        return httpx.Response(200, json=chat_body("recorded answer"))

    recorder = make_client(tmp_path, "record", responder)
    first = recorder.complete(MESSAGES)
    assert first == "recorded answer"
    assert len(calls) == 1

    replayer = make_client(tmp_path, "replay")
    second = replayer.complete(MESSAGES)
    assert second == first
    assert len(calls) == 1  # zero network traffic in replay


def test_replay_miss_names_hash(tmp_path):
    client = make_client(tmp_path, "replay")
    with pytest.raises(ReplayMiss) as excinfo:
        client.complete(MESSAGES)
    payload = {"model": "gpt-4o", "temperature": 0.0, "messages": MESSAGES}
    assert excinfo.value.request_hash == request_hash(payload)


def test_fixture_contains_no_secret(tmp_path, monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "super-secret-value")
    client = make_client(
        tmp_path, "record", lambda request: httpx.Response(200, json=chat_body("ok"))
    )
    client.complete(MESSAGES)
    fixture_files = list((tmp_path / "fixtures").glob("*.json"))
    assert len(fixture_files) == 1
    assert "super-secret-value" not in fixture_files[0].read_text()


def test_missing_key_is_auth_failure(tmp_path, monkeypatch):
    monkeypatch.delenv("LLM_API_KEY", raising=False)
    client = make_client(tmp_path, "record", lambda request: httpx.Response(200, json=chat_body("x")))
    with pytest.raises(AuthFailure):
        client.complete(MESSAGES)


def test_retry_bound(tmp_path, monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "k")
    attempts = []

    def flaky(request):
        attempts.append(1)
        return httpx.Response(503)

    client = make_client(tmp_path, "record", flaky, max_retries=2)
    with pytest.raises(TransportFailure):
        client.complete(MESSAGES)
    assert len(attempts) == 3  # initial + 2 retries


def test_recovers_on_retry(tmp_path, monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "k")
    attempts = []

    def flaky(request):
        attempts.append(1)
        if len(attempts) < 2:
            return httpx.Response(502)
        return httpx.Response(200, json=chat_body("eventually"))

    client = make_client(tmp_path, "record", flaky)
    assert client.complete(MESSAGES) == "eventually"
    assert len(attempts) == 2


def test_request_hash_canonical():
    a = {"model": "m", "temperature": 0.0, "messages": [{"role": "user", "content": "x"}]}
    b = {"messages": [{"content": "x", "role": "user"}], "temperature": 0.0, "model": "m"}
    assert request_hash(a) == request_hash(b)


# ---------------------------------------------------------------------------
# Higher-level operations against replay fixtures
# ---------------------------------------------------------------------------

def record_fixture_for(client: GatewayClient, messages, text, model=None, temperature=None):
    payload = {
        "model": model or client.config.model_name,
        "temperature": client.config.temperature if temperature is None else temperature,
        "messages": messages,
    }
    client._store_fixture(request_hash(payload), payload, text)


def test_explain_selection_embeds_lines(tmp_path, monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "k")
    seen = {}

    def responder(request):
        seen["body"] = json.loads(request.content)
        return httpx.Response(200, json=chat_body("these lines rotate the ring"))

    client = make_client(tmp_path, "record", responder)
    selection = Selection(".ring {\n  animation: spin 2s;\n}", "style", 3, 5)
    out = client.explain_code(selection)
    assert out == "these lines rotate the ring"
    user_message = seen["body"]["messages"][-1]["content"]
    assert "lines 3-5" in user_message
    assert ".ring {" in user_message

    replayer = make_client(tmp_path, "replay")
    assert replayer.explain_code(selection) == out


def test_explain_rejects_empty_selection(tmp_path):
    client = make_client(tmp_path, "replay")
    with pytest.raises(ValueError):
        client.explain_code(Selection("   ", "style", 1, 1))


def test_optimize_prompt_roundtrip(tmp_path, monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "k")
    improved = (
        "A glowing ring that spins clockwise, completing a turn every 1.5 seconds, "
        "with a soft blue trail"
    )
    client = make_client(
        tmp_path, "record", lambda request: httpx.Response(200, json=chat_body(improved))
    )
    out = client.optimize_prompt("cool rotating effect")
    assert out == improved
    replayer = make_client(tmp_path, "replay")
    assert replayer.optimize_prompt("cool rotating effect") == improved
    with pytest.raises(ValueError):
        client.optimize_prompt("  ")


FIX_RESPONSE = json.dumps(
    {
        "reasoning": "the style block lost its closing brace",
        "description": "loader animation with valid styles",
        "edits": [
            {"type": "update", "part": "style", "fromLine": 3, "toLine": 3, "content": "}"},
        ],
    }
)


def test_fix_code_returns_validated_scripts(tmp_path, monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "k")
    client = make_client(
        tmp_path, "record", lambda request: httpx.Response(200, json=chat_body(FIX_RESPONSE))
    )
    bundle = CodeBundle(style=".a {\n  left: 0;\noops")
    scripts = client.fix_code(bundle, "style: unclosed block at end of stylesheet")
    assert len(scripts) == 1
    assert scripts[0].part == "style"


def test_fix_code_rejects_overlapping_edits(tmp_path, monkeypatch):
    monkeypatch.setenv("LLM_API_KEY", "k")
    bad = json.dumps(
        {
            "reasoning": "r",
            "description": "d",
            "edits": [
                {"type": "update", "part": "style", "fromLine": 1, "toLine": 2, "content": "x"},
                {"type": "remove", "part": "style", "fromLine": 2, "toLine": 2},
            ],
        }
    )
    client = make_client(
        tmp_path, "record", lambda request: httpx.Response(200, json=chat_body(bad))
    )
    with pytest.raises(EditScriptInvalid):
        client.fix_code(CodeBundle(style=".a {\n  left: 0;\n}"), "")
