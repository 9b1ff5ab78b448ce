import httpx
import pytest

from eoagent.backends import (
    BackendUnavailable,
    RemoteBackend,
    ScriptedBackend,
    query_digest,
)
from eoagent.controller import (
    CODE_ONLY_CLAUSE,
    PRINT_RESULT_CLAUSE,
    EmptyQuery,
    build_prompt,
    generate_code,
    handle_query,
)
from eoagent.fixturegen import BRUSHWOOD_CODE, BRUSHWOOD_QUERY


def test_build_prompt_contains_tools_and_contract(registry):
    bundle = build_prompt(registry, "Is there water?")
    assert CODE_ONLY_CLAUSE in bundle.system_text
    assert PRINT_RESULT_CLAUSE in bundle.system_text
    assert "ndvi" in bundle.catalog_text
    assert "dofa_segmentation_tool" in bundle.catalog_text
    assert bundle.user_query == "Is there water?"


def test_build_prompt_deterministic(registry):
    a = build_prompt(registry, "q", attachments=("x.png",))
    b = build_prompt(registry, "q", attachments=("x.png",))
    assert a.text() == b.text()
    assert a.digest == b.digest


def test_build_prompt_surfaces_attachments(registry):
    bundle = build_prompt(registry, "query", attachments=("img.png",))
    assert "img.png" in bundle.user_message()
    assert "get_uploaded_image_path" in bundle.catalog_text


def test_empty_query_rejected(registry):
    with pytest.raises(EmptyQuery):
        build_prompt(registry, "   ")


def test_generate_code_strips_fences(registry):
    backend = ScriptedBackend.from_queries({"q": "```python\nprint(1)\n```"})
    script, raw = generate_code(backend, build_prompt(registry, "q"))
    assert script.source == "print(1)"
    assert raw.startswith("```")
    assert script.origin == "llm"


def test_generate_code_missing_fixture(registry):
    backend = ScriptedBackend({})
    with pytest.raises(BackendUnavailable):
        generate_code(backend, build_prompt(registry, "q"))


def test_scripted_backend_roundtrip_files(tmp_path):
    backend = ScriptedBackend.from_queries({"the query": "print(1)"})
    path = tmp_path / "completions.json"
    import json

    path.write_text(json.dumps(backend.completions))
    loaded = ScriptedBackend.from_file(path)
    assert loaded.completions[query_digest("the query")] == "print(1)"


def test_handle_query_success(registry, fixtures_root):
    backend = ScriptedBackend.from_queries({BRUSHWOOD_QUERY: BRUSHWOOD_CODE})
    record = handle_query(
        registry, backend, BRUSHWOOD_QUERY,
        attachments=[str(fixtures_root / "uploads" / "img_brushwood.png")],
    )
    assert record.outcome.kind == "success"
    assert record.printed == ["True"]
    assert record.script == BRUSHWOOD_CODE
    assert record.verdict.calls_valid
    assert len(record.attempts) == 1
    assert record.attempts[0].raw_completion == BRUSHWOOD_CODE
    assert record.prompt_digest


def test_handle_query_prose_retry_and_failure(registry):
    backend = ScriptedBackend.from_queries({"q": "I cannot write code, sorry."})
    record = handle_query(registry, backend, "q", max_retries=1)
    assert record.outcome.kind == "validation_failure"
    assert len(record.attempts) == 2  # initial + one retry
    assert not record.attempts[0].verdict.syntactically_valid
    assert record.printed == []


def test_handle_query_retry_bound(registry):
    calls = []

    class CountingBackend:
        def complete(self, bundle, feedback=None):
            calls.append(feedback)
            return "prose, not code"

    record = handle_query(registry, CountingBackend(), "q", max_retries=2)
    assert len(calls) == 3  # 1 + R
    assert record.outcome.kind == "validation_failure"
    assert calls[0] is None and calls[1]  # diagnostics fed back on retries


def test_handle_query_hallucinated_tool(registry):
    backend = ScriptedBackend.from_queries({"q": "x = magic_tool()\nprint(x)"})
    record = handle_query(registry, backend, "q", max_retries=0)
    assert record.outcome.kind == "validation_failure"
    assert record.verdict.syntactically_valid
    assert not record.verdict.calls_valid


def test_handle_query_backend_error(registry):
    record = handle_query(registry, ScriptedBackend({}), "unseen query")
    assert record.outcome.kind == "backend_error"


def test_handle_query_runtime_error_from_tool(registry, fixtures_root):
    from eoagent.fixturegen import AGRI_CODE, AGRI_QUERY
    from eoagent.tools.mocks import failing_tool, mock_model_tools

    message = "CUDA out of memory. Tried to allocate 20.00 MiB ..."
    reg = registry.with_overrides(failing_tool(mock_model_tools()[1], message))
    backend = ScriptedBackend.from_queries({AGRI_QUERY: AGRI_CODE})
    record = handle_query(
        reg, backend, AGRI_QUERY,
        attachments=[str(fixtures_root / "uploads" / "img_agri.png")],
    )
    assert record.verdict.calls_valid  # the code itself was fine
    assert record.outcome.kind == "runtime_error"
    assert message in record.outcome.message


def test_script_recorded_exactly_as_executed(registry, fixtures_root):
    fenced = f"```python\n{BRUSHWOOD_CODE}\n```"
    backend = ScriptedBackend.from_queries({BRUSHWOOD_QUERY: fenced})
    record = handle_query(
        registry, backend, BRUSHWOOD_QUERY,
        attachments=[str(fixtures_root / "uploads" / "img_brushwood.png")],
    )
    assert record.script == BRUSHWOOD_CODE  # stripped form is what ran
    assert record.attempts[0].raw_completion == fenced  # stripping is logged


def test_remote_backend_chat_protocol():
    captured = {}

    def handler(request: httpx.Request) -> httpx.Response:
        import json

        captured["url"] = str(request.url)
        captured["body"] = json.loads(request.content)
        captured["auth"] = request.headers.get("authorization")
        return httpx.Response(
            200, json={"choices": [{"message": {"content": "print(1)"}}]}
        )

    client = httpx.Client(transport=httpx.MockTransport(handler))
    backend = RemoteBackend(
        "https://llm.example/v1", "test-model", api_key="sk-test", client=client
    )
    from eoagent.tools.registry import load_registry

    bundle = build_prompt(load_registry(), "count trees")
    assert backend.complete(bundle) == "print(1)"
    assert captured["url"].endswith("/chat/completions")
    assert captured["auth"] == "Bearer sk-test"
    assert captured["body"]["model"] == "test-model"
    assert captured["body"]["temperature"] == 0.0
    roles = [m["role"] for m in captured["body"]["messages"]]
    assert roles == ["system", "user"]


def test_remote_backend_down_is_unavailable():
    def handler(request: httpx.Request) -> httpx.Response:
        raise httpx.ConnectError("no route to host")

    client = httpx.Client(transport=httpx.MockTransport(handler))
    backend = RemoteBackend("https://down.example", "m", client=client)
    from eoagent.tools.registry import load_registry

    with pytest.raises(BackendUnavailable):
        backend.complete(build_prompt(load_registry(), "q"))


def test_scripted_backend_determinism(registry, fixtures_root):
    backend = ScriptedBackend.from_queries({BRUSHWOOD_QUERY: BRUSHWOOD_CODE})
    attachments = [str(fixtures_root / "uploads" / "img_brushwood.png")]

    def normalized():
        record = handle_query(registry, backend, BRUSHWOOD_QUERY, attachments=attachments)
        d = record.to_dict()
        d["run_id"] = "X"
        d["started_at"] = d["finished_at"] = "T"
        d["usage"]["wall_ms"] = 0.0
        for call in d["tool_calls"]:
            call["started_at"] = call["finished_at"] = "T"
        return d

    assert normalized() == normalized()
