import random

import numpy as np
import pytest

from eoagent.context import ExecutionContext, Limits
from eoagent.raster import Mask
from eoagent.script import execute_script, parse_script, to_source, validate_calls
from eoagent.tools.mocks import failing_tool, mock_model_tools
from eoagent.tools.registry import Registry, default_specs
from eoagent.tools.spec import BuiltinBinding, ToolSpec
from helpers import random_program


def run(source, registry=None, ctx=None):
    return execute_script(parse_script(source), registry, ctx=ctx, script_source=source)


def test_arithmetic_and_print():
    record = run("x = 1 + 2 * 3\nprint(x)\nprint(x / 2, x - 7)")
    assert record.outcome.kind == "success"
    assert record.printed == ["7", "3.5 0"]


def test_print_values_format():
    record = run('print(True)\nprint(0.5)\nprint("plain text")\nprint([1, "a", False])')
    assert record.printed == ["True", "0.5", "plain text", "[1, 'a', False]"]


def test_mask_semantics():
    mask = Mask(values=np.array([[11, 0], [11, 5]]))
    spec = ToolSpec(
        name="give_mask", category="data", general_description="x",
        technical_description="x", binding=BuiltinBinding(lambda ctx: mask),
        params=(), return_type="mask",
    )
    reg = Registry([spec])
    record = run(
        "m = give_mask()\n"
        "print((m == 11).sum())\n"
        "print(11 in m)\n"
        "print(7 in m)\n"
        "print(m.count(5))",
        reg,
    )
    assert record.outcome.kind == "success"
    assert record.printed == ["2", "True", "False", "1"]


def test_boolean_mask_sum_counts_true():
    mask = Mask(values=np.array([[True, False], [True, True]]))
    spec = ToolSpec(
        name="give_mask", category="data", general_description="x",
        technical_description="x", binding=BuiltinBinding(lambda ctx: mask),
        params=(), return_type="mask",
    )
    record = run("m = give_mask()\nprint(m.sum())\nprint(m.mean())", Registry([spec]))
    assert record.printed == ["3", "0.75"]


def test_list_and_string_ops():
    record = run(
        'xs = [3, 1, 2] + [5]\n'
        "print(len(xs))\n"
        "print(xs[0] + xs[3])\n"
        "print(xs.count(1))\n"
        'print("ab" + "cd")\n'
        'print("b" in "abc")\n'
        "print([1, 2].mean())"
    )
    assert record.printed == ["4", "8", "1", "abcd", "True", "1.5"]


def test_round_abs_len():
    record = run("print(round(2.567, 1))\nprint(round(2.5))\nprint(abs(-3))\nprint(len([]))")
    assert record.printed == ["2.6", "2", "3", "0"]


def test_name_error():
    record = run("print(x)")
    assert record.outcome.kind == "runtime_error"
    assert "not defined" in record.outcome.message


def test_type_errors():
    for source in ['x = 1 + "a"', "x = [1] * 2", 'x = "a" < 1', "x = -[1]"]:
        record = run(source)
        assert record.outcome.kind == "runtime_error", source


def test_division_by_zero():
    record = run("x = 1 / 0")
    assert record.outcome.kind == "runtime_error"
    assert "division by zero" in record.outcome.message


def test_statements_sequential_single_scope():
    record = run("x = 1\nx = x + 1\ny = x * 10\nprint(y)")
    assert record.printed == ["20"]


def test_tool_exception_aborts_and_records_message(registry, fixtures_root):
    failing = failing_tool(
        mock_model_tools()[1],
        "CUDA out of memory. Tried to allocate 20.00 MiB ...",
    )
    reg = registry.with_overrides(failing)
    ctx = ExecutionContext(
        uploads={"img.png": str(fixtures_root / "uploads" / "img_brushwood.png")}
    )
    record = run(
        "p = get_uploaded_image_path()\nm = dofa_segmentation_tool(p)\nprint(8 in m)",
        reg,
        ctx,
    )
    assert record.outcome.kind == "runtime_error"
    assert record.outcome.message == "CUDA out of memory. Tried to allocate 20.00 MiB ..."
    assert record.printed == []
    failed_call = record.tool_calls[-1]
    assert failed_call.tool == "dofa_segmentation_tool"
    assert failed_call.status == "error"


def test_step_limit():
    ctx = ExecutionContext(limits=Limits(max_steps=10))
    record = run("\n".join("x = 1 + 1" for _ in range(20)), ctx=ctx)
    assert record.outcome.kind == "runtime_error"
    assert "steps" in record.outcome.message


def test_wall_limit():
    ctx = ExecutionContext(limits=Limits(max_wall_s=0.0))
    record = run("x = 1\ny = 2", ctx=ctx)
    assert record.outcome.kind == "runtime_error"
    assert "wall_clock" in record.outcome.message


def test_value_store_limit_on_list_growth():
    ctx = ExecutionContext(limits=Limits(max_value_bytes=4096))
    doublings = "\n".join("x = x + x" for _ in range(40))
    record = run("x = [1, 2, 3, 4]\n" + doublings, ctx=ctx)
    assert record.outcome.kind == "runtime_error"
    assert "value_store" in record.outcome.message


def test_tool_call_limit(registry, fixtures_root):
    ctx = ExecutionContext(
        uploads={"img.png": str(fixtures_root / "uploads" / "img_plain.png")},
        limits=Limits(max_tool_calls=2),
    )
    record = run(
        "\n".join("p = get_uploaded_image_path()" for _ in range(3)), registry, ctx
    )
    assert record.outcome.kind == "runtime_error"
    assert "tool_calls" in record.outcome.message
    assert len(record.tool_calls) == 2


def test_usage_reported():
    record = run("x = 1\nprint(x)")
    assert record.usage.steps > 0
    assert record.usage.wall_ms >= 0.0
    assert record.usage.peak_value_bytes > 0


def test_validation_soundness_fuzz(registry):
    rng = random.Random(99)
    for _ in range(300):
        ast = random_program(rng)
        verdict = validate_calls(ast, registry)
        if not verdict.calls_valid:
            continue
        record = execute_script(ast, registry, ctx=ExecutionContext(limits=Limits(max_steps=5000, max_wall_s=5.0)))
        if record.outcome.kind == "runtime_error":
            assert "unknown tool" not in record.outcome.message


def test_safety_closure_fuzzed_effects(registry):
    rng = random.Random(123)
    for _ in range(300):
        ast = random_program(rng)
        ctx = ExecutionContext(limits=Limits(max_steps=5000, max_wall_s=5.0))
        record = execute_script(ast, registry, ctx=ctx)
        # every run terminates with a defined outcome; effects are confined
        # to printed lines and logged tool calls
        assert record.outcome.kind in ("success", "runtime_error")
        assert isinstance(record.printed, list)
        for call in record.tool_calls:
            assert call.tool
            assert call.status in ("ok", "error")


def test_determinism_modulo_ids_and_timestamps(registry, fixtures_root):
    source = (
        "p = get_uploaded_image_path()\n"
        "m = dofa_segmentation_tool(p)\n"
        "print((m == 8).sum())"
    )

    def snapshot():
        ctx = ExecutionContext(
            uploads={"img.png": str(fixtures_root / "uploads" / "img_brushwood.png")}
        )
        record = run(source, registry, ctx)
        d = record.to_dict()
        d["run_id"] = "X"
        d["started_at"] = d["finished_at"] = "T"
        d["usage"]["wall_ms"] = 0.0
        for call in d["tool_calls"]:
            call["started_at"] = call["finished_at"] = "T"
        return d

    assert snapshot() == snapshot()


def test_exprstmt_value_not_printed():
    record = run("1 + 1")
    assert record.printed == []
    assert record.outcome.kind == "success"
