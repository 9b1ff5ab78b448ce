"""Guarded evaluator for validated scripts.

Statements run in order within a single lexical scope. The evaluator can
reach nothing beyond registered tools and the permitted builtins and
methods; every effect is either a logged tool call or a printed line.
Step count, wall clock, value-store size, and tool-call count are capped
by the execution context's limits.
"""

from __future__ import annotations

import time
from typing import Optional

import numpy as np

from ..context import ExecutionContext, Limits
from ..raster import Mask, Raster
from ..tools.errors import ToolError
from .nodes import (
    Assign,
    BinOp,
    BoolLit,
    Call,
    ExprStmt,
    FloatLit,
    Index,
    IntLit,
    ListLit,
    MethodCall,
    Name,
    Neg,
    ScriptAst,
    StringLit,
    to_source,
)
from .record import Outcome, RunRecord, utc_now


class ScriptRuntimeError(Exception):
    """Execution failure; str() of it becomes the recorded outcome message."""


class ScriptNameError(ScriptRuntimeError):
    pass


class ScriptTypeError(ScriptRuntimeError):
    pass


class ResourceLimitExceeded(ScriptRuntimeError):
    def __init__(self, which: str, detail: str = ""):
        message = f"resource limit exceeded: {which}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
        self.which = which


def _value_bytes(v) -> int:
    if isinstance(v, Raster):
        return int(v.data.nbytes) + 256
    if isinstance(v, Mask):
        return int(v.values.nbytes) + 128
    if isinstance(v, str):
        return 56 + len(v)
    if isinstance(v, (list, tuple)):
        return 64 + sum(_value_bytes(x) for x in v)
    return 16


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _type_name(v) -> str:
    if isinstance(v, Raster):
        return "raster"
    if isinstance(v, Mask):
        return "mask"
    return type(v).__name__


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return v
    if isinstance(v, list):
        return "[" + ", ".join(_fmt_element(x) for x in v) + "]"
    return repr(v)


def _fmt_element(v) -> str:
    if isinstance(v, str):
        return repr(v)
    return _fmt_value(v)


class _Evaluator:
    def __init__(self, registry, ctx: ExecutionContext, record: RunRecord):
        self.registry = registry
        self.ctx = ctx
        self.limits: Limits = ctx.limits
        self.record = record
        self.env: dict[str, object] = {}
        self.steps = 0
        self.peak_bytes = 0
        self.t0 = time.monotonic()

    # --- limits -----------------------------------------------------------

    def _tick(self):
        self.steps += 1
        if self.steps > self.limits.max_steps:
            raise ResourceLimitExceeded("steps", f"more than {self.limits.max_steps}")
        if self.steps % 512 == 0:
            self._check_wall()

    def _check_wall(self):
        if time.monotonic() - self.t0 > self.limits.max_wall_s:
            raise ResourceLimitExceeded("wall_clock", f"more than {self.limits.max_wall_s}s")

    def _env_bytes(self) -> int:
        return sum(_value_bytes(v) for v in self.env.values())

    def _check_store(self, extra: int = 0):
        total = self._env_bytes() + extra
        self.peak_bytes = max(self.peak_bytes, total)
        if total > self.limits.max_value_bytes:
            raise ResourceLimitExceeded(
                "value_store", f"{total} bytes > {self.limits.max_value_bytes}"
            )

    # --- execution ----------------------------------------------------------

    def run(self, ast: ScriptAst):
        for stmt in ast.statements:
            self._tick()
            self._check_wall()
            if isinstance(stmt, Assign):
                value = self.eval(stmt.value)
                self.env[stmt.name] = value
                self._check_store()
            else:
                self.eval(stmt.value)

    def eval(self, node):
        self._tick()
        if isinstance(node, IntLit):
            return node.value
        if isinstance(node, FloatLit):
            return node.value
        if isinstance(node, StringLit):
            return node.value
        if isinstance(node, BoolLit):
            return node.value
        if isinstance(node, Name):
            if node.id not in self.env:
                raise ScriptNameError(f"name {node.id!r} is not defined")
            return self.env[node.id]
        if isinstance(node, ListLit):
            items = []
            for item in node.items:
                items.append(self.eval(item))
            self._check_store(_value_bytes(items))
            return items
        if isinstance(node, Neg):
            v = self.eval(node.operand)
            if not _is_num(v):
                raise ScriptTypeError(f"unary minus needs a number, got {_type_name(v)}")
            return -v
        if isinstance(node, BinOp):
            return self._binop(node)
        if isinstance(node, Index):
            return self._index(node)
        if isinstance(node, MethodCall):
            return self._method(node)
        if isinstance(node, Call):
            return self._call(node)
        raise ScriptRuntimeError(f"cannot evaluate node {type(node).__name__}")

    # --- operators ------------------------------------------------------------

    def _binop(self, node: BinOp):
        op = node.op
        left = self.eval(node.left)
        right = self.eval(node.right)
        if op == "in":
            return self._contains(left, right)
        if op in ("+", "-", "*", "/"):
            return self._arith(op, left, right)
        return self._compare(op, left, right)

    def _arith(self, op, left, right):
        if _is_num(left) and _is_num(right):
            if op == "+":
                return left + right
            if op == "-":
                return left - right
            if op == "*":
                return left * right
            if right == 0:
                raise ScriptRuntimeError("division by zero")
            return left / right
        if op == "+" and isinstance(left, str) and isinstance(right, str):
            return left + right
        if op == "+" and isinstance(left, list) and isinstance(right, list):
            self._check_store(_value_bytes(left) + _value_bytes(right))
            return left + right
        raise ScriptTypeError(
            f"operator {op!r} not defined for {_type_name(left)} and {_type_name(right)}"
        )

    def _grid_compare(self, op, values, k, valid=None):
        ops = {
            "==": np.equal, "!=": np.not_equal, "<": np.less,
            "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
        }
        result = ops[op](values, k)
        if valid is not None:
            result = result & valid
        return Mask(values=result)

    def _compare(self, op, left, right):
        scalar = (int, float, bool)
        if isinstance(left, Mask) and isinstance(right, scalar):
            return self._grid_compare(op, left.values, right)
        if isinstance(right, Mask) and isinstance(left, scalar):
            flipped = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}
            return self._grid_compare(flipped[op], right.values, left)
        if isinstance(left, Raster) and isinstance(right, scalar):
            if left.band_count != 1:
                raise ScriptTypeError("comparing a multi-band raster needs a single band")
            valid = None
            if left.nodata is not None:
                valid = left.data[0] != np.float32(left.nodata)
            return self._grid_compare(op, left.data[0], right, valid)
        if isinstance(left, (Mask, Raster)) or isinstance(right, (Mask, Raster)):
            raise ScriptTypeError(
                f"operator {op!r} not defined for {_type_name(left)} and {_type_name(right)}"
            )
        if isinstance(left, scalar) and isinstance(right, (str, list)):
            raise ScriptTypeError(f"cannot compare number with {_type_name(right)}")
        if isinstance(left, (str, list)) and isinstance(right, scalar):
            raise ScriptTypeError(f"cannot compare {_type_name(left)} with number")
        try:
            if op == "==":
                return bool(left == right)
            if op == "!=":
                return bool(left != right)
            if isinstance(left, scalar) and isinstance(right, scalar):
                return bool({"<": left < right, "<=": left <= right,
                             ">": left > right, ">=": left >= right}[op])
            if isinstance(left, str) and isinstance(right, str):
                return bool({"<": left < right, "<=": left <= right,
                             ">": left > right, ">=": left >= right}[op])
        except TypeError:
            pass
        raise ScriptTypeError(
            f"operator {op!r} not defined for {_type_name(left)} and {_type_name(right)}"
        )

    def _contains(self, needle, haystack):
        if isinstance(haystack, Mask):
            if not isinstance(needle, (int, float, bool)):
                raise ScriptTypeError("mask membership needs a class id")
            return bool(np.any(haystack.values == needle))
        if isinstance(haystack, list):
            try:
                return needle in haystack
            except (TypeError, ValueError):
                raise ScriptTypeError(
                    f"cannot test membership of {_type_name(needle)} in this list"
                ) from None
        if isinstance(haystack, str):
            if not isinstance(needle, str):
                raise ScriptTypeError("string membership needs a string")
            return needle in haystack
        raise ScriptTypeError(f"'in' not defined for {_type_name(haystack)}")

    # --- postfix ---------------------------------------------------------------

    def _index(self, node: Index):
        obj = self.eval(node.obj)
        key = self.eval(node.key)
        if isinstance(obj, (list, str)):
            if not isinstance(key, int) or isinstance(key, bool):
                raise ScriptTypeError("index must be an integer")
            try:
                return obj[key]
            except IndexError:
                raise ScriptRuntimeError("index out of range") from None
        raise ScriptTypeError(f"{_type_name(obj)} is not indexable")

    def _raster_valid_values(self, r: Raster):
        if r.band_count != 1:
            raise ScriptTypeError("sum/mean need a single-band raster")
        plane = r.data[0]
        if r.nodata is None:
            return plane.reshape(-1)
        return plane[plane != np.float32(r.nodata)]

    def _method(self, node: MethodCall):
        obj = self.eval(node.obj)
        args = [self.eval(a) for a in node.args]
        m = node.method
        if m == "sum" and not args:
            if isinstance(obj, Mask):
                if obj.is_boolean:
                    return int(obj.values.sum())
                return int(obj.values.sum(dtype=np.int64))
            if isinstance(obj, Raster):
                return float(self._raster_valid_values(obj).sum(dtype=np.float64))
            if isinstance(obj, list):
                if not all(_is_num(x) or isinstance(x, bool) for x in obj):
                    raise ScriptTypeError("sum needs a list of numbers")
                return sum(obj)
            raise ScriptTypeError(f"{_type_name(obj)} has no sum()")
        if m == "mean" and not args:
            if isinstance(obj, Mask):
                return float(obj.values.mean(dtype=np.float64))
            if isinstance(obj, Raster):
                values = self._raster_valid_values(obj)
                if values.size == 0:
                    raise ScriptRuntimeError("mean of an all-nodata raster")
                return float(values.mean(dtype=np.float64))
            if isinstance(obj, list):
                if not obj or not all(_is_num(x) or isinstance(x, bool) for x in obj):
                    raise ScriptTypeError("mean needs a nonempty list of numbers")
                return sum(obj) / len(obj)
            raise ScriptTypeError(f"{_type_name(obj)} has no mean()")
        if m == "count" and len(args) == 1:
            needle = args[0]
            if isinstance(obj, Mask):
                return int(np.count_nonzero(obj.values == needle))
            if isinstance(obj, Raster):
                if obj.band_count != 1:
                    raise ScriptTypeError("count needs a single-band raster")
                return int(np.count_nonzero(obj.data[0] == needle))
            if isinstance(obj, list):
                return obj.count(needle)
            raise ScriptTypeError(f"{_type_name(obj)} has no count()")
        raise ScriptTypeError(f"method {m!r} with {len(args)} argument(s) is not permitted")

    # --- calls ---------------------------------------------------------------------

    def _call(self, node: Call):
        if not isinstance(node.target, Name):
            raise ScriptTypeError("call target is not a function name")
        name = node.target.id
        args = [self.eval(a) for a in node.args]
        if name == "print":
            self.record.printed.append(" ".join(_fmt_value(a) for a in args))
            return None
        if name == "len":
            if len(args) != 1 or not isinstance(args[0], (list, str)):
                raise ScriptTypeError("len takes one list or string")
            return len(args[0])
        if name == "round":
            if not args or not _is_num(args[0]):
                raise ScriptTypeError("round takes a number")
            if len(args) == 1:
                return round(args[0])
            if len(args) == 2 and isinstance(args[1], int):
                return round(args[0], args[1])
            raise ScriptTypeError("round takes a number and an optional digit count")
        if name == "abs":
            if len(args) != 1 or not _is_num(args[0]):
                raise ScriptTypeError("abs takes one number")
            return abs(args[0])
        if self.registry is None or name not in self.registry:
            raise ScriptNameError(f"unknown tool {name!r}")
        if len(self.record.tool_calls) >= self.limits.max_tool_calls:
            raise ResourceLimitExceeded(
                "tool_calls", f"more than {self.limits.max_tool_calls}"
            )
        result = self.registry.invoke(name, args, ctx=self.ctx, calls=self.record.tool_calls)
        self._check_store(_value_bytes(result))
        return result


def execute_script(
    ast: ScriptAst,
    registry,
    ctx: Optional[ExecutionContext] = None,
    script_source: str = "",
) -> RunRecord:
    """Run a validated AST and return the full audit record."""
    ctx = ctx or ExecutionContext()
    record = RunRecord(script=script_source or to_source(ast))
    evaluator = _Evaluator(registry, ctx, record)
    try:
        evaluator.run(ast)
        record.outcome = Outcome("success")
    except (ScriptRuntimeError, ToolError) as exc:
        record.outcome = Outcome("runtime_error", str(exc))
    record.usage.steps = evaluator.steps
    record.usage.wall_ms = (time.monotonic() - evaluator.t0) * 1000.0
    record.usage.peak_value_bytes = evaluator.peak_bytes
    record.artifacts = list(ctx.artifacts)
    record.finished_at = utc_now()
    return record
