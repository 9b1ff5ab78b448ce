"""Static validation of parsed scripts against a tool registry.

A script's calls are valid when every call target is a registered tool
(with conforming arity where the tool declares a schema) or one of the
permitted builtins/methods. Unknown identifiers used as values are
reported as diagnostics but surface at runtime as name errors; they are
an execution problem, not a hallucinated call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .nodes import (
    Assign,
    BinOp,
    Call,
    ExprStmt,
    Index,
    ListLit,
    MethodCall,
    Name,
    Neg,
    ScriptAst,
    Span,
)

#: name -> (min arity, max arity or None for variadic)
PERMITTED_FUNCTIONS = {"print": (0, None), "len": (1, 1), "round": (1, 2), "abs": (1, 1)}
PERMITTED_METHODS = {"sum": (0, 0), "mean": (0, 0), "count": (1, 1)}


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int = 0
    col: int = 0

    def __str__(self):
        return f"line {self.line}, col {self.col}: {self.message}"


@dataclass(frozen=True)
class Verdict:
    syntactically_valid: bool
    calls_valid: bool
    diagnostics: tuple[Diagnostic, ...] = ()

    def __post_init__(self):
        if self.calls_valid and not self.syntactically_valid:
            raise ValueError("calls_valid implies syntactically_valid")

    def to_dict(self) -> dict:
        return {
            "syntactically_valid": self.syntactically_valid,
            "calls_valid": self.calls_valid,
            "diagnostics": [
                {"line": d.line, "col": d.col, "message": d.message} for d in self.diagnostics
            ],
        }

    @staticmethod
    def from_dict(d: dict) -> "Verdict":
        return Verdict(
            syntactically_valid=bool(d["syntactically_valid"]),
            calls_valid=bool(d["calls_valid"]),
            diagnostics=tuple(
                Diagnostic(x["message"], x.get("line", 0), x.get("col", 0))
                for x in d.get("diagnostics", ())
            ),
        )


def syntax_failure(message: str, line: int = 0, col: int = 0) -> Verdict:
    return Verdict(False, False, (Diagnostic(message, line, col),))


def _at(span: Optional[Span]) -> tuple[int, int]:
    return (span.line, span.col) if span else (0, 0)


class _Validator:
    def __init__(self, registry):
        self.registry = registry
        self.assigned: set[str] = set()
        self.diagnostics: list[Diagnostic] = []
        self.calls_ok = True

    def note(self, message: str, span: Optional[Span], *, invalidates: bool):
        line, col = _at(span)
        self.diagnostics.append(Diagnostic(message, line, col))
        if invalidates:
            self.calls_ok = False

    def check_arity(self, what: str, n: int, bounds: Optional[tuple[int, Optional[int]]], span):
        if bounds is None:
            return
        lo, hi = bounds
        if n < lo or (hi is not None and n > hi):
            expected = str(lo) if hi == lo else (f">= {lo}" if hi is None else f"{lo}..{hi}")
            self.note(
                f"{what} takes {expected} argument(s), got {n}", span, invalidates=True
            )

    def visit(self, node):
        if isinstance(node, Name):
            if node.id not in self.assigned:
                self.note(f"unknown identifier {node.id!r}", node.span, invalidates=False)
            return
        if isinstance(node, Call):
            target = node.target
            if isinstance(target, Name):
                name = target.id
                if self.registry is not None and name in self.registry:
                    self.check_arity(f"tool {name!r}", len(node.args), self.registry.arity(name), node.span)
                elif name in PERMITTED_FUNCTIONS:
                    self.check_arity(name, len(node.args), PERMITTED_FUNCTIONS[name], node.span)
                else:
                    self.note(f"unknown tool {name!r}", node.span, invalidates=True)
            else:
                self.note("call target is not a function name", node.span, invalidates=True)
                self.visit(target)
            for a in node.args:
                self.visit(a)
            return
        if isinstance(node, MethodCall):
            if node.method not in PERMITTED_METHODS:
                self.note(f"method {node.method!r} is not permitted", node.span, invalidates=True)
            else:
                self.check_arity(f".{node.method}()", len(node.args), PERMITTED_METHODS[node.method], node.span)
            self.visit(node.obj)
            for a in node.args:
                self.visit(a)
            return
        if isinstance(node, Index):
            self.visit(node.obj)
            self.visit(node.key)
            return
        if isinstance(node, BinOp):
            self.visit(node.left)
            self.visit(node.right)
            return
        if isinstance(node, Neg):
            self.visit(node.operand)
            return
        if isinstance(node, ListLit):
            for i in node.items:
                self.visit(i)
            return
        # literals need no checking


def validate_calls(ast: ScriptAst, registry=None) -> Verdict:
    """Check every call target and declared arity; never raises."""
    v = _Validator(registry)
    for stmt in ast.statements:
        if isinstance(stmt, Assign):
            v.visit(stmt.value)
            v.assigned.add(stmt.name)
        elif isinstance(stmt, ExprStmt):
            v.visit(stmt.value)
    return Verdict(True, v.calls_ok, tuple(v.diagnostics))
