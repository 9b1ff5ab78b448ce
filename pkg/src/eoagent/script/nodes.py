"""AST node types and the pretty-printer for the tool-script dialect.

Node equality ignores source spans so parse(to_source(ast)) == ast holds
structurally. The printer is precedence-aware and emits exactly the
surface grammar the parser accepts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int


def _span_field():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Name:
    id: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class IntLit:
    value: int
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class FloatLit:
    value: float
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class StringLit:
    value: str
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class ListLit:
    items: tuple["Expr", ...]
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Call:
    target: "Expr"
    args: tuple["Expr", ...]
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class MethodCall:
    obj: "Expr"
    method: str
    args: tuple["Expr", ...]
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Index:
    obj: "Expr"
    key: "Expr"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    span: Optional[Span] = _span_field()


Expr = Union[Name, IntLit, FloatLit, StringLit, BoolLit, ListLit, Call, MethodCall, Index, BinOp, Neg]


@dataclass(frozen=True)
class Assign:
    name: str
    value: Expr
    span: Optional[Span] = _span_field()


@dataclass(frozen=True)
class ExprStmt:
    value: Expr
    span: Optional[Span] = _span_field()


Stmt = Union[Assign, ExprStmt]


@dataclass(frozen=True)
class ScriptAst:
    statements: tuple[Stmt, ...]


@dataclass(frozen=True)
class Script:
    """Source text of a generated program and where it came from."""

    source: str
    origin: str = "llm"  # llm | fixture

    def __post_init__(self):
        if not strip_code_fences(self.source).strip():
            raise ValueError("script is empty after code-fence stripping")


_FENCE_RE = re.compile(r"^\s*```[\w+-]*\s*$")


def strip_code_fences(text: str) -> str:
    """Drop markdown fence marker lines; everything else is kept verbatim."""
    lines = [ln for ln in text.splitlines() if not _FENCE_RE.match(ln)]
    return "\n".join(lines)


# precedence tiers of the grammar: cmp < add < mul < unary/postfix < atom
_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=", "in")
_PREC = {**{op: 10 for op in _CMP_OPS}, "+": 20, "-": 20, "*": 30, "/": 30}
_ATOM_PREC = 50
_POST_PREC = 40


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _POST_PREC
    if isinstance(e, (Call, MethodCall, Index)):
        return _POST_PREC
    return _ATOM_PREC


def _escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    return "".join(out)


def _atomish(e: Expr) -> bool:
    return isinstance(e, (Name, IntLit, FloatLit, StringLit, BoolLit, ListLit))


def _fmt(e: Expr) -> str:
    if isinstance(e, Name):
        return e.id
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, FloatLit):
        return repr(e.value)
    if isinstance(e, StringLit):
        return '"' + _escape(e.value) + '"'
    if isinstance(e, BoolLit):
        return "True" if e.value else "False"
    if isinstance(e, ListLit):
        return "[" + ", ".join(_fmt(i) for i in e.items) + "]"
    if isinstance(e, Neg):
        # the grammar's unary minus takes an atom, so anything else gets parens
        inner = _fmt(e.operand)
        if not _atomish(e.operand):
            inner = "(" + inner + ")"
        return "-" + inner
    if isinstance(e, (Call, MethodCall, Index)):
        target = e.target if isinstance(e, Call) else e.obj
        base = _fmt(target)
        # postfix chains hang off atoms or other postfix results
        if isinstance(target, BinOp):
            base = "(" + base + ")"
        elif isinstance(e, MethodCall) and isinstance(target, (IntLit, FloatLit, Neg)):
            base = "(" + base + ")"  # bare `1.sum` would lex as the float `1.`
        if isinstance(e, Call):
            return base + "(" + ", ".join(_fmt(a) for a in e.args) + ")"
        if isinstance(e, MethodCall):
            return base + "." + e.method + "(" + ", ".join(_fmt(a) for a in e.args) + ")"
        return base + "[" + _fmt(e.key) + "]"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = _fmt(e.left)
        if _prec(e.left) < p:
            left = "(" + left + ")"
        right = _fmt(e.right)
        if _prec(e.right) <= p:
            right = "(" + right + ")"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression node: {e!r}")


def to_source(node: Union[ScriptAst, Stmt, Expr]) -> str:
    """Render an AST back to dialect source (one statement per line)."""
    if isinstance(node, ScriptAst):
        return "\n".join(to_source(s) for s in node.statements)
    if isinstance(node, Assign):
        return f"{node.name} = {_fmt(node.value)}"
    if isinstance(node, ExprStmt):
        return _fmt(node.value)
    return _fmt(node)
