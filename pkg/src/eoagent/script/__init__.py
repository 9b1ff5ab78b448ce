"""The restricted tool-script dialect: AST, parser, validator, interpreter."""

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
    Script,
    ScriptAst,
    Span,
    StringLit,
    strip_code_fences,
    to_source,
)
from .parser import ScriptSyntaxError, parse_script
from .validate import Diagnostic, Verdict, validate_calls
from .interpreter import (
    ResourceLimitExceeded,
    ScriptNameError,
    ScriptRuntimeError,
    ScriptTypeError,
    execute_script,
)
from .record import Attempt, Outcome, RunRecord, Usage, load_run, save_run

__all__ = [
    "Assign",
    "Attempt",
    "BinOp",
    "BoolLit",
    "Call",
    "Diagnostic",
    "ExprStmt",
    "FloatLit",
    "Index",
    "IntLit",
    "ListLit",
    "MethodCall",
    "Name",
    "Neg",
    "Outcome",
    "ResourceLimitExceeded",
    "RunRecord",
    "Script",
    "ScriptAst",
    "ScriptNameError",
    "ScriptRuntimeError",
    "ScriptSyntaxError",
    "ScriptTypeError",
    "Span",
    "StringLit",
    "Usage",
    "Verdict",
    "execute_script",
    "load_run",
    "parse_script",
    "save_run",
    "strip_code_fences",
    "to_source",
    "validate_calls",
]
