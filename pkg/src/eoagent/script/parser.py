"""Recursive-descent parser for the tool-script dialect.

Grammar:
    program = {stmt NEWLINE}
    stmt    = IDENT "=" expr | expr
    expr    = cmp
    cmp     = add {("==" | "!=" | "<" | "<=" | ">" | ">=" | "in") add}
    add     = mul {("+" | "-") mul}
    mul     = post {("*" | "/") post}
    post    = atom {"(" args ")" | "." IDENT "(" args ")" | "[" expr "]"}
    atom    = IDENT | NUMBER | STRING | "True" | "False"
            | "[" args "]" | "(" expr ")" | "-" atom
"""

from __future__ import annotations

from typing import Union

from .lexer import LexError, Token, tokenize
from .nodes import (
    Assign,
    BinOp,
    BoolLit,
    Call,
    Expr,
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
)

_CMP_OPS = ("==", "!=", "<", "<=", ">", ">=")


class ScriptSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ScriptSyntaxError(message, tok.line, tok.col)

    def expect_op(self, op: str) -> Token:
        tok = self.peek()
        if tok.kind != "OP" or tok.text != op:
            self.fail(f"expected {op!r}")
        return self.next()

    def at_op(self, *ops: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.text in ops

    # --- grammar rules ---------------------------------------------------

    def program(self) -> ScriptAst:
        statements = []
        while self.peek().kind != "EOF":
            if self.peek().kind == "NEWLINE":
                self.next()
                continue
            statements.append(self.statement())
            tok = self.peek()
            if tok.kind == "NEWLINE":
                self.next()
            elif tok.kind != "EOF":
                self.fail("expected end of statement")
        return ScriptAst(tuple(statements))

    def statement(self):
        tok = self.peek()
        if tok.kind == "IDENT" and tok.text not in ("True", "False", "in"):
            nxt = self.peek(1)
            if nxt.kind == "OP" and nxt.text == "=":
                self.next()
                self.next()
                value = self.expression()
                return Assign(tok.text, value, span=Span(tok.line, tok.col))
        value = self.expression()
        return ExprStmt(value, span=Span(tok.line, tok.col))

    def expression(self) -> Expr:
        return self.cmp()

    def cmp(self) -> Expr:
        node = self.add()
        while True:
            tok = self.peek()
            if tok.kind == "OP" and tok.text in _CMP_OPS:
                self.next()
                node = BinOp(tok.text, node, self.add(), span=Span(tok.line, tok.col))
            elif tok.kind == "IDENT" and tok.text == "in":
                self.next()
                node = BinOp("in", node, self.add(), span=Span(tok.line, tok.col))
            else:
                return node

    def add(self) -> Expr:
        node = self.mul()
        while self.at_op("+", "-"):
            tok = self.next()
            node = BinOp(tok.text, node, self.mul(), span=Span(tok.line, tok.col))
        return node

    def mul(self) -> Expr:
        node = self.post()
        while self.at_op("*", "/"):
            tok = self.next()
            node = BinOp(tok.text, node, self.post(), span=Span(tok.line, tok.col))
        return node

    def post(self) -> Expr:
        node = self.atom()
        while True:
            tok = self.peek()
            if self.at_op("("):
                self.next()
                args = self.args(")")
                node = Call(node, args, span=Span(tok.line, tok.col))
            elif self.at_op("."):
                self.next()
                name = self.peek()
                if name.kind != "IDENT":
                    self.fail("expected method name after '.'")
                self.next()
                self.expect_op("(")
                args = self.args(")")
                node = MethodCall(node, name.text, args, span=Span(tok.line, tok.col))
            elif self.at_op("["):
                self.next()
                key = self.expression()
                self.expect_op("]")
                node = Index(node, key, span=Span(tok.line, tok.col))
            else:
                return node

    def args(self, closer: str) -> tuple[Expr, ...]:
        items = []
        if self.at_op(closer):
            self.next()
            return tuple(items)
        while True:
            items.append(self.expression())
            if self.at_op(","):
                self.next()
                continue
            if self.at_op(closer):
                self.next()
                return tuple(items)
            self.fail(f"expected ',' or {closer!r}")

    def atom(self) -> Expr:
        tok = self.peek()
        span = Span(tok.line, tok.col)
        if tok.kind == "NUMBER":
            self.next()
            text = tok.text
            if "." in text or "e" in text or "E" in text:
                return FloatLit(float(text), span=span)
            return IntLit(int(text), span=span)
        if tok.kind == "STRING":
            self.next()
            return StringLit(tok.text, span=span)
        if tok.kind == "IDENT":
            if tok.text == "True":
                self.next()
                return BoolLit(True, span=span)
            if tok.text == "False":
                self.next()
                return BoolLit(False, span=span)
            if tok.text == "in":
                self.fail("'in' is an operator, not a value")
            self.next()
            return Name(tok.text, span=span)
        if self.at_op("["):
            self.next()
            items = self.args("]")
            return ListLit(items, span=span)
        if self.at_op("("):
            self.next()
            inner = self.expression()
            self.expect_op(")")
            return inner
        if self.at_op("-"):
            self.next()
            return Neg(self.atom(), span=span)
        self.fail(f"unexpected token {tok.text or tok.kind!r}")


def parse_script(script: Union[Script, str]) -> ScriptAst:
    """Parse dialect source into an AST; raises ScriptSyntaxError."""
    source = script.source if isinstance(script, Script) else script
    try:
        tokens = tokenize(source)
    except LexError as exc:
        raise ScriptSyntaxError(exc.message, exc.line, exc.col) from None
    return _Parser(tokens).program()
