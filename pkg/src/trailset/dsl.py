"""The textual exploration language: lexer, AST, parser and printer.

Scripts are newline- or ``;``-separated statements of the form
``name = expr``; ``#`` starts a comment.  Expressions chain operator calls
(``s0.pivot(:Author).refine(equals(:Year, 2002))``), may carry a trailing
slice (``[0..19]``) and a back-propagation marker (``!``).  Relation paths
are colon-prefixed ids (``:Author:Affiliation``) with ``inverse(:X)`` for
inverted steps; ``%item`` is the placeholder inside score and mapping
bodies.

``parse`` and ``print_ast`` round-trip: printing an AST and reparsing it
yields a structurally identical AST.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .model import RelationPath, TrailsetError

OPERATOR_NAMES = frozenset(
    {
        "pivot", "refine", "group", "rank", "slice", "correlate",
        "thmap", "ahmap", "chmap", "tvmap", "avmap", "cvmap",
        "unite", "intersect", "diff", "branch", "register",
    }
)
PREDICATE_NAMES = frozenset(
    {
        "equals", "equalsOne", "matchAll", "matchOne", "not", "and", "or",
        "greaterThan", "contains", "true", "pattern",
    }
)
FUNC_NAMES = frozenset({"c", "round", "type_pair"})

RESERVED_SOURCES = ("d", "irs")


class ParseError(TrailsetError):
    def __init__(self, message: str, line: int, col: int, expected: Sequence[str] = ()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        hint = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{line}:{col}: {message}{hint}")


# -- tokens -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<ws>[ \t\r]+)
  | (?P<dotdot>\.\.)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<colonid>:[A-Za-z_][A-Za-z0-9_]*)
  | (?P<placeholder>%item)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<punct>[().,\[\]{}=;!*+\-|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    type: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup or ""
        value = m.group()
        if kind == "newline":
            tokens.append(Token("newline", value, line, col))
            line += 1
            col = 1
        else:
            if kind not in ("ws", "comment"):
                if kind == "punct":
                    kind = value
                tokens.append(Token(kind, value, line, col))
            col += len(value)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


# -- AST ----------------------------------------------------------------


@dataclass(frozen=True)
class Node:
    pass


@dataclass(frozen=True)
class Source(Node):
    name: str


@dataclass(frozen=True)
class SetLit(Node):
    ids: tuple[str, ...]


@dataclass(frozen=True)
class Num(Node):
    value: int | float


@dataclass(frozen=True)
class Str(Node):
    value: str


@dataclass(frozen=True)
class ItemPh(Node):
    pass


@dataclass(frozen=True)
class RelPathLit(Node):
    """Surface form of a relation path; parts are ``:name`` strings or
    nested inverse(...) groups."""

    parts: tuple["str | RelPathLit", ...]
    inverted: bool = False  # True when this node is inverse(...)

    def to_model(self) -> RelationPath:
        steps: list[tuple[str, bool]] = []

        def emit(parts: tuple, inverted: bool, flip: bool) -> None:
            # emitting the inverse of a composition reverses the order and
            # inverts every step
            f = flip != inverted
            for part in reversed(parts) if f else parts:
                if isinstance(part, RelPathLit):
                    emit(part.parts, part.inverted, f)
                else:
                    steps.append((part, f))

        emit(self.parts, self.inverted, False)
        return RelationPath(tuple(steps))


@dataclass(frozen=True)
class RelLookup(Node):
    """``:Path[%item]`` style image lookup inside a value expression."""

    path: RelPathLit
    arg: Node


@dataclass(frozen=True)
class FuncCall(Node):
    """Utility function application: c(%item), round(x, 2), type_pair(:T)."""

    name: str
    args: tuple[Node, ...]


@dataclass(frozen=True)
class ValBin(Node):
    op: str  # + - *
    left: Node
    right: Node


@dataclass(frozen=True)
class Neg(Node):
    operand: Node


@dataclass(frozen=True)
class Pred(Node):
    name: str
    args: tuple[Node, ...]


@dataclass(frozen=True)
class Kwarg(Node):
    name: str
    value: Node


@dataclass(frozen=True)
class OpCall(Node):
    op: str
    receiver: Node | None
    args: tuple[Node, ...]
    slice: tuple[int, int] | None = None


@dataclass(frozen=True)
class Bang(Node):
    inner: Node


@dataclass(frozen=True)
class Stmt(Node):
    name: str | None
    expr: Node


@dataclass(frozen=True)
class Script(Node):
    statements: tuple[Stmt, ...] = field(default_factory=tuple)


# -- parser -------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "eof":
            self.pos += 1
        return tok

    def expect(self, type_: str) -> Token:
        tok = self.peek()
        if tok.type != type_:
            raise ParseError(
                f"unexpected {tok.text or 'end of input'!r}", tok.line, tok.col, [type_]
            )
        return self.next()

    def skip_separators(self) -> None:
        while self.peek().type in ("newline", ";"):
            self.next()

    def error(self, message: str, expected: Sequence[str] = ()) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col, expected)

    # script / statements

    def parse_script(self) -> Script:
        statements: list[Stmt] = []
        self.skip_separators()
        while self.peek().type != "eof":
            statements.append(self.parse_statement())
            if self.peek().type not in ("newline", ";", "eof"):
                raise self.error(
                    f"unexpected {self.peek().text!r} after statement",
                    ["newline", ";"],
                )
            self.skip_separators()
        return Script(tuple(statements))

    def parse_statement(self) -> Stmt:
        name = None
        if self.peek().type == "ident" and self.peek(1).type == "=":
            name = self.next().text
            self.next()  # "="
        expr = self.parse_expr()
        return Stmt(name, expr)

    # expressions

    def parse_expr(self) -> Node:
        node = self.parse_arg()
        return node

    def parse_arg(self) -> Node:
        """One argument: a chained expression, a relation path, a predicate,
        a value expression, a literal, or a kwarg."""
        if self.peek().type == "ident" and self.peek(1).type == "=":
            name = self.next().text
            self.next()
            return Kwarg(name, self.parse_arg())
        return self.parse_additive()

    def parse_additive(self) -> Node:
        node = self.parse_multiplicative()
        while self.peek().type in ("+", "-"):
            op = self.next().text
            right = self.parse_multiplicative()
            node = ValBin(op, node, right)
        return node

    def parse_multiplicative(self) -> Node:
        node = self.parse_unary()
        while self.peek().type == "*":
            self.next()
            right = self.parse_unary()
            node = ValBin("*", node, right)
        return node

    def parse_unary(self) -> Node:
        if self.peek().type == "-":
            self.next()
            operand = self.parse_unary()
            if isinstance(operand, Num):
                return Num(-operand.value)
            return Neg(operand)
        return self.parse_postfix()

    def parse_postfix(self) -> Node:
        node = self.parse_atom()
        while True:
            tok = self.peek()
            if tok.type == ".":
                self.next()
                name_tok = self.expect("ident")
                if name_tok.text not in OPERATOR_NAMES:
                    raise ParseError(
                        f"unknown operator {name_tok.text!r}",
                        name_tok.line,
                        name_tok.col,
                        sorted(OPERATOR_NAMES)[:4] + ["..."],
                    )
                args = self.parse_call_args()
                slc = self.parse_slice()
                node = OpCall(name_tok.text, node, args, slc)
            elif tok.type == "!":
                self.next()
                node = Bang(node)
            else:
                break
        return node

    def parse_atom(self) -> Node:
        tok = self.peek()
        if tok.type == "number":
            self.next()
            return Num(float(tok.text) if "." in tok.text else int(tok.text))
        if tok.type == "string":
            self.next()
            return Str(_unquote(tok.text))
        if tok.type == "placeholder":
            self.next()
            return ItemPh()
        if tok.type == "{":
            return self.parse_setlit()
        if tok.type == "(":
            self.next()
            inner = self.parse_additive()
            self.expect(")")
            return inner
        if tok.type == "colonid":
            return self.parse_relpath_postfix()
        if tok.type == "ident":
            if tok.text == "inverse" and self.peek(1).type == "(":
                return self.parse_relpath_postfix()
            if self.peek(1).type == "(":
                return self.parse_named_call()
            self.next()
            return Source(tok.text)
        raise self.error(f"unexpected {tok.text or 'end of input'!r}",
                         ["identifier", "number", "string", ":relation"])

    def parse_named_call(self) -> Node:
        name_tok = self.next()
        name = name_tok.text
        if name in OPERATOR_NAMES:
            args = self.parse_call_args()
            slc = self.parse_slice()
            return OpCall(name, None, args, slc)
        if name in PREDICATE_NAMES:
            args = self.parse_call_args()
            return Pred(name, args)
        if name in FUNC_NAMES:
            args = self.parse_call_args()
            return FuncCall(name, args)
        raise ParseError(
            f"unknown operator {name!r}", name_tok.line, name_tok.col,
            ["an operator, predicate or function name"],
        )

    def parse_call_args(self) -> tuple[Node, ...]:
        self.expect("(")
        args: list[Node] = []
        if self.peek().type != ")":
            args.append(self.parse_arg())
            while self.peek().type == ",":
                self.next()
                args.append(self.parse_arg())
        self.expect(")")
        return tuple(args)

    def parse_slice(self) -> tuple[int, int] | None:
        if self.peek().type != "[":
            return None
        self.next()
        start = int(self.expect("number").text)
        self.expect("dotdot")
        stop = int(self.expect("number").text)
        self.expect("]")
        return (start, stop)

    def parse_setlit(self) -> SetLit:
        self.expect("{")
        ids = [self.expect("ident").text]
        while self.peek().type == ",":
            self.next()
            ids.append(self.expect("ident").text)
        self.expect("}")
        return SetLit(tuple(ids))

    def parse_relpath_postfix(self) -> Node:
        path = self.parse_relpath()
        if self.peek().type == "[":
            self.next()
            inner = self.parse_additive()
            self.expect("]")
            return RelLookup(path, inner)
        return path

    def parse_relpath(self) -> RelPathLit:
        parts: list[str | RelPathLit] = []
        while True:
            tok = self.peek()
            if tok.type == "colonid":
                self.next()
                parts.append(tok.text)
            elif tok.type == "ident" and tok.text == "inverse" and self.peek(1).type == "(":
                self.next()
                self.expect("(")
                inner = self.parse_relpath()
                self.expect(")")
                parts.append(RelPathLit(inner.parts, inverted=True))
            else:
                break
        if not parts:
            raise self.error("expected a relation path", [":relation"])
        if len(parts) == 1 and isinstance(parts[0], RelPathLit):
            return parts[0]
        return RelPathLit(tuple(parts))


def _unquote(text: str) -> str:
    return text[1:-1].replace('\\"', '"').replace("\\\\", "\\")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def parse(text: str) -> Node:
    """Parse a single expression."""
    parser = _Parser(tokenize(text))
    parser.skip_separators()
    if parser.peek().type == "eof":
        raise ParseError("empty input", parser.peek().line, parser.peek().col,
                         ["an expression"])
    node = parser.parse_expr()
    parser.skip_separators()
    tok = parser.peek()
    if tok.type != "eof":
        raise ParseError(f"unexpected trailing {tok.text!r}", tok.line, tok.col)
    return node


def parse_script(text: str) -> Script:
    return _Parser(tokenize(text)).parse_script()


def parse_statement(text: str) -> Stmt:
    parser = _Parser(tokenize(text))
    parser.skip_separators()
    stmt = parser.parse_statement()
    parser.skip_separators()
    tok = parser.peek()
    if tok.type != "eof":
        raise ParseError(f"unexpected trailing {tok.text!r}", tok.line, tok.col)
    return stmt


# -- printer ------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2}


def print_ast(node: Node) -> str:
    """Canonical text for any AST node; parse(print_ast(x)) ≡ x."""
    if isinstance(node, Script):
        return "\n".join(print_ast(s) for s in node.statements)
    if isinstance(node, Stmt):
        body = print_ast(node.expr)
        return f"{node.name} = {body}" if node.name else body
    if isinstance(node, Bang):
        return print_ast(node.inner) + "!"
    if isinstance(node, Source):
        return node.name
    if isinstance(node, SetLit):
        return "{" + ", ".join(node.ids) + "}"
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Str):
        return _quote(node.value)
    if isinstance(node, ItemPh):
        return "%item"
    if isinstance(node, RelPathLit):
        chunks: list[str] = []
        for p in node.parts:
            text = print_ast(p) if isinstance(p, RelPathLit) else p
            # an inverse(...) group directly after a :segment needs a space,
            # otherwise the segment and the word "inverse" fuse when lexed
            if chunks and not text.startswith(":"):
                chunks.append(" ")
            chunks.append(text)
        inner = "".join(chunks)
        return f"inverse({inner})" if node.inverted else inner
    if isinstance(node, RelLookup):
        return f"{print_ast(node.path)}[{print_ast(node.arg)}]"
    if isinstance(node, FuncCall):
        return f"{node.name}({', '.join(print_ast(a) for a in node.args)})"
    if isinstance(node, Neg):
        return f"-{_maybe_paren(node.operand, 3)}"
    if isinstance(node, ValBin):
        prec = _PREC[node.op]
        left = _maybe_paren(node.left, prec, allow_equal=True)
        right = _maybe_paren(node.right, prec, allow_equal=False)
        return f"{left} {node.op} {right}"
    if isinstance(node, Pred):
        return f"{node.name}({', '.join(print_ast(a) for a in node.args)})"
    if isinstance(node, Kwarg):
        return f"{node.name}={print_ast(node.value)}"
    if isinstance(node, OpCall):
        args = ", ".join(print_ast(a) for a in node.args)
        if node.receiver is not None:
            text = f"{_receiver_text(node.receiver)}.{node.op}({args})"
        else:
            text = f"{node.op}({args})"
        if node.slice is not None:
            text += f"[{node.slice[0]}..{node.slice[1]}]"
        return text
    raise TypeError(f"cannot print {node!r}")


def _receiver_text(node: Node) -> str:
    text = print_ast(node)
    # A negative-number or arithmetic receiver never occurs; sources, calls
    # and setlits print unparenthesised.
    return text


def _maybe_paren(node: Node, parent_prec: int, allow_equal: bool = True) -> str:
    text = print_ast(node)
    if isinstance(node, ValBin):
        prec = _PREC[node.op]
        if prec < parent_prec or (prec == parent_prec and not allow_equal):
            return f"({text})"
    if isinstance(node, Neg) and parent_prec >= 3:
        return f"({text})"
    return text
