"""Hand-written lexer and recursive-descent parser for the Lustre subset.

The grammar is documented in ``docs/grammar.md``.  Parsing stops at the
first error.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, ResolutionError
from .syntax import (
    BUILTINS,
    Binary,
    Call,
    Contract,
    ContractConst,
    ContractItem,
    Equation,
    Ident,
    IfThenElse,
    Literal,
    NodeDecl,
    Param,
    SourceModel,
    Span,
    Unary,
    VarDecl,
    walk,
)

KEYWORDS = {
    "node", "imported", "returns", "var", "let", "tel", "const",
    "assume", "guarantee", "and", "or", "xor", "not", "pre",
    "if", "then", "else", "true", "false", "bool", "int", "real",
}

TYPES = ("bool", "int", "real")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword text, punctuation text, or IDENT / INT / REAL / STRING / CONTRACT / END / EOF
    text: str
    line: int
    column: int
    start: int
    end: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+|\n)
  | (?P<contract>\(\*@contract)
  | (?P<bcomment>\(\*)
  | (?P<lcomment>--[^\n]*)
  | (?P<real>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<end>\*\))
  | (?P<punct>->|=>|<>|<=|>=|[()\[\],;:=<>+\-*/.])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    in_contract = False
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "ws":
            if value == "\n":
                line += 1
                line_start = m.end()
            pos = m.end()
            continue
        if kind == "lcomment":
            pos = m.end()
            continue
        if kind == "bcomment":
            close = text.find("*)", m.end())
            if close < 0:
                raise ParseError("unterminated comment", line, col)
            chunk = text[pos:close + 2]
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rfind("\n") + 1
            pos = close + 2
            continue
        if kind == "contract":
            if in_contract:
                raise ParseError("nested contract block", line, col)
            in_contract = True
            tokens.append(Token("CONTRACT", value, line, col, pos, m.end()))
        elif kind == "end":
            if not in_contract:
                raise ParseError("'*)' outside of a contract block", line, col)
            in_contract = False
            tokens.append(Token("END", value, line, col, pos, m.end()))
        elif kind == "ident":
            tokens.append(Token(value if value in KEYWORDS else "IDENT", value, line, col, pos, m.end()))
        elif kind in ("int", "real", "string"):
            tokens.append(Token(kind.upper(), value, line, col, pos, m.end()))
        else:
            tokens.append(Token(value, value, line, col, pos, m.end()))
        pos = m.end()
    if in_contract:
        raise ParseError("unterminated contract block", line, pos - line_start + 1)
    tokens.append(Token("EOF", "", line, pos - line_start + 1, pos, pos))
    return tokens


def split_label(description: str) -> str:
    """``"C1: THRESH is positive"`` is labelled ``C1``."""
    head, sep, _ = description.partition(":")
    head = head.strip()
    if sep and head and not any(ch.isspace() for ch in head):
        return head
    return description.strip()


def _unescape(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


class Parser:
    # binary operators by precedence level, loosest first; "->" and "=>" are right-associative
    LEVELS = [("->",), ("=>",), ("or", "xor"), ("and",), ("=", "<>", "<", "<=", ">", ">="), ("+", "-"), ("*", "/")]
    RIGHT = {"->", "=>"}

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers --
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def at(self, *kinds) -> bool:
        return self.tok.kind in kinds

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def accept(self, kind):
        if self.tok.kind == kind:
            return self.advance()
        return None

    def expect(self, *kinds) -> Token:
        if self.tok.kind in kinds:
            return self.advance()
        found = self.tok.text or "end of input"
        raise ParseError(f"unexpected {found!r}", self.tok.line, self.tok.column, kinds)

    def span_from(self, first: Token) -> Span:
        last = self.tokens[self.i - 1]
        end_line = last.line
        end_col = last.column + (last.end - last.start)
        return Span(first.line, first.column, end_line, end_col, first.start, last.end)

    # -- declarations --
    def program(self) -> list[NodeDecl]:
        nodes = []
        while not self.at("EOF"):
            nodes.append(self.node())
        return nodes

    def node(self) -> NodeDecl:
        first = self.expect("node")
        imported = self.accept("imported") is not None
        name = self.expect("IDENT").text
        self.expect("(")
        params = self.param_groups(")", allow_const=True)
        self.expect(")")
        self.expect("returns")
        self.expect("(")
        returns = [VarDecl(p.name, p.type, p.span) for p in self.param_groups(")", allow_const=False)]
        self.expect(")")
        self.accept(";")
        contract = self.contract() if self.at("CONTRACT") else None
        locals_, equations, has_body = [], [], False
        if not imported and self.at("var", "let"):
            if self.accept("var"):
                while self.at("IDENT"):
                    locals_.extend(VarDecl(p.name, p.type, p.span) for p in self.decl_group(False))
                    self.expect(";")
            self.expect("let")
            has_body = True
            while not self.at("tel"):
                equations.append(self.equation())
            self.expect("tel")
            if not self.accept(";"):
                self.accept(".")
        elif imported and self.at("var", "let"):
            raise ParseError("imported nodes have no body", self.tok.line, self.tok.column)
        return NodeDecl(
            name, imported, tuple(params), tuple(returns), contract,
            tuple(locals_), tuple(equations), has_body, self.span_from(first),
        )

    def param_groups(self, closer, allow_const) -> list[Param]:
        out = []
        if self.at(closer):
            return out
        while True:
            out.extend(self.decl_group(allow_const))
            if not self.accept(";"):
                break
            if self.at(closer):
                break
        return out

    def decl_group(self, allow_const) -> list[Param]:
        is_const = False
        if allow_const and self.accept("const"):
            is_const = True
        names = [self.expect("IDENT")]
        while self.accept(","):
            names.append(self.expect("IDENT"))
        self.expect(":")
        ty = self.expect(*TYPES).text
        return [
            Param(t.text, ty, is_const, Span(t.line, t.column, t.line, t.column + len(t.text), t.start, t.end))
            for t in names
        ]

    def contract(self) -> Contract:
        first = self.expect("CONTRACT")
        consts, assumes, guarantees = [], [], []
        while not self.at("END"):
            start = self.tok
            if self.accept("const"):
                name = self.expect("IDENT").text
                ty = None
                if self.accept(":"):
                    ty = self.expect(*TYPES).text
                self.expect("=")
                e = self.expr()
                self.expect(";")
                consts.append(ContractConst(name, ty, e, self.span_from(start)))
            elif self.at("assume", "guarantee"):
                kw = self.advance().kind
                desc = ""
                if self.at("STRING"):
                    desc = _unescape(self.advance().text)
                e = self.expr()
                self.expect(";")
                target = assumes if kw == "assume" else guarantees
                label = split_label(desc) if desc else f"{kw}{len(target) + 1}"
                target.append(ContractItem(label, desc, e, self.span_from(start)))
            else:
                self.expect("const", "assume", "guarantee", "END")
        self.expect("END")
        return Contract(tuple(consts), tuple(assumes), tuple(guarantees), self.span_from(first))

    def equation(self) -> Equation:
        first = self.tok
        if self.accept("("):
            lhs = [self.expect("IDENT")]
            while self.accept(","):
                lhs.append(self.expect("IDENT"))
            self.expect(")")
            if len(lhs) != 1:
                raise ParseError("multiple-output equations are not supported", first.line, first.column)
            name = lhs[0].text
        else:
            name = self.expect("IDENT").text
        self.expect("=")
        rhs = self.expr()
        self.expect(";")
        return Equation(name, rhs, self.span_from(first))

    # -- expressions --
    def expr(self, level: int = 0):
        if level == len(self.LEVELS):
            return self.unary()
        ops = self.LEVELS[level]
        first = self.tok
        left = self.expr(level + 1)
        if ops[0] in self.RIGHT:
            if self.at(*ops):
                op = self.advance().kind
                right = self.expr(level)
                return Binary(op, left, right, self.span_from(first))
            return left
        while self.at(*ops):
            op = self.advance().kind
            right = self.expr(level + 1)
            left = Binary(op, left, right, self.span_from(first))
        return left

    def unary(self):
        first = self.tok
        if self.at("not", "-", "pre"):
            op = self.advance().kind
            operand = self.unary()
            return Unary(op, operand, self.span_from(first))
        if self.accept("if"):
            c = self.expr()
            self.expect("then")
            t = self.expr()
            self.expect("else")
            e = self.expr()
            return IfThenElse(c, t, e, self.span_from(first))
        return self.primary()

    def primary(self):
        first = self.tok
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.at("true", "false"):
            t = self.advance()
            return Literal(t.kind == "true", "bool", self.span_from(first))
        if self.at("INT"):
            return Literal(int(self.advance().text), "int", self.span_from(first))
        if self.at("REAL"):
            return Literal(Fraction(self.advance().text), "real", self.span_from(first))
        if self.at("IDENT"):
            name = self.advance().text
            if self.accept("("):
                args = []
                if not self.at(")"):
                    args.append(self.expr())
                    while self.accept(","):
                        args.append(self.expr())
                self.expect(")")
                return Call(name, tuple(args), self.span_from(first))
            return Ident(name, self.span_from(first))
        self.expect("(", "IDENT", "INT", "REAL", "true", "false", "not", "-", "pre", "if")


def parse_program(source_text: str, main: str | None = None) -> SourceModel:
    """Parse and resolve a program.

    The main node is ``main`` when given, else the first non-imported node
    (else the first node).
    """
    nodes = Parser(source_text).program()
    if not nodes:
        raise ParseError("empty program", 1, 1, {"node"})
    if main is None:
        main = next((n.name for n in nodes if not n.imported), nodes[0].name)
    model = SourceModel(tuple(nodes), main, source_text)
    resolve(model)
    return model


def _err(cls, msg, span):
    return cls(msg, span.line or None, span.column or None)


def resolve(model: SourceModel) -> None:
    """Check names: declarations, labels, references and the call graph."""
    names = {}
    for n in model.nodes:
        if n.name in names:
            raise _err(ResolutionError, f"node {n.name} declared twice", n.span)
        if n.name in BUILTINS:
            raise _err(ResolutionError, f"node name {n.name} shadows a builtin", n.span)
        names[n.name] = n
    if model.main not in names:
        raise ResolutionError(f"main node {model.main} is not declared")

    calls = {}
    for n in model.nodes:
        scope = {}
        for d in (*n.params, *n.returns, *n.locals):
            if d.name in scope:
                raise _err(ResolutionError, f"{n.name}: {d.name} declared twice", d.span)
            scope[d.name] = d
        contract_scope = dict(scope)
        callees = set()
        if n.contract:
            seen = set()
            for c in n.contract.consts:
                _check_refs(c.expr, contract_scope, names, n.name, allow_calls=False)
                if c.name in contract_scope:
                    raise _err(ResolutionError, f"{n.name}: {c.name} declared twice", c.span)
                contract_scope[c.name] = c
            for it in (*n.contract.assumes, *n.contract.guarantees):
                if it.label in seen:
                    raise _err(ResolutionError, f"{n.name}: duplicate label {it.label!r}", it.span)
                seen.add(it.label)
                _check_refs(it.expr, contract_scope, names, n.name, allow_calls=False)
        for eq in n.equations:
            if eq.lhs not in scope:
                raise _err(ResolutionError, f"{n.name}: unknown identifier {eq.lhs}", eq.span)
            callees |= _check_refs(eq.rhs, scope, names, n.name, allow_calls=True)
        calls[n.name] = callees

    # cycle detection over the call graph
    state = {}

    def visit(name, path):
        if state.get(name) == 1:
            cycle = " -> ".join([*path, name])
            raise ResolutionError(f"cyclic node calls: {cycle}")
        if state.get(name) == 2:
            return
        state[name] = 1
        for c in sorted(calls[name]):
            visit(c, [*path, name])
        state[name] = 2

    for n in model.nodes:
        visit(n.name, [])


def _check_refs(e, scope, nodes, where, allow_calls) -> set:
    callees = set()
    for sub in walk(e):
        if isinstance(sub, Ident) and sub.name not in scope:
            raise _err(ResolutionError, f"{where}: unknown identifier {sub.name}", sub.span)
        if isinstance(sub, Call):
            if sub.name in BUILTINS:
                continue
            if sub.name not in nodes:
                raise _err(ResolutionError, f"{where}: unknown node {sub.name}", sub.span)
            if not allow_calls:
                raise _err(ResolutionError, f"{where}: node calls are not allowed in contracts", sub.span)
            callees.add(sub.name)
    return callees
