"""Abstract syntax of the accepted Lustre subset, plus a pretty-printer.

Spans never take part in equality, so a re-parsed pretty-printed model
compares equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    end_line: int
    end_column: int
    start: int = 0
    end: int = 0

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def __str__(self):
        return f"{self.line}:{self.column}-{self.end_line}:{self.end_column}"


NO_SPAN = Span(0, 0, 0, 0)


def _span():
    return field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Literal:
    value: Union[bool, int, Fraction]
    type: str  # "bool" | "int" | "real"
    span: Span = _span()


@dataclass(frozen=True)
class Ident:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Unary:
    op: str  # "not" | "-" | "pre"
    operand: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class Binary:
    op: str  # arithmetic, comparison, "and", "or", "xor", "=>", "->"
    left: "Expr"
    right: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class IfThenElse:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    span: Span = _span()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    span: Span = _span()


Expr = Union[Literal, Ident, Unary, Binary, IfThenElse, Call]

BUILTINS = {"abs": 1, "min": 2}


@dataclass(frozen=True)
class Param:
    name: str
    type: str
    const: bool = False
    span: Span = _span()


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: str
    span: Span = _span()


@dataclass(frozen=True)
class ContractConst:
    name: str
    type: Optional[str]
    expr: Expr
    span: Span = _span()


@dataclass(frozen=True)
class ContractItem:
    """A named assumption or guarantee."""

    label: str
    description: str
    expr: Expr
    span: Span = _span()


@dataclass(frozen=True)
class Contract:
    consts: tuple = ()
    assumes: tuple = ()
    guarantees: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class Equation:
    lhs: str
    rhs: Expr
    span: Span = _span()


@dataclass(frozen=True)
class NodeDecl:
    name: str
    imported: bool
    params: tuple
    returns: tuple
    contract: Optional[Contract] = None
    locals: tuple = ()
    equations: tuple = ()
    has_body: bool = False
    span: Span = _span()

    def inputs(self):
        return {p.name: p for p in self.params}

    def outputs(self):
        return {r.name: r for r in self.returns}


@dataclass(frozen=True)
class SourceModel:
    nodes: tuple
    main: str
    text: str = field(default="", compare=False, repr=False)

    def node(self, name: str) -> NodeDecl:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)


def walk(e: Expr):
    """Pre-order traversal of an expression tree."""
    stack = [e]
    while stack:
        cur = stack.pop()
        yield cur
        if isinstance(cur, Unary):
            stack.append(cur.operand)
        elif isinstance(cur, Binary):
            stack.extend((cur.right, cur.left))
        elif isinstance(cur, IfThenElse):
            stack.extend((cur.orelse, cur.then, cur.cond))
        elif isinstance(cur, Call):
            stack.extend(reversed(cur.args))


# -- pretty printing -------------------------------------------------------------
# Fully parenthesised: the printer is used for round trips and dumps, not for looks.

def format_literal(lit: Literal) -> str:
    if lit.type == "bool":
        return "true" if lit.value else "false"
    if lit.type == "int":
        return str(lit.value)
    v = Fraction(lit.value)
    if v.denominator == 1:
        return f"{v.numerator}.0"
    # exact decimal when the denominator is a product of 2s and 5s
    d, twos, fives = v.denominator, 0, 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d == 1:
        digits = max(twos, fives)
        scaled = v * 10**digits
        sign = "-" if scaled < 0 else ""
        n = abs(scaled.numerator)
        whole, frac = divmod(n, 10**digits)
        return f"{sign}{whole}.{frac:0{digits}d}"
    return f"({v.numerator}.0 / {v.denominator}.0)"


def format_expr(e: Expr) -> str:
    if isinstance(e, Literal):
        s = format_literal(e)
        return f"({s})" if s.startswith("-") else s
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Unary):
        sep = "" if e.op == "-" else " "
        return f"({e.op}{sep}{format_expr(e.operand)})"
    if isinstance(e, Binary):
        return f"({format_expr(e.left)} {e.op} {format_expr(e.right)})"
    if isinstance(e, IfThenElse):
        return f"(if {format_expr(e.cond)} then {format_expr(e.then)} else {format_expr(e.orelse)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    raise TypeError(e)


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def format_node(n: NodeDecl) -> str:
    groups = []
    for p in n.params:
        groups.append(f"{'const ' if p.const else ''}{p.name}: {p.type}")
    rets = "; ".join(f"{r.name}: {r.type}" for r in n.returns)
    lines = [f"node {'imported ' if n.imported else ''}{n.name} ({'; '.join(groups)}) returns ({rets});"]
    if n.contract is not None:
        lines.append("(*@contract")
        for c in n.contract.consts:
            ty = f": {c.type}" if c.type else ""
            lines.append(f"  const {c.name}{ty} = {format_expr(c.expr)};")
        for kw, items in (("assume", n.contract.assumes), ("guarantee", n.contract.guarantees)):
            for it in items:
                name = f'"{_escape(it.description)}" ' if it.description else ""
                lines.append(f"  {kw} {name}{format_expr(it.expr)};")
        lines.append("*)")
    if n.has_body:
        if n.locals:
            lines.append("var " + " ".join(f"{v.name}: {v.type};" for v in n.locals))
        lines.append("let")
        for eq in n.equations:
            lines.append(f"  {eq.lhs} = {format_expr(eq.rhs)};")
        lines.append("tel")
    return "\n".join(lines)


def format_model(m: SourceModel) -> str:
    return "\n\n".join(format_node(n) for n in m.nodes) + "\n"
