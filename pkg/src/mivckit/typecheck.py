"""Type checking and contract well-formedness for a parsed model."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import TypeCheckError
from .syntax import (
    BUILTINS,
    Binary,
    Call,
    Expr,
    Ident,
    IfThenElse,
    Literal,
    NodeDecl,
    SourceModel,
    Unary,
    walk,
)

ARITH = {"+", "-", "*", "/"}
ORDER = {"<", "<=", ">", ">="}
EQUALITY = {"=", "<>"}
LOGIC = {"and", "or", "xor", "=>"}


@dataclass
class NodeInfo:
    """Per-node symbol table produced by the checker."""

    decl: NodeDecl
    types: dict  # name -> type for params, returns, locals, contract consts
    consts: set  # const params and contract consts
    contract_consts: dict  # name -> ContractConst


@dataclass
class TypedModel:
    model: SourceModel
    nodes: dict  # name -> NodeInfo
    types: dict = field(default_factory=dict)  # id(expr) -> type

    @property
    def main(self) -> str:
        return self.model.main

    def type_of(self, e: Expr) -> str:
        return self.types[id(e)]


def _fail(msg, e):
    span = getattr(e, "span", None)
    line = span.line if span and span.line else None
    col = span.column if span and span.line else None
    where = f" at {span}" if line else ""
    return TypeCheckError(f"{msg}{where}", line, col)


class _Checker:
    def __init__(self, model: SourceModel):
        self.model = model
        self.types: dict = {}
        self.infos: dict = {}

    def run(self) -> TypedModel:
        for n in self.model.nodes:
            self.infos[n.name] = self.node_info(n)
        for n in self.model.nodes:
            self.check_node(n)
        return TypedModel(self.model, self.infos, self.types)

    def node_info(self, n: NodeDecl) -> NodeInfo:
        types, consts = {}, set()
        for p in n.params:
            types[p.name] = p.type
            if p.const:
                consts.add(p.name)
        for d in (*n.returns, *n.locals):
            types[d.name] = d.type
        return NodeInfo(n, types, consts, {})

    def check_node(self, n: NodeDecl) -> None:
        info = self.infos[n.name]
        inputs = {p.name for p in n.params}
        outputs = {r.name for r in n.returns}
        if n.contract is not None:
            for c in n.contract.consts:
                ty = self.expr(c.expr, info)
                if not self.is_constant(c.expr, info):
                    raise _fail(f"contract constant {c.name} depends on a stream", c.expr)
                if c.type and c.type != ty:
                    raise _fail(f"constant {c.name} declared {c.type} but defined as {ty}", c.expr)
                info.types[c.name] = c.type or ty
                info.consts.add(c.name)
                info.contract_consts[c.name] = c
            for it in n.contract.assumes:
                self.expect_bool(it.expr, info, f"assumption {it.label}")
                self.check_contract_refs(it.expr, info, inputs, outputs, assumption=True)
            for it in n.contract.guarantees:
                self.expect_bool(it.expr, info, f"guarantee {it.label}")
                self.check_contract_refs(it.expr, info, inputs, outputs, assumption=False)

        defined = {}
        for eq in n.equations:
            if eq.lhs in inputs:
                raise _fail(f"{n.name}: input {eq.lhs} cannot be defined by an equation", eq)
            if eq.lhs in defined:
                raise _fail(f"{n.name}: {eq.lhs} is defined twice", eq)
            defined[eq.lhs] = eq
            ty = self.expr(eq.rhs, info)
            if ty != info.types[eq.lhs]:
                raise _fail(f"{n.name}: {eq.lhs} has type {info.types[eq.lhs]} but is defined as {ty}", eq.rhs)
        if n.has_body:
            for d in (*n.returns, *n.locals):
                if d.name not in defined:
                    raise _fail(f"{n.name}: {d.name} has no defining equation", d)

    def expect_bool(self, e, info, what):
        ty = self.expr(e, info)
        if ty != "bool":
            raise _fail(f"{what} must be bool, got {ty}", e)

    def check_contract_refs(self, e, info, inputs, outputs, assumption):
        """Assumptions see current inputs and previous inputs/outputs;
        guarantees see current and previous inputs/outputs."""

        def visit(x, under_pre):
            if isinstance(x, Ident):
                name = x.name
                if name in info.consts:
                    return
                if name in inputs:
                    return
                if name in outputs:
                    if assumption and not under_pre:
                        raise _fail(f"assumption refers to the current value of output {name}", x)
                    return
                raise _fail(f"contract refers to local variable {name}", x)
            if isinstance(x, Unary):
                visit(x.operand, under_pre or x.op == "pre")
            elif isinstance(x, Binary):
                visit(x.left, under_pre)
                visit(x.right, under_pre)
            elif isinstance(x, IfThenElse):
                for s in (x.cond, x.then, x.orelse):
                    visit(s, under_pre)
            elif isinstance(x, Call):
                for a in x.args:
                    visit(a, under_pre)

        visit(e, False)

    def is_constant(self, e, info) -> bool:
        for sub in walk(e):
            if isinstance(sub, Ident) and sub.name not in info.consts:
                return False
            if isinstance(sub, Unary) and sub.op == "pre":
                return False
            if isinstance(sub, Binary) and sub.op == "->":
                return False
            if isinstance(sub, Call) and sub.name not in BUILTINS:
                return False
        return True

    def expr(self, e, info) -> str:
        ty = self._expr(e, info)
        self.types[id(e)] = ty
        return ty

    def _expr(self, e, info) -> str:
        if isinstance(e, Literal):
            return e.type
        if isinstance(e, Ident):
            return info.types[e.name]
        if isinstance(e, Unary):
            t = self.expr(e.operand, info)
            if e.op == "not":
                if t != "bool":
                    raise _fail(f"'not' applied to {t}", e)
                return "bool"
            if e.op == "-":
                if t == "bool":
                    raise _fail("unary '-' applied to bool", e)
                return t
            # pre
            for sub in walk(e.operand):
                if isinstance(sub, Call) and sub.name not in BUILTINS:
                    raise _fail("'pre' applied to an expression containing a node call", e)
            return t
        if isinstance(e, Binary):
            lt = self.expr(e.left, info)
            rt = self.expr(e.right, info)
            op = e.op
            if op == "->":
                if lt != rt:
                    raise _fail(f"'->' operands have types {lt} and {rt}", e)
                return lt
            if op in LOGIC:
                if lt != "bool" or rt != "bool":
                    raise _fail(f"'{op}' applied to {lt} and {rt}", e)
                return "bool"
            if op in EQUALITY:
                if lt != rt:
                    raise _fail(f"'{op}' compares {lt} with {rt}", e)
                return "bool"
            if lt != rt or lt == "bool":
                raise _fail(f"'{op}' applied to {lt} and {rt}", e)
            if op == "/" and lt == "int":
                raise _fail("integer division is not supported", e)
            return "bool" if op in ORDER else lt
        if isinstance(e, IfThenElse):
            c = self.expr(e.cond, info)
            if c != "bool":
                raise _fail(f"if-condition has type {c}", e.cond)
            t = self.expr(e.then, info)
            f = self.expr(e.orelse, info)
            if t != f:
                raise _fail(f"if-branches have types {t} and {f}", e)
            return t
        if isinstance(e, Call):
            return self.call(e, info)
        raise _fail(f"unknown expression {e!r}", e)

    def call(self, e: Call, info) -> str:
        args = [self.expr(a, info) for a in e.args]
        if e.name in BUILTINS:
            if len(args) != BUILTINS[e.name]:
                raise _fail(f"{e.name} expects {BUILTINS[e.name]} argument(s)", e)
            if any(t == "bool" for t in args) or len(set(args)) != 1:
                raise _fail(f"{e.name} applied to {', '.join(args)}", e)
            return args[0]
        callee = self.infos[e.name].decl
        if len(callee.params) != len(args):
            raise _fail(f"{e.name} expects {len(callee.params)} arguments, got {len(args)}", e)
        for p, a, t in zip(callee.params, e.args, args):
            if p.type != t:
                raise _fail(f"argument {p.name} of {e.name} expects {p.type}, got {t}", a)
            if p.const and not self.is_constant(a, info):
                raise _fail(f"argument {p.name} of {e.name} must be constant", a)
        if len(callee.returns) != 1:
            raise _fail(f"node {e.name} has {len(callee.returns)} outputs; only single-output calls are supported", e)
        return callee.returns[0].type


def type_check(model: SourceModel) -> TypedModel:
    return _Checker(model).run()
