"""Elaboration of a typed model into a transition system with named elements.

Every stream ``x`` of a node instance becomes a state variable named by its
instance path (``SystemModel.Controller1.pitch``).  Initial formulas relate
the variables of step 0; transition formulas relate a step to its
predecessor, where ``pre x`` is read at the previous step.  At step 0 a
``pre`` term is a fresh unconstrained variable listed in ``init_vars``.

Const parameters are *rigid*: one value per execution.  The solver layer
gives each rigid variable a single symbol shared by all steps.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

from . import terms as t
from .errors import CalledNodeHasAssumptions, ElaborationError, NonImportedNodeWithoutBody, NonLinearTerm
from .parser import parse_program
from .syntax import (
    BUILTINS,
    Binary,
    Call,
    Ident,
    IfThenElse,
    Literal,
    NO_SPAN,
    Span,
    Unary,
    walk,
)
from .typecheck import TypedModel, type_check

INIT_FLAG = "%init"


def cut_var(eid: int) -> str:
    """Name of the Boolean that switches element ``eid`` off in cut-set searches."""
    return f"%y{eid}"


class ElementKind(str, Enum):
    ASSUMPTION = "assumption"
    GUARANTEE = "guarantee"
    EQUATION = "equation"
    NODE_CALL = "node_call"


CATEGORIES = {
    "assumptions": ElementKind.ASSUMPTION,
    "guarantees": ElementKind.GUARANTEE,
    "equations": ElementKind.EQUATION,
    "node_calls": ElementKind.NODE_CALL,
}
DEFAULT_CATEGORIES = frozenset({ElementKind.ASSUMPTION, ElementKind.GUARANTEE})


def parse_categories(text: str) -> frozenset:
    out = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if part not in CATEGORIES:
            raise ValueError(f"unknown element category {part!r} (choose from {', '.join(CATEGORIES)})")
        out.add(CATEGORIES[part])
    if not out:
        raise ValueError("no element category given")
    return frozenset(out)


@dataclass(frozen=True)
class StateVar:
    name: str
    sort: str
    rigid: bool = False
    role: str = "local"  # input | output | local | const | aux | flag | cut


@dataclass(frozen=True)
class Element:
    id: int
    label: str
    kind: ElementKind
    init_conjuncts: tuple
    trans_conjuncts: tuple
    span: Span = NO_SPAN
    selectable: bool = True
    description: str = ""


@dataclass(frozen=True)
class Property:
    label: str
    init_form: t.Term
    trans_form: t.Term
    span: Span = NO_SPAN
    description: str = ""


@dataclass(frozen=True)
class TransitionSystem:
    name: str
    state_vars: tuple
    init_vars: tuple
    structural_init: tuple
    structural_trans: tuple
    elements: tuple
    properties: tuple
    source_text: str = field(default="", compare=False, repr=False)

    @property
    def element_ids(self) -> frozenset:
        return frozenset(e.id for e in self.elements)

    def element(self, eid: int) -> Element:
        return self.elements[eid]

    def by_label(self, label: str) -> Element:
        for e in self.elements:
            if e.label == label:
                return e
        raise KeyError(label)

    def ids(self, *labels: str) -> frozenset:
        return frozenset(self.by_label(lb).id for lb in labels)

    def labels(self, ids: Iterable[int]) -> list:
        return sorted(self.elements[i].label for i in ids)

    def property(self, label: Optional[str] = None) -> Property:
        if label is None:
            return self.properties[0]
        for p in self.properties:
            if p.label == label or p.label.split(".")[-1] == label:
                return p
        raise KeyError(label)

    def var(self, name: str) -> StateVar:
        for v in (*self.state_vars, *self.init_vars):
            if v.name == name:
                return v
        raise KeyError(name)

    def init_parts(self, active: Iterable[int]) -> list:
        active = set(active)
        out = list(self.structural_init)
        for e in self.elements:
            if e.id in active:
                out.extend(e.init_conjuncts)
        return out

    def trans_parts(self, active: Iterable[int]) -> list:
        active = set(active)
        out = list(self.structural_trans)
        for e in self.elements:
            if e.id in active:
                out.extend(e.trans_conjuncts)
        return out


def select_elements(ts: TransitionSystem, categories) -> frozenset:
    """Ids of selectable elements whose kind is in ``categories``; every
    other element is treated as always present by the analyses."""
    cats = {ElementKind(c) for c in categories}
    return frozenset(e.id for e in ts.elements if e.selectable and e.kind in cats)


# -- elaboration ---------------------------------------------------------------------


class _Collector:
    """Side conditions produced while translating one expression."""

    def __init__(self):
        self.init: list = []
        self.trans: list = []


@dataclass
class _Pending:
    kind: ElementKind
    node: str
    instance: str
    local: str
    span: Span
    description: str = ""
    init: list = field(default_factory=list)
    trans: list = field(default_factory=list)


class _Scope:
    def __init__(self, info, path: str):
        self.info = info
        self.path = path
        self.vars: dict = {}
        self.memo: dict = {}  # id(ast node) -> Var (calls, aux pre variables, init values)
        self.call_counts: Counter = Counter()

    @property
    def node(self):
        return self.info.decl


class _Elaborator:
    def __init__(self, typed: TypedModel):
        self.typed = typed
        self.vars: dict = {}
        self.init_vars: dict = {}
        self.structural_init: list = []
        self.structural_trans: list = []
        self.pending: list = []
        self.properties: list = []
        self.aux_count = 0

    def declare(self, name, sort, rigid=False, role="local") -> t.Var:
        if name in self.vars:
            raise ElaborationError(f"variable {name} declared twice")
        self.vars[name] = StateVar(name, sort, rigid, role)
        return t.Var(name, sort)

    def init_value(self, key, scope, sort, hint) -> t.Var:
        """Fresh variable standing for an undefined ``pre`` at step 0."""
        if key not in scope.memo:
            name = f"{hint}~pre0"
            while name in self.init_vars:
                self.aux_count += 1
                name = f"{hint}~pre0.{self.aux_count}"
            self.init_vars[name] = StateVar(name, sort, False, "aux")
            scope.memo[key] = t.Var(name, sort)
        return scope.memo[key]

    # -- entry point --
    def run(self, main: str) -> TransitionSystem:
        info = self.typed.nodes[main]
        node = info.decl
        if not node.imported and not node.has_body:
            raise NonImportedNodeWithoutBody(f"node {main} has no body", node.span.line, node.span.column)
        flag = self.declare(INIT_FLAG, t.BOOL, role="flag")
        self.structural_init.append(flag)
        self.structural_trans.append(t.not_(flag))

        scope = self.node_scope(info, main, main=True)
        contract = node.contract
        if contract is not None:
            for a in contract.assumes:
                el = self.new_element(ElementKind.ASSUMPTION, main, main, a.label, a.span, a.description)
                self.fill(el, a.expr, scope)
        if node.has_body:
            self.body(scope)
        if contract is not None:
            for g in contract.guarantees:
                col = _Collector()
                init = self.tr(g.expr, scope, "init", col)
                trans = self.tr(g.expr, scope, "trans", col)
                self.structural_init.extend(col.init)
                self.structural_trans.extend(col.trans)
                self.properties.append(Property(f"{main}.{g.label}", init, trans, g.span, g.description))
        return self.finish(main)

    def finish(self, main) -> TransitionSystem:
        base = Counter(f"{p.node}.{p.local}" for p in self.pending)
        elements = []
        for i, p in enumerate(self.pending):
            label = f"{p.node}.{p.local}"
            if base[label] > 1:
                label = f"{p.instance}.{p.local}"
            elements.append(
                Element(i, label, p.kind, tuple(p.init), tuple(p.trans), p.span, True, p.description)
            )
        return TransitionSystem(
            main,
            tuple(self.vars.values()),
            tuple(self.init_vars.values()),
            tuple(self.structural_init),
            tuple(self.structural_trans),
            tuple(elements),
            tuple(self.properties),
            self.typed.model.text,
        )

    def node_scope(self, info, path, main=False) -> _Scope:
        scope = _Scope(info, path)
        node = info.decl
        for p in node.params:
            role = "const" if p.const else ("input" if main else "local")
            scope.vars[p.name] = self.declare(f"{path}.{p.name}", p.type, rigid=p.const, role=role)
        for r in node.returns:
            scope.vars[r.name] = self.declare(f"{path}.{r.name}", r.type, role="output" if main else "local")
        for lv in node.locals:
            scope.vars[lv.name] = self.declare(f"{path}.{lv.name}", lv.type)
        return scope

    def new_element(self, kind, node, instance, local, span, description="") -> _Pending:
        p = _Pending(kind, node, instance, local, span, description)
        self.pending.append(p)
        return p

    def fill(self, el: _Pending, expr, scope) -> None:
        col = _Collector()
        el.init.append(self.tr(expr, scope, "init", col))
        el.trans.append(self.tr(expr, scope, "trans", col))
        el.init.extend(col.init)
        el.trans.extend(col.trans)

    def body(self, scope: _Scope) -> None:
        for eq in scope.node.equations:
            lhs = scope.vars[eq.lhs]
            if isinstance(eq.rhs, Call) and eq.rhs.name not in BUILTINS:
                self.call(eq.rhs, scope, lhs, eq.span)
                continue
            el = self.new_element(ElementKind.EQUATION, scope.node.name, scope.path, eq.lhs, eq.span)
            col = _Collector()
            el.init.append(t.eq(lhs, self.tr(eq.rhs, scope, "init", col)))
            el.trans.append(t.eq(lhs, self.tr(eq.rhs, scope, "trans", col)))
            el.init.extend(col.init)
            el.trans.extend(col.trans)

    def call(self, e: Call, scope: _Scope, output: Optional[t.Var], span: Span) -> t.Var:
        key = ("call", id(e))
        if key in scope.memo:
            return scope.memo[key]
        info = self.typed.nodes[e.name]
        callee = info.decl
        scope.call_counts[e.name] += 1
        local = f"{e.name}{scope.call_counts[e.name]}"
        inst = f"{scope.path}.{local}"
        if callee.contract is not None and callee.contract.assumes:
            raise CalledNodeHasAssumptions(
                f"node {e.name} called from {scope.node.name} has contract assumptions; "
                "call-site assumption obligations are not supported",
                e.span.line or None, e.span.column or None,
            )
        if not callee.imported and not callee.has_body:
            raise NonImportedNodeWithoutBody(f"node {e.name} has no body", callee.span.line, callee.span.column)
        el = self.new_element(ElementKind.NODE_CALL, scope.node.name, scope.path, local, span)
        cscope = self.node_scope(info, inst)
        out = cscope.vars[callee.returns[0].name]
        scope.memo[key] = out
        col = _Collector()
        for p, arg in zip(callee.params, e.args):
            formal = cscope.vars[p.name]
            el.init.append(t.eq(formal, self.tr(arg, scope, "init", col)))
            el.trans.append(t.eq(formal, self.tr(arg, scope, "trans", col)))
        if output is not None:
            el.init.append(t.eq(output, out))
            el.trans.append(t.eq(output, out))
        el.init.extend(col.init)
        el.trans.extend(col.trans)

        if callee.imported:
            if callee.contract is not None:
                for g in callee.contract.guarantees:
                    gel = self.new_element(ElementKind.GUARANTEE, e.name, inst, g.label, g.span, g.description)
                    self.fill(gel, g.expr, cscope)
        else:
            # guarantees of a concrete callee are its own proof obligations; its body is inlined
            self.body(cscope)
        return out

    # -- expressions --
    def tr(self, e, scope: _Scope, mode: str, col: _Collector) -> t.Term:
        try:
            return self._tr(e, scope, mode, col)
        except NonLinearTerm as exc:
            if exc.line is None and getattr(e, "span", NO_SPAN).line:
                raise NonLinearTerm(exc.message, e.span.line, e.span.column) from None
            raise

    def _tr(self, e, scope, mode, col) -> t.Term:
        if isinstance(e, Literal):
            return t.const(e.value, e.type)
        if isinstance(e, Ident):
            if e.name in scope.vars:
                return scope.vars[e.name]
            cc = scope.info.contract_consts[e.name]
            return self._tr(cc.expr, scope, mode, col)
        if isinstance(e, Unary):
            if e.op == "pre":
                return self.pre(e, scope, mode, col)
            a = self._tr(e.operand, scope, mode, col)
            return t.not_(a) if e.op == "not" else t.neg(a)
        if isinstance(e, Binary):
            if e.op == "->":
                side = e.left if mode == "init" else e.right
                return self._tr(side, scope, mode, col)
            a = self._tr(e.left, scope, mode, col)
            b = self._tr(e.right, scope, mode, col)
            return _BINARY[e.op](a, b)
        if isinstance(e, IfThenElse):
            return t.ite(
                self._tr(e.cond, scope, mode, col),
                self._tr(e.then, scope, mode, col),
                self._tr(e.orelse, scope, mode, col),
            )
        if isinstance(e, Call):
            if e.name == "abs":
                return t.abs_(self._tr(e.args[0], scope, mode, col))
            if e.name == "min":
                return t.min_(self._tr(e.args[0], scope, mode, col), self._tr(e.args[1], scope, mode, col))
            return self.call(e, scope, None, e.span)
        raise ElaborationError(f"cannot elaborate {e!r}")

    def pre(self, e: Unary, scope, mode, col) -> t.Term:
        arg = e.operand
        sort = self.typed.type_of(e)
        simple = not any(
            (isinstance(s, Unary) and s.op == "pre") or (isinstance(s, Binary) and s.op == "->")
            for s in walk(arg)
        )
        if isinstance(arg, Ident) and arg.name in scope.vars:
            v = scope.vars[arg.name]
            if mode == "init":
                return self.init_value(("pre", v.name), scope, sort, v.name)
            return t.Var(v.name, v.sort, True)
        if simple:
            if mode == "init":
                return self.init_value(("pre", id(e)), scope, sort, f"{scope.path}.%pre")
            return t.shift_prev(self._tr(arg, scope, "trans", col))
        # nested pre / -> / contract constants: name the argument with an auxiliary stream
        key = ("aux", id(e))
        if key not in scope.memo:
            self.aux_count += 1
            aux = self.declare(f"{scope.path}.%aux{self.aux_count}", sort, role="aux")
            scope.memo[key] = aux
            col.init.append(t.eq(aux, self._tr(arg, scope, "init", col)))
            col.trans.append(t.eq(aux, self._tr(arg, scope, "trans", col)))
        aux = scope.memo[key]
        if mode == "init":
            return self.init_value(("pre", aux.name), scope, sort, aux.name)
        return t.Var(aux.name, sort, True)


_BINARY = {
    "and": lambda a, b: t.and_(a, b),
    "or": lambda a, b: t.or_(a, b),
    "xor": t.xor,
    "=>": t.implies,
    "=": t.eq,
    "<>": lambda a, b: t.compare("<>", a, b),
    "<": lambda a, b: t.compare("<", a, b),
    "<=": lambda a, b: t.compare("<=", a, b),
    ">": lambda a, b: t.compare(">", a, b),
    ">=": lambda a, b: t.compare(">=", a, b),
    "+": lambda a, b: t.add(a, b),
    "-": t.sub,
    "*": t.mul,
    "/": t.div,
}


def elaborate(model, main: Optional[str] = None) -> TransitionSystem:
    """Build the transition system of ``main`` (default: the model's main node)."""
    typed = model if isinstance(model, TypedModel) else type_check(model)
    main = main or typed.main
    if main not in typed.nodes:
        raise ElaborationError(f"unknown main node {main}")
    return _Elaborator(typed).run(main)


def load(source_text: str, main: Optional[str] = None) -> TransitionSystem:
    """Parse, type check and elaborate in one step."""
    return elaborate(type_check(parse_program(source_text, main)), main)


def dump_ts(ts: TransitionSystem) -> str:
    """Human-readable listing of variables, elements and properties."""
    lines = [f"transition system {ts.name}", "variables:"]
    for v in ts.state_vars:
        extra = " rigid" if v.rigid else ""
        lines.append(f"  {v.name}: {v.sort} ({v.role}{extra})")
    if ts.init_vars:
        lines.append("initial values of pre:")
        for v in ts.init_vars:
            lines.append(f"  {v.name}: {v.sort}")
    lines.append("structural:")
    for c in ts.structural_init:
        lines.append(f"  init  {c}")
    for c in ts.structural_trans:
        lines.append(f"  trans {c}")
    lines.append("elements:")
    for e in ts.elements:
        lines.append(f"  [{e.id}] {e.label} ({e.kind.value}) at {e.span}")
        for c in e.init_conjuncts:
            lines.append(f"      init  {c}")
        for c in e.trans_conjuncts:
            lines.append(f"      trans {c}")
    lines.append("properties:")
    for p in ts.properties:
        lines.append(f"  {p.label} at {p.span}")
        lines.append(f"      init  {p.init_form}")
        lines.append(f"      trans {p.trans_form}")
    return "\n".join(lines) + "\n"
