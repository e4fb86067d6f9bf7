"""Quantifier-free formulas over stream variables.

Terms are immutable and hashable.  A :class:`Var` with ``prev=True`` denotes
the value of a stream at the previous step; it only appears in transition
formulas.  Real constants are exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Union

from .errors import EvaluationError, NonLinearTerm

BOOL, INT, REAL = "bool", "int", "real"
SMT_SORTS = {BOOL: "Bool", INT: "Int", REAL: "Real"}

Value = Union[bool, int, Fraction]


@dataclass(frozen=True)
class Var:
    name: str
    sort: str
    prev: bool = False

    def __str__(self):
        return f"pre({self.name})" if self.prev else self.name


@dataclass(frozen=True)
class Const:
    value: Value
    sort: str

    def __str__(self):
        if self.sort == BOOL:
            return "true" if self.value else "false"
        return str(self.value)


@dataclass(frozen=True)
class App:
    op: str
    args: tuple
    sort: str

    def __str__(self):
        if self.op == "ite":
            c, t, e = self.args
            return f"(if {c} then {t} else {e})"
        if self.op in ("not", "neg"):
            sym = "not " if self.op == "not" else "-"
            return f"{sym}{self.args[0]}"
        return "(" + f" {self.op} ".join(str(a) for a in self.args) + ")"


Term = Union[Var, Const, App]

TRUE = Const(True, BOOL)
FALSE = Const(False, BOOL)


def const(value, sort: str | None = None) -> Const:
    if sort is None:
        sort = BOOL if isinstance(value, bool) else INT if isinstance(value, int) else REAL
    if sort == REAL:
        value = Fraction(value)
    return Const(value, sort)


def is_const(t: Term) -> bool:
    return isinstance(t, Const)


# -- constructors -------------------------------------------------------------
# They fold constants and flatten associative connectives, nothing more.

def not_(a: Term) -> Term:
    if isinstance(a, Const):
        return Const(not a.value, BOOL)
    if isinstance(a, App) and a.op == "not":
        return a.args[0]
    return App("not", (a,), BOOL)


def and_(*args: Term) -> Term:
    flat = []
    for a in _flatten("and", args):
        if a == FALSE:
            return FALSE
        if a != TRUE:
            flat.append(a)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return App("and", tuple(flat), BOOL)


def or_(*args: Term) -> Term:
    flat = []
    for a in _flatten("or", args):
        if a == TRUE:
            return TRUE
        if a != FALSE:
            flat.append(a)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return App("or", tuple(flat), BOOL)


def _flatten(op, args):
    for a in args:
        if isinstance(a, App) and a.op == op:
            yield from a.args
        else:
            yield a


def implies(a: Term, b: Term) -> Term:
    if a == TRUE:
        return b
    if a == FALSE or b == TRUE:
        return TRUE
    return App("=>", (a, b), BOOL)


def xor(a: Term, b: Term) -> Term:
    return not_(eq(a, b))


def eq(a: Term, b: Term) -> Term:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value == b.value, BOOL)
    return App("=", (a, b), BOOL)


def compare(op: str, a: Term, b: Term) -> Term:
    if op == "=":
        return eq(a, b)
    if op == "<>":
        return not_(eq(a, b))
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(_COMPARE[op](a.value, b.value), BOOL)
    return App(op, (a, b), BOOL)


_COMPARE = {
    "<": lambda x, y: x < y,
    "<=": lambda x, y: x <= y,
    ">": lambda x, y: x > y,
    ">=": lambda x, y: x >= y,
}


def ite(c: Term, t: Term, e: Term) -> Term:
    if c == TRUE:
        return t
    if c == FALSE:
        return e
    if t == e:
        return t
    return App("ite", (c, t, e), t.sort)


def add(*args: Term) -> Term:
    sort = args[0].sort
    total = Fraction(0) if sort == REAL else 0
    rest = []
    for a in _flatten("+", args):
        if isinstance(a, Const):
            total += a.value
        else:
            rest.append(a)
    if total != 0 or not rest:
        rest.append(Const(total, sort))
    if len(rest) == 1:
        return rest[0]
    return App("+", tuple(rest), sort)


def neg(a: Term) -> Term:
    if isinstance(a, Const):
        return Const(-a.value, a.sort)
    return App("neg", (a,), a.sort)


def sub(a: Term, b: Term) -> Term:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value, a.sort)
    return App("-", (a, b), a.sort)


def mul(a: Term, b: Term) -> Term:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value, a.sort)
    if not isinstance(a, Const) and not isinstance(b, Const):
        raise NonLinearTerm(f"non-linear product {a} * {b}")
    return App("*", (a, b), a.sort)


def div(a: Term, b: Term) -> Term:
    if not isinstance(b, Const):
        raise NonLinearTerm(f"division by non-constant {b}")
    if b.value == 0:
        raise NonLinearTerm(f"division of {a} by zero")
    if isinstance(a, Const):
        return Const(Fraction(a.value) / b.value, a.sort)
    return App("/", (a, b), a.sort)


def abs_(a: Term) -> Term:
    zero = const(0, a.sort)
    return ite(compare(">=", a, zero), a, neg(a))


def min_(a: Term, b: Term) -> Term:
    return ite(compare("<=", a, b), a, b)


# -- traversal ------------------------------------------------------------------

def subterms(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        cur = stack.pop()
        yield cur
        if isinstance(cur, App):
            stack.extend(cur.args)


def free_vars(t: Term) -> set[Var]:
    return {s for s in subterms(t) if isinstance(s, Var)}


def substitute(t: Term, f: Callable[[Var], Term]) -> Term:
    """Rebuild ``t`` replacing every variable ``v`` by ``f(v)``."""
    if isinstance(t, Var):
        return f(t)
    if isinstance(t, Const):
        return t
    args = tuple(substitute(a, f) for a in t.args)
    if args == t.args:
        return t
    return App(t.op, args, t.sort)


def shift_prev(t: Term) -> Term:
    """Reads every current-step variable of ``t`` at the previous step."""

    def shift(v: Var) -> Term:
        if v.prev:
            raise ValueError(f"{v} already refers to the previous step")
        return Var(v.name, v.sort, True)

    return substitute(t, shift)


# -- SMT-LIB rendering --------------------------------------------------------------

def smt_value(value: Value, sort: str) -> str:
    if sort == BOOL:
        return "true" if value else "false"
    if sort == INT:
        return str(value) if value >= 0 else f"(- {-value})"
    v = Fraction(value)
    mag = abs(v)
    s = f"{mag.numerator}.0" if mag.denominator == 1 else f"(/ {mag.numerator}.0 {mag.denominator}.0)"
    return s if v >= 0 else f"(- {s})"


_SMT_OPS = {"neg": "-", "<>": "distinct"}


def to_smt(t: Term, symbol: Callable[[Var], str]) -> str:
    """Render ``t`` as an SMT-LIB term; ``symbol`` names each variable."""
    if isinstance(t, Var):
        return symbol(t)
    if isinstance(t, Const):
        return smt_value(t.value, t.sort)
    args = " ".join(to_smt(a, symbol) for a in t.args)
    return f"({_SMT_OPS.get(t.op, t.op)} {args})"


# -- exact evaluation -----------------------------------------------------------------

def evaluate(t: Term, env: Callable[[Var], Value]) -> Value:
    """Evaluate with exact rational arithmetic.

    ``env`` raises :class:`EvaluationError` (or ``KeyError``) for unknown variables.
    """
    if isinstance(t, Var):
        try:
            return env(t)
        except KeyError as exc:
            raise EvaluationError(f"no value for variable {t}") from exc
    if isinstance(t, Const):
        return t.value
    op = t.op
    if op == "ite":
        c = evaluate(t.args[0], env)
        return evaluate(t.args[1] if c else t.args[2], env)
    if op == "and":
        return all(evaluate(a, env) for a in t.args)
    if op == "or":
        return any(evaluate(a, env) for a in t.args)
    if op == "=>":
        return (not evaluate(t.args[0], env)) or bool(evaluate(t.args[1], env))
    vals = [evaluate(a, env) for a in t.args]
    if op == "not":
        return not vals[0]
    if op == "=":
        return vals[0] == vals[1]
    if op in _COMPARE:
        return _COMPARE[op](vals[0], vals[1])
    if op == "+":
        return sum(vals[1:], vals[0])
    if op == "-":
        return vals[0] - vals[1]
    if op == "neg":
        return -vals[0]
    if op == "*":
        return vals[0] * vals[1]
    if op == "/":
        return Fraction(vals[0]) / vals[1]
    raise EvaluationError(f"unknown operator {op}")


def conjoin(parts: Iterable[Term]) -> Term:
    return and_(*parts)
