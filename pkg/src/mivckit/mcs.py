"""Minimal cut sets by cardinality-bounded counterexample search.

Each candidate element i gets a rigid Boolean ``y_i``: when it is true the
element's constraints are dropped.  A counterexample of the instrumented
system then names a set of elements whose removal breaks the property, and
an ``at most k`` bound on the y variables finds the smallest such sets
first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from . import terms as t
from .errors import MissingYVariable, NoCutSetExists
from .induction import AnalysisContext, Safe, Trace, Undecided, Unsafe
from .ivc import get_approximate_mivc
from .system import StateVar, TransitionSystem, cut_var


@dataclass(frozen=True)
class McsResult:
    elements: frozenset
    approximate: bool = False


@dataclass(frozen=True)
class InstrumentedSystem:
    base: TransitionSystem
    system: TransitionSystem  # every constraint structural; no selectable elements
    yvars: dict  # element id -> Var

    @property
    def candidates(self) -> frozenset:
        return frozenset(self.yvars)


def instrument(ts: TransitionSystem, E: Iterable[int], present: Optional[Iterable[int]] = None) -> InstrumentedSystem:
    """Guard the init and trans conjuncts of every element of ``E`` with ``not y_i``.

    Elements in ``present`` (default: everything outside ``E``) are kept
    unconditionally, any others are dropped.
    """
    E = frozenset(E)
    present = (ts.element_ids - E) if present is None else frozenset(present) - E
    yvars = {i: t.Var(cut_var(i), t.BOOL) for i in sorted(E)}
    init, trans = list(ts.structural_init), list(ts.structural_trans)
    for e in ts.elements:
        if e.id in E:
            off = t.not_(yvars[e.id])
            init += [t.implies(off, c) for c in e.init_conjuncts]
            trans += [t.implies(off, c) for c in e.trans_conjuncts]
        elif e.id in present:
            init += e.init_conjuncts
            trans += e.trans_conjuncts
    extra = tuple(StateVar(v.name, t.BOOL, rigid=True, role="cut") for v in yvars.values())
    system = TransitionSystem(
        f"{ts.name}*",
        ts.state_vars + extra,
        ts.init_vars,
        tuple(c for c in init if c != t.TRUE),
        tuple(c for c in trans if c != t.TRUE),
        (),
        ts.properties,
        ts.source_text,
    )
    return InstrumentedSystem(ts, system, yvars)


def at_most_k(yvars: Iterable[t.Var], k: int) -> t.Term:
    """Integer sum of 0/1 indicators bounded by ``k``."""
    ys = list(yvars)
    if not 0 <= k:
        raise ValueError("k must be non-negative")
    if k >= len(ys):
        return t.TRUE
    one, zero = t.const(1, t.INT), t.const(0, t.INT)
    total = t.add(*(t.ite(y, one, zero) for y in ys))
    return t.compare("<=", total, t.const(k, t.INT))


def block_superset(inst: InstrumentedSystem, cut: Iterable[int]) -> t.Term:
    """No later cut set may contain all of ``cut``."""
    return t.or_(*(t.not_(inst.yvars[i]) for i in sorted(cut)))


def extract_cut_set(trace: Trace, yvars: dict, E: Iterable[int]) -> frozenset:
    """Elements whose y variable is true at step 0 of ``trace``."""
    first = trace.steps[0]
    out = set()
    for i in E:
        if i not in yvars or yvars[i].name not in first:
            raise MissingYVariable(f"trace has no value for the cut variable of element {i}")
        if first[yvars[i].name]:
            out.add(i)
    return frozenset(out)


class _Search:
    """State shared by the descent and the layered enumeration.

    Queries run on the engine of the original system, with the candidates'
    activation literals left free: ``y_i`` is the negation of element i's
    activation.  This is the instrumented system of :func:`instrument`
    without a second unrolling; counterexamples replay on ``self.inst.system``.
    """

    def __init__(self, ctx, ts, E, prop, present):
        self.ctx = ctx
        self.ts = ts
        self.E = frozenset(E)
        self.inst = instrument(ts, self.E, present)
        # an element that is neither assumed nor counted can only be switched
        # off usefully, so absent elements need no special treatment
        self.present = (ts.element_ids - self.E) if present is None else frozenset(present) - self.E
        self.prop = prop or ts.properties[0]
        self.ys = [self.inst.yvars[i] for i in sorted(self.E)]
        self.blocking: list = []

    def extra_init(self, k: int) -> tuple:
        """Constraints of the query at bound ``k``, over the cut variables."""
        return tuple(c for c in (at_most_k(self.ys, k), *self.blocking) if c != t.TRUE)

    def verify(self, k: int):
        return self.ctx.verify(self.ts, self.present, self.prop, self.extra_init(k), free=self.E, want_core=False)

    def cut(self, trace: Trace) -> frozenset:
        return extract_cut_set(trace, self.inst.yvars, self.E)

    def descend(self, m: int):
        """Lower the bound while counterexamples exist.

        Returns (first result, trace at the smallest violating bound or None,
        that bound, whether an unknown stopped the descent).
        """
        k, trace, first = m, None, None
        while True:
            r = self.verify(k)
            if first is None:
                first = r
            if isinstance(r, Unsafe):
                trace = r.trace
                k -= 1
                if k < 0:
                    return first, trace, 0, False
                continue
            return first, trace, k + 1, isinstance(r, Undecided)


def all_mcs_up_to_ub(
    ctx: AnalysisContext,
    ts: TransitionSystem,
    E: Iterable[int],
    prop=None,
    ub: Optional[int] = None,
    present: Optional[Iterable[int]] = None,
):
    """All minimal cut sets within ``E`` of size at most ``ub``.

    Returns (list of McsResult, complete).  Each result carries the
    approximation flag in force when it was found.
    """
    E = frozenset(E)
    m = min(len(E) if ub is None else ub, len(E))
    if m < 0:
        raise ValueError("ub must be non-negative")
    search = _Search(ctx, ts, E, prop, present)
    first, trace, k, stopped = search.descend(m)
    approx = stopped
    if trace is None:
        # no counterexample at the largest bound
        return [], not isinstance(first, Undecided)
    cut = search.cut(trace)
    found = [McsResult(cut, approx)]
    if not cut:
        # the property fails with every candidate present
        return found, not approx
    search.blocking.append(block_superset(search.inst, cut))
    while k <= m:
        r = search.verify(k)
        if isinstance(r, Unsafe):
            cut = search.cut(r.trace)
            found.append(McsResult(cut, approx))
            search.blocking.append(block_superset(search.inst, cut))
            continue
        if isinstance(r, Undecided):
            approx = True
        k += 1
    return found, not approx


def get_single_mcs(
    ctx: AnalysisContext,
    ts: TransitionSystem,
    E: Iterable[int],
    prop=None,
    present: Optional[Iterable[int]] = None,
) -> McsResult:
    """One cut set of smallest cardinality within ``E``.

    Raises NoCutSetExists when removing all of ``E`` still proves the property.
    """
    E = frozenset(E)
    search = _Search(ctx, ts, E, prop, present)
    first, trace, _k, stopped = search.descend(len(E))
    if isinstance(first, Safe):
        raise NoCutSetExists("the property holds even with every candidate removed")
    if trace is None:
        return McsResult(E, True)
    return McsResult(search.cut(trace), stopped)


def must_set(ctx: AnalysisContext, ts: TransitionSystem, E: Iterable[int], prop=None):
    """Elements present in every minimal IVC: the singleton cut sets,
    searched only among the elements of one approximate IVC.

    Returns (elements, approximate); when approximate the set may be too small.
    """
    E = frozenset(E)
    ivc = get_approximate_mivc(ctx, ts, E, prop)
    if not ivc.elements:
        return frozenset(), ivc.approximate
    found, complete = all_mcs_up_to_ub(ctx, ts, ivc.elements, prop, 1, present=ts.element_ids - ivc.elements)
    must = frozenset(i for r in found if len(r.elements) == 1 and not r.approximate for i in r.elements)
    return must, not complete
