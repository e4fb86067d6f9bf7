"""Inductive validity cores: approximate, minimal, and all minimal ones.

Throughout, ``E`` is the set of element ids under analysis.  Elements of the
system outside ``E`` are always present.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import IncompleteEnumeration, NoCutSetExists, SolverError
from .induction import AnalysisContext, Safe, Undecided, Unsafe
from .solver import Sat, Session, SolverConfig, Unknown, quote
from .system import Property, TransitionSystem


@dataclass(frozen=True)
class IvcResult:
    elements: frozenset
    approximate: bool = False


@dataclass(frozen=True)
class MivcEnumeration:
    mivcs: tuple
    complete: bool
    must: frozenset = frozenset()
    must_approximate: bool = False


def _prop(ts: TransitionSystem, prop: Optional[Property]) -> Property:
    return prop or ts.properties[0]


def get_approximate_mivc(ctx: AnalysisContext, ts: TransitionSystem, E: Iterable[int], prop=None) -> IvcResult:
    """Union of the unsat cores of the proof, restricted to ``E``.

    If the proof does not go through (counterexample or unknown) the whole
    of ``E`` comes back flagged approximate.
    """
    E = frozenset(E)
    r = ctx.verify(ts, ts.element_ids, _prop(ts, prop))
    if isinstance(r, Safe):
        return IvcResult(r.core & E, False)
    return IvcResult(E, True)


def minimize_ivc(
    ctx: AnalysisContext,
    ts: TransitionSystem,
    E: Iterable[int],
    ivc: Iterable[int],
    must: Iterable[int] = (),
    prop=None,
) -> IvcResult:
    """Deletion-based minimization in id order, never trying elements of ``must``.

    When a deletion succeeds the proof's core replaces the current set,
    which skips deletions that are already known to succeed.
    """
    E, must = frozenset(E), frozenset(must)
    prop = _prop(ts, prop)
    bg = ts.element_ids - E
    current = frozenset(ivc) | must
    approximate = False
    for e in sorted(current - must):
        if e not in current:
            continue
        r = ctx.verify(ts, bg | (current - {e}), prop)
        if isinstance(r, Safe):
            current = (r.core & E) | must
        elif isinstance(r, Undecided):
            approximate = True
    return IvcResult(current, approximate)


def minimal_ivc(ctx: AnalysisContext, ts: TransitionSystem, E: Iterable[int], prop=None) -> IvcResult:
    """Approximate core followed by deletion-based minimization."""
    E = frozenset(E)
    seed = get_approximate_mivc(ctx, ts, E, prop)
    if seed.approximate:
        return seed
    return minimize_ivc(ctx, ts, E, seed.elements, (), prop)


# -- exploration map ---------------------------------------------------------------------


class ExplorationMap:
    """CNF over one selector per element, solved in its own Boolean session.

    A model of the map is an unexplored candidate subset.
    """

    def __init__(self, universe: Iterable[int], cfg: Optional[SolverConfig] = None):
        base = cfg or SolverConfig()
        self.cfg = dataclasses.replace(
            base, logic="QF_LIA", unsat_cores=False, options=(), timeout_ms=max(base.command_timeout_ms, 60_000)
        )
        self.universe = tuple(sorted(set(universe)))
        self.clauses: list = []  # (positive ids, negative ids)
        self.session = Session(self.cfg)
        self._card: dict = {}
        for i in self.universe:
            self.session.declare(self.sel(i), "bool")

    @staticmethod
    def sel(i: int) -> str:
        return f"m{i}"

    def add_clause(self, pos: Iterable[int] = (), neg: Iterable[int] = ()) -> None:
        pos, neg = frozenset(pos), frozenset(neg)
        self.clauses.append((pos, neg))
        lits = [quote(self.sel(i)) for i in sorted(pos)] + [f"(not {quote(self.sel(i))})" for i in sorted(neg)]
        if not lits:
            self.session.assert_formula("false")
        elif len(lits) == 1:
            self.session.assert_formula(lits[0])
        else:
            self.session.assert_formula(f"(or {' '.join(lits)})")

    def require(self, ids: Iterable[int]) -> None:
        for i in sorted(set(ids)):
            self.add_clause(pos=[i])

    def block_up(self, ids: Iterable[int]) -> None:
        """Exclude ``ids`` and all of its supersets."""
        self.add_clause(neg=ids)

    def block_down(self, ids: Iterable[int]) -> None:
        """Every later candidate must contain an element of ``ids``."""
        self.add_clause(pos=ids)

    def admits(self, candidate: Iterable[int]) -> bool:
        c = set(candidate)
        return all((pos & c) or (neg - c) for pos, neg in self.clauses)

    def _at_least(self, k: int) -> str:
        if k not in self._card:
            lit = f"card{k}"
            terms = [f"(ite {quote(self.sel(i))} 1 0)" for i in self.universe]
            total = terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"
            self.session.assert_labeled(lit, f"(>= {total} {k})")
            self._card[k] = lit
        return self._card[k]

    def _solve(self, assumptions) -> Optional[frozenset]:
        r = self.session.check_assuming(assumptions, [self.sel(i) for i in self.universe])
        if isinstance(r, Unknown):
            raise SolverError(f"exploration map query returned unknown ({r.reason})")
        if isinstance(r, Sat):
            return frozenset(i for i in self.universe if r.model[self.sel(i)])
        return None

    def max_unexplored(self) -> Optional[frozenset]:
        """A model with the largest number of selectors true, or None."""
        best = self._solve([])
        if best is None:
            return None
        lo, hi = len(best), len(self.universe)
        while lo < hi:
            mid = (lo + hi + 1) // 2
            found = self._solve([self._at_least(mid)])
            if found is None:
                hi = mid - 1
            else:
                best, lo = found, len(found)
        return best

    def close(self):
        self.session.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def get_unexplored_max(emap: ExplorationMap, E: Iterable[int] = ()) -> Optional[frozenset]:
    return emap.max_unexplored()


# -- enumeration ---------------------------------------------------------------------------


def all_mivcs(
    ctx: AnalysisContext,
    ts: TransitionSystem,
    E: Iterable[int],
    prop=None,
    must: Optional[tuple] = None,
) -> MivcEnumeration:
    """Enumerate all minimal IVCs over ``E``, seeded with the MUST set.

    ``must`` may pass a precomputed ``(elements, approximate)`` pair.
    """
    from .mcs import get_single_mcs, must_set

    E = frozenset(E)
    prop = _prop(ts, prop)
    bg = ts.element_ids - E
    must_ids, must_ap = must if must is not None else must_set(ctx, ts, E, prop)
    must_ids = frozenset(must_ids)

    r = ctx.verify(ts, bg | must_ids, prop)
    if isinstance(r, Safe):
        # every element of MUST is needed, so MUST is the only minimal core
        return MivcEnumeration((IvcResult(must_ids, False),), True, must_ids, must_ap)

    approx = False
    found: list = []
    with ExplorationMap(E, ctx.cfg) as emap:
        emap.require(must_ids)
        while True:
            seed = emap.max_unexplored()
            if seed is None:
                break
            r = ctx.verify(ts, bg | seed, prop)
            if isinstance(r, Safe):
                mivc = minimize_ivc(ctx, ts, E, (r.core & E) | must_ids, must_ids, prop)
                found.append(mivc)
                emap.block_up(mivc.elements)
                continue
            try:
                mcs = get_single_mcs(ctx, ts, E - seed, prop, present=bg | seed)
                cut, mcs_ap = mcs.elements, mcs.approximate
            except NoCutSetExists:
                if not isinstance(r, Undecided):
                    raise
                cut, mcs_ap = E - seed, True
            emap.block_down(cut)
            approx = approx or isinstance(r, Undecided) or mcs_ap
    return MivcEnumeration(tuple(found), not approx, must_ids, must_ap)


def categorize(enum: MivcEnumeration, E: Iterable[int]):
    """(must, may, irr) partition of ``E``; needs a complete, exact enumeration."""
    if not enum.complete or any(m.approximate for m in enum.mivcs):
        raise IncompleteEnumeration("categorization needs a complete enumeration of exact MIVCs")
    E = frozenset(E)
    sets = [m.elements for m in enum.mivcs]
    union = frozenset().union(*sets) if sets else frozenset()
    must = frozenset.intersection(*sets) if sets else frozenset()
    return must, union - must, E - union
