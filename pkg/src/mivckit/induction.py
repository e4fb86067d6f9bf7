"""Bounded model checking and k-induction over a transition system.

One engine owns one solver session and unrolls the system lazily on two
paths: the *base* path starts in an initial state, the *step* path starts
anywhere.  Every unrolled constraint is guarded by Boolean literals, so the
same assertions answer queries for any subset of active elements and any
depth; unsat cores over the element literals come out of the same queries.

Literals used as assumptions:

    a{id}            element ``id`` is active
    b_init           initial constraints of the base path
    b_e{i}, s_e{i}   edge from step i-1 to step i on the base/step path
    sp{i}            step-path state i differs from every earlier state
    spl{i}           the same, relaxed for i as the last state (see below)
    h|n{path}{i}#p   property ``p`` holds / fails at step i
    x{j}             j-th extra initial constraint

Elements listed as ``free`` in a query have their activation literal left
to the solver.  Extra constraints may mention the cut variable
``%y{id}`` of such an element, which reads as ``not a{id}``: this is how
cut sets are searched without building a second unrolling.

``verify`` at iteration k checks the base case at depth k (with the
property assumed at depths < k), then the step case with k hypotheses:
a path s0 .. s(k+1) where the property holds at s1 .. sk and fails at
s(k+1).  Safe(k) is returned as soon as the step case is unsat.

The property's step form may read previous values, which makes it a
predicate over pairs of states.  A shortest counterexample can then repeat
a state at its last step, as long as the previous values the property reads
differ.  So the simple-path constraint requires s0 .. sk to be pairwise
distinct.  The last state s(k+1) must differ from every earlier state
s(j) either in its own values or in the previous values the property
reads (s(k) versus s(j-1)).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from . import terms as t
from .errors import EvaluationError
from .solver import Sat, Session, SolverConfig, Unknown, Unsat, quote
from .system import Property, TransitionSystem, cut_var

DEFAULT_KMAX = 10
DEFAULT_BUDGET_MS = 60_000


@dataclass(frozen=True)
class Trace:
    """State assignments, one dict per step; rigid values repeat in every step."""

    steps: tuple

    def __len__(self):
        return len(self.steps)

    def value(self, step: int, name: str):
        return self.steps[step][name]


@dataclass(frozen=True)
class Safe:
    k: int
    core: frozenset = frozenset()  # active element ids used by the proof


@dataclass(frozen=True)
class Unsafe:
    trace: Trace


@dataclass(frozen=True)
class Undecided:
    reason: str  # "timeout" | "kmax" | solver text


VerifyResult = Union[Safe, Unsafe, Undecided]


def is_safe(r) -> bool:
    return isinstance(r, Safe)


def is_unsafe(r) -> bool:
    return isinstance(r, Unsafe)


@dataclass
class EngineStats:
    verify_calls: int = 0
    queries: int = 0
    unknowns: int = 0


def _or(parts: list) -> str:
    return parts[0] if len(parts) == 1 else f"(or {' '.join(parts)})"


class KInductionEngine:
    def __init__(self, ts: TransitionSystem, cfg: Optional[SolverConfig] = None, simple_path: bool = True):
        self.ts = ts
        self.cfg = cfg or SolverConfig()
        self.simple_path = simple_path
        self.session = Session(self.cfg)
        self.stats = EngineStats()
        self.rigid = {v.name for v in ts.state_vars if v.rigid}
        self.cut_ids = {cut_var(e.id): e.id for e in ts.elements}
        self.stream = [v for v in ts.state_vars if not v.rigid]
        # stream variables some property reads one step back
        read_back = {v.name for p in ts.properties for v in t.free_vars(p.trans_form) if v.prev}
        self.memory = [v for v in self.stream if v.name in read_back]
        self.depth = {"b": -1, "s": -1}
        self.prop_depth: dict = {}
        self.extra: dict = {}
        self._declare_static()

    def close(self):
        self.session.close()

    # -- symbols --
    def sym(self, path: str, step: int, v: t.Var) -> str:
        if v.name in self.rigid:
            return v.name
        if v.prev:
            step -= 1
        return f"{path}{step}.{v.name}"

    def render(self, term: t.Term, path: str, step: int) -> str:
        def atom(v: t.Var) -> str:
            if v.name in self.cut_ids and v.name not in self.rigid:
                return f"(not {quote(f'a{self.cut_ids[v.name]}')})"
            return quote(self.sym(path, step, v))

        return t.to_smt(term, atom)

    def _declare_static(self):
        s = self.session
        for v in self.ts.state_vars:
            if v.rigid:
                s.declare(v.name, v.sort)
        for e in self.ts.elements:
            s.declare(f"a{e.id}", "bool")
        s.declare("b_init", "bool")

    def _guard(self, lits: Sequence[str], body: str) -> str:
        out = body
        for lit in reversed(lits):
            out = f"(=> {quote(lit)} {out})"
        return out

    def _assert_all(self, lits: Sequence[str], terms: Iterable[t.Term], path: str, step: int):
        for c in terms:
            if c == t.TRUE:
                continue
            self.session.assert_formula(self._guard(lits, self.render(c, path, step)))

    def _state(self, path: str, step: int):
        for v in self.stream:
            self.session.declare(f"{path}{step}.{v.name}", v.sort)

    def unroll(self, path: str, depth: int):
        """Make sure states 0..depth of ``path`` exist with their constraints."""
        s = self.session
        while self.depth[path] < depth:
            i = self.depth[path] + 1
            self._state(path, i)
            if i == 0:
                if path == "b":
                    for v in self.ts.init_vars:
                        s.declare(f"b0.{v.name}", v.sort)
                    self._assert_all(["b_init"], self.ts.structural_init, "b", 0)
                    for e in self.ts.elements:
                        self._assert_all([f"a{e.id}", "b_init"], e.init_conjuncts, "b", 0)
            else:
                edge = f"{path}_e{i}"
                s.declare(edge, "bool")
                self._assert_all([edge], self.ts.structural_trans, path, i)
                for e in self.ts.elements:
                    self._assert_all([f"a{e.id}", edge], e.trans_conjuncts, path, i)
                if path == "s" and self.stream:
                    self._distinct(i)
            self.depth[path] = i

    def _distinct(self, i: int):
        s = self.session
        strict, last = f"sp{i}", f"spl{i}"
        s.declare(strict, "bool")
        s.declare(last, "bool")

        def differ(j, m, names):
            return [f"(not (= {quote(f's{j}.{n}')} {quote(f's{m}.{n}')}))" for n in names]

        stream = [v.name for v in self.stream]
        memory = [v.name for v in self.memory]
        for j in range(i):
            s.assert_formula(self._guard([strict], _or(differ(j, i, stream))))
            if not memory:
                s.assert_formula(self._guard([last], _or(differ(j, i, stream))))
            elif j >= 1:
                s.assert_formula(self._guard([last], _or(differ(j, i, stream) + differ(j - 1, i - 1, memory))))

    def _prop_lits(self, path: str, step: int, prop: Property):
        key = (path, step, prop.label)
        if key not in self.prop_depth:
            self.unroll(path, step)
            idx = len(self.prop_depth)
            h, n = f"h{path}{step}#{idx}", f"n{path}{step}#{idx}"
            form = prop.init_form if (path == "b" and step == 0) else prop.trans_form
            body = self.render(form, path, step)
            self.session.declare(h, "bool")
            self.session.declare(n, "bool")
            self.session.assert_formula(f"(=> {quote(h)} {body})")
            self.session.assert_formula(f"(=> {quote(n)} (not {body}))")
            self.prop_depth[key] = (h, n)
        return self.prop_depth[key]

    def _extra_lits(self, extra: Sequence[t.Term]):
        """Literals for extra initial constraints; the second list holds those
        that also apply on the step path (constraints over rigid symbols only)."""
        base, step = [], []
        for c in extra:
            if c not in self.extra:
                self.unroll("b", 0)
                lit = f"x{len(self.extra)}"
                self.session.declare(lit, "bool")
                self.session.assert_formula(f"(=> {quote(lit)} {self.render(c, 'b', 0)})")
                rigid_only = all(v.name in self.rigid or v.name in self.cut_ids for v in t.free_vars(c))
                self.extra[c] = (lit, rigid_only)
            lit, rigid_only = self.extra[c]
            base.append(lit)
            if rigid_only:
                step.append(lit)
        return base, step

    # -- queries --
    def _check(self, assumptions, timeout_ms, values=(), want_core=True):
        self.stats.queries += 1
        return self.session.check_assuming(assumptions, values, timeout_ms, want_core)

    def base_query(self, k, active_lits, prop, extra_lits, timeout_ms, free=(), want_core=True):
        self.unroll("b", k)
        lits = ["b_init", *active_lits, *extra_lits]
        lits += [f"b_e{i}" for i in range(1, k + 1)]
        for i in range(k):
            lits.append(self._prop_lits("b", i, prop)[0])
        lits.append(self._prop_lits("b", k, prop)[1])
        # values are fetched only when the query is sat
        values = [f"b{i}.{v.name}" for i in range(k + 1) for v in self.stream]
        values += sorted(self.rigid)
        values += [f"b0.{v.name}" for v in self.ts.init_vars]
        values += [f"a{i}" for i in free]
        return self._check(lits, timeout_ms, values, want_core)

    def step_query(self, k, active_lits, prop, extra_lits, timeout_ms, want_core=True):
        self.unroll("s", k + 1)
        lits = [*active_lits, *extra_lits]
        lits += [f"s_e{i}" for i in range(1, k + 2)]
        for i in range(1, k + 1):
            lits.append(self._prop_lits("s", i, prop)[0])
        lits.append(self._prop_lits("s", k + 1, prop)[1])
        if self.simple_path:
            lits += [f"sp{i}" for i in range(1, k + 1)]
            lits.append(f"spl{k + 1}")
        return self._check(lits, timeout_ms, (), want_core)

    def trace_from(self, model: dict, k: int, free=()) -> Trace:
        steps = []
        for i in range(k + 1):
            st = {v.name: model[f"b{i}.{v.name}"] for v in self.stream}
            for r in self.rigid:
                st[r] = model[r]
            for e in free:
                st[cut_var(e)] = not model[f"a{e}"]
            if i == 0:
                for v in self.ts.init_vars:
                    st[v.name] = model[f"b0.{v.name}"]
            steps.append(st)
        return Trace(tuple(steps))

    def verify(
        self,
        active: Iterable[int],
        prop: Optional[Property] = None,
        kmax: int = DEFAULT_KMAX,
        budget_ms: int = DEFAULT_BUDGET_MS,
        extra_init: Sequence[t.Term] = (),
        free: Iterable[int] = (),
        want_core: bool = True,
    ) -> VerifyResult:
        """Prove or refute ``prop`` with exactly the ``active`` elements enabled.

        Elements in ``free`` may be on or off, as the solver chooses; a
        counterexample then reports the choice in the cut variables.
        Without ``want_core`` a Safe result reports every active element.
        """
        if kmax < 0 or budget_ms <= 0:
            raise ValueError("kmax must be >= 0 and budget positive")
        prop = prop or self.ts.properties[0]
        self.stats.verify_calls += 1
        id_of = {f"a{i}": i for i in self.ts.element_ids}
        free = sorted(set(free))
        active_lits = [f"a{i}" for i in sorted(set(active) - set(free))]
        extra_base, extra_step = self._extra_lits(extra_init)
        deadline = time.monotonic() + budget_ms / 1000
        core: set = set()

        def remaining():
            left = int((deadline - time.monotonic()) * 1000)
            return min(self.cfg.timeout_ms, left)

        for k in range(kmax + 1):
            left = remaining()
            if left <= 0:
                return self._unknown("timeout")
            r = self.base_query(k, active_lits, prop, extra_base, left, free, want_core)
            if isinstance(r, Sat):
                return Unsafe(self.trace_from(r.model, k, free))
            if isinstance(r, Unknown):
                return self._unknown(r.reason)
            core |= {id_of[c] for c in r.core if c in id_of}
            left = remaining()
            if left <= 0:
                return self._unknown("timeout")
            r = self.step_query(k, active_lits, prop, extra_step, left, want_core)
            if isinstance(r, Unsat):
                core |= {id_of[c] for c in r.core if c in id_of}
                return Safe(k, frozenset(core))
            if isinstance(r, Unknown):
                return self._unknown(r.reason)
        return self._unknown("kmax")

    def _unknown(self, reason: str) -> Undecided:
        self.stats.unknowns += 1
        return Undecided(reason)


# -- trace certification ------------------------------------------------------------------


def replay_trace(
    ts: TransitionSystem,
    active: Iterable[int],
    prop: Property,
    trace: Trace,
    extra_init: Sequence[t.Term] = (),
) -> bool:
    """True iff ``trace`` satisfies every active constraint and violates
    ``prop`` at its last step, evaluated with exact arithmetic."""
    if not trace.steps:
        raise EvaluationError("empty trace")
    steps = trace.steps

    def env_at(i):
        def env(v: t.Var):
            if v.prev:
                if i == 0:
                    raise EvaluationError(f"{v} has no predecessor at step 0")
                return steps[i - 1][v.name]
            return steps[i][v.name]

        return env

    active = set(active)
    init = [*ts.init_parts(active), *extra_init]
    if not all(t.evaluate(c, env_at(0)) for c in init):
        return False
    trans = ts.trans_parts(active)
    for i in range(1, len(steps)):
        if not all(t.evaluate(c, env_at(i)) for c in trans):
            return False
    for r in (v.name for v in ts.state_vars if v.rigid):
        if any(st[r] != steps[0][r] for st in steps):
            return False
    last = len(steps) - 1
    form = prop.init_form if last == 0 else prop.trans_form
    return not t.evaluate(form, env_at(last))


# -- shared engines ---------------------------------------------------------------------------


@dataclass
class AnalysisContext:
    """Analysis settings plus one lazily created engine per transition system."""

    cfg: SolverConfig = field(default_factory=SolverConfig)
    kmax: int = DEFAULT_KMAX
    budget_ms: int = DEFAULT_BUDGET_MS
    simple_path: bool = True
    engines: dict = field(default_factory=dict)
    released: dict = field(default_factory=dict)

    def engine(self, ts: TransitionSystem) -> KInductionEngine:
        key = id(ts)
        if key not in self.engines:
            self.engines[key] = (ts, KInductionEngine(ts, self.cfg, self.simple_path))
        return self.engines[key][1]

    def verify(self, ts, active, prop=None, extra_init=(), free=(), want_core=True) -> VerifyResult:
        return self.engine(ts).verify(active, prop, self.kmax, self.budget_ms, extra_init, free, want_core)

    def release(self, ts: TransitionSystem) -> None:
        entry = self.engines.pop(id(ts), None)
        if entry is not None:
            self._absorb(entry[1])
            entry[1].close()

    def _absorb(self, eng: KInductionEngine) -> None:
        for key, value in self._engine_stats(eng).items():
            self.released[key] = self.released.get(key, 0) + value

    @staticmethod
    def _engine_stats(eng: KInductionEngine) -> dict:
        return {
            "verify_calls": eng.stats.verify_calls,
            "queries": eng.stats.queries,
            "unknowns": eng.stats.unknowns,
            "solver_restarts": eng.session.restarts,
        }

    def stats(self) -> dict:
        out = {"verify_calls": 0, "queries": 0, "unknowns": 0, "solver_restarts": 0, **self.released}
        for _, eng in self.engines.values():
            for key, value in self._engine_stats(eng).items():
                out[key] += value
        return out

    def close(self) -> None:
        for _, eng in self.engines.values():
            self._absorb(eng)
            eng.close()
        self.engines.clear()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def verify(
    ts: TransitionSystem,
    active: Iterable[int],
    prop: Optional[Property] = None,
    kmax: int = DEFAULT_KMAX,
    budget_ms: int = DEFAULT_BUDGET_MS,
    cfg: Optional[SolverConfig] = None,
) -> VerifyResult:
    """One-shot verification with a private engine."""
    eng = KInductionEngine(ts, cfg)
    try:
        return eng.verify(active, prop, kmax, budget_ms)
    finally:
        eng.close()
