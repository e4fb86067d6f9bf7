"""Acceptance suite: one test (or group of tests) per numbered criterion.

The terminal summary of a pytest run prints one PASS/FAIL line per
criterion.
"""

import io
import json
import statistics
import time

import pytest

from helpers import label_family, labels, selected
from oracle import instances, minimal_hitting_sets
from rechecks import ivc_failures, mcs_failures, mivc_failures

from mivckit import (
    AnalysisContext,
    SolverConfig,
    all_mcs_up_to_ub,
    all_mivcs,
    categorize,
    get_approximate_mivc,
    load,
    minimal_ivc,
    models,
    must_set,
)
from mivckit.cli import run

ALTITUDE_CORE = frozenset(
    {"SystemModel.S", "SystemModel.C1", "Controller.L1", "Environment.E1",
     "Environment.E3", "Environment.E6", "Environment.E7"}
)
ALTITUDE_IRR = frozenset(
    {"SystemModel.C2", "SystemModel.C3", "Environment.E2", "Environment.E4", "Environment.E5"}
)
SENSORS = frozenset({"SystemModel.S1", "SystemModel.S2", "SystemModel.S3"})
TRIPLEX_MUST = frozenset(
    {"Environment.E1", "Environment.E3", "Environment.E6", "Environment.E7",
     "SystemModel.C1", "Controller.L1"}
)
TRIPLEX_MCS = {frozenset({x}) for x in TRIPLEX_MUST} | {
    frozenset({"SystemModel.S1", "SystemModel.S2"}),
    frozenset({"SystemModel.S1", "SystemModel.S3"}),
    frozenset({"SystemModel.S2", "SystemModel.S3"}),
}


def _ctx():
    return AnalysisContext(cfg=SolverConfig(timeout_ms=60_000), kmax=10, budget_ms=600_000)


@pytest.mark.criterion(1, "single-sensor altitude model: one 7-element MIVC, MAY empty, IRR of 5")
def test_altitude_cores(altitude):
    t0 = time.perf_counter()
    E = selected(altitude)
    with _ctx() as ctx:
        approx = get_approximate_mivc(ctx, altitude, E)
        minimal = minimal_ivc(ctx, altitude, E)
        enum = all_mivcs(ctx, altitude, E)
    assert labels(altitude, approx.elements) == ALTITUDE_CORE
    assert labels(altitude, minimal.elements) == ALTITUDE_CORE
    assert not minimal.approximate
    assert label_family(altitude, enum.mivcs) == {ALTITUDE_CORE}
    assert enum.complete
    must, may, irr = categorize(enum, E)
    assert labels(altitude, must) == ALTITUDE_CORE
    assert may == frozenset()
    assert labels(altitude, irr) == ALTITUDE_IRR
    assert time.perf_counter() - t0 < 120


@pytest.mark.criterion(2, "triplex model: one MIVC with all sensors, three after widening LIMIT")
def test_triplex_cores(triplex, triplex_fixed):
    t0 = time.perf_counter()
    with _ctx() as ctx:
        before = all_mivcs(ctx, triplex, selected(triplex))
        after = all_mivcs(ctx, triplex_fixed, selected(triplex_fixed))
    fam = label_family(triplex, before.mivcs)
    assert len(fam) == 1 and SENSORS <= next(iter(fam))
    fam = label_family(triplex_fixed, after.mivcs)
    assert len(fam) == 3
    assert sorted(len(m & SENSORS) for m in fam) == [2, 2, 2]
    assert before.complete and after.complete
    assert time.perf_counter() - t0 < 300


@pytest.mark.criterion(3, "triplex model with widened LIMIT: exactly nine exact MCSs")
def test_triplex_cut_sets(triplex_fixed):
    t0 = time.perf_counter()
    E = selected(triplex_fixed)
    with _ctx() as ctx:
        found, complete = all_mcs_up_to_ub(ctx, triplex_fixed, E)
    assert complete
    assert not any(r.approximate for r in found)
    assert len(found) == 9
    assert label_family(triplex_fixed, found) == TRIPLEX_MCS
    assert time.perf_counter() - t0 < 300


def _wall(argv, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        code = run(argv, stdout=io.StringIO(), stderr=io.StringIO())
        times.append(time.perf_counter() - t0)
        assert code == 0
    return statistics.median(times)


@pytest.mark.criterion(4, "MUST set matches the singleton MCSs, at most 25% slower than one minimal IVC")
def test_must_overhead(triplex_fixed):
    path = str(models.path("altitude3_fixed"))
    out = io.StringIO()
    assert run(["must", path, "--format", "json"], stdout=out) == 0
    doc = json.loads(out.getvalue())
    must = doc["properties"][0]["must"]
    assert frozenset(must["elements"]) == TRIPLEX_MUST and not must["approximate"]
    # warm up the solver binary and page cache before timing
    _wall(["ivc", "--minimal", path], repeats=1)
    t_must = _wall(["must", path])
    t_min = _wall(["ivc", "--minimal", path])
    print(f"must {t_must:.3f}s, ivc --minimal {t_min:.3f}s, ratio {t_must / t_min:.2f}")
    assert t_must <= 1.25 * t_min


# -- random instances ------------------------------------------------------------------


def _engine_answers(inst):
    ts = load(inst.lustre())
    E = selected(ts)
    with _ctx() as ctx:
        enum = all_mivcs(ctx, ts, E)
        cuts, complete = all_mcs_up_to_ub(ctx, ts, E)
        must, must_ap = must_set(ctx, ts, E)
    assert enum.complete and complete and not must_ap
    assert not any(m.approximate for m in enum.mivcs) and not any(c.approximate for c in cuts)
    return ts, E, label_family(ts, enum.mivcs), label_family(ts, cuts), labels(ts, must)


@pytest.fixture(scope="module")
def random_results():
    return [(inst, ref, _engine_answers(inst)) for inst, ref in instances()]


@pytest.mark.criterion(5, "engines agree with brute-force enumeration on random systems")
def test_oracle_equivalence(random_results):
    assert len(random_results) >= 20
    mismatches = []
    for n, (inst, ref, (_ts, _E, mivcs, cuts, must)) in enumerate(random_results):
        if (mivcs, cuts, must) != (set(ref.mivcs), set(ref.mcs), ref.must):
            mismatches.append(n)
    assert mismatches == []


@pytest.mark.criterion(6, "MIVCs are the minimal hitting sets of the MCSs; MUST is their intersection")
def test_duality(random_results):
    for inst, _ref, (_ts, _E, mivcs, cuts, must) in random_results:
        assert mivcs == minimal_hitting_sets(cuts, frozenset(inst.labels))
        assert must == frozenset.intersection(*mivcs)
        assert must == frozenset().union(*(c for c in cuts if len(c) == 1))


# -- soundness ----------------------------------------------------------------------------


def _soundness(ts):
    E = selected(ts)
    failures = []
    with _ctx() as ctx:
        for ivc in (get_approximate_mivc(ctx, ts, E), minimal_ivc(ctx, ts, E)):
            if not ivc.approximate:
                failures += ivc_failures(ctx, ts, E, ivc.elements)
        for m in all_mivcs(ctx, ts, E).mivcs:
            if not m.approximate:
                failures += mivc_failures(ctx, ts, E, m.elements)
        for c in all_mcs_up_to_ub(ctx, ts, E)[0]:
            if not c.approximate:
                failures += mcs_failures(ctx, ts, E, c.elements)
    return failures


@pytest.mark.criterion(7, "every reported IVC, MIVC and MCS survives an independent re-check")
@pytest.mark.parametrize("name", models.NAMES)
def test_soundness_models(name):
    assert _soundness(load(models.source(name))) == []


@pytest.mark.criterion(7, "every reported IVC, MIVC and MCS survives an independent re-check")
def test_soundness_random():
    failures = []
    for inst, _ref in instances():
        failures += _soundness(load(inst.lustre()))
    assert failures == []


# -- timeouts -----------------------------------------------------------------------------

TIMEOUT_COMMANDS = (
    ["check"],
    ["ivc", "--approximate"],
    ["ivc", "--minimal"],
    ["ivc", "--all"],
    ["mcs", "--all"],
    ["mcs", "--smallest"],
    ["must"],
)


def _reported_claims(doc):
    """(kind, labels) for every solution the report does not flag as approximate."""
    p = doc["properties"][0]
    out = []
    if p["ivc"] and not p["ivc"]["approximate"]:
        out.append(("ivc", p["ivc"]["elements"]))
    if p["mivcs"]:
        out += [("mivc", m) for m, ap in zip(p["mivcs"], p["mivcs_approximate"]) if not ap]
    if p["mcs"]:
        out += [("mcs", c) for c, ap in zip(p["mcs"]["sets"], p["mcs"]["approximate"]) if not ap]
    if p["must"] and not p["must"]["approximate"]:
        out += [("mcs", [x]) for x in p["must"]["elements"]]
    return out


def _flagged(p):
    if p["verdict"] == "unknown":
        return True
    if p["ivc"] and p["ivc"]["approximate"]:
        return True
    if p["mivcs"] is not None and (not p["mivcs_complete"] or any(p["mivcs_approximate"])):
        return True
    if p["must"] and p["must"]["approximate"]:
        return True
    if p["mcs"] and (not p["mcs"]["complete"] or any(p["mcs"]["approximate"])):
        return True
    return False


@pytest.mark.criterion(8, "with a 1 ms timeout every analysis stops and flags its results")
@pytest.mark.parametrize("name", models.NAMES)
@pytest.mark.parametrize("command", TIMEOUT_COMMANDS, ids=lambda c: "-".join(c))
def test_timeout_discipline(name, command):
    path = str(models.path(name))
    out = io.StringIO()
    t0 = time.perf_counter()
    code = run([*command, path, "--timeout", "1", "--format", "json"], stdout=out, stderr=io.StringIO())
    assert time.perf_counter() - t0 < 60
    doc = json.loads(out.getvalue())
    p = doc["properties"][0]
    claims = _reported_claims(doc)
    assert code in (0, 20) and doc["exit_code"] == code
    assert p["verdict"] != "unsafe"
    # exit 0 only when the run beat the clock and nothing needs a flag
    assert _flagged(p) == (code == 20)
    ts = load(models.source(name))
    E = selected(ts)
    failures = []
    with _ctx() as ctx:
        for kind, labs in claims:
            ids = ts.ids(*labs)
            check = {"ivc": ivc_failures, "mivc": mivc_failures, "mcs": mcs_failures}[kind]
            failures += check(ctx, ts, E, ids)
    assert failures == []
