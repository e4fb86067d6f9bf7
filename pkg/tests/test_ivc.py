import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import label_family, labels, selected
from rechecks import mivc_failures
from mivckit import (
    ExplorationMap,
    IncompleteEnumeration,
    IvcResult,
    MivcEnumeration,
    all_mivcs,
    categorize,
    get_approximate_mivc,
    get_unexplored_max,
    load,
    minimal_ivc,
    minimize_ivc,
)

UNIVERSE = range(5)
subsets = st.frozensets(st.sampled_from(list(UNIVERSE)), max_size=5)


@pytest.fixture(scope="module")
def emap_factory():
    maps = []

    def make():
        m = ExplorationMap(UNIVERSE)
        maps.append(m)
        return m

    yield make
    for m in maps:
        m.close()


@settings(max_examples=40, deadline=None)
@given(ops=st.lists(st.tuples(st.sampled_from(["up", "down"]), subsets), max_size=6))
def test_map_returns_a_largest_admitted_set(emap_factory, ops):
    emap = emap_factory()
    for kind, ids in ops:
        (emap.block_up if kind == "up" else emap.block_down)(ids)
    admitted = [
        frozenset(c) for r in range(6) for c in itertools.combinations(UNIVERSE, r) if emap.admits(c)
    ]
    got = get_unexplored_max(emap)
    if not admitted:
        assert got is None
    else:
        assert got is not None and emap.admits(got)
        assert len(got) == max(len(a) for a in admitted)
    emap.close()


def test_required_elements_are_always_in_the_seed():
    with ExplorationMap(range(4)) as emap:
        emap.require([2])
        emap.block_up([1, 2])
        seed = emap.max_unexplored()
        assert 2 in seed and 1 not in seed


def test_approximate_core_is_a_superset_of_some_mivc(altitude, ctx):
    E = selected(altitude)
    approx = get_approximate_mivc(ctx, altitude, E)
    minimal = minimal_ivc(ctx, altitude, E)
    assert minimal.elements <= approx.elements
    assert mivc_failures(ctx, altitude, E, minimal.elements) == []


def test_minimization_keeps_must_elements(triplex_fixed, ctx):
    E = selected(triplex_fixed)
    s1 = triplex_fixed.ids("SystemModel.S1")
    r = minimize_ivc(ctx, triplex_fixed, E, E, must=s1)
    assert s1 <= r.elements and not r.approximate
    assert len(r.elements & triplex_fixed.ids("SystemModel.S1", "SystemModel.S2", "SystemModel.S3")) == 2


def test_unprovable_property_gives_flagged_everything(altitude, ctx):
    broken = load(altitude.source_text.replace("actual_alt <= THRESH", "actual_alt < 0.0"))
    r = get_approximate_mivc(ctx, broken, selected(broken))
    assert r.approximate and r.elements == selected(broken)


def test_enumeration_with_given_must_set(triplex_fixed, ctx):
    E = selected(triplex_fixed)
    must = triplex_fixed.ids(
        "Environment.E1", "Environment.E3", "Environment.E6", "Environment.E7", "SystemModel.C1", "Controller.L1"
    )
    enum = all_mivcs(ctx, triplex_fixed, E, must=(must, False))
    assert enum.complete and len(enum.mivcs) == 3
    for m in enum.mivcs:
        assert must <= m.elements


def test_categorization(triplex_fixed, ctx):
    E = selected(triplex_fixed)
    must, may, irr = categorize(all_mivcs(ctx, triplex_fixed, E), E)
    assert labels(triplex_fixed, may) == {"SystemModel.S1", "SystemModel.S2", "SystemModel.S3"}
    assert labels(triplex_fixed, irr) == {
        "SystemModel.C2", "SystemModel.C3", "Environment.E2", "Environment.E4", "Environment.E5"
    }
    assert must | may | irr == E


def test_categorization_needs_a_complete_exact_enumeration():
    with pytest.raises(IncompleteEnumeration):
        categorize(MivcEnumeration((IvcResult(frozenset({1})),), complete=False), {1, 2})
    with pytest.raises(IncompleteEnumeration):
        categorize(MivcEnumeration((IvcResult(frozenset({1}), approximate=True),), complete=True), {1, 2})


def test_property_needing_nothing_has_the_empty_core(ctx):
    ts = load(
        'node N(a: int) returns (b: int);\n(*@contract assume "A" a > 0; guarantee "P" b = a; *)\nlet b = a; tel'
    )
    E = selected(ts)
    enum = all_mivcs(ctx, ts, E)
    assert label_family(ts, enum.mivcs) == {frozenset()}
