"""Fault tolerance of a triple-redundant altitude sensor, read off cut sets.

A minimal cut set is a smallest group of contract items whose failure breaks
the requirement.  Singletons are single points of failure.

Run with ``python demos/triplex_cut_sets.py``.
"""

from collections import Counter

from mivckit import AnalysisContext, DEFAULT_CATEGORIES, all_mcs_up_to_ub, all_mivcs, load, models, select_elements


def names(ts, ids):
    return sorted(ts.elements[i].label for i in ids)


for name in ("altitude3", "altitude3_fixed"):
    ts = load(models.source(name))
    E = select_elements(ts, DEFAULT_CATEGORIES)
    with AnalysisContext() as ctx:
        cuts, complete = all_mcs_up_to_ub(ctx, ts, E)
        enum = all_mivcs(ctx, ts, E)

    print(f"== {name}: {len(cuts)} minimal cut sets (complete={complete})")
    sizes = Counter(len(c.elements) for c in cuts)
    for size in sorted(sizes):
        print(f"  size {size}: {sizes[size]}")
    sensors = [c for c in cuts if all(n.startswith("SystemModel.S") for n in names(ts, c.elements))]
    for c in sensors:
        print("  sensor cut:", ", ".join(names(ts, c.elements)))
    print(f"  minimal cores: {len(enum.mivcs)}")
    for m in enum.mivcs:
        print("   ", ", ".join(names(ts, m.elements)))

# With the buggy voter every sensor is a single point of failure; the fixed
# voter needs two sensors to fail together.
