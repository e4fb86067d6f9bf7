"""Which contract items does the altitude safety requirement actually depend on?

Run with ``python demos/altitude_cores.py``.  Needs a z3 binary on PATH.
"""

from mivckit import AnalysisContext, DEFAULT_CATEGORIES, all_mivcs, categorize, load, models, select_elements
from mivckit import get_approximate_mivc, minimal_ivc


def show(ts, title, ids):
    names = sorted(ts.elements[i].label for i in ids)
    print(f"{title} ({len(names)}): {', '.join(names) or '-'}")


# %% Load and elaborate the model.  Every assumption and guarantee becomes an
# element that can be switched on or off in the proof.
ts = load(models.source("altitude"))
E = select_elements(ts, DEFAULT_CATEGORIES)
print(f"{ts.name}: {len(E)} elements, property {ts.properties[0].label}")

with AnalysisContext() as ctx:
    # %% The core of a single k-induction proof is cheap but may contain extras.
    approx = get_approximate_mivc(ctx, ts, E)
    show(ts, "approximate IVC", approx.elements)

    # %% Deletion shrinks it to a minimal one.
    minimal = minimal_ivc(ctx, ts, E)
    show(ts, "minimal IVC", minimal.elements)

    # %% Enumerating every minimal core tells us which items are indispensable.
    enum = all_mivcs(ctx, ts, E)
    must, may, irr = categorize(enum, E)

print(f"{len(enum.mivcs)} minimal core(s), complete={enum.complete}")
show(ts, "MUST", must)
show(ts, "MAY", may)
show(ts, "IRR", irr)
# The IRR items can be edited freely without touching this requirement.
