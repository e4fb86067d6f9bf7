"""Independent re-checks of reported cores and cut sets.

Each function returns a list of human-readable failures; an empty list
means every claim held up.
"""

from mivckit import Safe, Unsafe, replay_trace


def ivc_failures(ctx, ts, E, ivc, prop=None):
    prop = prop or ts.properties[0]
    bg = ts.element_ids - frozenset(E)
    r = ctx.verify(ts, bg | ivc, prop)
    return [] if isinstance(r, Safe) else [f"IVC {sorted(ivc)} does not re-verify: {r}"]


def mivc_failures(ctx, ts, E, mivc, prop=None):
    prop = prop or ts.properties[0]
    out = ivc_failures(ctx, ts, E, mivc, prop)
    bg = ts.element_ids - frozenset(E)
    for i in sorted(mivc):
        r = ctx.verify(ts, bg | (mivc - {i}), prop)
        if isinstance(r, Safe):
            out.append(f"MIVC {sorted(mivc)} is not minimal: still Safe without {i}")
    return out


def mcs_failures(ctx, ts, E, cut, prop=None):
    """Removing ``cut`` must yield a counterexample that replays."""
    prop = prop or ts.properties[0]
    active = ts.element_ids - frozenset(cut)
    r = ctx.verify(ts, active, prop)
    if not isinstance(r, Unsafe):
        return [f"cut set {sorted(cut)} does not break the property: {r}"]
    if not replay_trace(ts, active, prop, r.trace):
        return [f"counterexample for cut set {sorted(cut)} does not replay"]
    return []
