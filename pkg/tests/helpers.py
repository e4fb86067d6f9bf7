"""Small conversions shared by the test modules."""

from mivckit import DEFAULT_CATEGORIES, select_elements


def selected(ts):
    return select_elements(ts, DEFAULT_CATEGORIES)


def labels(ts, ids):
    return frozenset(ts.elements[i].label for i in ids)


def label_family(ts, results):
    return {labels(ts, r.elements) for r in results}
