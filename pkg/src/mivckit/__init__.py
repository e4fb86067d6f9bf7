"""Inductive validity cores, minimal cut sets and MUST sets for Lustre models.

Typical use::

    from mivckit import load, AnalysisContext, select_elements, DEFAULT_CATEGORIES, all_mivcs

    ts = load(open("model.lus").read())
    E = select_elements(ts, DEFAULT_CATEGORIES)
    with AnalysisContext() as ctx:
        result = all_mivcs(ctx, ts, E)
"""

from .errors import (
    CalledNodeHasAssumptions,
    IncompleteEnumeration,
    InputError,
    MivcError,
    NoCutSetExists,
    ParseError,
    SolverError,
    TypeCheckError,
)
from .induction import AnalysisContext, KInductionEngine, Safe, Trace, Undecided, Unsafe, replay_trace, verify
from .ivc import (
    ExplorationMap,
    IvcResult,
    MivcEnumeration,
    all_mivcs,
    categorize,
    get_approximate_mivc,
    get_unexplored_max,
    minimal_ivc,
    minimize_ivc,
)
from .mcs import McsResult, all_mcs_up_to_ub, at_most_k, extract_cut_set, get_single_mcs, instrument, must_set
from .parser import parse_program
from .solver import Session, SolverConfig, open_session
from .system import (
    DEFAULT_CATEGORIES,
    ElementKind,
    TransitionSystem,
    dump_ts,
    elaborate,
    load,
    select_elements,
)
from .typecheck import type_check

__version__ = "0.1.0"
