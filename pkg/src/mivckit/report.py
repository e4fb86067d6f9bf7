"""Analysis reports and their JSON and text renderings.

Element sets are rendered as label lists sorted lexicographically; families
of sets are sorted by size, then by label list, so output does not depend on
the order in which the solver found the solutions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Optional

import jsonschema

from .induction import Trace
from .system import TransitionSystem

SCHEMA_NAME = "report.schema.json"


@dataclass
class PropertyReport:
    label: str
    span: object
    verdict: str  # safe | unsafe | unknown
    k: Optional[int] = None
    reason: Optional[str] = None
    trace: Optional[Trace] = None
    ivc_mode: Optional[str] = None
    ivc: Optional[object] = None  # IvcResult
    mivcs: Optional[object] = None  # MivcEnumeration
    categorization: Optional[tuple] = None  # (must, may, irr)
    must: Optional[tuple] = None  # (elements, approximate)
    mcs_mode: Optional[str] = None
    mcs_bound: Optional[int] = None
    mcs: Optional[list] = None  # McsResult list
    mcs_complete: Optional[bool] = None
    timings: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        """True when any result is approximate, incomplete or unknown."""
        if self.verdict == "unknown":
            return True
        if self.ivc is not None and self.ivc.approximate:
            return True
        if self.mivcs is not None and (not self.mivcs.complete or any(m.approximate for m in self.mivcs.mivcs)):
            return True
        if self.must is not None and self.must[1]:
            return True
        if self.mcs is not None and (not self.mcs_complete or any(m.approximate for m in self.mcs)):
            return True
        return False


@dataclass
class AnalysisReport:
    ts: TransitionSystem
    file: str
    command: str
    selected: frozenset
    config: dict
    solver: str
    properties: list

    def exit_code(self) -> int:
        if any(p.verdict == "unsafe" for p in self.properties):
            return 10
        if any(p.flagged for p in self.properties):
            return 20
        return 0


# -- helpers -------------------------------------------------------------------------


def _span(span) -> dict:
    return {"line": span.line, "column": span.column, "end_line": span.end_line, "end_column": span.end_column}


def _labels(ts, ids) -> list:
    return sorted(ts.elements[i].label for i in ids)


def _family(ts, results) -> list:
    """[(labels, approximate)] sorted by size then labels."""
    rows = [(_labels(ts, r.elements), r.approximate) for r in results]
    rows.sort(key=lambda row: (len(row[0]), row[0]))
    return rows


def _value(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return v


def _trace(trace: Trace) -> list:
    return [{"step": i, "values": {k: _value(st[k]) for k in sorted(st)}} for i, st in enumerate(trace.steps)]


# -- JSON ------------------------------------------------------------------------------


def to_dict(report: AnalysisReport) -> dict:
    ts = report.ts
    out = {
        "tool": "mivc-kit",
        "file": report.file,
        "main": ts.name,
        "command": report.command,
        "solver": report.solver,
        "config": report.config,
        "elements": [
            {
                "id": e.id,
                "label": e.label,
                "kind": e.kind.value,
                "span": _span(e.span),
                "description": e.description,
            }
            for e in sorted((ts.elements[i] for i in report.selected), key=lambda e: e.label)
        ],
        "properties": [],
    }
    for p in report.properties:
        d = {
            "label": p.label,
            "span": _span(p.span),
            "verdict": p.verdict,
            "k": p.k,
            "reason": p.reason,
            "trace": _trace(p.trace) if p.trace is not None else None,
            "ivc": None,
            "mivcs": None,
            "mivcs_approximate": None,
            "mivcs_complete": None,
            "categorization": None,
            "must": None,
            "mcs": None,
            "timings": {k: round(v, 6) for k, v in p.timings.items()},
            "stats": p.stats,
        }
        if p.ivc is not None:
            d["ivc"] = {"mode": p.ivc_mode, "elements": _labels(ts, p.ivc.elements), "approximate": p.ivc.approximate}
        if p.mivcs is not None:
            fam = _family(ts, p.mivcs.mivcs)
            d["mivcs"] = [labels for labels, _ in fam]
            d["mivcs_approximate"] = [ap for _, ap in fam]
            d["mivcs_complete"] = p.mivcs.complete
        if p.categorization is not None:
            must, may, irr = p.categorization
            d["categorization"] = {"must": _labels(ts, must), "may": _labels(ts, may), "irr": _labels(ts, irr)}
        if p.must is not None:
            d["must"] = {"elements": _labels(ts, p.must[0]), "approximate": p.must[1]}
        if p.mcs is not None:
            fam = _family(ts, p.mcs)
            d["mcs"] = {
                "mode": p.mcs_mode,
                "bound": p.mcs_bound,
                "sets": [labels for labels, _ in fam],
                "approximate": [ap for _, ap in fam],
                "complete": p.mcs_complete,
            }
        out["properties"].append(d)
    out["exit_code"] = report.exit_code()
    return out


def load_schema() -> dict:
    return json.loads(resources.files("mivckit").joinpath(SCHEMA_NAME).read_text(encoding="utf-8"))


def validate(doc: dict) -> None:
    """Raise jsonschema.ValidationError if ``doc`` does not match the report schema."""
    jsonschema.validate(doc, load_schema())


def render_json(report: AnalysisReport) -> bytes:
    doc = to_dict(report)
    validate(doc)
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


# -- text ------------------------------------------------------------------------------


def _flag(approximate: bool) -> str:
    return " [approximate]" if approximate else ""


def _set_lines(ts, ids, indent) -> list:
    by_label = sorted((ts.elements[i] for i in ids), key=lambda e: e.label)
    width = max((len(e.label) for e in by_label), default=0)
    return [f"{indent}{e.label:<{width}}  {e.span}" for e in by_label]


def render_text(report: AnalysisReport) -> str:
    ts = report.ts
    lines = [
        f"file: {report.file}",
        f"main node: {ts.name}",
        f"solver: {report.solver}",
        f"elements under analysis ({len(report.selected)}):",
        *_set_lines(ts, report.selected, "  "),
    ]
    for p in report.properties:
        lines.append("")
        head = f"property {p.label} ({p.span}): {p.verdict}"
        if p.verdict == "safe":
            head += f" (k={p.k})"
        elif p.verdict == "unknown" and p.reason:
            head += f" ({p.reason})"
        lines.append(head)
        if p.trace is not None:
            lines.append(f"  counterexample ({len(p.trace)} steps):")
            for i, st in enumerate(p.trace.steps):
                lines.append(f"    step {i}:")
                for name in sorted(st):
                    lines.append(f"      {name} = {_value(st[name])}")
        if p.ivc is not None:
            lines.append(f"  {p.ivc_mode} IVC ({len(p.ivc.elements)} elements){_flag(p.ivc.approximate)}:")
            lines += _set_lines(ts, p.ivc.elements, "    ")
        if p.mivcs is not None:
            state = "complete" if p.mivcs.complete else "incomplete"
            lines.append(f"  MIVCs ({len(p.mivcs.mivcs)}, {state}):")
            for n, r in enumerate(sorted(p.mivcs.mivcs, key=lambda r: (len(r.elements), _labels(ts, r.elements))), 1):
                lines.append(f"    #{n} ({len(r.elements)} elements){_flag(r.approximate)}:")
                lines += _set_lines(ts, r.elements, "      ")
        if p.categorization is not None:
            for name, ids in zip(("MUST", "MAY", "IRR"), p.categorization):
                lines.append(f"  {name} ({len(ids)}):")
                lines += _set_lines(ts, ids, "    ")
        if p.must is not None:
            lines.append(f"  MUST set ({len(p.must[0])} elements){_flag(p.must[1])}:")
            lines += _set_lines(ts, p.must[0], "    ")
        if p.mcs is not None:
            state = "complete" if p.mcs_complete else "incomplete"
            bound = f", up to {p.mcs_bound}" if p.mcs_bound is not None else ""
            lines.append(f"  MCSs ({len(p.mcs)}, {p.mcs_mode}{bound}, {state}):")
            fam = sorted(p.mcs, key=lambda r: (len(r.elements), _labels(ts, r.elements)))
            size = None
            for r in fam:
                if len(r.elements) != size:
                    size = len(r.elements)
                    lines.append(f"    cardinality {size}:")
                inner = ", ".join(f"{ts.elements[i].label} ({ts.elements[i].span})"
                                  for i in sorted(r.elements, key=lambda i: ts.elements[i].label))
                lines.append(f"      {{{inner}}}{_flag(r.approximate)}")
        if p.timings:
            lines.append("  time: " + ", ".join(f"{k} {v:.3f}s" for k, v in p.timings.items()))
    return "\n".join(lines) + "\n"
