"""Diagnostics shared by every phase.

A diagnostic has a stable code, a source span, a message and a JSON-friendly
payload.  Rendering is deterministic: candidate lists are sorted and any
type variables are renumbered before they reach a message.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

CODES = (
    "E-SYNTAX",
    "E-UNBOUND",
    "E-TYPE",
    "E-SIG-MISMATCH",
    "E-NO-SOLUTION",
    "E-AMBIGUOUS",
    "E-TERMINATION",
    "E-DEPTH-CAP",
    "E-MISSING-ANNOT",
    "E-IMPURE-FUNCTOR",
    "E-ALIAS-CYCLE",
)


@dataclass
class Diagnostic:
    code: str
    span: object  # syntax.Span or None
    message: str
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.code not in CODES:
            raise ValueError(f"unknown diagnostic code {self.code}")
        if "candidates" in self.payload:
            self.payload["candidates"] = sorted(
                self.payload["candidates"], key=lambda c: (c["normal_form"], c["expr"])
            )

    def span_dict(self) -> Optional[dict]:
        s = self.span
        if s is None:
            return None
        return {"line": s.line, "col": s.col, "end_line": s.end_line, "end_col": s.end_col}

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "span": self.span_dict(),
            "message": self.message,
            "payload": self.payload,
        }


class CompileError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(f"{diagnostic.code}: {diagnostic.message}")
        self.diagnostic = diagnostic


def _location(d: Diagnostic, filename: str) -> str:
    if d.span is None:
        return filename
    return f"{filename}:{d.span.line}:{d.span.col}"


def _snapshot_text(snap: dict) -> str:
    inner = ", ".join(f"{k} = {v}" for k, v in snap.items())
    return "{" + inner + "}"


def render_human(d: Diagnostic, filename: str = "<input>", color: bool = False) -> str:
    head = f"error[{d.code}]"
    if color:
        head = f"\x1b[1;31m{head}\x1b[0m"
    lines = [f"{_location(d, filename)}: {head}: {d.message}"]
    p = d.payload
    if d.code == "E-AMBIGUOUS" and "candidates" in p:
        lines.append("  candidates:")
        for c in p["candidates"]:
            if c["expr"] == c["normal_form"]:
                lines.append(f"    {c['normal_form']}")
            else:
                lines.append(f"    {c['normal_form']}  (from {c['expr']})")
    if d.code in ("E-TERMINATION", "E-DEPTH-CAP"):
        if "functor" in p:
            lines.append(f"  functor: {p['functor']}")
        if "previous" in p:
            lines.append(f"  previous: {_snapshot_text(p['previous'])}")
            lines.append(f"  incoming: {_snapshot_text(p['incoming'])}")
        if p.get("partial_solutions"):
            lines.append("  solutions found before aborting (not authoritative):")
            for s in p["partial_solutions"]:
                lines.append(f"    {s}")
    if d.code == "E-SYNTAX" and p.get("expected"):
        lines.append("  expected: " + ", ".join(p["expected"]))
    if "constraints" in p and p["constraints"]:
        lines.append("  constraints: " + ", ".join(p["constraints"]))
    if "note" in p:
        lines.append(f"  note: {p['note']}")
    return "\n".join(lines)


def render_json(d: Diagnostic) -> str:
    return json.dumps(d.to_json(), sort_keys=True)


def render(d: Diagnostic, mode: str = "human", filename: str = "<input>", color: bool = False) -> str:
    if mode == "json":
        return render_json(d)
    return render_human(d, filename, color)
