"""Verification reports: legs, discrepancies and a pass/fail/inconclusive verdict."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

SCHEMA = 1
STATUS_ORDER = {"pass": 0, "inconclusive": 2, "fail": 1}


@dataclass
class Leg:
    name: str
    value: complex
    error_budget: float = 0.0
    inconclusive: bool = False


@dataclass
class Comparison:
    left: str
    right: str
    abs_diff: float
    rel_diff: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.rel_diff <= self.tolerance


@dataclass
class VerificationReport:
    suite: str
    legs: list[Leg] = field(default_factory=list)
    comparisons: list[Comparison] = field(default_factory=list)
    truncation: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    wall_time: float = 0.0
    forced_status: str | None = None

    def leg(self, name: str) -> Leg:
        for lg in self.legs:
            if lg.name == name:
                return lg
        raise KeyError(name)

    def add_leg(self, name, value, error_budget=0.0, inconclusive=False) -> Leg:
        lg = Leg(name, complex(value), float(error_budget), bool(inconclusive))
        self.legs.append(lg)
        return lg

    def compare(self, left: str, right: str, tolerance: float) -> Comparison:
        a, b = self.leg(left).value, self.leg(right).value
        d = abs(a - b)
        scale = max(abs(a), abs(b))
        rel = d / scale if scale > 0 else 0.0
        c = Comparison(left, right, d, rel, tolerance)
        self.comparisons.append(c)
        return c

    def check(self, name: str, measured: float, tolerance: float) -> Comparison:
        """A one-sided check: ``measured`` (already a discrepancy) <= tolerance."""
        c = Comparison(name, "tolerance", float(measured), float(measured), tolerance)
        self.comparisons.append(c)
        return c

    @property
    def status(self) -> str:
        if self.forced_status is not None:
            return self.forced_status
        if any(lg.inconclusive for lg in self.legs):
            return "inconclusive"
        return "pass" if all(c.passed for c in self.comparisons) else "fail"

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "schema": SCHEMA,
            "suite": self.suite,
            "status": self.status,
            "legs": [{"name": lg.name, "value": _cplx(lg.value), "error_budget": _num(lg.error_budget),
                      "inconclusive": lg.inconclusive} for lg in self.legs],
            "comparisons": [{"left": c.left, "right": c.right, "abs": _num(c.abs_diff),
                             "rel": _num(c.rel_diff), "tolerance": c.tolerance, "passed": c.passed}
                            for c in self.comparisons],
            "truncation": {k: _jsonable(v) for k, v in self.truncation.items()},
            "notes": list(self.notes),
        }
        if include_timing:
            out["wall_time"] = round(self.wall_time, 3)
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2)

    def summary_line(self) -> str:
        worst = max((c.rel_diff for c in self.comparisons), default=0.0)
        return f"{self.suite}: {self.status.upper()} (worst rel {worst:.2e})"


def worst_status(statuses) -> str:
    statuses = list(statuses)
    if "fail" in statuses:
        return "fail"
    if "inconclusive" in statuses:
        return "inconclusive"
    return "pass"


def exit_code(status: str) -> int:
    return STATUS_ORDER[status]


def _num(x: float):
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _cplx(z: complex):
    return [_num(z.real), _num(z.imag)]


def _jsonable(v):
    if isinstance(v, complex):
        return _cplx(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if hasattr(v, "item"):
        return _jsonable(v.item())
    if isinstance(v, float):
        return _num(v)
    return v
