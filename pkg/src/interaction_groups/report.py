"""Check records and reports shared by every verification routine.

A :class:`Report` is an ordered list of :class:`Check` records.  Each check
carries a stable ``id`` and a short ``anchor`` naming the identity being
tested.  An id may only ever be used with one anchor; this is enforced at
construction time so that machine-readable reports stay unambiguous.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator

PASS = "pass"
FAIL = "fail"
FINDING = "finding"
SKIPPED = "skipped"
STATUSES = (PASS, FAIL, FINDING, SKIPPED)

_anchor_lock = threading.Lock()
_anchors: dict[str, str] = {}


def _register(check_id: str, anchor: str) -> None:
    with _anchor_lock:
        known = _anchors.setdefault(check_id, anchor)
    if known != anchor:
        raise ValueError(f"check id {check_id!r} already bound to anchor {known!r}")


def known_anchors() -> dict[str, str]:
    with _anchor_lock:
        return dict(_anchors)


def _jsonable(value: Any) -> Any:
    """Coerce witnesses into plain JSON types (tuples become lists, numpy scalars become floats)."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value, key=repr) if isinstance(value, (set, frozenset)) else value
        return [_jsonable(v) for v in items]
    if hasattr(value, "tolist"):
        return _jsonable(value.tolist())
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return repr(value)


@dataclass
class Check:
    id: str
    anchor: str
    status: str
    residual: float | None = None
    tol: float | None = None
    witness: Any = None
    mandatory: bool = True

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        _register(self.id, self.anchor)
        if self.residual is not None:
            self.residual = float(self.residual)
        self.witness = _jsonable(self.witness)

    @property
    def passed(self) -> bool:
        # findings and skips are informative; only a mandatory failure fails a run
        return self.status != FAIL or not self.mandatory

    @classmethod
    def residual_check(cls, check_id: str, anchor: str, residual: float, tol: float,
                       witness: Any = None, mandatory: bool = True) -> "Check":
        residual = float(residual)
        status = PASS if residual <= tol else FAIL
        return cls(check_id, anchor, status, residual, tol, witness, mandatory)

    @classmethod
    def flag(cls, check_id: str, anchor: str, ok: bool, witness: Any = None,
             residual: float | None = None, mandatory: bool = True) -> "Check":
        return cls(check_id, anchor, PASS if ok else FAIL, residual, None, witness, mandatory)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "status": self.status,
            "residual": self.residual,
            "tol": self.tol,
            "witness": self.witness,
            "mandatory": self.mandatory,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Check":
        return cls(d["id"], d["anchor"], d["status"], d.get("residual"), d.get("tol"),
                   d.get("witness"), d.get("mandatory", True))


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, other: "Report | Iterable[Check]") -> "Report":
        checks = other.checks if isinstance(other, Report) else list(other)
        self.checks.extend(checks)
        if isinstance(other, Report):
            for k, v in other.data.items():
                self.data.setdefault(k, v)
        return self

    def __iter__(self) -> Iterator[Check]:
        return iter(self.checks)

    def __len__(self) -> int:
        return len(self.checks)

    def get(self, check_id: str) -> list[Check]:
        return [c for c in self.checks if c.id == check_id]

    def __getitem__(self, check_id: str) -> Check:
        found = self.get(check_id)
        if not found:
            raise KeyError(check_id)
        return found[0]

    def __contains__(self, check_id: str) -> bool:
        return any(c.id == check_id for c in self.checks)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def max_residual(self, prefix: str = "") -> float:
        vals = [c.residual for c in self.checks if c.id.startswith(prefix) and c.residual is not None]
        return max(vals, default=0.0)

    def summary(self) -> dict:
        counts = {s: 0 for s in STATUSES}
        for c in self.checks:
            counts[c.status] += 1
        return {"total": len(self.checks), **counts, "ok": self.ok}

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "checks": [c.to_dict() for c in self.checks],
            "data": _jsonable(self.data),
            "summary": self.summary(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(d["title"], [Check.from_dict(c) for c in d["checks"]], dict(d.get("data", {})))

    def text(self) -> str:
        lines = [f"== {self.title} =="]
        for c in self.checks:
            res = "" if c.residual is None else f"  residual={c.residual:.3e}"
            tol = "" if c.tol is None else f" tol={c.tol:.1e}"
            lines.append(f"[{c.status.upper():7s}] {c.id}: {c.anchor}{res}{tol}")
        s = self.summary()
        lines.append(f"-- {s['pass']} pass, {s['fail']} fail, {s['finding']} finding, "
                     f"{s['skipped']} skipped; ok={s['ok']}")
        return "\n".join(lines)
