"""Structured audit results and their serialisation."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any


def frac_str(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def jsonable(obj: Any) -> Any:
    """Recursively convert Fractions, bytes, tuples and dataclasses for JSON."""
    if isinstance(obj, Fraction):
        return frac_str(obj)
    if isinstance(obj, (bytes, bytearray)):
        return obj.decode("latin-1")
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "as_record"):
        return obj.as_record()
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return obj


@dataclass
class AuditReport:
    """Outcome of one audit over one string.

    ``failures`` make the audit fail; ``annotations`` explain observations
    that are allowed (exceptions the argument accounts for); ``tallies`` hold
    counters and per-bucket summaries.
    """

    name: str
    failures: list[dict] = field(default_factory=list)
    annotations: list[dict] = field(default_factory=list)
    tallies: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, reason: str, **data):
        self.failures.append({"reason": reason, **data})

    def note(self, kind: str, **data):
        self.annotations.append({"kind": kind, **data})

    def bump(self, key: str, by: int = 1):
        self.tallies[key] = self.tallies.get(key, 0) + by

    def to_dict(self) -> dict:
        return jsonable(
            {
                "name": self.name,
                "passed": self.passed,
                "failures": self.failures,
                "annotations": self.annotations,
                "tallies": self.tallies,
            }
        )
