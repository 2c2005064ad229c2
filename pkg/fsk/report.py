"""Residual reports shared by the check suites."""

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def relative_residual(lhs, rhs) -> float:
    """|lhs - rhs|_max / max(1, |lhs|_max, |rhs|_max)."""
    return max_abs(np.asarray(lhs) - np.asarray(rhs)) / max(1.0, max_abs(lhs), max_abs(rhs))


@dataclass
class CheckReport:
    """Named residuals checked against a tolerance."""

    suite: str
    tol: float
    residuals: Dict[str, float] = field(default_factory=dict)
    skipped: List[str] = field(default_factory=list)
    info: Dict[str, object] = field(default_factory=dict)

    def add(self, name: str, value: float) -> None:
        self.residuals[name] = max(float(value), self.residuals.get(name, 0.0))

    def failures(self) -> List[str]:
        return [k for k, v in self.residuals.items() if not v <= self.tol]

    @property
    def passed(self) -> bool:
        return not self.failures()

    def merge(self, other: "CheckReport", prefix: str = "") -> None:
        for k, v in other.residuals.items():
            self.residuals[prefix + k] = v
        self.skipped.extend(prefix + s for s in other.skipped)

    def to_json(self) -> Dict:
        return {
            "suite": self.suite,
            "tol": self.tol,
            "passed": self.passed,
            "residuals": {k: float(v) for k, v in sorted(self.residuals.items())},
            "failures": sorted(self.failures()),
            "skipped": sorted(self.skipped),
            "info": self.info,
        }
