"""Residual records shared by validation and verification."""

from dataclasses import asdict, dataclass

import numpy as np


@dataclass
class IdentityCheck:
    name: str
    residual_max: float
    residual_mean: float
    tolerance: float
    passed: bool
    points_evaluated: int

    @classmethod
    def from_residuals(cls, name, residuals, tolerance):
        r = np.asarray(residuals, dtype=float)
        if r.size == 0:
            return cls(name, 0.0, 0.0, float(tolerance), True, 0)
        rmax = float(r.max())
        return cls(name, rmax, float(r.mean()), float(tolerance),
                   bool(rmax <= tolerance), int(r.size))

    def to_dict(self):
        return asdict(self)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}  {self.name:<34s} max={self.residual_max:.3e} "
                f"mean={self.residual_mean:.3e} tol={self.tolerance:.1e} "
                f"n={self.points_evaluated}")


@dataclass
class ValidationReport:
    checks: list
    points: int

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"points": self.points, "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks]}
