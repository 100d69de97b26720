"""Uniform pass/fail reporting for the verification suites.

Each numerical check is one line: a name, the measured value, the
reference it is held against, the deciding statistic (a z-score, a
slope, a ratio, ...) and the verdict.  Suites aggregate checks and are
considered passed when every check passed, or, for statistical batches,
when a stated fraction passed.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    value: float
    reference: float
    stat_name: str
    stat: float
    passed: bool

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.name}: value={self.value:.6g} ref={self.reference:.6g} "
            f"{self.stat_name}={self.stat:.4g} {verdict}"
        )


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)
    min_pass_fraction: float = 1.0

    def add(self, check: Check) -> None:
        self.checks.append(check)

    @property
    def pass_fraction(self) -> float:
        if not self.checks:
            return 0.0
        return sum(c.passed for c in self.checks) / len(self.checks)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and self.pass_fraction >= self.min_pass_fraction

    def lines(self) -> list[str]:
        out = [f"== {self.title} =="]
        out.extend(c.line() for c in self.checks)
        out.append(
            f"-- {self.title}: {sum(c.passed for c in self.checks)}/"
            f"{len(self.checks)} checks passed -> "
            f"{'PASS' if self.passed else 'FAIL'}"
        )
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())
