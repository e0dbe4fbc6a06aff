"""Exception types shared across the simulator."""

from __future__ import annotations


class CityBrainError(Exception):
    """Base class for every error raised by this package."""


# graph

class DuplicateId(CityBrainError):
    pass


class UnknownNeuron(CityBrainError):
    pass


class SelfLoop(CityBrainError):
    pass


class EmptyGraph(CityBrainError):
    pass


class AllCensusZero(CityBrainError):
    pass


class FrozenGraph(CityBrainError):
    """Mutation attempted on a graph that was sealed after a run."""


# arcs and kernel

class MixedKinds(CityBrainError):
    pass


class InvalidArc(CityBrainError):
    def __init__(self, arc_id: str, violations: list) -> None:
        self.arc_id = arc_id
        self.violations = list(violations)
        names = ", ".join(v.code for v in self.violations)
        super().__init__(f"arc {arc_id!r} is invalid: {names}")


class ClockRegression(CityBrainError):
    pass


class UnknownTarget(CityBrainError):
    pass


class BadWindow(CityBrainError):
    pass


class HorizonExceeded(CityBrainError):
    def __init__(self, pending: int, horizon: float) -> None:
        self.pending = pending
        self.horizon = horizon
        super().__init__(f"{pending} events still pending at horizon {horizon}")


class InvalidScenario(CityBrainError):
    pass


# scoring

class InvalidParams(CityBrainError):
    pass


class DuplicateCategory(CityBrainError):
    pass


class ProtectedCategory(CityBrainError):
    pass


class UnknownCategory(CityBrainError):
    pass


# io

class CorruptRecord(CityBrainError):
    def __init__(self, line: int, reason: str) -> None:
        self.line = line
        self.reason = reason
        super().__init__(f"corrupt record at line {line}: {reason}")


class ScenarioError(CityBrainError):
    """Parsing or validation failed; ``issues`` holds every located problem."""

    def __init__(self, issues: list) -> None:
        self.issues = list(issues)
        first = self.issues[0] if self.issues else None
        summary = f"{first.path}: {first.message}" if first else "invalid scenario"
        if len(self.issues) > 1:
            summary += f" (+{len(self.issues) - 1} more)"
        super().__init__(summary)

    @property
    def codes(self) -> list[str]:
        return [i.code for i in self.issues]
