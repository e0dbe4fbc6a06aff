"""Nerve-fiber models: delay distributions, channels, failure targets, seeded streams."""

from __future__ import annotations

import bisect
import hashlib
import math
import random
from dataclasses import dataclass
from typing import Union

__all__ = [
    "Constant",
    "Uniform",
    "Exponential",
    "DelayModel",
    "sample_delay",
    "Channel",
    "Delivered",
    "Dropped",
    "deliver",
    "FailureTarget",
    "CENTER",
    "stream_seed",
    "make_stream",
    "LazyStream",
]


def _check_nonneg(name: str, value: float) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self) -> None:
        _check_nonneg("value", self.value)

    @property
    def mean(self) -> float:
        return float(self.value)

    @property
    def variance(self) -> float:
        return 0.0

    @property
    def is_random(self) -> bool:
        return False

    def sample(self, rng) -> float:
        return float(self.value)

    def scaled(self, k: float) -> Constant:
        return Constant(self.value * k)


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self) -> None:
        _check_nonneg("low", self.low)
        _check_nonneg("high", self.high)
        if self.low > self.high:
            raise ValueError(f"uniform bounds reversed: {self.low} > {self.high}")

    @property
    def mean(self) -> float:
        return (self.low + self.high) / 2.0

    @property
    def variance(self) -> float:
        return (self.high - self.low) ** 2 / 12.0

    @property
    def is_random(self) -> bool:
        return self.high > self.low

    def sample(self, rng) -> float:
        if self.low == self.high:
            return float(self.low)
        return self.low + (self.high - self.low) * rng.random()

    def scaled(self, k: float) -> Uniform:
        return Uniform(self.low * k, self.high * k)


@dataclass(frozen=True)
class Exponential:
    mean_value: float

    def __post_init__(self) -> None:
        _check_nonneg("mean", self.mean_value)

    @property
    def mean(self) -> float:
        return float(self.mean_value)

    @property
    def variance(self) -> float:
        return self.mean_value ** 2

    @property
    def is_random(self) -> bool:
        return self.mean_value > 0

    def sample(self, rng) -> float:
        if self.mean_value == 0:
            return 0.0
        # inverse CDF; 1 - u lies in (0, 1] so the log is finite
        return -self.mean_value * math.log(1.0 - rng.random())

    def scaled(self, k: float) -> Exponential:
        return Exponential(self.mean_value * k)


DelayModel = Union[Constant, Uniform, Exponential]


def sample_delay(model: DelayModel, rng) -> float:
    """Draw one nonnegative duration from ``model`` using ``rng``.

    Constant models never touch the stream, so a constant channel costs no
    randomness and leaves every other draw where it was.
    """
    return model.sample(rng)


@dataclass(frozen=True)
class Channel:
    """A communication line between neurons and the nerve center.

    Outage windows are half-open ``[start, end)`` intervals in simulated time.
    """

    id: str
    delay: DelayModel = Constant(0.0)
    failure_probability: float = 0.0
    outages: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        p = self.failure_probability
        if not isinstance(p, (int, float)) or not 0.0 <= p <= 1.0:
            raise ValueError(f"failure_probability must lie in [0, 1], got {p!r}")
        prev_end = -math.inf
        for start, end in self.outages:
            if not (0 <= start <= end) or not math.isfinite(end):
                raise ValueError(f"bad outage window [{start}, {end})")
            if start < prev_end:
                raise ValueError("outage windows must be sorted and non-overlapping")
            prev_end = end
        object.__setattr__(self, "_starts", [s for s, _ in self.outages])

    def in_outage(self, t: float) -> bool:
        i = bisect.bisect_right(self._starts, t) - 1
        return i >= 0 and t < self.outages[i][1]

    def scaled(self, k: float) -> Channel:
        return Channel(self.id, self.delay.scaled(k), self.failure_probability, self.outages)


@dataclass(frozen=True)
class Delivered:
    after: float


@dataclass(frozen=True)
class Dropped:
    reason: str  # Outage | Random | Injected | Horizon


def deliver(channel: Channel, at: float, rng) -> Delivered | Dropped:
    """Decide the fate of one message sent on ``channel`` at time ``at``.

    The drop draw comes first and the delay draw second, and both are taken
    whenever the channel has any randomness at all, so raising
    ``failure_probability`` only ever turns deliveries into drops for the
    same stream.
    """
    if channel.in_outage(at):
        return Dropped("Outage")
    p = channel.failure_probability
    if p == 0.0 and not channel.delay.is_random:
        return Delivered(channel.delay.sample(None))
    u = rng.random()
    after = sample_delay(channel.delay, rng)
    if u < p:
        return Dropped("Random")
    return Delivered(after)


@dataclass(frozen=True)
class FailureTarget:
    kind: str  # channel | neuron | center
    id: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("channel", "neuron", "center"):
            raise ValueError(f"unknown failure target kind {self.kind!r}")
        if (self.kind == "center") != (self.id is None):
            raise ValueError("center targets carry no id; channel/neuron targets need one")

    @property
    def label(self) -> str:
        return "center" if self.id is None else f"{self.kind}:{self.id}"

    @classmethod
    def channel(cls, channel_id: str) -> FailureTarget:
        return cls("channel", channel_id)

    @classmethod
    def neuron(cls, neuron_id: str) -> FailureTarget:
        return cls("neuron", neuron_id)


CENTER = FailureTarget("center")


def stream_seed(root_seed: int, name: str) -> int:
    digest = hashlib.blake2b(f"{root_seed}\x1f{name}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def make_stream(root_seed: int, name: str) -> random.Random:
    """Independent generator for one named consumer of the run's root seed."""
    return random.Random(stream_seed(root_seed, name))


class LazyStream:
    """Named stream that is only seeded on first draw."""

    __slots__ = ("_seed", "_name", "_rng")

    def __init__(self, root_seed: int, name: str) -> None:
        self._seed = root_seed
        self._name = name
        self._rng = None

    def random(self) -> float:
        if self._rng is None:
            self._rng = make_stream(self._seed, self._name)
        return self._rng.random()
