"""Deterministic discrete-event kernel.

Events are ordered by ``(time, seq)``; ``seq`` is handed out when an event
is scheduled, so simultaneous events run in scheduling order.  All event
times sit on the 1e-9 grid used by the log format.

Randomness comes from one root seed split into named streams
(``<stimulus>/<leg>/<channel>``, ``<stimulus>/center`` and so on).  A
firing's draws therefore do not depend on any other firing, channel or
neuron, and changing one parameter only perturbs the draws that use it.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

from .errors import (
    BadWindow,
    ClockRegression,
    HorizonExceeded,
    InvalidScenario,
    UnknownTarget,
)
from .eventlog import EventKind, EventLog, quantize
from .network import Channel, DelayModel, FailureTarget, LazyStream, sample_delay
from .reflex import ReflexArcSpec, Violation, classify_arc, fire, validate_arc
from .sns import BigSnsGraph, Post


class SimKernel:
    def __init__(
        self,
        graph: BigSnsGraph,
        channels: dict[str, Channel] | None = None,
        seed: int = 0,
        horizon: float = math.inf,
        log: EventLog | None = None,
    ) -> None:
        self.graph = graph
        self.channels = dict(channels or {})
        self.seed = seed
        self.horizon = horizon
        self.log = log if log is not None else EventLog()
        self.now = 0.0
        self._queue: list = []
        self._seq = 0
        self._down: dict[FailureTarget, list[tuple[float, float]]] = {}
        self._arcs: dict[str, tuple[ReflexArcSpec, list[Violation], int | None]] = {}
        self.expired = 0
        self.dispatched = 0

    # -- scheduling -------------------------------------------------------

    def schedule(self, time: float, fn: Callable, *args, on_expire: Callable | None = None) -> None:
        """Run ``fn(time, *args)`` at ``time``.

        ``on_expire(horizon)`` is called instead if the run ends at the
        horizon with this event still pending.
        """
        time = quantize(time)
        if time < self.now:
            raise ClockRegression(f"cannot schedule at {time}; clock is at {self.now}")
        heapq.heappush(self._queue, (time, self._seq, fn, args, on_expire))
        self._seq += 1

    @property
    def pending(self) -> int:
        return len(self._queue)

    @property
    def scheduled(self) -> int:
        """Total number of events ever scheduled on this kernel."""
        return self._seq

    def stream(self, name: str) -> LazyStream:
        return LazyStream(self.seed, name)

    def drain(self, strict: bool = False) -> EventLog:
        """Dispatch events until the queue is empty or the horizon is passed."""
        queue = self._queue
        horizon = self.horizon
        pop = heapq.heappop
        n = 0
        while queue and queue[0][0] <= horizon:
            t, _, fn, args, _ = pop(queue)
            self.now = t
            fn(t, *args)
            n += 1
        self.dispatched += n
        if queue:
            self.expired = len(queue)
            self.now = max(self.now, quantize(horizon))
            for _, _, _, _, on_expire in sorted(queue, key=lambda e: (e[0], e[1])):
                if on_expire is not None:
                    on_expire(self.now)
            queue.clear()
            if strict:
                raise HorizonExceeded(self.expired, horizon)
        return self.log

    # -- failures ---------------------------------------------------------

    def _check_target(self, target: FailureTarget) -> None:
        if target.kind == "channel" and target.id not in self.channels:
            raise UnknownTarget(target.label)
        if target.kind == "neuron" and target.id not in self.graph:
            raise UnknownTarget(target.label)

    def inject_failure(self, target: FailureTarget, start: float, end: float) -> None:
        """Take ``target`` down for the half-open window ``[start, end)``."""
        self._check_target(target)
        if not (math.isfinite(start) and math.isfinite(end)):
            raise BadWindow(f"window [{start}, {end}) is not finite")
        if not 0 <= start <= end:
            raise BadWindow(f"window [{start}, {end}) is malformed")
        if end > self.horizon:
            raise BadWindow(f"window [{start}, {end}) runs past horizon {self.horizon}")
        if start < self.now:
            raise BadWindow(f"window starts at {start}, before the clock {self.now}")
        start, end = quantize(start), quantize(end)
        self._down.setdefault(target, []).append((start, end))
        subj = (target.label,)
        info = {"start": start, "end": end}
        self.schedule(start, lambda t: self.log.append(t, EventKind.FailureInjected, subj, info))
        self.schedule(end, lambda t: self.log.append(t, EventKind.FailureCleared, subj, info))

    def is_down(self, target: FailureTarget, t: float) -> bool:
        windows = self._down.get(target)
        if not windows:
            return False
        return any(s <= t < e for s, e in windows)

    # -- arcs and posts ---------------------------------------------------

    def _arc_entry(self, arc: ReflexArcSpec):
        hit = self._arcs.get(arc.arc_id)
        if hit is None or hit[0] != arc:
            violations = validate_arc(arc, self.graph, self.channels)
            kind = None if violations else classify_arc(arc, self.graph).ordinal
            hit = (arc, violations, kind)
            self._arcs[arc.arc_id] = hit
        return hit

    def arc_violations(self, arc: ReflexArcSpec) -> list[Violation]:
        return self._arc_entry(arc)[1]

    def arc_type(self, arc: ReflexArcSpec) -> int:
        return self._arc_entry(arc)[2]

    def schedule_post(self, post: Post) -> None:
        self.schedule(post.timestamp, self._post, post)

    def _post(self, t: float, post: Post) -> None:
        if self.is_down(FailureTarget("neuron", post.author), t):
            info = {"via": "sns", "post": post.payload_kind.value, "body": post.body}
            self.log.append(t, EventKind.MessageSent, (post.author,), info)
            self.log.append(t, EventKind.MessageDropped, (post.author,), {**info, "reason": "Injected"})
            return
        self.graph.post_status(post.author, t, post.payload_kind, post.body, log=self.log)


def inject_failure(kernel: SimKernel, target: FailureTarget, window: tuple[float, float]) -> None:
    kernel.inject_failure(target, *window)


def human_reaction_delay(profile: DelayModel, rng) -> float:
    return sample_delay(profile, rng)


@dataclass
class Simulation:
    """Everything a run produced: the log, the populated graph, the kernel."""

    log: EventLog
    graph: BigSnsGraph
    kernel: SimKernel
    scenario_name: str
    seed: int

    @property
    def expired(self) -> int:
        return self.kernel.expired


def simulate(scenario, seed: int = 0, *, strict: bool = False) -> Simulation:
    """Run ``scenario`` to quiescence or its horizon."""
    from .scenario import validate_scenario

    issues = validate_scenario(scenario)
    if issues:
        raise InvalidScenario("; ".join(f"{i.path}: {i.message}" for i in issues[:5]))
    meta = scenario.metadata
    graph = scenario.build_graph()
    kernel = SimKernel(graph, {c.id: c for c in scenario.channels}, seed, meta.horizon)
    kernel.log.append(
        0.0,
        EventKind.RunStarted,
        (meta.name,),
        {
            "seed": int(seed),
            "horizon": float(meta.horizon),
            "time_unit": meta.time_unit,
            "neurons": len(scenario.neurons),
            "arcs": len(scenario.arcs),
            "stimuli": len(scenario.stimuli),
        },
    )
    for f in scenario.failures:
        kernel.inject_failure(f.target, f.start, f.end)
    for post in scenario.posts:
        kernel.schedule_post(post)
    arcs = {a.arc_id: a for a in scenario.arcs}
    for stim in scenario.stimuli:
        fire(arcs[stim.arc_id], stim, kernel)
    try:
        kernel.drain(strict=strict)
    finally:
        kernel.log.append(
            kernel.now, EventKind.RunEnded, (meta.name,), {"expired": kernel.expired}
        )
        graph.freeze()
    return Simulation(kernel.log, graph, kernel, meta.name, seed)


def run(scenario, seed: int = 0, *, strict: bool = False) -> EventLog:
    """Execute ``scenario`` with ``seed``; identical inputs give identical logs."""
    return simulate(scenario, seed, strict=strict).log
