"""Cloud reflex arcs: declaration, classification, validation and execution.

An arc is a five-stage chain

    receptor -> afferent channel -> nerve center -> efferent channel -> effector

and its type is fixed by the kinds on either end: three receptor kinds times
three effector kinds gives nine types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import ClockRegression, InvalidArc, MixedKinds
from .eventlog import EventKind, EventRecord
from .network import CENTER, Constant, DelayModel, Dropped, FailureTarget, deliver, sample_delay
from .sns import BigSnsGraph, NeuronKind

if TYPE_CHECKING:
    from .kernel import SimKernel


class NodeRole(str, Enum):
    A_Sensor = "A"
    B_Human = "B"
    C_Program = "C"
    D_Program = "D"
    E_Human = "E"
    F_Device = "F"

    @property
    def letter(self) -> str:
        return self.value


RECEPTOR_KINDS = (NeuronKind.Sensor, NeuronKind.SmartProgram, NeuronKind.Human)
EFFECTOR_KINDS = (NeuronKind.SmartDevice, NeuronKind.Human, NeuronKind.SmartProgram)

_RECEPTOR_ROLE = {
    NeuronKind.Sensor: NodeRole.A_Sensor,
    NeuronKind.Human: NodeRole.B_Human,
    NeuronKind.SmartProgram: NodeRole.C_Program,
}
_EFFECTOR_ROLE = {
    NeuronKind.SmartProgram: NodeRole.D_Program,
    NeuronKind.Human: NodeRole.E_Human,
    NeuronKind.SmartDevice: NodeRole.F_Device,
}


def receptor_role(kind: NeuronKind) -> NodeRole:
    return _RECEPTOR_ROLE[NeuronKind(kind)]


def effector_role(kind: NeuronKind) -> NodeRole:
    return _EFFECTOR_ROLE[NeuronKind(kind)]


@dataclass(frozen=True)
class ArcType:
    ordinal: int
    receptor_kind: NeuronKind
    effector_kind: NeuronKind
    example: str

    @property
    def label(self) -> str:
        return f"{receptor_role(self.receptor_kind).letter}->{effector_role(self.effector_kind).letter}"

    @property
    def name(self) -> str:
        short = {
            NeuronKind.Sensor: "sensor",
            NeuronKind.Human: "human",
            NeuronKind.SmartProgram: "program",
            NeuronKind.SmartDevice: "device",
        }
        return f"{short[self.receptor_kind]} -> {short[self.effector_kind]}"


ARC_TYPES: tuple[ArcType, ...] = (
    ArcType(1, NeuronKind.Sensor, NeuronKind.SmartDevice, "fire sensors -> extinguishing robot"),
    ArcType(2, NeuronKind.Sensor, NeuronKind.Human, "fire sensors -> fire brigade"),
    ArcType(3, NeuronKind.Sensor, NeuronKind.SmartProgram, "fire sensors -> danger-grading program"),
    ArcType(4, NeuronKind.SmartProgram, NeuronKind.SmartDevice, "storage monitor -> spare device"),
    ArcType(5, NeuronKind.SmartProgram, NeuronKind.Human, "storage monitor -> duty staff"),
    ArcType(6, NeuronKind.SmartProgram, NeuronKind.SmartProgram, "storage monitor -> maintenance program"),
    ArcType(7, NeuronKind.Human, NeuronKind.SmartDevice, "watchman alarm -> extinguishing robot"),
    ArcType(8, NeuronKind.Human, NeuronKind.Human, "watchman alarm -> fire brigade"),
    ArcType(9, NeuronKind.Human, NeuronKind.SmartProgram, "watchman alarm -> danger-grading program"),
)

_BY_KINDS = {(t.receptor_kind, t.effector_kind): t for t in ARC_TYPES}


def arc_type_for(receptor_kind: NeuronKind, effector_kind: NeuronKind) -> ArcType:
    try:
        return _BY_KINDS[(NeuronKind(receptor_kind), NeuronKind(effector_kind))]
    except KeyError:
        raise ValueError(f"no arc type for {receptor_kind} -> {effector_kind}") from None


def arc_type_by_ordinal(ordinal: int) -> ArcType:
    if not 1 <= ordinal <= len(ARC_TYPES):
        raise ValueError(f"arc type ordinal must be 1..9, got {ordinal}")
    return ARC_TYPES[ordinal - 1]


class CenterAction(str, Enum):
    Actuate = "Actuate"
    Notify = "Notify"
    Escalate = "Escalate"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class CenterPolicy:
    decision_threshold: float = 0.5
    processing_delay: DelayModel = Constant(0.0)
    action: CenterAction = CenterAction.Actuate

    def __post_init__(self) -> None:
        t = self.decision_threshold
        if not isinstance(t, (int, float)) or not 0.0 <= t <= 1.0:
            raise ValueError(f"decision_threshold must lie in [0, 1], got {t!r}")
        object.__setattr__(self, "action", CenterAction(self.action))


@dataclass(frozen=True)
class ReflexArcSpec:
    arc_id: str
    category: str
    receptors: tuple[str, ...]
    afferent: str
    center: CenterPolicy | None
    efferent: str
    effectors: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "receptors", tuple(self.receptors))
        object.__setattr__(self, "effectors", tuple(self.effectors))


@dataclass(frozen=True)
class Stimulus:
    id: str
    arc_id: str
    time: float
    intensity: float
    receptor: str | None = None

    def __post_init__(self) -> None:
        if not (isinstance(self.time, (int, float)) and math.isfinite(self.time) and self.time >= 0):
            raise ValueError(f"stimulus time must be finite and >= 0, got {self.time!r}")
        if not (isinstance(self.intensity, (int, float)) and 0.0 <= self.intensity <= 1.0):
            raise ValueError(f"stimulus intensity must lie in [0, 1], got {self.intensity!r}")


# -- validation -----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    field: str
    message: str


def validate_arc(
    spec: ReflexArcSpec, graph: BigSnsGraph, channels: Iterable[str]
) -> list[Violation]:
    """Every structural problem with ``spec``; empty means the arc may fire."""
    channels = set(channels)
    out: list[Violation] = []

    def bad(code: str, where: str, msg: str) -> None:
        out.append(Violation(code, where, msg))

    if not spec.receptors:
        bad("MissingReceptor", "receptors", "an arc needs at least one receptor")
    if not spec.afferent:
        bad("MissingAfferent", "afferent", "an arc needs an afferent channel")
    elif spec.afferent not in channels:
        bad("UndeclaredChannel", "afferent", f"channel {spec.afferent!r} is not declared")
    if spec.center is None:
        bad("MissingCenter", "center", "an arc needs a nerve-center policy")
    if not spec.efferent:
        bad("MissingEfferent", "efferent", "an arc needs an efferent channel")
    elif spec.efferent not in channels:
        bad("UndeclaredChannel", "efferent", f"channel {spec.efferent!r} is not declared")
    if not spec.effectors:
        bad("MissingEffector", "effectors", "an arc needs at least one effector")

    for side, members, allowed in (
        ("receptors", spec.receptors, RECEPTOR_KINDS),
        ("effectors", spec.effectors, EFFECTOR_KINDS),
    ):
        if len(set(members)) != len(members):
            bad("DuplicateMember", side, f"{side} list repeats a neuron")
        kinds = set()
        for i, nid in enumerate(members):
            if nid not in graph:
                bad("UnknownNeuron", f"{side}[{i}]", f"neuron {nid!r} is not registered")
                continue
            kind = graph.neuron(nid).kind
            kinds.add(kind)
            if kind not in allowed:
                bad("IneligibleKind", f"{side}[{i}]", f"a {kind} neuron cannot serve in {side}")
        if len(kinds) > 1:
            names = ", ".join(sorted(k.value for k in kinds))
            bad("MixedKinds", side, f"{side} mix kinds ({names}); an arc has one type")
    return out


def classify_arc(spec: ReflexArcSpec, graph: BigSnsGraph) -> ArcType:
    """The arc type fixed by the receptor and effector kinds of ``spec``."""
    sides = []
    for side, members in (("receptors", spec.receptors), ("effectors", spec.effectors)):
        if not members:
            raise InvalidArc(spec.arc_id, [Violation(f"Missing{side[:-1].title()}", side, "empty")])
        kinds = {graph.neuron(nid).kind for nid in members}
        if len(kinds) > 1:
            raise MixedKinds(f"arc {spec.arc_id!r}: {side} mix {sorted(k.value for k in kinds)}")
        sides.append(kinds.pop())
    try:
        return arc_type_for(*sides)
    except ValueError:
        raise InvalidArc(
            spec.arc_id,
            [Violation("IneligibleKind", "receptors/effectors", f"{sides[0]} -> {sides[1]}")],
        ) from None


# -- traces ---------------------------------------------------------------

class Stage(str, Enum):
    StimulusReceived = "StimulusReceived"
    AfferentDelivered = "AfferentDelivered"
    CenterDecided = "CenterDecided"
    EfferentDelivered = "EfferentDelivered"
    EffectorActuated = "EffectorActuated"

    def __str__(self) -> str:
        return self.value


STAGES = tuple(Stage)
_STAGE_INDEX = {s: i for i, s in enumerate(STAGES)}


class Outcome(str, Enum):
    Completed = "Completed"
    Suppressed = "Suppressed"
    Failed = "FailedAtStage"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ArcExecutionTrace:
    arc_id: str
    stimulus_id: str
    category: str
    arc_type: int
    outcome: Outcome
    stage_times: tuple[float | None, ...]
    failed_stage: Stage | None = None
    reason: str | None = None

    def time(self, stage: Stage) -> float | None:
        return self.stage_times[_STAGE_INDEX[Stage(stage)]]

    @property
    def label(self) -> str:
        if self.outcome is Outcome.Failed:
            return f"FailedAtStage({self.failed_stage})"
        return self.outcome.value

    def problems(self) -> list[str]:
        """Broken trace invariants, if any."""
        found = []
        present = [t for t in self.stage_times if t is not None]
        if any(b < a for a, b in zip(present, present[1:])):
            found.append("stage times go backwards")
        first_gap = next((i for i, t in enumerate(self.stage_times) if t is None), None)
        if first_gap is not None and any(t is not None for t in self.stage_times[first_gap:]):
            found.append("a later stage is present after an absent one")
        if self.outcome is Outcome.Completed and None in self.stage_times:
            found.append("completed trace is missing a stage")
        if self.outcome is Outcome.Suppressed:
            if self.time(Stage.CenterDecided) is None:
                found.append("suppressed trace has no center decision")
            if self.stage_times[3:] != (None, None):
                found.append("suppressed trace went past the center")
        if self.outcome is Outcome.Failed:
            if self.failed_stage is None or self.time(self.failed_stage) is not None:
                found.append("failed stage must be named and absent")
        return found


def end_to_end_latency(trace: ArcExecutionTrace) -> float | None:
    """EffectorActuated minus StimulusReceived for completed traces, else None."""
    if trace.outcome is not Outcome.Completed:
        return None
    return trace.stage_times[-1] - trace.stage_times[0]


def trace_from_record(rec: EventRecord) -> ArcExecutionTrace:
    d = rec.detail
    failed = d.get("failed_stage")
    return ArcExecutionTrace(
        arc_id=d["arc"],
        stimulus_id=rec.subjects[1],
        category=d["category"],
        arc_type=d["type"],
        outcome=Outcome(d["outcome"]),
        stage_times=tuple(d.get(s.value) for s in STAGES),
        failed_stage=Stage(failed) if failed else None,
        reason=d.get("reason"),
    )


def traces_from_log(records: Iterable[EventRecord]) -> list[ArcExecutionTrace]:
    return [trace_from_record(r) for r in records if r.kind == EventKind.TraceRecorded]


# -- execution ------------------------------------------------------------

def fire(arc: ReflexArcSpec, stimulus: Stimulus, kernel: SimKernel) -> str:
    """Schedule one firing of ``arc`` on ``kernel`` and return the stimulus id.

    The stages run as kernel events; the trace is appended to the log when the
    firing completes, is suppressed by the center, or fails.
    """
    violations = kernel.arc_violations(arc)
    if violations:
        raise InvalidArc(arc.arc_id, violations)
    if stimulus.time < kernel.now:
        raise ClockRegression(f"stimulus {stimulus.id} at {stimulus.time} precedes clock {kernel.now}")
    if stimulus.receptor is not None and stimulus.receptor not in arc.receptors:
        raise InvalidArc(
            arc.arc_id,
            [Violation("UnknownReceptor", "receptor", f"{stimulus.receptor!r} is not on the arc")],
        )
    firing = _Firing(arc, stimulus, kernel)
    kernel.schedule(stimulus.time, firing.receive)
    return stimulus.id


class _Firing:
    __slots__ = ("arc", "stim", "k", "times", "receptor", "effector", "arc_type", "subj")

    def __init__(self, arc: ReflexArcSpec, stimulus: Stimulus, kernel: SimKernel) -> None:
        self.arc = arc
        self.stim = stimulus
        self.k = kernel
        self.times: list[float | None] = [None] * len(STAGES)
        self.receptor: str | None = None
        self.effector: str | None = None
        self.arc_type = kernel.arc_type(arc)
        self.subj = (arc.arc_id, stimulus.id)

    def _stage(self, stage: Stage, t: float, **extra) -> None:
        self.times[_STAGE_INDEX[stage]] = self.k.log.append(
            t, EventKind.StageTransition, self.subj, {"stage": stage.value, **extra}
        ).time

    def _finish(self, t: float, outcome: Outcome, failed: Stage | None = None, reason: str | None = None) -> None:
        detail = {
            "arc": self.arc.arc_id,
            "category": self.arc.category,
            "type": self.arc_type,
            "outcome": outcome.value,
            "failed_stage": failed.value if failed else None,
            "reason": reason,
            "receptor": self.receptor,
            "effector": self.effector,
        }
        for stage, when in zip(STAGES, self.times):
            detail[stage.value] = when
        self.k.log.append(t, EventKind.TraceRecorded, self.subj, detail)

    def _fail(self, t: float, stage: Stage, reason: str) -> None:
        self._finish(t, Outcome.Failed, stage, reason)

    def _expire(self, stage: Stage):
        return lambda t: self._fail(t, stage, "Horizon")

    def _delay(self, model: DelayModel, name: str) -> float:
        return sample_delay(model, self.k.stream(f"{self.stim.id}/{name}"))

    # stage 1
    def receive(self, t: float) -> None:
        candidates = (self.stim.receptor,) if self.stim.receptor else self.arc.receptors
        for nid in candidates:
            if not self.k.is_down(FailureTarget("neuron", nid), t):
                self.receptor = nid
                break
        else:
            self._fail(t, Stage.StimulusReceived, "NeuronDown")
            return
        self._stage(Stage.StimulusReceived, t, neuron=self.receptor, intensity=float(self.stim.intensity))
        neuron = self.k.graph.neuron(self.receptor)
        react = self._delay(neuron.reaction_delay, f"receptor/{self.receptor}")
        if react > 0:
            self.k.schedule(t + react, self._send, "afferent", on_expire=self._expire(Stage.AfferentDelivered))
        else:
            self._send(t, "afferent")

    # stages 2 and 4 start here
    def _send(self, t: float, leg: str) -> None:
        cid = self.arc.afferent if leg == "afferent" else self.arc.efferent
        stage = Stage.AfferentDelivered if leg == "afferent" else Stage.EfferentDelivered
        channel = self.k.channels[cid]
        subj = (*self.subj, cid)
        info = {"leg": leg, "via": cid}
        log = self.k.log
        log.append(t, EventKind.MessageSent, subj, info)
        if self.k.is_down(FailureTarget("channel", cid), t):
            result = Dropped("Injected")
        else:
            result = deliver(channel, t, self.k.stream(f"{self.stim.id}/{leg}/{cid}"))
        if isinstance(result, Dropped):
            log.append(t, EventKind.MessageDropped, subj, {**info, "reason": result.reason})
            self._fail(t, stage, result.reason)
            return

        def lost(at: float) -> None:
            log.append(at, EventKind.MessageDropped, subj, {**info, "reason": "Horizon"})
            self._fail(at, stage, "Horizon")

        handler = self._afferent_delivered if leg == "afferent" else self._efferent_delivered
        self.k.schedule(t + result.after, handler, subj, info, on_expire=lost)

    def _afferent_delivered(self, t: float, subj, info) -> None:
        self.k.log.append(t, EventKind.MessageDelivered, subj, info)
        self._stage(Stage.AfferentDelivered, t)
        if self.k.is_down(CENTER, t):
            self._fail(t, Stage.CenterDecided, "CenterDown")
            return
        wait = self._delay(self.arc.center.processing_delay, "center")
        self.k.schedule(t + wait, self._decide, on_expire=self._expire(Stage.CenterDecided))

    # stage 3
    def _decide(self, t: float) -> None:
        if self.k.is_down(CENTER, t):
            self._fail(t, Stage.CenterDecided, "CenterDown")
            return
        policy = self.arc.center
        act = self.stim.intensity >= policy.decision_threshold
        self._stage(
            Stage.CenterDecided,
            t,
            decision="act" if act else "suppress",
            threshold=float(policy.decision_threshold),
            action=policy.action.value,
        )
        if act:
            self._send(t, "efferent")
        else:
            self._finish(t, Outcome.Suppressed)

    # stage 5
    def _efferent_delivered(self, t: float, subj, info) -> None:
        self.k.log.append(t, EventKind.MessageDelivered, subj, info)
        self._stage(Stage.EfferentDelivered, t)
        for nid in self.arc.effectors:
            if not self.k.is_down(FailureTarget("neuron", nid), t):
                self.effector = nid
                break
        else:
            self._fail(t, Stage.EffectorActuated, "NeuronDown")
            return
        neuron = self.k.graph.neuron(self.effector)
        react = self._delay(neuron.reaction_delay, f"effector/{self.effector}")
        if react > 0:
            self.k.schedule(t + react, self._actuate, on_expire=self._expire(Stage.EffectorActuated))
        else:
            self._actuate(t)

    def _actuate(self, t: float) -> None:
        self.k.log.append(
            t,
            EventKind.ActuationDone,
            (*self.subj, self.effector),
            {"action": self.arc.center.action.value},
        )
        self._stage(Stage.EffectorActuated, t, neuron=self.effector)
        self._finish(t, Outcome.Completed)


def category_traces(
    traces: Iterable[ArcExecutionTrace], categories: Iterable[str] | None = None
) -> Mapping[str, list[ArcExecutionTrace]]:
    out: dict[str, list[ArcExecutionTrace]] = {c: [] for c in categories or ()}
    for tr in traces:
        out.setdefault(tr.category, []).append(tr)
    return out
