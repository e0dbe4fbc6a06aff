import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citybrain.errors import InvalidArc, MixedKinds
from citybrain.eventlog import EventKind
from citybrain.kernel import SimKernel, simulate
from citybrain.network import Channel, Constant
from citybrain.reflex import (
    ARC_TYPES,
    EFFECTOR_KINDS,
    RECEPTOR_KINDS,
    CenterPolicy,
    Outcome,
    ReflexArcSpec,
    Stage,
    Stimulus,
    arc_type_for,
    classify_arc,
    end_to_end_latency,
    fire,
    traces_from_log,
    validate_arc,
)
from citybrain.scenario import bundled_scenario
from citybrain.sns import Neuron, NeuronKind as K, build_graph

from conftest import single_arc_city

EXPECTED_ORDINALS = {
    (K.Sensor, K.SmartDevice): 1,
    (K.Sensor, K.Human): 2,
    (K.Sensor, K.SmartProgram): 3,
    (K.SmartProgram, K.SmartDevice): 4,
    (K.SmartProgram, K.Human): 5,
    (K.SmartProgram, K.SmartProgram): 6,
    (K.Human, K.SmartDevice): 7,
    (K.Human, K.Human): 8,
    (K.Human, K.SmartProgram): 9,
}


def roster():
    return build_graph(
        [
            Neuron("temp", K.Sensor),
            Neuron("gas", K.Sensor),
            Neuron("robot", K.SmartDevice),
            Neuron("watchman", K.Human),
            Neuron("brigade", K.Human),
            Neuron("monitor", K.SmartProgram),
            Neuron("maint", K.SmartProgram),
            Neuron("owner", K.Organization),
        ]
    )


def arc(receptors, effectors, **kw):
    fields = dict(arc_id="a", category="Security", receptors=receptors, afferent="up",
                  center=CenterPolicy(), efferent="down", effectors=effectors)
    fields.update(kw)
    return ReflexArcSpec(**fields)


CHANNELS = ("up", "down")


def test_exactly_nine_types_with_fixed_ordinals():
    assert len(ARC_TYPES) == 9
    assert {(t.receptor_kind, t.effector_kind): t.ordinal for t in ARC_TYPES} == EXPECTED_ORDINALS
    assert len({t.label for t in ARC_TYPES}) == 9
    for r, e in itertools.product(RECEPTOR_KINDS, EFFECTOR_KINDS):
        assert arc_type_for(r, e).ordinal == EXPECTED_ORDINALS[(r, e)]


def test_classify_fire_examples():
    g = roster()
    assert classify_arc(arc(("temp", "gas"), ("robot",)), g).ordinal == 1
    assert classify_arc(arc(("watchman",), ("brigade",)), g).ordinal == 8
    assert classify_arc(arc(("monitor",), ("maint",)), g).ordinal == 6


def test_classify_depends_on_kinds_only():
    g = build_graph([Neuron("x1", K.Human), Neuron("y9", K.SmartProgram)])
    assert classify_arc(arc(("x1",), ("y9",)), g).ordinal == 9


def test_validate_well_formed():
    assert validate_arc(arc(("temp", "gas"), ("robot",)), roster(), CHANNELS) == []


def test_validate_missing_components():
    g = roster()
    codes = lambda spec: [v.code for v in validate_arc(spec, g, CHANNELS)]
    assert codes(arc(("temp",), ())) == ["MissingEffector"]
    assert codes(arc((), ("robot",))) == ["MissingReceptor"]
    assert codes(arc(("temp",), ("robot",), center=None)) == ["MissingCenter"]
    assert codes(arc(("temp",), ("robot",), afferent="")) == ["MissingAfferent"]
    assert codes(arc(("temp",), ("robot",), efferent="nowhere")) == ["UndeclaredChannel"]
    assert codes(arc(("ghost",), ("robot",))) == ["UnknownNeuron"]
    assert codes(arc(("owner",), ("robot",))) == ["IneligibleKind"]
    assert codes(arc(("robot",), ("robot",))) == ["IneligibleKind"]


def test_every_mixed_receptor_or_effector_set_rejected():
    g = roster()
    receptor_ids = {K.Sensor: "temp", K.Human: "watchman", K.SmartProgram: "monitor"}
    effector_ids = {K.SmartDevice: "robot", K.Human: "brigade", K.SmartProgram: "maint"}
    for a, b in itertools.combinations(receptor_ids, 2):
        spec = arc((receptor_ids[a], receptor_ids[b]), ("robot",))
        assert "MixedKinds" in [v.code for v in validate_arc(spec, g, CHANNELS)]
        with pytest.raises(MixedKinds):
            classify_arc(spec, g)
    for a, b in itertools.combinations(effector_ids, 2):
        spec = arc(("temp",), (effector_ids[a], effector_ids[b]))
        assert "MixedKinds" in [v.code for v in validate_arc(spec, g, CHANNELS)]


def only_trace(sim):
    (tr,) = traces_from_log(sim.log)
    return tr


def test_happy_path_completes():
    tr = only_trace(simulate(single_arc_city()))
    assert tr.outcome is Outcome.Completed
    assert None not in tr.stage_times
    assert tr.problems() == []


def test_below_threshold_suppressed():
    sim = simulate(single_arc_city(stimuli=((0.0, 0.2),)))
    tr = only_trace(sim)
    assert tr.outcome is Outcome.Suppressed
    assert tr.time(Stage.CenterDecided) is not None
    assert tr.time(Stage.EfferentDelivered) is None and tr.time(Stage.EffectorActuated) is None
    assert end_to_end_latency(tr) is None
    assert sim.log.count(EventKind.ActuationDone) == 0


def test_afferent_outage_fails_at_afferent():
    sim = simulate(single_arc_city(stimuli=((5.0, 0.9),), outages=((4.0, 6.0),)))
    tr = only_trace(sim)
    assert tr.outcome is Outcome.Failed and tr.failed_stage is Stage.AfferentDelivered
    assert tr.reason == "Outage"
    # replay: the log shows the send followed by an outage drop at the same instant
    drops = sim.log.of_kind(EventKind.MessageDropped)
    assert [(d.time, d.detail["reason"]) for d in drops] == [(5.0, "Outage")]


def test_hand_summed_latency():
    tr = only_trace(simulate(single_arc_city()))
    assert end_to_end_latency(tr) == 2.0 + 1.0 + 3.0 + 0.0


def test_zero_delay_latency():
    tr = only_trace(simulate(single_arc_city(afferent=Constant(0), efferent=Constant(0), processing=Constant(0))))
    assert end_to_end_latency(tr) == 0.0
    assert tr.outcome is Outcome.Completed


def test_human_effector_adds_reaction():
    sc = single_arc_city(effector_kind=K.Human, effector_reaction=Constant(5.0))
    tr = only_trace(simulate(sc))
    assert tr.arc_type == 2
    assert end_to_end_latency(tr) == 2.0 + 1.0 + 3.0 + 5.0


def test_human_effector_default_reaction_is_one():
    tr = only_trace(simulate(single_arc_city(effector_kind=K.Human)))
    assert end_to_end_latency(tr) == 7.0


def test_fire_rejects_invalid_arc():
    g = roster()
    k = SimKernel(g, {"up": Channel("up"), "down": Channel("down")})
    with pytest.raises(InvalidArc):
        fire(arc(("temp",), ()), Stimulus("s", "a", 0.0, 1.0), k)


def test_fire_alarm_types_and_strict_order():
    sim = simulate(bundled_scenario("fire-alarm"))
    traces = traces_from_log(sim.log)
    completed = [t for t in traces if t.outcome is Outcome.Completed]
    assert sorted(t.arc_type for t in completed) == [1, 2, 7, 8]
    for t in completed:
        assert all(b > a for a, b in zip(t.stage_times, t.stage_times[1:]))
    assert sorted(end_to_end_latency(t) for t in completed) == [3.5, 5.5, 7.0, 9.0]


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.tuples(st.floats(0, 50), st.floats(0, 1)), min_size=1, max_size=15),
    st.floats(0, 1),
    st.floats(0, 0.5),
    st.integers(0, 1000),
)
def test_trace_invariants(stimuli, threshold, p, seed):
    stimuli = sorted(stimuli)
    sc = single_arc_city(stimuli=stimuli, threshold=threshold, p_afferent=p, p_efferent=p, horizon=60.0,
                         receptor_kind=K.Human, effector_kind=K.Human)
    sim = simulate(sc, seed)
    traces = traces_from_log(sim.log)
    # one trace per firing, whatever the outcome
    assert len(traces) == len(stimuli)
    for tr, (_, x) in zip(sorted(traces, key=lambda t: int(t.stimulus_id[1:])), stimuli):
        assert tr.problems() == []
        if x < threshold:
            assert tr.time(Stage.EfferentDelivered) is None
            assert tr.time(Stage.EffectorActuated) is None
        if tr.outcome is Outcome.Completed:
            assert all(b > a for a, b in zip(tr.stage_times, tr.stage_times[1:]))
