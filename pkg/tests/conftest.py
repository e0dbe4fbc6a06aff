from __future__ import annotations

import pytest

from citybrain.network import Channel, Constant
from citybrain.reflex import CenterPolicy, ReflexArcSpec, Stimulus
from citybrain.scenario import ScenarioConfig, ScenarioMetadata
from citybrain.sns import CensusCategory, FollowEdge, Neuron, NeuronKind


def single_arc_city(
    *,
    receptor_kind=NeuronKind.Sensor,
    effector_kind=NeuronKind.SmartDevice,
    afferent=Constant(2.0),
    efferent=Constant(3.0),
    processing=Constant(1.0),
    receptor_reaction=None,
    effector_reaction=None,
    threshold=0.5,
    stimuli=((0.0, 0.9),),
    p_afferent=0.0,
    p_efferent=0.0,
    outages=(),
    failures=(),
    horizon=1000.0,
    category="Security",
    name="single-arc",
    posts=(),
    scale=None,
) -> ScenarioConfig:
    """One receptor, one effector, one arc; stimuli given as (time, intensity)."""
    neurons = (
        Neuron("rx", receptor_kind, reaction_delay=receptor_reaction),
        Neuron("fx", effector_kind, reaction_delay=effector_reaction),
    )
    channels = (
        Channel("aff", afferent, p_afferent, tuple(outages)),
        Channel("eff", efferent, p_efferent),
    )
    arc = ReflexArcSpec("arc", category, ("rx",), "aff", CenterPolicy(threshold, processing), "eff", ("fx",))
    stims = tuple(Stimulus(f"s{i}", "arc", t, x) for i, (t, x) in enumerate(stimuli))
    kw = {}
    if scale is not None:
        kw["scale"] = scale
    return ScenarioConfig(
        metadata=ScenarioMetadata(name, horizon),
        neurons=neurons,
        edges=(FollowEdge("rx", "fx"),),
        channels=channels,
        arcs=(arc,),
        stimuli=stims,
        failures=tuple(failures),
        posts=tuple(posts),
        census={CensusCategory.CityEquipment: 2, CensusCategory.Resident: 2},
        **kw,
    )


@pytest.fixture
def make_city():
    return single_arc_city


# -- acceptance summary -----------------------------------------------------

_criteria: dict[int, dict] = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None or call.when not in ("setup", "call"):
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "passed": 0, "failed": 0})
    if call.excinfo is not None:
        entry["failed"] += 1
    elif call.when == "call":
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        verdict = "PASS" if e["failed"] == 0 and e["passed"] > 0 else "FAIL"
        terminalreporter.write_line(f"{verdict} criterion {number}: {e['title']} ({e['passed']} passed, {e['failed']} failed)")
