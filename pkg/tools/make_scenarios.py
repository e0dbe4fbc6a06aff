"""Regenerate the bundled reference scenarios under src/citybrain/scenarios/.

    python tools/make_scenarios.py

Output is deterministic; rerunning on an unchanged tree produces no diff.
"""

from __future__ import annotations

import random
from pathlib import Path

from citybrain.iq import CategoryRegistry, ScaleParams, STANDARD_CATEGORIES
from citybrain.network import Channel, Constant, Exponential, FailureTarget, Uniform
from citybrain.reflex import CenterPolicy, ReflexArcSpec, Stimulus
from citybrain.scenario import FailureDirective, ScenarioConfig, ScenarioMetadata, dump_scenario
from citybrain.sns import CensusCategory as CC
from citybrain.sns import FollowEdge, Neuron, NeuronKind as K, Post

OUT = Path(__file__).resolve().parents[1] / "src" / "citybrain" / "scenarios"


def fire_alarm() -> ScenarioConfig:
    neurons = (
        Neuron("temp-sensor", K.Sensor, system_label="building-iot", display_name="Office temperature sensor"),
        Neuron("gas-sensor", K.Sensor, system_label="building-iot", display_name="Office CO2 sensor"),
        Neuron("fire-robot", K.SmartDevice, system_label="building-robotics",
               display_name="Fire-extinguishing robot", reaction_delay=Constant(0.5)),
        Neuron("watchman", K.Human, system_label="building-security",
               display_name="Watchman on duty", reaction_delay=Constant(2.0)),
        Neuron("fire-brigade", K.Human, CC.GovernmentAgency, system_label="city-fire-service",
               display_name="Nearby fire brigade", reaction_delay=Constant(4.0)),
        Neuron("building-owner", K.Organization, system_label="building-management",
               display_name="Office building owner"),
    )
    edges = (
        FollowEdge("temp-sensor", "fire-robot"),
        FollowEdge("gas-sensor", "fire-robot"),
        FollowEdge("watchman", "fire-robot"),
        FollowEdge("watchman", "building-owner"),
        FollowEdge("fire-brigade", "building-owner"),
    )
    channels = (
        Channel("alarm-line", Constant(1.0)),
        Channel("command-line", Constant(1.5)),
    )
    center = CenterPolicy(0.5, Constant(0.5), "Actuate")
    notify = CenterPolicy(0.5, Constant(0.5), "Notify")
    arcs = (
        ReflexArcSpec("fire-sensors-robot", "Security", ("temp-sensor", "gas-sensor"), "alarm-line",
                      center, "command-line", ("fire-robot",)),
        ReflexArcSpec("fire-sensors-brigade", "Security", ("temp-sensor", "gas-sensor"), "alarm-line",
                      notify, "command-line", ("fire-brigade",)),
        ReflexArcSpec("fire-watchman-robot", "Security", ("watchman",), "alarm-line",
                      center, "command-line", ("fire-robot",)),
        ReflexArcSpec("fire-watchman-brigade", "Security", ("watchman",), "alarm-line",
                      notify, "command-line", ("fire-brigade",)),
    )
    stimuli = (
        Stimulus("flames-1", "fire-sensors-robot", 10.0, 0.9),
        Stimulus("flames-2", "fire-sensors-brigade", 10.0, 0.9, receptor="gas-sensor"),
        Stimulus("flames-3", "fire-watchman-robot", 10.0, 0.9),
        Stimulus("flames-4", "fire-watchman-brigade", 10.0, 0.9),
        Stimulus("warm-afternoon", "fire-sensors-robot", 30.0, 0.3),
    )
    posts = (
        Post("building-owner", 1.0, "Status", "office open"),
        Post("fire-robot", 2.0, "Status", "robot idle, water tank full"),
        Post("watchman", 5.0, "Chat", "night shift started"),
        Post("temp-sensor", 20.0, "Status", "temperature back to normal"),
        Post("fire-brigade", 25.0, "Status", "crew returned to station"),
        Post("building-owner", 40.0, "Status", "office closed"),
    )
    return ScenarioConfig(
        metadata=ScenarioMetadata(
            "fire-alarm", 100.0, "s",
            "Office fire handled by sensor and watchman receptors, robot and fire-brigade effectors "
            "(arc types 1, 2, 7, 8), plus one sub-threshold reading that the center suppresses.",
        ),
        neurons=neurons,
        edges=edges,
        channels=channels,
        arcs=arcs,
        stimuli=stimuli,
        posts=posts,
        census={CC.Resident: 4, CC.BusinessOrg: 2, CC.GovernmentAgency: 1, CC.CityEquipment: 3},
        scale=ScaleParams(reference_latency={"Security": 6.25}, activeness_half_rate=0.01),
    )


def datacenter() -> ScenarioConfig:
    registry = CategoryRegistry.standard().extend("DataCenter")
    neurons = (
        Neuron("capacity-monitor", K.SmartProgram, system_label="cloud-ops", display_name="Storage capacity monitor"),
        Neuron("spare-storage", K.SmartDevice, system_label="cloud-hardware", display_name="Spare storage array"),
        Neuron("duty-engineer", K.Human, system_label="cloud-ops", display_name="Engineer on duty",
               reaction_delay=Uniform(2.0, 6.0)),
        Neuron("maintenance-program", K.SmartProgram, system_label="cloud-ops",
               display_name="Computer-room maintenance program"),
        Neuron("cloud-operator", K.Organization, system_label="cloud-ops", display_name="Suburban cloud operator"),
    )
    edges = tuple(FollowEdge(n.id, "cloud-operator") for n in neurons[:4])
    channels = (
        Channel("dc-uplink", Exponential(0.2), 0.01, ((40.0, 42.0),)),
        Channel("dc-command", Uniform(0.1, 0.3), 0.01),
    )
    center = CenterPolicy(0.8, Uniform(0.05, 0.15), "Actuate")
    arcs = (
        ReflexArcSpec("storage-full-spare", "DataCenter", ("capacity-monitor",), "dc-uplink",
                      center, "dc-command", ("spare-storage",)),
        ReflexArcSpec("storage-full-duty", "DataCenter", ("capacity-monitor",), "dc-uplink",
                      CenterPolicy(0.8, Uniform(0.05, 0.15), "Notify"), "dc-command", ("duty-engineer",)),
        ReflexArcSpec("storage-full-maint", "DataCenter", ("capacity-monitor",), "dc-uplink",
                      CenterPolicy(0.9, Uniform(0.05, 0.15), "Escalate"), "dc-command", ("maintenance-program",)),
    )
    rng = random.Random(4)
    stimuli = []
    for i in range(60):
        arc = arcs[i % 3]
        fill = round(min(1.0, 0.5 + i / 100 + rng.uniform(0, 0.3)), 3)
        stimuli.append(Stimulus(f"capacity-{i:03d}", arc.arc_id, float(i) * 1.5, fill))
    posts = tuple(Post("capacity-monitor", float(t), "Status", f"usage report {t}") for t in range(0, 90, 10))
    return ScenarioConfig(
        metadata=ScenarioMetadata(
            "datacenter", 120.0, "min",
            "Storage-capacity monitor program driving a spare device, the on-duty engineer and a maintenance "
            "program (arc types 4, 5, 6) under a registry extended with a DataCenter category.",
        ),
        neurons=neurons,
        edges=edges,
        channels=channels,
        arcs=arcs,
        stimuli=tuple(stimuli),
        failures=(FailureDirective(FailureTarget.neuron("spare-storage"), 60.0, 66.0),),
        posts=posts,
        census={CC.BusinessOrg: 1, CC.CityEquipment: 4, CC.Resident: 1},
        scale=ScaleParams(reference_latency={"DataCenter": 1.0}, registry=registry),
    )


def nine_arcs() -> ScenarioConfig:
    neurons = (
        Neuron("street-camera", K.Sensor, system_label="traffic-iot"),
        Neuron("citizen", K.Human, system_label="city-app"),
        Neuron("monitor-bot", K.SmartProgram, system_label="city-cloud"),
        Neuron("street-lamp", K.SmartDevice, system_label="lighting"),
        Neuron("responder", K.Human, CC.GovernmentAgency, system_label="emergency"),
        Neuron("assistant-bot", K.SmartProgram, system_label="city-cloud"),
        Neuron("city-hall", K.Organization, CC.GovernmentAgency, system_label="government"),
    )
    edges = tuple(FollowEdge(n.id, "city-hall") for n in neurons[:6])
    receptors = {K.Sensor: "street-camera", K.Human: "citizen", K.SmartProgram: "monitor-bot"}
    effectors = {K.SmartDevice: "street-lamp", K.Human: "responder", K.SmartProgram: "assistant-bot"}
    order = [
        (K.Sensor, K.SmartDevice, "Traffic"),
        (K.Sensor, K.Human, "Security"),
        (K.Sensor, K.SmartProgram, "EnvironmentalProtection"),
        (K.SmartProgram, K.SmartDevice, "Energy"),
        (K.SmartProgram, K.Human, "MedicalService"),
        (K.SmartProgram, K.SmartProgram, "Finance"),
        (K.Human, K.SmartDevice, "Community"),
        (K.Human, K.Human, "Education"),
        (K.Human, K.SmartProgram, "Retail"),
    ]
    center = CenterPolicy(0.5, Constant(0.25))
    arcs = tuple(
        ReflexArcSpec(f"type-{i}", cat, (receptors[r],), "backbone", center, "backbone", (effectors[e],))
        for i, (r, e, cat) in enumerate(order, start=1)
    )
    stimuli = tuple(Stimulus(f"stim-{i}", a.arc_id, float(i), 1.0) for i, a in enumerate(arcs, start=1))
    return ScenarioConfig(
        metadata=ScenarioMetadata("nine-arcs", 50.0, "s", "One arc of each of the nine receptor/effector types."),
        neurons=neurons,
        edges=edges,
        channels=(Channel("backbone", Constant(0.5)),),
        arcs=arcs,
        stimuli=stimuli,
        census={CC.Resident: 1, CC.GovernmentAgency: 2, CC.CityEquipment: 4},
    )


def perfect_city() -> ScenarioConfig:
    neurons = (
        Neuron("sensor", K.Sensor, system_label="city"),
        Neuron("device", K.SmartDevice, system_label="city"),
    )
    arcs = tuple(
        ReflexArcSpec(f"arc-{cat}", cat, ("sensor",), "zero", CenterPolicy(0.5), "zero", ("device",))
        for cat in STANDARD_CATEGORIES
    )
    stimuli = tuple(Stimulus(f"stim-{i:02d}", a.arc_id, float(i) / 2, 1.0) for i, a in enumerate(arcs))
    posts = tuple(Post(n.id, float(t), "Status", "ok") for t in range(10) for n in neurons)
    return ScenarioConfig(
        metadata=ScenarioMetadata(
            "perfect-city", 10.0, "s",
            "Upper-bound fixture: connected, fully registered, no failures, instant arcs in all 12 "
            "standard categories.  Activeness saturates to within 1e-6 of 1.",
        ),
        neurons=neurons,
        edges=(FollowEdge("sensor", "device"),),
        channels=(Channel("zero", Constant(0.0)),),
        arcs=arcs,
        stimuli=stimuli,
        posts=posts,
        census={CC.CityEquipment: 2},
        scale=ScaleParams(activeness_half_rate=1e-6),
    )


def truncated_horizon() -> ScenarioConfig:
    base = nine_arcs()
    stimuli = tuple(
        Stimulus(f"late-{i}", f"type-{(i % 9) + 1}", round(0.35 * i, 2), 0.9) for i in range(8)
    )
    return ScenarioConfig(
        metadata=ScenarioMetadata(
            "truncated-horizon", 3.0, "s",
            "The nine-arcs city with a horizon too short for the later firings; messages still "
            "in flight at the horizon are logged as dropped.",
        ),
        neurons=base.neurons,
        edges=base.edges,
        channels=(Channel("backbone", Constant(1.0)),),
        arcs=base.arcs,
        stimuli=stimuli,
        census=base.census,
    )


def stochastic_city() -> ScenarioConfig:
    rng = random.Random(2017)
    kinds = [K.Sensor] * 12 + [K.SmartDevice] * 10 + [K.SmartProgram] * 6 + [K.Human] * 10 + [K.Organization] * 4
    neurons = []
    for i, kind in enumerate(kinds):
        census = CC.GovernmentAgency if kind == K.Organization and i % 2 else None
        reaction = Uniform(0.5, 3.0) if kind == K.Human else None
        neurons.append(Neuron(f"n{i:02d}", kind, census, system_label=f"sys-{i % 5}", reaction_delay=reaction))
    ids = [n.id for n in neurons]
    edges = set()
    while len(edges) < 50:
        a, b = rng.sample(ids, 2)
        edges.add((a, b))
    by_kind = {k: [n.id for n in neurons if n.kind == k] for k in K}
    channels = (
        Channel("fiber", Exponential(0.3), 0.02),
        Channel("mobile", Uniform(0.2, 1.2), 0.08, ((20.0, 25.0), (70.0, 71.5))),
        Channel("wifi", Exponential(0.6), 0.05),
    )
    categories = ["Security", "Traffic", "Energy", "MedicalService", "Logistics", "Tourism"]
    arcs = []
    for i in range(12):
        rk = rng.choice([K.Sensor, K.Human, K.SmartProgram])
        ek = rng.choice([K.SmartDevice, K.Human, K.SmartProgram])
        arcs.append(
            ReflexArcSpec(
                f"arc-{i:02d}",
                categories[i % len(categories)],
                tuple(sorted(rng.sample(by_kind[rk], 2))),
                rng.choice(channels).id,
                CenterPolicy(round(rng.uniform(0.2, 0.7), 2), Exponential(round(rng.uniform(0.1, 0.5), 2))),
                rng.choice(channels).id,
                tuple(sorted(rng.sample(by_kind[ek], 2))),
            )
        )
    stimuli = []
    for i in range(200):
        stimuli.append(
            Stimulus(f"s{i:03d}", rng.choice(arcs).arc_id, round(i * 0.45, 3), round(rng.random(), 3))
        )
    posts = sorted(
        (Post(rng.choice(ids), round(rng.uniform(0, 95), 3), rng.choice(["Status", "Alarm", "Chat"]), "")
         for _ in range(120)),
        key=lambda p: p.timestamp,
    )
    failures = (
        FailureDirective(FailureTarget.channel("fiber"), 30.0, 33.0),
        FailureDirective(FailureTarget("center"), 50.0, 52.0),
        FailureDirective(FailureTarget.neuron(arcs[0].receptors[0]), 10.0, 40.0),
    )
    return ScenarioConfig(
        metadata=ScenarioMetadata(
            "stochastic-city", 100.0, "s",
            "Random city of 42 neurons with stochastic channels, outages and injected failures.",
        ),
        neurons=tuple(neurons),
        edges=tuple(FollowEdge(a, b) for a, b in sorted(edges)),
        channels=channels,
        arcs=tuple(arcs),
        stimuli=tuple(stimuli),
        failures=failures,
        posts=tuple(posts),
        census={CC.Resident: 20, CC.BusinessOrg: 4, CC.GovernmentAgency: 4, CC.CityEquipment: 40},
        scale=ScaleParams(reference_latency={c: 3.0 for c in categories}, activeness_half_rate=0.05),
    )


BUILDERS = {
    "fire-alarm": fire_alarm,
    "datacenter": datacenter,
    "nine-arcs": nine_arcs,
    "perfect-city": perfect_city,
    "truncated-horizon": truncated_horizon,
    "stochastic-city": stochastic_city,
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, build in BUILDERS.items():
        path = OUT / f"{name}.json"
        path.write_text(dump_scenario(build()), encoding="utf-8")
        print(f"wrote {path.relative_to(OUT.parents[2])}")


if __name__ == "__main__":
    main()
