"""Random small cities for property checks."""

from __future__ import annotations

import dataclasses
import random

from citybrain.iq import STANDARD_CATEGORIES, NodataPolicy, ScaleParams
from citybrain.network import Channel, Constant, Exponential, FailureTarget, Uniform
from citybrain.reflex import EFFECTOR_KINDS, RECEPTOR_KINDS, CenterPolicy, ReflexArcSpec, Stimulus
from citybrain.scenario import FailureDirective, ScenarioConfig, ScenarioMetadata
from citybrain.sns import CensusCategory, FollowEdge, Neuron, NeuronKind, Post


def random_delay(rng: random.Random, scale: float = 2.0):
    pick = rng.randrange(3)
    if pick == 0:
        return Constant(round(rng.uniform(0, scale), 3))
    if pick == 1:
        lo = round(rng.uniform(0, scale), 3)
        return Uniform(lo, round(lo + rng.uniform(0, scale), 3))
    return Exponential(round(rng.uniform(0, scale), 3))


def random_city(seed: int, *, outages: bool = True, failures: bool = True, horizon: float | None = None) -> ScenarioConfig:
    rng = random.Random(seed)
    horizon = horizon if horizon is not None else round(rng.uniform(5, 60), 2)
    kinds = list(NeuronKind)
    neurons = []
    for i in range(rng.randint(2, 12)):
        kind = rng.choice(kinds)
        reaction = random_delay(rng) if rng.random() < 0.5 else None
        census = rng.choice(list(CensusCategory)) if rng.random() < 0.2 else None
        neurons.append(Neuron(f"n{i}", kind, census, system_label=f"sys{i % 3}", reaction_delay=reaction))
    # make sure at least one receptor and one effector exist
    neurons.append(Neuron("rx", rng.choice(RECEPTOR_KINDS)))
    neurons.append(Neuron("fx", rng.choice(EFFECTOR_KINDS)))
    ids = [n.id for n in neurons]
    by_kind: dict[NeuronKind, list[str]] = {}
    for n in neurons:
        by_kind.setdefault(n.kind, []).append(n.id)

    edges = set()
    for _ in range(rng.randint(0, 2 * len(ids))):
        a, b = rng.sample(ids, 2)
        edges.add((a, b))

    channels = []
    for c in range(rng.randint(1, 3)):
        windows = []
        if outages and rng.random() < 0.4:
            s = round(rng.uniform(0, horizon / 2), 2)
            windows.append((s, round(min(horizon, s + rng.uniform(0, horizon / 3)), 2)))
        channels.append(Channel(f"c{c}", random_delay(rng), round(rng.uniform(0, 0.3), 3) if rng.random() < 0.7 else 0.0, tuple(windows)))

    receptor_kinds = [k for k in RECEPTOR_KINDS if k in by_kind]
    effector_kinds = [k for k in EFFECTOR_KINDS if k in by_kind]
    arcs = []
    for a in range(rng.randint(1, 4)):
        rk, ek = rng.choice(receptor_kinds), rng.choice(effector_kinds)
        rs = rng.sample(by_kind[rk], rng.randint(1, len(by_kind[rk])))
        es = rng.sample(by_kind[ek], rng.randint(1, len(by_kind[ek])))
        center = CenterPolicy(round(rng.random(), 2), random_delay(rng, 1.0), rng.choice(["Actuate", "Notify", "Escalate"]))
        arcs.append(
            ReflexArcSpec(f"a{a}", rng.choice(STANDARD_CATEGORIES), tuple(rs), rng.choice(channels).id, center,
                          rng.choice(channels).id, tuple(es))
        )

    stimuli = []
    t = 0.0
    for s in range(rng.randint(0, 12)):
        t = round(min(horizon, t + rng.expovariate(1.0)), 3)
        stimuli.append(Stimulus(f"s{s}", rng.choice(arcs).arc_id, t, round(rng.random(), 3)))

    directives = []
    if failures:
        for _ in range(rng.randint(0, 2)):
            pick = rng.randrange(3)
            target = (
                FailureTarget("center") if pick == 0
                else FailureTarget.channel(rng.choice(channels).id) if pick == 1
                else FailureTarget.neuron(rng.choice(ids))
            )
            s = round(rng.uniform(0, horizon), 2)
            directives.append(FailureDirective(target, s, round(rng.uniform(s, horizon), 2)))

    posts = sorted(
        (Post(rng.choice(ids), round(rng.uniform(0, horizon), 3), rng.choice(["Status", "Alarm", "Chat", "Command"]))
         for _ in range(rng.randint(0, 8))),
        key=lambda p: p.timestamp,
    )
    census = {c: rng.choice([0, 1, 2, 5, 20]) for c in CensusCategory}
    w = round(rng.random(), 3)
    scale = ScaleParams(
        reference_latency={c: round(rng.uniform(0.1, 10), 2) for c in rng.sample(STANDARD_CATEGORIES, 4)},
        activeness_half_rate=round(rng.uniform(0.01, 2), 3),
        weight_network=w,
        weight_arcs=1 - w,
        nodata_policy=rng.choice(list(NodataPolicy)),
    )
    return ScenarioConfig(
        metadata=ScenarioMetadata(f"fuzz-{seed}", horizon),
        neurons=tuple(neurons),
        edges=tuple(FollowEdge(a, b) for a, b in sorted(edges)),
        channels=tuple(channels),
        arcs=tuple(arcs),
        stimuli=tuple(stimuli),
        failures=tuple(directives),
        posts=tuple(posts),
        census=census,
        scale=scale,
    )


def scale_delays(sc: ScenarioConfig, k: float) -> ScenarioConfig:
    """Every channel, processing and reaction delay multiplied by ``k``."""
    neurons = tuple(dataclasses.replace(n, reaction_delay=n.reaction_delay.scaled(k)) for n in sc.neurons)
    channels = tuple(c.scaled(k) for c in sc.channels)
    arcs = tuple(
        dataclasses.replace(a, center=dataclasses.replace(a.center, processing_delay=a.center.processing_delay.scaled(k)))
        for a in sc.arcs
    )
    return dataclasses.replace(sc, neurons=neurons, channels=channels, arcs=arcs)


def with_failure_probability(sc: ScenarioConfig, channel_id: str, p: float) -> ScenarioConfig:
    channels = tuple(dataclasses.replace(c, failure_probability=p) if c.id == channel_id else c for c in sc.channels)
    return dataclasses.replace(sc, channels=channels)
