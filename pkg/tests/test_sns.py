import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citybrain.errors import AllCensusZero, DuplicateId, EmptyGraph, FrozenGraph, SelfLoop, UnknownNeuron
from citybrain.eventlog import EventKind, EventLog
from citybrain.iq import activeness_rate
from citybrain.sns import (
    BigSnsGraph,
    CensusCategory as CC,
    FollowEdge,
    Neuron,
    NeuronKind as K,
    build_graph,
    census_coverage,
    component_sizes,
    largest_component_fraction,
    system_partition,
)


def graph_of(n, edges=(), kind=K.Sensor):
    return build_graph([Neuron(f"n{i}", kind) for i in range(n)], [FollowEdge(f"n{a}", f"n{b}") for a, b in edges])


def components_oracle(n, edges):
    """Brute force: grow each component by repeated sweeps over the edge list."""
    label = list(range(n))
    changed = True
    while changed:
        changed = False
        for a, b in edges:
            m = min(label[a], label[b])
            if label[a] != m or label[b] != m:
                label[a] = label[b] = m
                changed = True
    sizes = {}
    for x in label:
        sizes[x] = sizes.get(x, 0) + 1
    return sorted(sizes.values(), reverse=True)


def test_register_one_human():
    g = BigSnsGraph()
    g.register_neuron(Neuron("alice", K.Human))
    assert len(g) == 1
    assert g.neuron("alice").census_category is CC.Resident


def test_register_duplicate():
    g = BigSnsGraph()
    g.register_neuron(Neuron("a", K.Human))
    with pytest.raises(DuplicateId):
        g.register_neuron(Neuron("a", K.Sensor))


def test_city_roster():
    # residents, enterprises, agencies, street lamps, vehicles, plants
    roster = [
        Neuron("resident", K.Human),
        Neuron("enterprise", K.Organization),
        Neuron("agency", K.Organization, CC.GovernmentAgency),
        Neuron("street-lamp", K.SmartDevice),
        Neuron("vehicle", K.SmartDevice),
        Neuron("plant", K.SmartDevice),
    ]
    g = build_graph(roster)
    assert len(g) == 6
    assert len({n.kind for n in g}) == 3


def test_default_census_categories():
    assert Neuron("s", K.Sensor).census_category is CC.CityEquipment
    assert Neuron("d", K.SmartDevice).census_category is CC.CityEquipment
    assert Neuron("p", K.SmartProgram).census_category is CC.CityEquipment
    assert Neuron("o", K.Organization).census_category is CC.BusinessOrg
    assert Neuron("p2", K.SmartProgram, CC.GovernmentAgency).census_category is CC.GovernmentAgency


def test_connect_idempotent_and_self_loop():
    g = graph_of(2)
    g.connect("n0", "n1")
    g.connect("n0", "n1")
    assert g.edge_count == 1
    with pytest.raises(SelfLoop):
        g.connect("n0", "n0")
    with pytest.raises(UnknownNeuron):
        g.connect("n0", "ghost")


def test_chain_reachability():
    g = build_graph([Neuron("s", K.Sensor), Neuron("p", K.SmartProgram), Neuron("d", K.SmartDevice)])
    g.connect("s", "p")
    g.connect("p", "d")
    # brute force: follow every edge until nothing new appears
    seen = {"s"}
    for _ in range(3):
        seen |= {e.target for e in g.edges() if e.source in seen}
    assert seen == g.reachable("s") == {"s", "p", "d"}
    assert g.reachable("d") == {"d"}


def test_post_status_timeline_and_log():
    g = build_graph([Neuron("street-lamp", K.SmartDevice)])
    log = EventLog()
    g.post_status("street-lamp", 5, "Status", "on", log=log)
    assert len(g.timeline("street-lamp")) == 1
    assert log.count(EventKind.MessageSent) == 1
    with pytest.raises(UnknownNeuron):
        g.post_status("ghost", 6, "Status")


def test_activeness_rate_hand_count():
    g = graph_of(3)
    for i in range(3):
        for t in (1, 3, 5, 7):
            g.post_status(f"n{i}", t, "Status")
    assert g.post_count == 12
    assert activeness_rate(g.post_count, len(g), 10.0) == pytest.approx(0.4)


def test_frozen_graph_rejects_mutation():
    g = graph_of(2).freeze()
    with pytest.raises(FrozenGraph):
        g.connect("n0", "n1")


def test_largest_component_examples():
    full = graph_of(10, itertools.combinations(range(10), 2))
    assert largest_component_fraction(full) == 1.0
    cliques = list(itertools.combinations(range(5), 2)) + list(itertools.combinations(range(5, 10), 2))
    assert largest_component_fraction(graph_of(10, cliques)) == 0.5
    edges = [(0, 1), (1, 2), (2, 3), (4, 5)]
    assert component_sizes(graph_of(7, edges)) == components_oracle(7, edges) == [4, 2, 1]
    assert largest_component_fraction(graph_of(7, edges)) == 4 / 7
    with pytest.raises(EmptyGraph):
        largest_component_fraction(BigSnsGraph())


edge_lists = st.integers(1, 12).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).filter(lambda e: e[0] != e[1]), max_size=30),
    )
)


@settings(max_examples=200, deadline=None)
@given(edge_lists)
def test_components_match_oracle(case):
    n, edges = case
    assert component_sizes(graph_of(n, edges)) == components_oracle(n, edges)


@settings(max_examples=100, deadline=None)
@given(edge_lists, st.randoms(use_true_random=False))
def test_component_fraction_symmetries(case, rnd):
    n, edges = case
    base = largest_component_fraction(graph_of(n, edges))
    assert largest_component_fraction(graph_of(n, [(b, a) for a, b in edges])) == base
    perm = list(range(n))
    rnd.shuffle(perm)
    assert largest_component_fraction(graph_of(n, [(perm[a], perm[b]) for a, b in edges])) == base


@settings(max_examples=100, deadline=None)
@given(edge_lists, st.data())
def test_component_fraction_edge_and_isolate_monotone(case, data):
    n, edges = case
    base = largest_component_fraction(graph_of(n, edges))
    if n > 1:
        a = data.draw(st.integers(0, n - 1))
        b = data.draw(st.integers(0, n - 1).filter(lambda x: x != a))
        assert largest_component_fraction(graph_of(n, edges + [(a, b)])) >= base
    assert largest_component_fraction(graph_of(n + 1, edges)) <= base


def test_census_coverage_examples():
    g = build_graph([Neuron(f"h{i}", K.Human) for i in range(250)])
    assert census_coverage(g, {"Resident": 1000}).ratios[CC.Resident] == 0.25
    small = build_graph([Neuron(f"h{i}", K.Human) for i in range(5)])
    assert census_coverage(small, {"Resident": 2}).mean == 1.0
    mixed = build_graph(
        [Neuron(f"h{i}", K.Human) for i in range(5)]
        + [Neuron(f"b{i}", K.Organization) for i in range(10)]
        + [Neuron(f"e{i}", K.SmartDevice) for i in range(10)]
    )
    cov = census_coverage(mixed, {"Resident": 10, "BusinessOrg": 10, "GovernmentAgency": 10, "CityEquipment": 10})
    assert cov.mean == pytest.approx((0.5 + 1 + 0 + 1) / 4) == 0.625
    with pytest.raises(AllCensusZero):
        census_coverage(mixed, {"Resident": 0})


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.integers(0, 20), min_size=4, max_size=4),
    st.lists(st.integers(1, 20), min_size=4, max_size=4),
    st.integers(0, 3),
)
def test_census_coverage_monotone(registered, census, which):
    cats = list(CC)
    kinds = {CC.Resident: K.Human, CC.BusinessOrg: K.Organization, CC.GovernmentAgency: K.Organization, CC.CityEquipment: K.Sensor}

    def cov(reg, cen):
        neurons = [Neuron(f"{c.value}{i}", kinds[c], c) for c, k in zip(cats, reg) for i in range(k)]
        return census_coverage(build_graph(neurons), dict(zip([c.value for c in cats], cen))).mean

    base = cov(registered, census)
    assert 0.0 <= base <= 1.0
    more = list(registered)
    more[which] += 1
    assert cov(more, census) >= base
    bigger = list(census)
    bigger[which] += 5
    assert cov(registered, bigger) <= base


def test_timeline_nondecreasing():
    g = graph_of(1)
    for t in (0, 1, 1, 4):
        g.post_status("n0", t, "Chat")
    times = [p.timestamp for p in g.timeline("n0")]
    assert times == sorted(times)


def test_system_partition_is_diagnostic():
    g = build_graph([Neuron("a", K.Sensor, system_label="x"), Neuron("b", K.Sensor, system_label="y"), Neuron("c", K.Sensor, system_label="x")])
    assert system_partition(g) == {"x": 2, "y": 1}
