"""Big SNS: the city neural network where people, organizations and things hold accounts."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping

from .errors import (
    AllCensusZero,
    ClockRegression,
    DuplicateId,
    EmptyGraph,
    FrozenGraph,
    SelfLoop,
    UnknownNeuron,
)
from .network import Constant, DelayModel

if TYPE_CHECKING:
    from .eventlog import EventLog

NeuronId = str


class NeuronKind(str, Enum):
    Human = "Human"
    Organization = "Organization"
    Sensor = "Sensor"
    SmartDevice = "SmartDevice"
    SmartProgram = "SmartProgram"

    def __str__(self) -> str:
        return self.value


class CensusCategory(str, Enum):
    Resident = "Resident"
    BusinessOrg = "BusinessOrg"
    GovernmentAgency = "GovernmentAgency"
    CityEquipment = "CityEquipment"

    def __str__(self) -> str:
        return self.value


class PayloadKind(str, Enum):
    Status = "Status"
    Alarm = "Alarm"
    Command = "Command"
    Chat = "Chat"

    def __str__(self) -> str:
        return self.value


THINGS = frozenset({NeuronKind.Sensor, NeuronKind.SmartDevice, NeuronKind.SmartProgram})

_DEFAULT_CENSUS = {
    NeuronKind.Human: CensusCategory.Resident,
    NeuronKind.Organization: CensusCategory.BusinessOrg,
    NeuronKind.Sensor: CensusCategory.CityEquipment,
    NeuronKind.SmartDevice: CensusCategory.CityEquipment,
    NeuronKind.SmartProgram: CensusCategory.CityEquipment,
}

HUMAN_REACTION_DEFAULT = Constant(1.0)
MACHINE_REACTION_DEFAULT = Constant(0.0)


def default_census_category(kind: NeuronKind) -> CensusCategory:
    return _DEFAULT_CENSUS[NeuronKind(kind)]


def default_reaction(kind: NeuronKind) -> DelayModel:
    return HUMAN_REACTION_DEFAULT if kind == NeuronKind.Human else MACHINE_REACTION_DEFAULT


@dataclass(frozen=True)
class Neuron:
    """One account in the Big SNS.

    ``census_category`` defaults from ``kind`` (humans are residents,
    organizations are businesses, things are city equipment); a scenario may
    set it explicitly, e.g. a fire brigade is a Human neuron counted as a
    government agency.  ``reaction_delay`` is the time the neuron needs at its
    own stage of a reflex arc: perceiving-and-reporting as a receptor,
    command-to-action as an effector.
    """

    id: NeuronId
    kind: NeuronKind
    census_category: CensusCategory | None = None
    system_label: str = ""
    display_name: str = ""
    reaction_delay: DelayModel | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", NeuronKind(self.kind))
        if self.census_category is None:
            object.__setattr__(self, "census_category", default_census_category(self.kind))
        else:
            object.__setattr__(self, "census_category", CensusCategory(self.census_category))
        if self.reaction_delay is None:
            object.__setattr__(self, "reaction_delay", default_reaction(self.kind))
        if not self.display_name:
            object.__setattr__(self, "display_name", self.id)


@dataclass(frozen=True)
class FollowEdge:
    source: NeuronId
    target: NeuronId


@dataclass(frozen=True)
class Post:
    author: NeuronId
    timestamp: float
    payload_kind: PayloadKind
    body: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "payload_kind", PayloadKind(self.payload_kind))
        if self.timestamp < 0:
            raise ValueError(f"post timestamp must be >= 0, got {self.timestamp}")


class BigSnsGraph:
    """Registry of neurons, directed follow edges and per-neuron timelines.

    Edges are directed for delivery (``source`` follows ``target``) and read
    as undirected by the connectivity metrics.
    """

    def __init__(self) -> None:
        self._neurons: dict[NeuronId, Neuron] = {}
        self._out: dict[NeuronId, set[NeuronId]] = {}
        self._in: dict[NeuronId, set[NeuronId]] = {}
        self._edge_count = 0
        self._timelines: dict[NeuronId, list[Post]] = {}
        self._frozen = False

    # -- mutation ---------------------------------------------------------

    def _writable(self) -> None:
        if self._frozen:
            raise FrozenGraph("graph is sealed")

    def register_neuron(self, neuron: Neuron) -> NeuronId:
        self._writable()
        if neuron.id in self._neurons:
            raise DuplicateId(neuron.id)
        self._neurons[neuron.id] = neuron
        self._out[neuron.id] = set()
        self._in[neuron.id] = set()
        return neuron.id

    def connect(self, source: NeuronId, target: NeuronId) -> FollowEdge:
        self._writable()
        for nid in (source, target):
            if nid not in self._neurons:
                raise UnknownNeuron(nid)
        if source == target:
            raise SelfLoop(source)
        if target not in self._out[source]:
            self._out[source].add(target)
            self._in[target].add(source)
            self._edge_count += 1
        return FollowEdge(source, target)

    def post_status(
        self,
        author: NeuronId,
        time: float,
        payload_kind: PayloadKind | str,
        body: str = "",
        log: EventLog | None = None,
    ) -> Post:
        """Append a post to ``author``'s timeline.

        With ``log`` given the post is also recorded there as a message sent
        on the SNS and delivered to the author's followers at the same
        instant; the log refuses times earlier than its last record.
        """
        self._writable()
        if author not in self._neurons:
            raise UnknownNeuron(author)
        post = Post(author, float(time), PayloadKind(payload_kind), body)
        timeline = self._timelines.setdefault(author, [])
        if timeline and post.timestamp < timeline[-1].timestamp:
            raise ClockRegression(f"post at {time} precedes {author}'s last post")
        if log is not None:
            if post.timestamp < log.now:
                raise ClockRegression(f"post at {time} precedes simulation clock {log.now}")
            from .eventlog import EventKind

            detail = {"via": "sns", "post": post.payload_kind.value, "body": body}
            log.append(post.timestamp, EventKind.MessageSent, (author,), detail)
            log.append(
                post.timestamp,
                EventKind.MessageDelivered,
                (author,),
                {**detail, "followers": len(self._in[author])},
            )
        timeline.append(post)
        return post

    def freeze(self) -> BigSnsGraph:
        """Seal the graph; it is then safe to hand to other threads for reading."""
        self._frozen = True
        return self

    # -- queries ----------------------------------------------------------

    @property
    def frozen(self) -> bool:
        return self._frozen

    def neuron(self, nid: NeuronId) -> Neuron:
        try:
            return self._neurons[nid]
        except KeyError:
            raise UnknownNeuron(nid) from None

    def __contains__(self, nid: object) -> bool:
        return nid in self._neurons

    def __len__(self) -> int:
        return len(self._neurons)

    def __iter__(self) -> Iterator[Neuron]:
        return iter(self._neurons.values())

    @property
    def neuron_count(self) -> int:
        return len(self._neurons)

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def edges(self) -> Iterator[FollowEdge]:
        for src, targets in self._out.items():
            for dst in sorted(targets):
                yield FollowEdge(src, dst)

    def has_edge(self, source: NeuronId, target: NeuronId) -> bool:
        return target in self._out.get(source, ())

    def following(self, nid: NeuronId) -> set[NeuronId]:
        return set(self._out[self.neuron(nid).id])

    def followers(self, nid: NeuronId) -> set[NeuronId]:
        return set(self._in[self.neuron(nid).id])

    def reachable(self, start: NeuronId) -> set[NeuronId]:
        """Neurons reachable from ``start`` along directed edges."""
        seen = {self.neuron(start).id}
        stack = [start]
        while stack:
            for nxt in self._out[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    def timeline(self, nid: NeuronId) -> list[Post]:
        self.neuron(nid)
        return list(self._timelines.get(nid, ()))

    @property
    def post_count(self) -> int:
        return sum(len(t) for t in self._timelines.values())

    def registered_by_category(self) -> Counter:
        return Counter(n.census_category for n in self._neurons.values())


# -- metrics --------------------------------------------------------------

def component_sizes(graph: BigSnsGraph) -> list[int]:
    """Sizes of the weakly connected components, largest first."""
    parent = {nid: nid for nid in graph._neurons}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for src, targets in graph._out.items():
        for dst in targets:
            a, b = find(src), find(dst)
            if a != b:
                parent[a] = b
    return sorted(Counter(find(n) for n in parent).values(), reverse=True)


def largest_component_fraction(graph: BigSnsGraph) -> float:
    if len(graph) == 0:
        raise EmptyGraph("graph has no neurons")
    return component_sizes(graph)[0] / len(graph)


def system_partition(graph: BigSnsGraph) -> dict[str, int]:
    """Neuron count per deployment system label.

    Diagnostic only: how many separate smart-city systems the neurons were
    deployed under.  Not part of the score.
    """
    return dict(sorted(Counter(n.system_label for n in graph).items()))


@dataclass(frozen=True)
class CensusCoverage:
    ratios: dict[CensusCategory, float] = field(default_factory=dict)
    mean: float = 0.0


def normalize_census(census: Mapping[str, int]) -> dict[CensusCategory, int]:
    out = {c: 0 for c in CensusCategory}
    for key, count in census.items():
        if count < 0:
            raise ValueError(f"census count for {key} is negative")
        out[CensusCategory(key)] = int(count)
    return out


def census_coverage(graph: BigSnsGraph, census: Mapping[str, int]) -> CensusCoverage:
    counts = normalize_census(census)
    registered = graph.registered_by_category()
    ratios = {
        cat: min(1.0, registered.get(cat, 0) / total)
        for cat, total in counts.items()
        if total > 0
    }
    if not ratios:
        raise AllCensusZero("no census category has a positive count")
    return CensusCoverage(ratios, sum(ratios.values()) / len(ratios))


def build_graph(
    neurons: Iterable[Neuron], edges: Iterable[FollowEdge] = ()
) -> BigSnsGraph:
    graph = BigSnsGraph()
    for n in neurons:
        graph.register_neuron(n)
    for e in edges:
        graph.connect(e.source, e.target)
    return graph
