"""City IQ scale: network and reflex-arc index kernels and their aggregation.

Three levels:

* level 1: the city neural network and the city cloud reflex arcs;
* level 2: four network indexes (robustness, uniformity, coverage,
  activeness) and one row per arc category in the registry;
* level 3: response speed and robustness for every arc category.

Every index lies in [0, 1].  Level-2 and level-1 scores are plain means, and
the City IQ is ``100 * (w_net * network + w_arc * arcs)``.
"""

from __future__ import annotations

import math
import re
import statistics
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping

from .errors import (
    AllCensusZero,
    DuplicateCategory,
    EmptyGraph,
    InvalidParams,
    ProtectedCategory,
    UnknownCategory,
)
from .eventlog import EventKind, EventRecord
from .reflex import Outcome, end_to_end_latency, traces_from_log
from .sns import BigSnsGraph, census_coverage, largest_component_fraction

STANDARD_CATEGORIES: tuple[str, ...] = (
    "Security",
    "Finance",
    "Traffic",
    "Logistics",
    "Energy",
    "Education",
    "Community",
    "MedicalService",
    "Tourism",
    "Retail",
    "AgriculturalTrade",
    "EnvironmentalProtection",
)

BASE_SCALE_VERSION = "2017"

NETWORK_INDEXES = ("robustness", "uniformity", "coverage", "activeness")
ARC_INDEXES = ("response_speed", "robustness")

_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9]*$")


def category_title(name: str) -> str:
    """``MedicalService`` -> ``Medical service``."""
    words = re.findall(r"[A-Z]+(?![a-z])|[A-Z]?[a-z0-9]+", name) or [name]
    return " ".join([words[0]] + [w.lower() for w in words[1:]])


@dataclass(frozen=True)
class CategoryRegistry:
    """Versioned library of arc categories.

    The twelve standard members cannot be removed.  Each extension or removal
    returns a new registry with the revision counter bumped.
    """

    names: tuple[str, ...] = STANDARD_CATEGORIES
    version: str = BASE_SCALE_VERSION

    @classmethod
    def standard(cls) -> CategoryRegistry:
        return cls()

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def __iter__(self):
        return iter(self.names)

    def __len__(self) -> int:
        return len(self.names)

    @property
    def extensions(self) -> tuple[str, ...]:
        return tuple(n for n in self.names if n not in STANDARD_CATEGORIES)

    def _bumped(self) -> str:
        base, _, rev = self.version.partition(".r")
        return f"{base}.r{int(rev or 0) + 1}"

    def extend(self, name: str) -> CategoryRegistry:
        if name in self.names:
            raise DuplicateCategory(name)
        if not _NAME_RE.match(name):
            raise ValueError(f"category names are alphanumeric identifiers, got {name!r}")
        return CategoryRegistry(self.names + (name,), self._bumped())

    def remove(self, name: str) -> CategoryRegistry:
        if name in STANDARD_CATEGORIES:
            raise ProtectedCategory(name)
        if name not in self.names:
            raise UnknownCategory(name)
        return CategoryRegistry(tuple(n for n in self.names if n != name), self._bumped())


def registry_extend(registry: CategoryRegistry, name: str) -> CategoryRegistry:
    return registry.extend(name)


def registry_remove(registry: CategoryRegistry, name: str) -> CategoryRegistry:
    return registry.remove(name)


@dataclass(frozen=True)
class IndexScore:
    value: float
    sample_count: int

    @property
    def no_data(self) -> bool:
        return self.sample_count == 0


NO_DATA = IndexScore(0.0, 0)


class NodataPolicy(str, Enum):
    ScoreZero = "ScoreZero"
    Exclude = "Exclude"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ScaleParams:
    reference_latency: Mapping[str, float] = field(default_factory=dict)
    activeness_half_rate: float = 1.0
    weight_network: float = 0.5
    weight_arcs: float = 0.5
    nodata_policy: NodataPolicy = NodataPolicy.ScoreZero
    registry: CategoryRegistry = field(default_factory=CategoryRegistry)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodata_policy", NodataPolicy(self.nodata_policy))
        object.__setattr__(self, "reference_latency", dict(self.reference_latency))

    def problems(self) -> list[tuple[str, str]]:
        """(field, message) pairs for every invalid setting."""
        out = []
        for name in ("weight_network", "weight_arcs", "activeness_half_rate"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                out.append((name, f"must be a finite number >= 0, got {v!r}"))
        if not out and abs(self.weight_network + self.weight_arcs - 1.0) > 1e-9:
            out.append(("weight_arcs", "weight_network + weight_arcs must equal 1"))
        if self.activeness_half_rate == 0:
            out.append(("activeness_half_rate", "must be > 0"))
        for cat, ref in self.reference_latency.items():
            if cat not in self.registry:
                out.append((f"reference_latency.{cat}", f"unknown category {cat!r}"))
            if not (isinstance(ref, (int, float)) and math.isfinite(ref) and ref > 0):
                out.append((f"reference_latency.{cat}", f"must be > 0, got {ref!r}"))
        return out

    def validate(self) -> ScaleParams:
        issues = self.problems()
        if issues:
            raise InvalidParams("; ".join(f"{f}: {m}" for f, m in issues))
        return self

    def ref_latency(self, category: str) -> float:
        return float(self.reference_latency.get(category, 1.0))

    @property
    def scale_version(self) -> str:
        return self.registry.version

    def with_registry(self, registry: CategoryRegistry) -> ScaleParams:
        return replace(self, registry=registry)


# -- network indexes ------------------------------------------------------

def network_robustness(log: Iterable[EventRecord]) -> IndexScore:
    """Share of sent messages that were not dropped."""
    sent = dropped = 0
    for r in log:
        if r.kind == EventKind.MessageSent:
            sent += 1
        elif r.kind == EventKind.MessageDropped:
            dropped += 1
    if sent == 0:
        return NO_DATA
    return IndexScore(1.0 - dropped / sent, sent)


def network_uniformity(graph: BigSnsGraph) -> IndexScore:
    try:
        return IndexScore(largest_component_fraction(graph), len(graph))
    except EmptyGraph:
        return NO_DATA


def network_coverage(graph: BigSnsGraph, census: Mapping[str, int]) -> IndexScore:
    try:
        cov = census_coverage(graph, census)
    except AllCensusZero:
        return NO_DATA
    return IndexScore(cov.mean, sum(int(v) for v in census.values()))


def activeness_rate(posts: int, neurons: int, window_length: float) -> float:
    return posts / (neurons * window_length)


def count_posts(log: Iterable[EventRecord], window: tuple[float, float]) -> int:
    lo, hi = window
    return sum(
        1
        for r in log
        if r.kind == EventKind.MessageDelivered and "post" in r.detail and lo <= r.time <= hi
    )


def network_activeness(
    log: Iterable[EventRecord],
    graph: BigSnsGraph,
    window: tuple[float, float],
    half_rate: float = 1.0,
) -> IndexScore:
    """Saturating post rate: ``r / (r + half_rate)``, r in posts per neuron per time unit.

    Only delivered SNS posts inside the closed window count; reflex-arc
    traffic does not.
    """
    length = window[1] - window[0]
    if len(graph) == 0 or not length > 0:
        return NO_DATA
    r = activeness_rate(count_posts(log, window), len(graph), length)
    return IndexScore(r / (r + half_rate), len(graph))


def run_window(log: Iterable[EventRecord]) -> tuple[float, float]:
    """Default activeness window: from 0 to the horizon announced by the run."""
    last = 0.0
    for r in log:
        if r.kind == EventKind.RunStarted and "horizon" in r.detail:
            return (0.0, float(r.detail["horizon"]))
        last = max(last, r.time)
    return (0.0, last)


# -- arc indexes ----------------------------------------------------------

def response_speed_score(median_latency: float, reference_latency: float) -> float:
    return 1.0 / (1.0 + median_latency / reference_latency)


def _traces(log_or_traces):
    items = list(log_or_traces)
    if items and isinstance(items[0], EventRecord):
        return traces_from_log(items)
    return items


def arc_response_speed(log, category: str, reference_latency: float = 1.0) -> IndexScore:
    """``1 / (1 + L / ref)`` with L the median latency of completed firings."""
    latencies = [
        end_to_end_latency(t)
        for t in _traces(log)
        if t.category == category and t.outcome is Outcome.Completed
    ]
    if not latencies:
        return NO_DATA
    return IndexScore(
        response_speed_score(statistics.median(sorted(latencies)), reference_latency),
        len(latencies),
    )


def arc_robustness(log, category: str) -> IndexScore:
    """Completed over attempted firings; suppressed firings are not attempts."""
    completed = attempts = 0
    for t in _traces(log):
        if t.category != category or t.outcome is Outcome.Suppressed:
            continue
        attempts += 1
        completed += t.outcome is Outcome.Completed
    if attempts == 0:
        return NO_DATA
    return IndexScore(completed / attempts, attempts)


# -- aggregation ----------------------------------------------------------

def combine(scores: Iterable[IndexScore], policy: NodataPolicy) -> tuple[float, bool]:
    """Mean of ``scores`` under ``policy``; also reports whether any had data."""
    scores = list(scores)
    if policy is NodataPolicy.Exclude:
        kept = [s.value for s in scores if not s.no_data]
    else:
        kept = [0.0 if s.no_data else s.value for s in scores]
    has_data = any(not s.no_data for s in scores)
    if not kept:
        return 0.0, has_data
    return math.fsum(kept) / len(kept), has_data


def aggregate_arcs(
    category_scores: Mapping[str, float | None], policy: NodataPolicy
) -> float:
    """Mean over the registry; ``None`` marks a category without any data."""
    if policy is NodataPolicy.Exclude:
        vals = [v for v in category_scores.values() if v is not None]
    else:
        vals = [0.0 if v is None else v for v in category_scores.values()]
    return math.fsum(vals) / len(vals) if vals else 0.0


def city_iq_value(network_score: float, arc_score: float, w_net: float, w_arc: float) -> float:
    return 100.0 * (w_net * network_score + w_arc * arc_score)


@dataclass(frozen=True)
class CityIqReport:
    network_indexes: dict[str, IndexScore]
    arc_indexes: dict[str, dict[str, IndexScore]]
    category_scores: dict[str, float | None]
    network_score: float
    arc_score: float
    city_iq: float
    scale_version: str
    weight_network: float
    weight_arcs: float
    nodata_policy: NodataPolicy

    @property
    def level1(self) -> dict[str, float]:
        return {"network_score": self.network_score, "arc_score": self.arc_score}

    def all_index_values(self) -> list[float]:
        vals = [s.value for s in self.network_indexes.values()]
        for pair in self.arc_indexes.values():
            vals.extend(s.value for s in pair.values())
        vals.extend(v for v in self.category_scores.values() if v is not None)
        vals.extend([self.network_score, self.arc_score])
        return vals


def compute_city_iq(
    graph: BigSnsGraph,
    log: Iterable[EventRecord],
    census: Mapping[str, int],
    params: ScaleParams | None = None,
    window: tuple[float, float] | None = None,
) -> CityIqReport:
    """Score a city from its Big SNS and the event log of a run.

    ``window`` bounds the activeness count and defaults to ``[0, horizon]``
    of the run recorded in ``log``.
    """
    params = (params or ScaleParams()).validate()
    records = list(log)
    policy = params.nodata_policy
    if window is None:
        window = run_window(records)

    net = {
        "robustness": network_robustness(records),
        "uniformity": network_uniformity(graph),
        "coverage": network_coverage(graph, census),
        "activeness": network_activeness(records, graph, window, params.activeness_half_rate),
    }
    network_score, _ = combine(net.values(), policy)

    traces = traces_from_log(records)
    arc_indexes: dict[str, dict[str, IndexScore]] = {}
    category_scores: dict[str, float | None] = {}
    for cat in params.registry:
        pair = {
            "response_speed": arc_response_speed(traces, cat, params.ref_latency(cat)),
            "robustness": arc_robustness(traces, cat),
        }
        arc_indexes[cat] = pair
        score, has_data = combine(pair.values(), policy)
        category_scores[cat] = score if has_data else None
    arc_score = aggregate_arcs(category_scores, policy)

    iq = city_iq_value(network_score, arc_score, params.weight_network, params.weight_arcs)
    return CityIqReport(
        network_indexes=net,
        arc_indexes=arc_indexes,
        category_scores=category_scores,
        network_score=network_score,
        arc_score=arc_score,
        city_iq=min(100.0, max(0.0, iq)),
        scale_version=params.scale_version,
        weight_network=float(params.weight_network),
        weight_arcs=float(params.weight_arcs),
        nodata_policy=policy,
    )
