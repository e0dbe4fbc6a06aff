"""Scenario files: JSON schema, parsing, validation and canonical serialization.

A scenario declares a whole city: neurons and follow edges, channels, reflex
arcs, stimuli, failure injections, scheduled posts, the census used for
coverage, and the scoring parameters.  ``schema_version`` is mandatory and
unknown fields are rejected.  Every problem is reported with a path such as
``arcs[0].afferent``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import jsonschema

from .errors import DuplicateCategory, ScenarioError
from .iq import CategoryRegistry, NodataPolicy, ScaleParams
from .network import Channel, Constant, DelayModel, Exponential, FailureTarget, Uniform
from .reflex import CenterPolicy, ReflexArcSpec, Stimulus, validate_arc
from .sns import BigSnsGraph, CensusCategory, FollowEdge, Neuron, Post, build_graph

SCHEMA_VERSION = 1
SUPPORTED_VERSIONS = (SCHEMA_VERSION,)

# -- issues ---------------------------------------------------------------


@dataclass(frozen=True)
class Issue:
    path: str
    code: str  # SyntaxError | SchemaVersionUnsupported | SchemaViolation | UnknownField | DanglingReference | InvariantViolation
    message: str

    def __str__(self) -> str:
        return f"{self.path}: [{self.code}] {self.message}"


def format_path(parts: Iterable[Any]) -> str:
    out = ""
    for p in parts:
        if isinstance(p, int):
            out += f"[{p}]"
        else:
            out += f".{p}" if out else str(p)
    return out or "(root)"


# -- schema ---------------------------------------------------------------

_NUM = {"type": "number"}
_NONNEG = {"type": "number", "minimum": 0}
_ID = {"type": "string", "minLength": 1}

_DELAY = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": ["constant", "uniform", "exponential"]},
        "value": _NONNEG,
        "low": _NONNEG,
        "high": _NONNEG,
        "mean": _NONNEG,
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": kind}}},
         "then": {"required": fields, "additionalProperties": False,
                  "properties": {k: True for k in ["kind", *fields]}}}
        for kind, fields in (("constant", ["value"]), ("uniform", ["low", "high"]), ("exponential", ["mean"]))
    ],
}


def _obj(required: list[str], props: dict) -> dict:
    return {"type": "object", "required": required, "additionalProperties": False, "properties": props}


SCENARIO_SCHEMA: dict = _obj(
    ["schema_version", "metadata", "neurons"],
    {
        "schema_version": {"type": "integer"},
        "metadata": _obj(
            ["name", "horizon"],
            {
                "name": _ID,
                "description": {"type": "string"},
                "time_unit": {"type": "string"},
                "horizon": {"type": "number", "exclusiveMinimum": 0},
                "activeness_window": {
                    "type": "array", "prefixItems": [_NONNEG, _NONNEG], "minItems": 2, "maxItems": 2,
                },
            },
        ),
        "neurons": {
            "type": "array",
            "items": _obj(
                ["id", "kind"],
                {
                    "id": _ID,
                    "kind": {"enum": ["Human", "Organization", "Sensor", "SmartDevice", "SmartProgram"]},
                    "census_category": {"enum": [c.value for c in CensusCategory]},
                    "system_label": {"type": "string"},
                    "display_name": {"type": "string"},
                    "reaction_delay": _DELAY,
                },
            ),
        },
        "edges": {"type": "array", "items": _obj(["from", "to"], {"from": _ID, "to": _ID})},
        "channels": {
            "type": "array",
            "items": _obj(
                ["id"],
                {
                    "id": _ID,
                    "delay": _DELAY,
                    "failure_probability": {"type": "number", "minimum": 0, "maximum": 1},
                    "outages": {
                        "type": "array",
                        "items": {"type": "array", "prefixItems": [_NONNEG, _NONNEG], "minItems": 2, "maxItems": 2},
                    },
                },
            ),
        },
        "arcs": {
            "type": "array",
            "items": _obj(
                ["id", "category", "receptors", "afferent", "center", "efferent", "effectors"],
                {
                    "id": _ID,
                    "category": _ID,
                    "receptors": {"type": "array", "items": _ID},
                    "afferent": {"type": "string"},
                    "center": _obj(
                        ["decision_threshold"],
                        {
                            "decision_threshold": {"type": "number", "minimum": 0, "maximum": 1},
                            "processing_delay": _DELAY,
                            "action": {"enum": ["Actuate", "Notify", "Escalate"]},
                        },
                    ),
                    "efferent": {"type": "string"},
                    "effectors": {"type": "array", "items": _ID},
                },
            ),
        },
        "stimuli": {
            "type": "array",
            "items": _obj(
                ["id", "arc", "time", "intensity"],
                {
                    "id": _ID,
                    "arc": _ID,
                    "time": _NONNEG,
                    "intensity": {"type": "number", "minimum": 0, "maximum": 1},
                    "receptor": _ID,
                },
            ),
        },
        "failures": {
            "type": "array",
            "items": _obj(
                ["target", "start", "end"],
                {
                    "target": {"enum": ["channel", "neuron", "center"]},
                    "id": _ID,
                    "start": _NONNEG,
                    "end": _NONNEG,
                },
            ),
        },
        "posts": {
            "type": "array",
            "items": _obj(
                ["author", "time", "payload_kind"],
                {
                    "author": _ID,
                    "time": _NONNEG,
                    "payload_kind": {"enum": ["Status", "Alarm", "Command", "Chat"]},
                    "body": {"type": "string"},
                },
            ),
        },
        "census": _obj([], {c.value: {"type": "integer", "minimum": 0} for c in CensusCategory}),
        "scale": None,  # filled below
    },
)

SCALE_SCHEMA: dict = _obj(
    [],
    {
        "reference_latency": {"type": "object", "additionalProperties": _NUM},
        "activeness_half_rate": _NUM,
        "weight_network": _NUM,
        "weight_arcs": _NUM,
        "nodata_policy": {"enum": [p.value for p in NodataPolicy]},
        "extra_categories": {"type": "array", "items": _ID},
    },
)
SCENARIO_SCHEMA["properties"]["scale"] = SCALE_SCHEMA

_VALIDATOR = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
_SCALE_VALIDATOR = jsonschema.Draft202012Validator(SCALE_SCHEMA)


# -- model ----------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioMetadata:
    name: str
    horizon: float
    time_unit: str = "unit"
    description: str = ""
    activeness_window: tuple[float, float] | None = None


@dataclass(frozen=True)
class FailureDirective:
    target: FailureTarget
    start: float
    end: float


@dataclass(frozen=True)
class ScenarioConfig:
    metadata: ScenarioMetadata
    neurons: tuple[Neuron, ...] = ()
    edges: tuple[FollowEdge, ...] = ()
    channels: tuple[Channel, ...] = ()
    arcs: tuple[ReflexArcSpec, ...] = ()
    stimuli: tuple[Stimulus, ...] = ()
    failures: tuple[FailureDirective, ...] = ()
    posts: tuple[Post, ...] = ()
    census: dict[CensusCategory, int] = field(default_factory=dict)
    scale: ScaleParams = field(default_factory=ScaleParams)

    @property
    def name(self) -> str:
        return self.metadata.name

    @property
    def horizon(self) -> float:
        return self.metadata.horizon

    def build_graph(self) -> BigSnsGraph:
        return build_graph(self.neurons, self.edges)

    @property
    def activeness_window(self) -> tuple[float, float]:
        return self.metadata.activeness_window or (0.0, self.metadata.horizon)


# -- dict <-> model -------------------------------------------------------


def delay_from_dict(d: dict) -> DelayModel:
    kind = d["kind"]
    if kind == "constant":
        return Constant(float(d["value"]))
    if kind == "uniform":
        return Uniform(float(d["low"]), float(d["high"]))
    return Exponential(float(d["mean"]))


def delay_to_dict(m: DelayModel) -> dict:
    if isinstance(m, Constant):
        return {"kind": "constant", "value": m.value}
    if isinstance(m, Uniform):
        return {"kind": "uniform", "low": m.low, "high": m.high}
    return {"kind": "exponential", "mean": m.mean_value}


def scale_from_dict(d: dict) -> ScaleParams:
    registry = CategoryRegistry.standard()
    for name in d.get("extra_categories", ()):
        registry = registry.extend(name)
    return ScaleParams(
        reference_latency={k: float(v) for k, v in d.get("reference_latency", {}).items()},
        activeness_half_rate=float(d.get("activeness_half_rate", 1.0)),
        weight_network=float(d.get("weight_network", 0.5)),
        weight_arcs=float(d.get("weight_arcs", 0.5)),
        nodata_policy=NodataPolicy(d.get("nodata_policy", "ScoreZero")),
        registry=registry,
    )


def scale_to_dict(s: ScaleParams) -> dict:
    return {
        "reference_latency": dict(s.reference_latency),
        "activeness_half_rate": s.activeness_half_rate,
        "weight_network": s.weight_network,
        "weight_arcs": s.weight_arcs,
        "nodata_policy": s.nodata_policy.value,
        "extra_categories": list(s.registry.extensions),
    }


class _Builder:
    """Turns schema-valid JSON into model objects, collecting located issues."""

    def __init__(self) -> None:
        self.issues: list[Issue] = []

    def attempt(self, path: str, fn, *args):
        try:
            return fn(*args)
        except (ValueError, TypeError) as exc:
            self.issues.append(Issue(path, "InvariantViolation", str(exc)))
            return None

    def delay(self, path: str, d: dict | None, default: DelayModel | None) -> DelayModel | None:
        if d is None:
            return default
        return self.attempt(path, delay_from_dict, d)

    def build(self, doc: dict) -> ScenarioConfig | None:
        md = doc["metadata"]
        window = md.get("activeness_window")
        meta = ScenarioMetadata(
            name=md["name"],
            horizon=float(md["horizon"]),
            time_unit=md.get("time_unit", "unit"),
            description=md.get("description", ""),
            activeness_window=(float(window[0]), float(window[1])) if window else None,
        )
        if window and window[0] >= window[1]:
            self.issues.append(Issue("metadata.activeness_window", "InvariantViolation", "window must have positive length"))

        neurons = []
        for i, n in enumerate(doc["neurons"]):
            p = f"neurons[{i}]"
            reaction = self.delay(f"{p}.reaction_delay", n.get("reaction_delay"), None)
            neurons.append(
                Neuron(
                    id=n["id"],
                    kind=n["kind"],
                    census_category=n.get("census_category"),
                    system_label=n.get("system_label", ""),
                    display_name=n.get("display_name", ""),
                    reaction_delay=reaction,
                )
            )
        edges = [FollowEdge(e["from"], e["to"]) for e in doc.get("edges", ())]

        channels = []
        for i, c in enumerate(doc.get("channels", ())):
            p = f"channels[{i}]"
            delay = self.delay(f"{p}.delay", c.get("delay"), Constant(0.0))
            outages = tuple((float(s), float(e)) for s, e in c.get("outages", ()))
            ch = self.attempt(
                p, Channel, c["id"], delay or Constant(0.0), float(c.get("failure_probability", 0.0)), outages
            )
            if ch is not None:
                channels.append(ch)

        arcs = []
        for i, a in enumerate(doc.get("arcs", ())):
            p = f"arcs[{i}]"
            cd = a["center"]
            policy = CenterPolicy(
                decision_threshold=float(cd["decision_threshold"]),
                processing_delay=self.delay(f"{p}.center.processing_delay", cd.get("processing_delay"), Constant(0.0))
                or Constant(0.0),
                action=cd.get("action", "Actuate"),
            )
            arcs.append(
                ReflexArcSpec(
                    arc_id=a["id"],
                    category=a["category"],
                    receptors=tuple(a["receptors"]),
                    afferent=a["afferent"],
                    center=policy,
                    efferent=a["efferent"],
                    effectors=tuple(a["effectors"]),
                )
            )

        stimuli = [
            Stimulus(s["id"], s["arc"], float(s["time"]), float(s["intensity"]), s.get("receptor"))
            for s in doc.get("stimuli", ())
        ]

        failures = []
        for i, f in enumerate(doc.get("failures", ())):
            p = f"failures[{i}]"
            target_id = f.get("id")
            if (f["target"] == "center") != (target_id is None):
                msg = "center failures take no id" if target_id else f"{f['target']} failures need an id"
                self.issues.append(Issue(f"{p}.id", "SchemaViolation", msg))
                continue
            failures.append(FailureDirective(FailureTarget(f["target"], target_id), float(f["start"]), float(f["end"])))

        posts = [
            Post(p["author"], float(p["time"]), p["payload_kind"], p.get("body", ""))
            for p in doc.get("posts", ())
        ]
        census = {CensusCategory(k): int(v) for k, v in doc.get("census", {}).items()}

        scale = ScaleParams()
        if "scale" in doc:
            try:
                scale = scale_from_dict(doc["scale"])
            except (DuplicateCategory, ValueError) as exc:
                self.issues.append(Issue("scale.extra_categories", "InvariantViolation", f"{type(exc).__name__}: {exc}"))

        if self.issues:
            return None
        return ScenarioConfig(
            metadata=meta,
            neurons=tuple(neurons),
            edges=tuple(edges),
            channels=tuple(channels),
            arcs=tuple(arcs),
            stimuli=tuple(stimuli),
            failures=tuple(failures),
            posts=tuple(posts),
            census=census,
            scale=scale,
        )


def _schema_issues(validator: jsonschema.Draft202012Validator, doc: Any, prefix: tuple = ()) -> list[Issue]:
    issues = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message)):
        path = prefix + tuple(err.absolute_path)
        if err.validator == "additionalProperties" and isinstance(err.instance, dict):
            allowed = set(err.schema.get("properties", {}))
            for key in sorted(k for k in err.instance if k not in allowed):
                issues.append(Issue(format_path(path + (key,)), "UnknownField", f"unknown field {key!r}"))
            continue
        issues.append(Issue(format_path(path), "SchemaViolation", err.message))
    return issues


# -- semantic validation --------------------------------------------------


def validate_scenario(config: ScenarioConfig) -> list[Issue]:
    """All cross-reference and invariant problems of an assembled config."""
    issues: list[Issue] = []

    def add(path: str, code: str, msg: str) -> None:
        issues.append(Issue(path, code, msg))

    horizon = config.metadata.horizon
    if not (isinstance(horizon, (int, float)) and math.isfinite(horizon) and horizon > 0):
        add("metadata.horizon", "InvariantViolation", "horizon must be finite and > 0")
        horizon = math.inf
    win = config.metadata.activeness_window
    if win is not None and not (0 <= win[0] < win[1]):
        add("metadata.activeness_window", "InvariantViolation", "window must be [start, end) with start < end")

    graph = BigSnsGraph()
    for i, n in enumerate(config.neurons):
        if n.id in graph:
            add(f"neurons[{i}].id", "InvariantViolation", f"duplicate neuron id {n.id!r}")
            continue
        graph.register_neuron(n)

    seen_edges = set()
    for i, e in enumerate(config.edges):
        for end, nid in (("from", e.source), ("to", e.target)):
            if nid not in graph:
                add(f"edges[{i}].{end}", "DanglingReference", f"unknown neuron {nid!r}")
        if e.source == e.target:
            add(f"edges[{i}]", "InvariantViolation", "self-loops are not allowed")
        elif (e.source, e.target) in seen_edges:
            add(f"edges[{i}]", "InvariantViolation", "duplicate edge")
        seen_edges.add((e.source, e.target))

    channel_ids = set()
    for i, c in enumerate(config.channels):
        if c.id in channel_ids:
            add(f"channels[{i}].id", "InvariantViolation", f"duplicate channel id {c.id!r}")
        channel_ids.add(c.id)
        if c.outages and c.outages[-1][1] > horizon:
            add(f"channels[{i}].outages", "InvariantViolation", "outage runs past the horizon")

    registry = config.scale.registry
    arc_ids = {}
    for i, a in enumerate(config.arcs):
        p = f"arcs[{i}]"
        if a.arc_id in arc_ids:
            add(f"{p}.id", "InvariantViolation", f"duplicate arc id {a.arc_id!r}")
        arc_ids[a.arc_id] = a
        if a.category not in registry:
            add(f"{p}.category", "DanglingReference", f"category {a.category!r} is not in the registry")
        for v in validate_arc(a, graph, channel_ids):
            code = "DanglingReference" if v.code in ("UnknownNeuron", "UndeclaredChannel") else "InvariantViolation"
            add(f"{p}.{v.field}", code, f"{v.code}: {v.message}")

    stim_ids = set()
    for i, s in enumerate(config.stimuli):
        p = f"stimuli[{i}]"
        if s.id in stim_ids:
            add(f"{p}.id", "InvariantViolation", f"duplicate stimulus id {s.id!r}")
        stim_ids.add(s.id)
        arc = arc_ids.get(s.arc_id)
        if arc is None:
            add(f"{p}.arc", "DanglingReference", f"unknown arc {s.arc_id!r}")
        elif s.receptor is not None and s.receptor not in arc.receptors:
            add(f"{p}.receptor", "DanglingReference", f"{s.receptor!r} is not a receptor of {s.arc_id!r}")
        if s.time > horizon:
            add(f"{p}.time", "InvariantViolation", "stimulus falls after the horizon")

    for i, f in enumerate(config.failures):
        p = f"failures[{i}]"
        t = f.target
        if t.kind == "channel" and t.id not in channel_ids:
            add(f"{p}.id", "DanglingReference", f"unknown channel {t.id!r}")
        if t.kind == "neuron" and t.id not in graph:
            add(f"{p}.id", "DanglingReference", f"unknown neuron {t.id!r}")
        if not (0 <= f.start <= f.end <= horizon):
            add(p, "InvariantViolation", f"window [{f.start}, {f.end}) must lie within [0, horizon]")

    for i, post in enumerate(config.posts):
        p = f"posts[{i}]"
        if post.author not in graph:
            add(f"{p}.author", "DanglingReference", f"unknown neuron {post.author!r}")
        if post.timestamp > horizon:
            add(f"{p}.time", "InvariantViolation", "post falls after the horizon")

    for cat, count in config.census.items():
        if count < 0:
            add(f"census.{cat}", "InvariantViolation", "census counts must be >= 0")

    for fld, msg in config.scale.problems():
        code = "DanglingReference" if "unknown category" in msg else "InvariantViolation"
        add(f"scale.{fld}", code, msg)
    return issues


# -- entry points ---------------------------------------------------------


def parse_scenario_dict(doc: Any) -> ScenarioConfig:
    if not isinstance(doc, dict):
        raise ScenarioError([Issue("(root)", "SchemaViolation", "scenario must be a JSON object")])
    if "schema_version" not in doc:
        raise ScenarioError([Issue("schema_version", "SchemaViolation", "schema_version is required")])
    version = doc["schema_version"]
    if version not in SUPPORTED_VERSIONS or isinstance(version, bool):
        raise ScenarioError(
            [Issue("schema_version", "SchemaVersionUnsupported", f"unsupported schema_version {version!r}")]
        )
    issues = _schema_issues(_VALIDATOR, doc)
    if issues:
        raise ScenarioError(issues)
    builder = _Builder()
    config = builder.build(doc)
    if config is None:
        raise ScenarioError(builder.issues)
    issues = validate_scenario(config)
    if issues:
        raise ScenarioError(issues)
    return config


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse and fully validate a scenario document.

    Raises :class:`~citybrain.errors.ScenarioError` whose ``issues`` list every
    problem found, each with a path into the document.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            [Issue(f"line {exc.lineno} column {exc.colno}", "SyntaxError", exc.msg)]
        ) from None
    return parse_scenario_dict(doc)


def load_scenario(path: str | Path) -> ScenarioConfig:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


def parse_scale_params(text: str) -> ScaleParams:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([Issue(f"line {exc.lineno} column {exc.colno}", "SyntaxError", exc.msg)]) from None
    issues = _schema_issues(_SCALE_VALIDATOR, doc)
    if issues:
        raise ScenarioError(issues)
    try:
        params = scale_from_dict(doc)
    except (DuplicateCategory, ValueError) as exc:
        raise ScenarioError([Issue("extra_categories", "InvariantViolation", str(exc))]) from None
    problems = params.problems()
    if problems:
        raise ScenarioError([Issue(f, "InvariantViolation", m) for f, m in problems])
    return params


def scenario_to_dict(config: ScenarioConfig) -> dict:
    md = config.metadata
    meta: dict[str, Any] = {"name": md.name, "description": md.description, "time_unit": md.time_unit, "horizon": md.horizon}
    if md.activeness_window is not None:
        meta["activeness_window"] = list(md.activeness_window)
    out: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "metadata": meta}
    out["neurons"] = [
        {
            "id": n.id,
            "kind": n.kind.value,
            "census_category": n.census_category.value,
            "system_label": n.system_label,
            "display_name": n.display_name,
            "reaction_delay": delay_to_dict(n.reaction_delay),
        }
        for n in config.neurons
    ]
    out["edges"] = [{"from": e.source, "to": e.target} for e in config.edges]
    out["channels"] = [
        {
            "id": c.id,
            "delay": delay_to_dict(c.delay),
            "failure_probability": c.failure_probability,
            "outages": [list(w) for w in c.outages],
        }
        for c in config.channels
    ]
    out["arcs"] = [
        {
            "id": a.arc_id,
            "category": a.category,
            "receptors": list(a.receptors),
            "afferent": a.afferent,
            "center": {
                "decision_threshold": a.center.decision_threshold,
                "processing_delay": delay_to_dict(a.center.processing_delay),
                "action": a.center.action.value,
            },
            "efferent": a.efferent,
            "effectors": list(a.effectors),
        }
        for a in config.arcs
    ]
    out["stimuli"] = []
    for s in config.stimuli:
        d = {"id": s.id, "arc": s.arc_id, "time": s.time, "intensity": s.intensity}
        if s.receptor is not None:
            d["receptor"] = s.receptor
        out["stimuli"].append(d)
    out["failures"] = []
    for f in config.failures:
        d = {"target": f.target.kind, "start": f.start, "end": f.end}
        if f.target.id is not None:
            d["id"] = f.target.id
        out["failures"].append(d)
    out["posts"] = [
        {"author": p.author, "time": p.timestamp, "payload_kind": p.payload_kind.value, "body": p.body}
        for p in config.posts
    ]
    out["census"] = {c.value: config.census[c] for c in CensusCategory if c in config.census}
    out["scale"] = scale_to_dict(config.scale)
    return out


def dump_scenario(config: ScenarioConfig) -> str:
    return json.dumps(scenario_to_dict(config), indent=2, ensure_ascii=False) + "\n"


# -- bundled fixtures -----------------------------------------------------


def bundled_names() -> list[str]:
    root = resources.files("citybrain") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_text(name: str) -> str:
    path = resources.files("citybrain") / "scenarios" / f"{name}.json"
    if not path.is_file():
        raise KeyError(f"no bundled scenario named {name!r}")
    return path.read_text(encoding="utf-8")


def bundled_scenario(name: str) -> ScenarioConfig:
    return parse_scenario(bundled_text(name))
