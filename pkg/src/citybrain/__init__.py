"""City Brain simulator and City IQ scoring engine."""

from .eventlog import EventKind, EventLog, EventRecord, read_log, write_log
from .iq import (
    CategoryRegistry,
    CityIqReport,
    IndexScore,
    NodataPolicy,
    ScaleParams,
    compute_city_iq,
)
from .kernel import SimKernel, Simulation, inject_failure, run, simulate
from .network import CENTER, Channel, Constant, Exponential, FailureTarget, Uniform
from .reflex import (
    ARC_TYPES,
    ArcExecutionTrace,
    CenterPolicy,
    ReflexArcSpec,
    Stimulus,
    classify_arc,
    end_to_end_latency,
    fire,
    traces_from_log,
    validate_arc,
)
from .report import ReportBundle, emit_report, parse_report
from .scenario import (
    ScenarioConfig,
    bundled_scenario,
    dump_scenario,
    load_scenario,
    parse_scenario,
)
from .sns import BigSnsGraph, CensusCategory, Neuron, NeuronKind, PayloadKind

__version__ = "0.1.0"

__all__ = [
    "ARC_TYPES",
    "ArcExecutionTrace",
    "BigSnsGraph",
    "CENTER",
    "CategoryRegistry",
    "CensusCategory",
    "CenterPolicy",
    "Channel",
    "CityIqReport",
    "Constant",
    "EventKind",
    "EventLog",
    "EventRecord",
    "Exponential",
    "FailureTarget",
    "IndexScore",
    "Neuron",
    "NeuronKind",
    "NodataPolicy",
    "PayloadKind",
    "ReflexArcSpec",
    "ReportBundle",
    "ScaleParams",
    "ScenarioConfig",
    "SimKernel",
    "Simulation",
    "Stimulus",
    "Uniform",
    "bundled_scenario",
    "classify_arc",
    "compute_city_iq",
    "dump_scenario",
    "emit_report",
    "end_to_end_latency",
    "fire",
    "inject_failure",
    "load_scenario",
    "parse_report",
    "parse_scenario",
    "read_log",
    "run",
    "simulate",
    "traces_from_log",
    "validate_arc",
    "write_log",
]
