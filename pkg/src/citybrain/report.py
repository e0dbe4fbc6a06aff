"""Report bundles and their two renderings: structured JSON and a three-level table."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .iq import (
    ARC_INDEXES,
    NETWORK_INDEXES,
    CityIqReport,
    IndexScore,
    NodataPolicy,
    category_title,
)

REPORT_FORMAT = "citybrain.report/1"


@dataclass(frozen=True)
class ReportBundle:
    city_iq_report: CityIqReport
    run_digest: str
    scenario_name: str
    seed: int | None


def _score(s: IndexScore) -> dict:
    return {"value": s.value, "sample_count": s.sample_count}


def _unscore(d: dict) -> IndexScore:
    return IndexScore(float(d["value"]), int(d["sample_count"]))


def report_to_dict(bundle: ReportBundle) -> dict:
    r = bundle.city_iq_report
    return {
        "format": REPORT_FORMAT,
        "scenario_name": bundle.scenario_name,
        "seed": bundle.seed,
        "run_digest": bundle.run_digest,
        "scale_version": r.scale_version,
        "weights": {"network": r.weight_network, "arcs": r.weight_arcs},
        "nodata_policy": r.nodata_policy.value,
        "network_indexes": {k: _score(v) for k, v in r.network_indexes.items()},
        "arc_indexes": {
            cat: {k: _score(v) for k, v in pair.items()} for cat, pair in r.arc_indexes.items()
        },
        "category_scores": dict(r.category_scores),
        "level1": r.level1,
        "city_iq": r.city_iq,
    }


def report_from_dict(d: dict) -> ReportBundle:
    if d.get("format") != REPORT_FORMAT:
        raise ValueError(f"unsupported report format {d.get('format')!r}")
    report = CityIqReport(
        network_indexes={k: _unscore(v) for k, v in d["network_indexes"].items()},
        arc_indexes={
            cat: {k: _unscore(v) for k, v in pair.items()} for cat, pair in d["arc_indexes"].items()
        },
        category_scores={k: (None if v is None else float(v)) for k, v in d["category_scores"].items()},
        network_score=float(d["level1"]["network_score"]),
        arc_score=float(d["level1"]["arc_score"]),
        city_iq=float(d["city_iq"]),
        scale_version=d["scale_version"],
        weight_network=float(d["weights"]["network"]),
        weight_arcs=float(d["weights"]["arcs"]),
        nodata_policy=NodataPolicy(d["nodata_policy"]),
    )
    return ReportBundle(report, d["run_digest"], d["scenario_name"], d["seed"])


def parse_report(text: str) -> ReportBundle:
    return report_from_dict(json.loads(text))


_NETWORK_TITLES = {
    "robustness": "Completeness (robustness) of city neural networks",
    "uniformity": "Uniformity of city neural networks",
    "coverage": "Coverage of city neural networks",
    "activeness": "Activeness of city neural networks",
}
_ARC_TITLES = {
    "response_speed": "Response speed of reflex arcs",
    "robustness": "Stability (robustness)",
}

_W1, _W2, _W3 = 32, 52, 32


def _fmt(s: IndexScore) -> tuple[str, str]:
    if s.no_data:
        return "n/a", "0"
    return f"{s.value:.4f}", str(s.sample_count)


def _row(l1: str, l2: str, l3: str, score: str, n: str = "") -> str:
    return f"{l1:<{_W1}}{l2:<{_W2}}{l3:<{_W3}}{score:>8}{n:>8}".rstrip()


def render_table(bundle: ReportBundle) -> str:
    r = bundle.city_iq_report
    seed = "-" if bundle.seed is None else bundle.seed
    lines = [
        f"City IQ Test Scale (Version {r.scale_version})",
        f"scenario: {bundle.scenario_name}   seed: {seed}   log: {bundle.run_digest}",
        f"weights: network {r.weight_network:g} / arcs {r.weight_arcs:g}   no-data policy: {r.nodata_policy.value}",
        "",
        _row("Level-1 index", "Level-2 index", "Level-3 index", "Score", "n"),
        _row("-" * (_W1 - 2), "-" * (_W2 - 2), "-" * (_W3 - 2), "-" * 7, "-" * 7),
        _row("City neural networks (Big SNS)", "", "", f"{r.network_score:.4f}"),
    ]
    for key in NETWORK_INDEXES:
        lines.append(_row("", _NETWORK_TITLES[key], "", *_fmt(r.network_indexes[key])))
    lines.append(_row("City cloud reflex arcs", "", "", f"{r.arc_score:.4f}"))
    for cat, pair in r.arc_indexes.items():
        score = r.category_scores.get(cat)
        title = f"{category_title(cat)} cloud reflex arcs"
        if score is None:
            # unmeasured categories earn nothing under ScoreZero
            shown = "0.0000" if r.nodata_policy is NodataPolicy.ScoreZero else "n/a"
            lines.append(_row("", title, "", shown))
            continue
        lines.append(_row("", title, "", f"{score:.4f}"))
        for key in ARC_INDEXES:
            lines.append(_row("", "", _ARC_TITLES[key], *_fmt(pair[key])))
    lines.append("")
    lines.append(f"City IQ: {r.city_iq:.2f}")
    return "\n".join(lines) + "\n"


def emit_report(bundle: ReportBundle, fmt: str = "table") -> str:
    if fmt == "structured":
        return json.dumps(report_to_dict(bundle), indent=2) + "\n"
    if fmt == "table":
        return render_table(bundle)
    raise ValueError(f"unknown report format {fmt!r}")
