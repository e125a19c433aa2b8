"""Scenario documents (JSON) and trace/summary emitters."""

from __future__ import annotations

import io
import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .network import (
    ArrivalModel,
    CountrySpec,
    Discipline,
    NetworkSpec,
    NetworkValidationError,
    validate_network,
)
from .planner import Objective, PlanningError, Strategy
from .simulation import SimTrace, summarize

CSV_HEADER = ("period", "country", "arrivals_national", "arrivals_international",
              "served", "closed", "backlog", "saturation")

STRATEGY_NAMES = {
    "greedy": Strategy.GREEDY,
    "brute": Strategy.BRUTE_FORCE,
    "saturation": Strategy.SATURATION_HEURISTIC,
}


class ScenarioError(ValueError):
    """Scenario could not be loaded; ``diagnostics`` holds one line per problem."""

    def __init__(self, diagnostics: list[str], source: str = "<scenario>"):
        self.diagnostics = diagnostics
        self.source = source
        super().__init__("\n".join(f"{source}: {d}" for d in diagnostics))


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CountryDoc(_Strict):
    id: str = Field(min_length=1)
    capacity_per_period: float = Field(gt=0, allow_inf_nan=False)
    national_rate: float = Field(default=0.0, ge=0, allow_inf_nan=False)
    international_fraction: float = Field(default=0.0, ge=0, le=1)
    partner_weights: dict[str, float] = Field(default_factory=dict)
    discipline: Discipline = Discipline.NATIONAL_PRIORITY


class OptimizeDoc(_Strict):
    budget_units: int = Field(ge=1)
    unit_size: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    strategy: Literal["greedy", "brute", "saturation"] = "greedy"
    objective: str = "global"

    @field_validator("objective")
    @classmethod
    def _objective_form(cls, v: str) -> str:
        Objective.parse(v)
        return v


class ScenarioDocument(_Strict):
    horizon: int = Field(ge=1)
    seed: int = 0
    arrival_model: ArrivalModel = ArrivalModel.DETERMINISTIC
    response_delay: int = Field(default=0, ge=0)
    countries: list[CountryDoc] = Field(min_length=1)
    optimize: Optional[OptimizeDoc] = None

    def network(self) -> NetworkSpec:
        return NetworkSpec(
            countries=tuple(CountrySpec(**c.model_dump()) for c in self.countries),
            arrival_model=self.arrival_model,
            response_delay=self.response_delay,
        )

    def objective(self, text: Optional[str] = None) -> Objective:
        if text is None:
            text = self.optimize.objective if self.optimize else "global"
        return Objective.parse(text, horizon=self.horizon, seed=self.seed)


def _loc(loc: tuple) -> str:
    out = ""
    for part in loc:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def parse_scenario(text: str, source: str = "<scenario>") -> ScenarioDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"line {exc.lineno}, column {exc.colno}: syntax error: {exc.msg}"],
                            source) from None
    try:
        doc = ScenarioDocument.model_validate(raw)
    except ValidationError as exc:
        raise ScenarioError([f"{_loc(e['loc'])}: {e['msg']}" for e in exc.errors()], source) from None

    diagnostics = []
    try:
        validate_network(doc.network())
    except NetworkValidationError as exc:
        index = {c.id: i for i, c in enumerate(doc.countries)}
        for issue in exc.issues:
            where = f"countries[{index[issue.country_id]}]" if issue.country_id in index else "countries"
            diagnostics.append(f"{where}: {type(issue).__name__}: {issue}")
    if doc.optimize is not None and not doc.objective().is_global \
            and doc.objective().country not in {c.id for c in doc.countries}:
        diagnostics.append(f"optimize.objective: unknown country {doc.objective().country!r}")
    if diagnostics:
        raise ScenarioError(diagnostics, source)
    return doc


def load_scenario(path) -> ScenarioDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError([f"cannot read scenario file: {exc.strerror}"], str(path)) from None
    return parse_scenario(text, source=str(path))


def echo_scenario(doc: ScenarioDocument) -> str:
    """Canonical JSON for ``doc`` with every default spelled out."""
    return json.dumps(doc.model_dump(mode="json"), indent=2, sort_keys=False) + "\n"


def strategy_from_name(name: str) -> Strategy:
    try:
        return STRATEGY_NAMES[name]
    except KeyError:
        raise PlanningError(f"strategy must be one of {sorted(STRATEGY_NAMES)}, got {name!r}") from None


# -- emitters -----------------------------------------------------------------

def trace_to_csv(trace: SimTrace) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    rows = sorted(trace.rows(), key=lambda m: (m.period, m.country))
    for m in rows:
        buf.write(f"{m.period},{m.country},{m.arrivals_national},{m.arrivals_international},"
                  f"{m.served},{m.closed},{m.backlog},{m.saturation:.6f}\n")
    return buf.getvalue()


def _fmt_opt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.3f}"


def summary_text(trace: SimTrace) -> str:
    report = summarize(trace)
    lines = [f"horizon {report.horizon} periods, seed {report.seed}"]
    for cid, s in report.countries.items():
        lines += [
            f"country {cid}",
            f"  capacity/period        {s.capacity_per_period:.3f}",
            f"  arrivals national      {s.arrivals_national}",
            f"  arrivals international {s.arrivals_international}",
            f"  closed                 {s.total_closed}",
            f"  end backlog            {s.end_backlog}",
            f"  mean saturation        {s.mean_saturation:.3f}",
            f"  mean latency           {_fmt_opt(s.mean_latency)}",
            f"  dependent latency      {_fmt_opt(s.mean_dependent_latency)}",
            f"  dependent open         {s.dependent_open}/{s.dependent_created}",
        ]
    lines += [
        "network",
        f"  arrivals               {report.total_arrivals}",
        f"  closed                 {report.total_closed}",
        f"  backlog                {report.total_backlog}",
        f"  awaiting partners      {report.total_awaiting}",
    ]
    return "\n".join(lines) + "\n"


def emit_trace(trace: SimTrace, fmt: str = "csv") -> str:
    if fmt == "csv":
        return trace_to_csv(trace)
    if fmt in ("summary", "summary_text"):
        return summary_text(trace)
    raise ValueError(f"unknown trace format {fmt!r}")
