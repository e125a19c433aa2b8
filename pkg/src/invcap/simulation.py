"""Discrete-period simulation of national cases and cross-border sub-requests.

Each period, countries are processed in sorted-id order:

1. national arrivals are generated;
2. each new national case may spawn one sub-request, which joins the chosen
   partner's queue immediately as an international arrival;
3. the country spends its service credit on its queue, one case per unit;
4. served cases close, except national cases still waiting on a partner,
   which move to ``awaiting``.

After every country has been processed, awaiting parents whose sub-request
has closed (plus ``response_delay`` periods) are closed, and per-country
metrics are emitted. A sub-request can be served in the period it was sent
only if its host is processed after its origin; this ordering is part of the
determinism contract.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from statistics import fmean
from typing import Optional

import numpy as np

from .network import (
    ArrivalModel,
    CountrySpec,
    Discipline,
    NetworkSpec,
    arrivals_for_period,
    sample_partner,
    validate_network,
)

# Absorbs float drift in accumulated fractions (e.g. ten additions of 0.1).
_FLOOR_EPS = 1e-9


class CaseKind(str, enum.Enum):
    NATIONAL = "national"
    INTERNATIONAL_SUBREQUEST = "international_subrequest"


@dataclass
class Case:
    id: int
    origin: str
    host: str
    kind: CaseKind
    created_period: int
    parent_id: Optional[int] = None
    dependency_id: Optional[int] = None
    served_period: Optional[int] = None
    closed_period: Optional[int] = None


@dataclass
class CountryState:
    spec: CountrySpec
    rng: np.random.Generator
    national_queue: deque = field(default_factory=deque)
    international_queue: deque = field(default_factory=deque)
    service_credit: float = 0.0
    awaiting: set = field(default_factory=set)
    arrival_accumulator: float = 0.0
    spawn_accumulator: float = 0.0

    @property
    def queue(self) -> list[int]:
        """Pending case ids in the order they would be served."""
        if self.spec.discipline is Discipline.NATIONAL_PRIORITY:
            return list(self.national_queue) + list(self.international_queue)
        return sorted([*self.national_queue, *self.international_queue])

    @property
    def backlog(self) -> int:
        return len(self.national_queue) + len(self.international_queue)

    def pop_next(self) -> int:
        nq, iq = self.national_queue, self.international_queue
        if self.spec.discipline is Discipline.NATIONAL_PRIORITY:
            return nq.popleft() if nq else iq.popleft()
        # Case ids increase with creation time, so the smaller head arrived first.
        if nq and (not iq or nq[0] < iq[0]):
            return nq.popleft()
        return iq.popleft()


@dataclass(frozen=True)
class PeriodMetrics:
    period: int
    country: str
    arrivals_national: int
    arrivals_international: int
    served: int
    closed: int
    backlog: int
    saturation: float


@dataclass
class SimState:
    network: NetworkSpec
    seed: int
    period: int
    countries: dict[str, CountryState]
    cases: dict[int, Case]
    next_case_id: int = 0

    def snapshot(self) -> tuple:
        """Hashable view of the full state, used to compare runs."""
        per_country = tuple(
            (cid, tuple(cs.national_queue), tuple(cs.international_queue), cs.service_credit,
             tuple(sorted(cs.awaiting)), cs.arrival_accumulator, cs.spawn_accumulator,
             repr(cs.rng.bit_generator.state))
            for cid, cs in sorted(self.countries.items())
        )
        cases = tuple(
            (c.id, c.origin, c.host, c.kind.value, c.created_period, c.parent_id,
             c.dependency_id, c.served_period, c.closed_period)
            for c in self.cases.values()
        )
        return (self.seed, self.period, self.next_case_id, per_country, cases)

    @property
    def awaiting_count(self) -> int:
        return sum(len(cs.awaiting) for cs in self.countries.values())

    @property
    def queued_count(self) -> int:
        return sum(cs.backlog for cs in self.countries.values())

    @property
    def closed_count(self) -> int:
        return sum(1 for c in self.cases.values() if c.closed_period is not None)


@dataclass
class SimTrace:
    network: NetworkSpec
    seed: int
    periods: list[list[PeriodMetrics]]
    cases: dict[int, Case]

    @property
    def horizon(self) -> int:
        return len(self.periods)

    def rows(self):
        for metrics in self.periods:
            yield from metrics

    def column(self, country: str, name: str) -> list:
        return [getattr(m, name) for metrics in self.periods for m in metrics if m.country == country]


def init_state(network: NetworkSpec, seed: int) -> SimState:
    network = validate_network(network)
    ids = network.ids
    streams = np.random.SeedSequence(seed).spawn(len(ids))
    countries = {
        cid: CountryState(spec=network.country(cid), rng=np.random.default_rng(ss))
        for cid, ss in zip(ids, streams)
    }
    return SimState(network=network, seed=seed, period=0, countries=countries, cases={})


def _spawns_subrequest(cs: CountryState, model: ArrivalModel) -> bool:
    frac = cs.spec.international_fraction
    if frac <= 0:
        return False
    if model is ArrivalModel.DETERMINISTIC:
        # Deterministic thinning: exactly `frac` of cases spawn in the long run.
        cs.spawn_accumulator += frac
        if cs.spawn_accumulator >= 1 - _FLOOR_EPS:
            cs.spawn_accumulator -= 1
            return True
        return False
    return bool(cs.rng.random() < frac)


def _dependency_resolved(state: SimState, case: Case, period: int) -> bool:
    dep = state.cases[case.dependency_id]
    return dep.closed_period is not None and period >= dep.closed_period + state.network.response_delay


def step(state: SimState) -> tuple[SimState, list[PeriodMetrics]]:
    """Advance ``state`` by one period in place and return it with the period's metrics."""
    p = state.period + 1
    ids = sorted(state.countries)
    model = state.network.arrival_model
    counts = {cid: dict(nat=0, intl=0, served=0, closed=0) for cid in ids}

    def new_case(**kw) -> Case:
        case = Case(id=state.next_case_id, created_period=p, **kw)
        state.cases[case.id] = case
        state.next_case_id += 1
        return case

    for cid in ids:
        cs = state.countries[cid]
        spec = cs.spec

        n, cs.arrival_accumulator = arrivals_for_period(
            model, spec.national_rate, cs.arrival_accumulator, cs.rng)
        counts[cid]["nat"] += n
        for _ in range(n):
            case = new_case(origin=cid, host=cid, kind=CaseKind.NATIONAL)
            cs.national_queue.append(case.id)
            if _spawns_subrequest(cs, model):
                partner = sample_partner(spec.partner_weights, cs.rng)
                sub = new_case(origin=cid, host=partner, kind=CaseKind.INTERNATIONAL_SUBREQUEST,
                               parent_id=case.id)
                case.dependency_id = sub.id
                state.countries[partner].international_queue.append(sub.id)
                counts[partner]["intl"] += 1

        cs.service_credit += spec.capacity_per_period
        while cs.service_credit >= 1 - _FLOOR_EPS and cs.backlog:
            case = state.cases[cs.pop_next()]
            case.served_period = p
            cs.service_credit -= 1
            counts[cid]["served"] += 1
            if case.dependency_id is not None and not _dependency_resolved(state, case, p):
                cs.awaiting.add(case.id)
            else:
                case.closed_period = p
                counts[cid]["closed"] += 1
        # Idle capacity is not banked; only the fractional remainder carries over.
        if cs.service_credit >= 1 - _FLOOR_EPS:
            cs.service_credit -= math.floor(cs.service_credit + _FLOOR_EPS)
        cs.service_credit = max(cs.service_credit, 0.0)

    for cid in ids:
        cs = state.countries[cid]
        for case_id in sorted(cs.awaiting):
            case = state.cases[case_id]
            if _dependency_resolved(state, case, p):
                case.closed_period = p
                cs.awaiting.discard(case_id)
                counts[cid]["closed"] += 1

    metrics = []
    for cid in ids:
        cs, c = state.countries[cid], counts[cid]
        metrics.append(PeriodMetrics(
            period=p,
            country=cid,
            arrivals_national=c["nat"],
            arrivals_international=c["intl"],
            served=c["served"],
            closed=c["closed"],
            backlog=cs.backlog,
            saturation=(c["nat"] + c["intl"]) / cs.spec.capacity_per_period,
        ))
    state.period = p
    return state, metrics


def run(network: NetworkSpec, horizon: int, seed: int = 0) -> SimTrace:
    if not (isinstance(horizon, int) and horizon >= 1):
        raise ValueError(f"horizon must be a positive integer, got {horizon!r}")
    state = init_state(network, seed)
    periods = []
    for _ in range(horizon):
        state, metrics = step(state)
        periods.append(metrics)
    return SimTrace(network=state.network, seed=seed, periods=periods, cases=state.cases)


# -- summaries ----------------------------------------------------------------

@dataclass(frozen=True)
class CountrySummary:
    country: str
    capacity_per_period: float
    arrivals_national: int
    arrivals_international: int
    total_closed: int
    end_backlog: int
    mean_saturation: float
    aggregate_saturation: float
    mean_latency: Optional[float]
    mean_dependent_latency: Optional[float]
    dependent_created: int
    dependent_open: int

    @property
    def total_arrivals(self) -> int:
        return self.arrivals_national + self.arrivals_international


@dataclass(frozen=True)
class SummaryReport:
    horizon: int
    seed: int
    countries: dict[str, CountrySummary]
    total_arrivals: int
    total_closed: int
    total_backlog: int
    total_awaiting: int


def _mean_or_none(values: list[int]) -> Optional[float]:
    return fmean(values) if values else None


def summarize(trace: SimTrace) -> SummaryReport:
    """Per-country totals and latencies; latencies are ``None`` when nothing closed."""
    horizon = trace.horizon
    countries = {}
    for cid in trace.network.ids:
        spec = trace.network.country(cid)
        rows = [m for metrics in trace.periods for m in metrics if m.country == cid]
        hosted = [c for c in trace.cases.values() if c.host == cid]
        dependents = [c for c in hosted if c.dependency_id is not None]
        nat = sum(m.arrivals_national for m in rows)
        intl = sum(m.arrivals_international for m in rows)
        countries[cid] = CountrySummary(
            country=cid,
            capacity_per_period=spec.capacity_per_period,
            arrivals_national=nat,
            arrivals_international=intl,
            total_closed=sum(m.closed for m in rows),
            end_backlog=rows[-1].backlog if rows else 0,
            mean_saturation=fmean(m.saturation for m in rows) if rows else 0.0,
            aggregate_saturation=(nat + intl) / (spec.capacity_per_period * horizon) if horizon else 0.0,
            mean_latency=_mean_or_none(
                [c.closed_period - c.created_period for c in hosted if c.closed_period is not None]),
            mean_dependent_latency=_mean_or_none(
                [c.closed_period - c.created_period for c in dependents if c.closed_period is not None]),
            dependent_created=len(dependents),
            dependent_open=sum(1 for c in dependents if c.closed_period is None),
        )
    awaiting = sum(1 for c in trace.cases.values()
                   if c.served_period is not None and c.closed_period is None)
    return SummaryReport(
        horizon=horizon,
        seed=trace.seed,
        countries=countries,
        total_arrivals=sum(s.total_arrivals for s in countries.values()),
        total_closed=sum(s.total_closed for s in countries.values()),
        total_backlog=sum(s.end_backlog for s in countries.values()),
        total_awaiting=awaiting,
    )
