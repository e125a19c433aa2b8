"""Capacity-expansion strategies scored by simulation.

Three allocators spend ``budget_units`` units of ``unit_size`` capacity:

* ``saturation_heuristic_allocate`` gives each unit to the most saturated
  country among those the objective country sends requests to (and itself);
* ``greedy_allocate`` gives each unit to the country with the largest
  simulated marginal gain;
* ``brute_force_allocate`` enumerates every distribution of the budget.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Optional, Sequence

from .network import NetworkSpec, validate_network
from .simulation import run, summarize

ENUMERATION_LIMIT = 10**5


class PlanningError(ValueError):
    pass


class Strategy(str, enum.Enum):
    GREEDY = "greedy"
    BRUTE_FORCE = "brute_force"
    SATURATION_HEURISTIC = "saturation_heuristic"


@dataclass(frozen=True)
class Objective:
    """``country=None`` means global throughput, otherwise that country's own."""

    country: Optional[str] = None
    horizon: int = 100
    seed: int = 0

    @property
    def is_global(self) -> bool:
        return self.country is None

    def describe(self) -> str:
        return "global" if self.is_global else f"own:{self.country}"

    @classmethod
    def parse(cls, text: str, horizon: int = 100, seed: int = 0) -> "Objective":
        """Parse ``global`` or ``own:<ID>``."""
        if text == "global":
            return cls(None, horizon, seed)
        if text.startswith("own:") and len(text) > 4:
            return cls(text[4:], horizon, seed)
        raise PlanningError(f"objective must be 'global' or 'own:<ID>', got {text!r}")


@dataclass(frozen=True)
class InvestmentPlan:
    allocations: dict[str, float]
    budget_units: int
    unit_size: float
    objective_value: float
    baseline_value: float
    strategy: Strategy
    objective: Objective
    evaluations: int = 0

    @property
    def gain(self) -> float:
        return self.objective_value - self.baseline_value

    def units(self) -> dict[str, int]:
        return {cid: round(v / self.unit_size) for cid, v in self.allocations.items()}


def _check_objective(network: NetworkSpec, objective: Objective) -> None:
    if not (isinstance(objective.horizon, int) and objective.horizon >= 1):
        raise PlanningError(f"objective horizon must be a positive integer, got {objective.horizon!r}")
    if not objective.is_global and objective.country not in network.ids:
        raise PlanningError(f"objective references unknown country {objective.country!r}")


def _check_budget(budget_units: int, unit_size: float) -> None:
    if not (isinstance(budget_units, int) and budget_units >= 1):
        raise PlanningError(f"budget_units must be a positive integer, got {budget_units!r}")
    if not (unit_size > 0 and math.isfinite(unit_size)):
        raise PlanningError(f"unit_size must be positive, got {unit_size!r}")


def evaluate_allocation(network: NetworkSpec, allocations: Mapping[str, float],
                        objective: Objective) -> float:
    """Closed cases under ``objective`` after adding ``allocations`` to capacities."""
    validate_network(network)
    _check_objective(network, objective)
    ids = set(network.ids)
    for cid, delta in allocations.items():
        if cid not in ids:
            raise PlanningError(f"allocation references unknown country {cid!r}")
        if not delta >= 0:
            raise PlanningError(f"allocation for {cid!r} must be non-negative, got {delta}")
    trace = run(network.with_capacity_deltas(allocations), objective.horizon, objective.seed)
    if objective.is_global:
        return float(sum(m.closed for m in trace.rows()))
    return float(sum(trace.column(objective.country, "closed")))


def _evaluate_many(network: NetworkSpec, candidates: Sequence[Mapping[str, float]],
                   objective: Objective, workers: int) -> list[float]:
    # map() keeps candidate order, so parallel runs cannot change tie-breaking.
    if workers > 1 and len(candidates) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(evaluate_allocation, [network] * len(candidates),
                                 candidates, [objective] * len(candidates)))
    return [evaluate_allocation(network, c, objective) for c in candidates]


def _saturations(network: NetworkSpec, allocations: Mapping[str, float],
                 objective: Objective) -> dict[str, float]:
    trace = run(network.with_capacity_deltas(allocations), objective.horizon, objective.seed)
    return {cid: s.aggregate_saturation for cid, s in summarize(trace).countries.items()}


def _to_allocations(units: Mapping[str, int], unit_size: float) -> dict[str, float]:
    return {cid: n * unit_size for cid, n in sorted(units.items()) if n}


def heuristic_candidates(network: NetworkSpec, objective: Objective) -> list[str]:
    """Countries the heuristic may invest in: the requestor and its partners."""
    if objective.is_global:
        return network.ids
    own = network.country(objective.country)
    return sorted({objective.country, *own.partners()})


def saturation_heuristic_allocate(network: NetworkSpec, budget_units: int, unit_size: float,
                                  objective: Objective) -> InvestmentPlan:
    validate_network(network)
    _check_budget(budget_units, unit_size)
    _check_objective(network, objective)
    candidates = heuristic_candidates(network, objective)
    units = {cid: 0 for cid in network.ids}
    for _ in range(budget_units):
        sat = _saturations(network, _to_allocations(units, unit_size), objective)
        capacity = {cid: network.country(cid).capacity_per_period + units[cid] * unit_size
                    for cid in candidates}
        best = min(candidates, key=lambda cid: (-sat[cid], capacity[cid], cid))
        units[best] += 1
    allocations = _to_allocations(units, unit_size)
    return InvestmentPlan(
        allocations=allocations,
        budget_units=budget_units,
        unit_size=unit_size,
        objective_value=evaluate_allocation(network, allocations, objective),
        baseline_value=evaluate_allocation(network, {}, objective),
        strategy=Strategy.SATURATION_HEURISTIC,
        objective=objective,
        evaluations=budget_units,
    )


def greedy_allocate(network: NetworkSpec, budget_units: int, unit_size: float,
                    objective: Objective, workers: int = 1) -> InvestmentPlan:
    validate_network(network)
    _check_budget(budget_units, unit_size)
    _check_objective(network, objective)
    ids = network.ids
    units = {cid: 0 for cid in ids}
    baseline = current = evaluate_allocation(network, {}, objective)
    evaluations = 1
    for _ in range(budget_units):
        trial = [_to_allocations({**units, cid: units[cid] + 1}, unit_size) for cid in ids]
        values = _evaluate_many(network, trial, objective, workers)
        evaluations += len(trial)
        sat = _saturations(network, _to_allocations(units, unit_size), objective)
        best = min(range(len(ids)), key=lambda i: (-(values[i] - current), -sat[ids[i]], ids[i]))
        units[ids[best]] += 1
        current = values[best]
    return InvestmentPlan(
        allocations=_to_allocations(units, unit_size),
        budget_units=budget_units,
        unit_size=unit_size,
        objective_value=current,
        baseline_value=baseline,
        strategy=Strategy.GREEDY,
        objective=objective,
        evaluations=evaluations,
    )


def count_distributions(budget_units: int, n_countries: int) -> int:
    return math.comb(budget_units + n_countries - 1, n_countries - 1)


def distributions(budget_units: int, n_countries: int):
    """Yield every way to split ``budget_units`` among ``n_countries`` (stars and bars)."""
    for bars in combinations(range(budget_units + n_countries - 1), n_countries - 1):
        prev = -1
        vec = []
        for b in bars:
            vec.append(b - prev - 1)
            prev = b
        vec.append(budget_units + n_countries - 2 - prev)
        yield tuple(vec)


def brute_force_allocate(network: NetworkSpec, budget_units: int, unit_size: float,
                         objective: Objective, workers: int = 1) -> InvestmentPlan:
    validate_network(network)
    _check_budget(budget_units, unit_size)
    _check_objective(network, objective)
    ids = network.ids
    total = count_distributions(budget_units, len(ids))
    if total > ENUMERATION_LIMIT:
        raise PlanningError(f"{total} distributions exceed the enumeration limit {ENUMERATION_LIMIT}")
    vectors = sorted(distributions(budget_units, len(ids)))
    candidates = [_to_allocations(dict(zip(ids, v)), unit_size) for v in vectors]
    values = _evaluate_many(network, candidates, objective, workers)
    # Vectors are sorted, so the first maximum is the lexicographically smallest.
    best = max(range(len(vectors)), key=lambda i: (values[i], -i))
    return InvestmentPlan(
        allocations=candidates[best],
        budget_units=budget_units,
        unit_size=unit_size,
        objective_value=values[best],
        baseline_value=evaluate_allocation(network, {}, objective),
        strategy=Strategy.BRUTE_FORCE,
        objective=objective,
        evaluations=len(vectors),
    )


ALLOCATORS = {
    Strategy.GREEDY: greedy_allocate,
    Strategy.BRUTE_FORCE: brute_force_allocate,
    Strategy.SATURATION_HEURISTIC: saturation_heuristic_allocate,
}
