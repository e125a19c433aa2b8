"""Static country network: arrival processes and international routing."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

WEIGHT_TOL = 1e-9


class Discipline(str, enum.Enum):
    NATIONAL_PRIORITY = "national_priority"
    FIFO = "fifo"


class ArrivalModel(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    POISSON = "poisson"


@dataclass(frozen=True)
class CountrySpec:
    id: str
    capacity_per_period: float
    national_rate: float = 0.0
    international_fraction: float = 0.0
    partner_weights: Mapping[str, float] = field(default_factory=dict)
    discipline: Discipline = Discipline.NATIONAL_PRIORITY

    def __post_init__(self):
        # Private copy so callers cannot mutate a validated spec through their dict.
        object.__setattr__(self, "partner_weights", dict(self.partner_weights))
        object.__setattr__(self, "discipline", Discipline(self.discipline))

    def __hash__(self):
        return hash((self.id, self.capacity_per_period, self.national_rate,
                     self.international_fraction, tuple(sorted(self.partner_weights.items())),
                     self.discipline))

    def partners(self) -> list[str]:
        """Countries that can receive sub-requests from this one."""
        if self.international_fraction <= 0:
            return []
        return sorted(k for k, w in self.partner_weights.items() if w > 0)


@dataclass(frozen=True)
class NetworkSpec:
    countries: tuple[CountrySpec, ...]
    arrival_model: ArrivalModel = ArrivalModel.DETERMINISTIC
    response_delay: int = 0

    def __post_init__(self):
        object.__setattr__(self, "countries", tuple(self.countries))
        object.__setattr__(self, "arrival_model", ArrivalModel(self.arrival_model))

    @property
    def ids(self) -> list[str]:
        return sorted(c.id for c in self.countries)

    def country(self, cid: str) -> CountrySpec:
        for c in self.countries:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def with_capacity_deltas(self, deltas: Mapping[str, float]) -> "NetworkSpec":
        countries = tuple(
            CountrySpec(
                id=c.id,
                capacity_per_period=c.capacity_per_period + deltas.get(c.id, 0.0),
                national_rate=c.national_rate,
                international_fraction=c.international_fraction,
                partner_weights=c.partner_weights,
                discipline=c.discipline,
            )
            for c in self.countries
        )
        return NetworkSpec(countries, self.arrival_model, self.response_delay)


# -- validation -------------------------------------------------------------

class NetworkIssue(Exception):
    """One invariant violation, tied to the offending country when there is one."""

    def __init__(self, country_id, message):
        self.country_id = country_id
        super().__init__(f"{country_id}: {message}" if country_id is not None else message)


class EmptyNetworkIssue(NetworkIssue):
    pass


class DuplicateIdIssue(NetworkIssue):
    pass


class DanglingPartnerIssue(NetworkIssue):
    pass


class SelfReferenceIssue(NetworkIssue):
    pass


class WeightSumIssue(NetworkIssue):
    pass


class NegativeRateIssue(NetworkIssue):
    pass


class InvalidFieldIssue(NetworkIssue):
    pass


class NetworkValidationError(ValueError):
    """Raised with every violation found, not just the first."""

    def __init__(self, issues: Sequence[NetworkIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))

    def of_type(self, kind: type) -> list[NetworkIssue]:
        return [i for i in self.issues if isinstance(i, kind)]


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate_network(spec: NetworkSpec) -> NetworkSpec:
    issues: list[NetworkIssue] = []
    if not spec.countries:
        issues.append(EmptyNetworkIssue(None, "network has no countries"))
    if not (isinstance(spec.response_delay, int) and spec.response_delay >= 0):
        issues.append(InvalidFieldIssue(None, f"response_delay must be a non-negative integer, "
                                              f"got {spec.response_delay!r}"))

    seen: set[str] = set()
    for c in spec.countries:
        if c.id in seen:
            issues.append(DuplicateIdIssue(c.id, "duplicate country id"))
        seen.add(c.id)

    for c in spec.countries:
        if not (_finite(c.capacity_per_period) and c.capacity_per_period > 0):
            issues.append(InvalidFieldIssue(c.id, f"capacity_per_period must be positive, "
                                                  f"got {c.capacity_per_period}"))
        if not (_finite(c.national_rate) and c.national_rate >= 0):
            issues.append(NegativeRateIssue(c.id, f"national_rate must be non-negative, "
                                                  f"got {c.national_rate}"))
        if not (_finite(c.international_fraction) and 0 <= c.international_fraction <= 1):
            issues.append(InvalidFieldIssue(c.id, f"international_fraction must be in [0, 1], "
                                                  f"got {c.international_fraction}"))
        for pid, w in sorted(c.partner_weights.items()):
            if pid == c.id:
                issues.append(SelfReferenceIssue(c.id, "country lists itself as a partner"))
            elif pid not in seen:
                issues.append(DanglingPartnerIssue(c.id, f"unknown partner {pid!r}"))
            if not (_finite(w) and w >= 0):
                issues.append(NegativeRateIssue(c.id, f"partner weight for {pid!r} must be "
                                                      f"non-negative, got {w}"))
        if c.international_fraction > 0 or c.partner_weights:
            total = math.fsum(c.partner_weights.values())
            if not c.partner_weights:
                issues.append(WeightSumIssue(c.id, "international_fraction > 0 but no partners"))
            elif abs(total - 1.0) > WEIGHT_TOL:
                issues.append(WeightSumIssue(c.id, f"partner weights sum to {total}, expected 1"))

    if issues:
        raise NetworkValidationError(issues)
    return spec


# -- stochastic primitives ----------------------------------------------------

def sample_partner(weights: Mapping[str, float], rng: np.random.Generator) -> str:
    """Draw a partner id with probability equal to its weight.

    Keys are walked in sorted order against one uniform draw, so a given
    generator state always maps to the same id.
    """
    if not weights:
        raise ValueError("cannot sample from empty partner weights")
    keys = sorted(weights)
    u = rng.random() * math.fsum(weights.values())
    acc = 0.0
    for k in keys:
        acc += weights[k]
        if u < acc:
            return k
    # u landed on the rounding edge; fall back to the last positive weight.
    return [k for k in keys if weights[k] > 0][-1]


def arrivals_for_period(model: ArrivalModel, rate: float, accumulator: float,
                        rng: np.random.Generator) -> tuple[int, float]:
    """Return ``(count, new_accumulator)`` for one period.

    The deterministic model carries the fractional part forward so that the
    long-run average equals ``rate`` exactly; Poisson ignores the accumulator.
    """
    if not rate >= 0:
        raise ValueError(f"arrival rate must be non-negative, got {rate}")
    model = ArrivalModel(model)
    if model is ArrivalModel.DETERMINISTIC:
        if rate == 0:
            return 0, accumulator
        accumulator += rate
        # The epsilon absorbs float drift such as ten additions of 0.1.
        count = math.floor(accumulator + 1e-9)
        return count, max(accumulator - count, 0.0)
    return int(rng.poisson(rate)), accumulator
