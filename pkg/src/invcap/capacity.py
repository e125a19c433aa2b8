"""Investigation capacity and saturation measures.

Capacity is measured over a span of time ``T``. Each investigator contributes
``available_time / T`` to the averaged headcount, cases closed over that
headcount gives the per-investigator rate, and the rate is uplifted by the
downtime fraction and scaled by the current headcount to estimate capacity.

``downtime_fraction`` is read as the extra share of observed per-investigator
throughput that idle time could have produced. With 500 cases closed by ten
full-time investigators and 20% downtime this gives ``(50 + 50*0.2) * 10 = 600``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Optional, Sequence


class CapacityError(ValueError):
    """Base class for invalid measurement inputs."""


class EmptyAvailabilityError(CapacityError):
    pass


class MismatchedSpanError(CapacityError):
    pass


class ZeroAvailabilityError(CapacityError):
    pass


class InvalidAvailabilityError(CapacityError):
    pass


class InvalidDowntimeError(CapacityError):
    pass


class NonPositiveDenominatorError(CapacityError):
    pass


class NegativeQuantityError(CapacityError):
    pass


@dataclass(frozen=True)
class AvailabilityRecord:
    investigator_id: Hashable
    available_time: float
    span: float

    def __post_init__(self):
        if not (self.span > 0 and math.isfinite(self.span)):
            raise InvalidAvailabilityError(
                f"investigator {self.investigator_id!r}: span must be positive, got {self.span}"
            )
        if not (0 <= self.available_time <= self.span):
            raise InvalidAvailabilityError(
                f"investigator {self.investigator_id!r}: available_time {self.available_time} "
                f"outside [0, {self.span}]"
            )


@dataclass(frozen=True)
class CapacityInput:
    cases_closed: float
    availabilities: Sequence[AvailabilityRecord]
    downtime_fraction: float = 0.0
    # None means "use the computed average headcount".
    current_investigators: Optional[float] = None


@dataclass(frozen=True)
class CapacityReport:
    average_investigators: float
    per_investigator_rate: float
    capacity: float
    downtime_fraction: float
    current_investigators: float


def _non_negative(name: str, value: float) -> None:
    if not value >= 0:
        raise NegativeQuantityError(f"{name} must be non-negative, got {value}")


def average_investigators(availabilities: Sequence[AvailabilityRecord]) -> float:
    """Sum of ``available_time / span`` over all records."""
    if len(availabilities) == 0:
        raise EmptyAvailabilityError("at least one availability record is required")
    spans = {rec.span for rec in availabilities}
    if len(spans) > 1:
        raise MismatchedSpanError(f"availability records must share one span, got {sorted(spans)}")
    span = spans.pop()
    total = math.fsum(rec.available_time for rec in availabilities)
    if total <= 0:
        raise ZeroAvailabilityError("no investigator has any available time in the span")
    return math.fsum(rec.available_time / span for rec in availabilities)


def per_investigator_throughput(cases_closed: float, average_investigators: float) -> float:
    _non_negative("cases_closed", cases_closed)
    if not average_investigators > 0:
        raise NonPositiveDenominatorError(
            f"average_investigators must be positive, got {average_investigators}"
        )
    return cases_closed / average_investigators


def capacity_estimate(inp: CapacityInput) -> CapacityReport:
    """Downtime-adjusted capacity for a group over the span.

    ``current_investigators`` scales the averaged per-investigator rate to the
    headcount available now; left unset it equals the historical average, in
    which case the result reduces to ``cases_closed * (1 + downtime_fraction)``.
    """
    d = inp.downtime_fraction
    if not (0 <= d < 1):
        raise InvalidDowntimeError(f"downtime_fraction must be in [0, 1), got {d}")
    avg = average_investigators(inp.availabilities)
    rate = per_investigator_throughput(inp.cases_closed, avg)
    current = avg if inp.current_investigators is None else inp.current_investigators
    if not current > 0:
        raise NonPositiveDenominatorError(f"current_investigators must be positive, got {current}")
    capacity = (rate + rate * d) * current
    return CapacityReport(
        average_investigators=avg,
        per_investigator_rate=rate,
        capacity=capacity,
        downtime_fraction=d,
        current_investigators=current,
    )


def saturation(incoming_requests: float, capacity: float) -> float:
    """Requests over capacity; above 1 the backlog grows."""
    _non_negative("incoming_requests", incoming_requests)
    if not capacity > 0:
        raise NonPositiveDenominatorError(f"capacity must be positive, got {capacity}")
    return incoming_requests / capacity


def backlog_next(backlog: float, arrivals: float, capacity: float) -> float:
    _non_negative("backlog", backlog)
    _non_negative("arrivals", arrivals)
    _non_negative("capacity", capacity)
    return max(0.0, backlog + arrivals - capacity)
