"""Digital investigation capacity, saturation and expansion planning."""

from .capacity import (
    AvailabilityRecord,
    CapacityInput,
    CapacityReport,
    average_investigators,
    backlog_next,
    capacity_estimate,
    per_investigator_throughput,
    saturation,
)
from .network import ArrivalModel, CountrySpec, Discipline, NetworkSpec, validate_network
from .planner import (
    InvestmentPlan,
    Objective,
    brute_force_allocate,
    evaluate_allocation,
    greedy_allocate,
    saturation_heuristic_allocate,
)
from .scenario import emit_trace, parse_scenario
from .simulation import init_state, run, step, summarize

__version__ = "0.1.0"
