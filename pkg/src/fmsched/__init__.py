"""Exact tools for the Flowtime-Makespan scheduling problem."""

from .core import (
    Instance,
    InvalidInstance,
    Schedule,
    apply_property2,
    is_flowtime_optimal,
    makespan,
    normalize_instance,
    total_flowtime,
)
from .algorithms import (
    TieBreakPolicy,
    ld0_worst_makespan,
    ld_schedule,
    li_schedule,
    worst_ld_makespan,
)
from .oracle import makespan_ratio, optimal_fm_makespan

__version__ = "0.1.0"
