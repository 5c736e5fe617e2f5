"""broadbid: bid optimization for broad-match ad auctions."""

from .model import (
    BidVector,
    Clicks,
    Instance,
    Money,
    Query,
    derive_dependencies,
    dump_instance,
    interpret_bid,
    load_instance,
)
from .query_solver import (
    solve_budgeted_lagrangian,
    solve_budgeted_lp,
    solve_query_lp,
    solve_query_mincut,
)

__version__ = "0.1.0"

RNG_ALGORITHM = "pcg64"  # all randomness flows through numpy PCG64 generators

__all__ = [
    "BidVector",
    "Clicks",
    "Instance",
    "Money",
    "Query",
    "RNG_ALGORITHM",
    "derive_dependencies",
    "dump_instance",
    "interpret_bid",
    "load_instance",
    "solve_budgeted_lagrangian",
    "solve_budgeted_lp",
    "solve_query_lp",
    "solve_query_mincut",
]
