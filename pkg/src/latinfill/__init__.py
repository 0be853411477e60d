"""Completion of sparse partial latin squares by trades on a square rich in
intercalates."""

from .completion import (
    CompletionConfig,
    CompletionReport,
    choose_d,
    complete,
    completion_feasible,
    delta_bound_compact,
    delta_bound_long,
    feasibility_slack,
    fix_cell,
    fix_feasible,
    max_feasible_delta,
)
from .construct import (
    StructureMap,
    Transversal,
    build,
    build_even,
    intercalate_partner,
    prolong,
)
from .errors import (
    CompletionFailed,
    Infeasible,
    LatinError,
    NoEligibleTrade,
    OracleFailed,
    UnsupportedOrder,
)
from .model import (
    DisturbanceLedger,
    ImproperGrid,
    LatinGrid,
    PartialGrid,
    SignedCell,
    TradeDelta,
    apply_delta,
    improper_2x2,
)
from .trades import SwapContext, swap_in_column, swap_in_row
from .verify import (
    backtrack_complete,
    density_profile,
    extends,
    generate_pls,
    is_latin,
    is_partial_latin,
    validate_delta,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
