from .cells import LEAKS, PARTIAL, PROTECTED, VULNERABLE, RATE_LIMITED, ROBUST
from .costs import (
    CostLedger,
    cost_ledger,
    expected_costs,
    uniform_cost_world,
    uniform_cost_scenario,
)
from .scorecard import (
    Scorecard,
    build_privacy_cells,
    build_resiliency_cells,
    flaw_flags,
    build_scorecard,
    scorecard_diff,
    load_expected,
    ExpectedMatrixError,
)

__all__ = [
    "LEAKS",
    "PARTIAL",
    "PROTECTED",
    "VULNERABLE",
    "RATE_LIMITED",
    "ROBUST",
    "CostLedger",
    "cost_ledger",
    "expected_costs",
    "uniform_cost_world",
    "uniform_cost_scenario",
    "Scorecard",
    "build_privacy_cells",
    "build_resiliency_cells",
    "flaw_flags",
    "build_scorecard",
    "scorecard_diff",
    "load_expected",
    "ExpectedMatrixError",
]
