"""Wasserstein distributionally robust mean-lower-semi-absolute-deviation portfolios.

Thin wrapper around the C++ core: solvers (ppdssn, padmm, dadmm), the
radius-selection procedure, the synthetic generator, and the rolling backtest.
"""

from drmlsad._core import (
    EmptySetError,
    InfeasibleError,
    ReturnsDataset,
    SolverError,
    choose_target_return,
    gen_synthetic,
    load_returns_csv,
    objective_value,
    project_capped_simplex,
    rolling_backtest,
    rwpi_radius,
    solve,
    subgradient_reference,
)

__all__ = [
    "EmptySetError",
    "InfeasibleError",
    "ReturnsDataset",
    "SolverError",
    "choose_target_return",
    "gen_synthetic",
    "load_returns_csv",
    "objective_value",
    "project_capped_simplex",
    "rolling_backtest",
    "rwpi_radius",
    "solve",
    "subgradient_reference",
]
