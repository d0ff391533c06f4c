"""Branching-coalescing random walks, the sticky left-right SDE, and Monte
Carlo checks of the Brownian net formulas.

Modules: lattice (arrow configurations, extremal paths, hopping), particles
(branching-coalescing point sets), sde (left-right pair via time change),
closed_forms, pathspace, stats, experiments, cli, mapping.
"""

from importlib.metadata import PackageNotFoundError, version

from .closed_forms import big_psi, left_flux_bound, small_psi
from .experiments import ExperimentReport, run_suite
from .lattice import Side, Window, dual_config, sample_config, trace_extremal
from .sde import sample_noise, solve_lr

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover
    __version__ = "0+unknown"

__all__ = [
    "ExperimentReport",
    "Side",
    "Window",
    "big_psi",
    "dual_config",
    "left_flux_bound",
    "run_suite",
    "sample_config",
    "sample_noise",
    "small_psi",
    "solve_lr",
    "trace_extremal",
]
