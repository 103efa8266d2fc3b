"""Payment channel network toolkit: hub placement, price-based multi-path
routing with congestion control, and a deterministic simulator."""

__version__ = "0.1.0"

from .network import Network, NetworkSpec, PaymentDemand, build_network, line_network
from .placement import PlacementPlan, PlacementProblem, PlacementResult, double_greedy, solve_exact
from .simulator import SimConfig, SimMetrics, Simulator, deadlock_config, run

__all__ = [
    "Network",
    "NetworkSpec",
    "PaymentDemand",
    "PlacementPlan",
    "PlacementProblem",
    "PlacementResult",
    "SimConfig",
    "SimMetrics",
    "Simulator",
    "build_network",
    "deadlock_config",
    "double_greedy",
    "line_network",
    "run",
    "solve_exact",
]
