"""Round-based simulator for three-level heterogeneous wireless sensor networks.

Implements the M-EECDA clustering protocol (residual-energy weighted election,
3-tier relaying for normal cluster heads, sleep state) alongside an
EECDA-approximation baseline and a LEACH-style baseline.
"""

from hetwsn.engine import SimulationConfig, Simulator, run_simulation
from hetwsn.heterogeneity import HeterogeneityConfig, NodeClass
from hetwsn.metrics import MetricsTrace
from hetwsn.protocols import ProtocolKind
from hetwsn.radio import RadioParams

__all__ = [
    "HeterogeneityConfig",
    "MetricsTrace",
    "NodeClass",
    "ProtocolKind",
    "RadioParams",
    "SimulationConfig",
    "Simulator",
    "run_simulation",
]
