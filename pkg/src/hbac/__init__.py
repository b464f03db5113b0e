"""Simulation and analysis of a three-qubit algorithmic-cooling refrigerator."""
from hbac.channels import CompressionVariant
from hbac.engine import CycleRecord, RefrigeratorConfig, run_cycles

__all__ = ["CompressionVariant", "CycleRecord", "RefrigeratorConfig", "run_cycles"]
__version__ = "0.1.0"
