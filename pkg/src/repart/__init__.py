"""Online balanced repartitioning testbench.

Algorithms that decide, request by request, whether to serve communicating
node pairs remotely or migrate nodes between bounded clusters; adaptive
request sources that stress them; exact offline optima to measure against.
"""

__version__ = "0.1.0"

from .core import (Configuration, Params, Request, contiguous_configuration,
                   min_migration_cost, new_configuration)
from .engine import NaiveCollocator, NullAlgorithm, Transcript, ratio, run

__all__ = [
    "Configuration", "Params", "Request", "contiguous_configuration",
    "min_migration_cost", "new_configuration",
    "NaiveCollocator", "NullAlgorithm", "Transcript", "ratio", "run",
    "__version__",
]
