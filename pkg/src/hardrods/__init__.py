"""Equilibration of quantum hard rods on a ring.

Exact counting on the configuration network, the rate equation for the rod
number distribution, and unitary dynamics in the blockade-constrained space.
"""

__version__ = "0.1.0"

from .combinatorics import (
    RodGeometry,
    equilibrium_distribution,
    loop_avg,
    nu,
    rate_table,
    refl_avg,
    trans_avg,
)
from .confignet import Configuration, ConfigurationNetwork, enumerate_network
from .distribution import NumberDistribution, Observables, observables
from .exceptions import (
    ConfigError,
    DomainError,
    HardRodsError,
    IntegrationError,
    ResourceError,
    SchemaError,
)
from .master import build_generator, evolve, steady_state
from .quantum import (
    QuantumState,
    build_hamiltonian,
    evolve_state,
    histogram_run,
    overlap_D,
    time_averaged_distribution,
)

__all__ = [
    "Configuration",
    "ConfigurationNetwork",
    "ConfigError",
    "DomainError",
    "HardRodsError",
    "IntegrationError",
    "NumberDistribution",
    "Observables",
    "QuantumState",
    "ResourceError",
    "RodGeometry",
    "SchemaError",
    "__version__",
    "build_generator",
    "build_hamiltonian",
    "enumerate_network",
    "equilibrium_distribution",
    "evolve",
    "evolve_state",
    "histogram_run",
    "loop_avg",
    "nu",
    "observables",
    "overlap_D",
    "rate_table",
    "refl_avg",
    "steady_state",
    "time_averaged_distribution",
    "trans_avg",
]
