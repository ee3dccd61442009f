"""Long-range Ising models in one and two dimensions: exact finite-volume
kernels, enumeration oracles, Monte Carlo samplers, triangle/contour
geometry, and the headline interface/decimation/rigidity probes."""

__version__ = "0.1.0"

from .model import (
    AnisotropicAxes,
    BoundaryCondition,
    IsotropicMixed,
    ModelParams,
    NearestNeighbor,
    PowerLaw,
    Volume,
    alternating_bc,
    boundary_field,
    coupling_value,
    decimate,
    dobrushin1d_bc,
    dobrushin2d_bc,
    energy_delta,
    excess_energy,
    free_bc,
    frozen_interval_bc,
    hamiltonian,
    left_neighborhood_bc,
    minus_bc,
    plus_bc,
    specification_kernel,
    tail_coupling_sum,
)
from .util import CapacityError

__all__ = [
    "AnisotropicAxes", "BoundaryCondition", "CapacityError", "IsotropicMixed",
    "ModelParams", "NearestNeighbor", "PowerLaw", "Volume", "__version__",
    "alternating_bc", "boundary_field", "coupling_value", "decimate",
    "dobrushin1d_bc", "dobrushin2d_bc", "energy_delta", "excess_energy",
    "free_bc", "frozen_interval_bc", "hamiltonian", "left_neighborhood_bc",
    "minus_bc", "plus_bc", "specification_kernel", "tail_coupling_sum",
]
