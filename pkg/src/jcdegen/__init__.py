"""Jaynes-Cummings dynamics for degenerate atomic levels and a polarization-degenerate mode."""
from .angular import HalfInt, TransitionSpec, coupling_G, f_coeff, wigner3j
from .errors import DomainError, IntegrationError
from .evolution import BlockDensityMatrix, EvolutionParams, block_S, evolve, excited_population
from .spectral import BlockEigensystem, block_eigensystem, coupling_matrix, dressed
from .statespace import BlockKey, SubspaceKey, basis, dims_profile, enumerate_blocks, subspace_dims

__all__ = [
    "HalfInt",
    "TransitionSpec",
    "coupling_G",
    "f_coeff",
    "wigner3j",
    "DomainError",
    "IntegrationError",
    "BlockDensityMatrix",
    "EvolutionParams",
    "block_S",
    "evolve",
    "excited_population",
    "BlockEigensystem",
    "block_eigensystem",
    "coupling_matrix",
    "dressed",
    "BlockKey",
    "SubspaceKey",
    "basis",
    "dims_profile",
    "enumerate_blocks",
    "subspace_dims",
]
