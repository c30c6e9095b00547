"""Emitter coupled to the end of an SSH waveguide: spectra, dynamics,
Fisher information and Bayesian estimation of g and delta."""

from ._topowg import (
    CoupledEnd,
    DegenerateCouplingError,
    Error,
    ModelParams,
    NumericalError,
    OutOfGapError,
    ParameterError,
    TopologyError,
    analytic_bound_energy,
    analytic_overlap,
    approx_population,
    average_error,
    bound_energy_derivative,
    bound_states,
    dephased_population,
    dip_factor,
    excited_population,
    fisher_approx,
    fisher_information,
    hamiltonian,
    posterior,
    siegert_factor,
    spectrum,
)

__all__ = [
    "CoupledEnd",
    "DegenerateCouplingError",
    "Error",
    "ModelParams",
    "NumericalError",
    "OutOfGapError",
    "ParameterError",
    "TopologyError",
    "analytic_bound_energy",
    "analytic_overlap",
    "approx_population",
    "average_error",
    "bound_energy_derivative",
    "bound_states",
    "dephased_population",
    "dip_factor",
    "excited_population",
    "fisher_approx",
    "fisher_information",
    "hamiltonian",
    "posterior",
    "siegert_factor",
    "spectrum",
]
