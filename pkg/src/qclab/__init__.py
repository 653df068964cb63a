"""Coherent-state geometry of Schrodinger dynamics on spectral grids."""
from .born import (
    born_density,
    born_normal_equivalence,
    isotropic_probability_law,
    sharp_state_limit,
    transition_probability,
)
from .classical import action_functional, constrained_evolve, newton_integrate
from .coherent import (
    CoherentParams,
    TangentFrame,
    VelocityDecomposition,
    decompose_velocity,
    omega,
    phase_space_speed,
    tangent_frame,
)
from .evolve import Trajectory, ehrenfest_residuals, propagate, state_velocity
from .grid import GridSpec, WaveFunction, l2_inner, l2_norm, real_inner
from .kernel_space import DistributionalElement, KernelSpace, delta, delta_h_inner, rho_sigma
from .multiparticle import TwoBodyState, per_particle_components, tensor_state, two_body_propagate
from .observables import (
    LinearOperator,
    acceleration_decomposition,
    expectation_variance,
    fubini_study_distance,
    lie_bracket_check,
    projective_speed,
    vector_field,
)
from .potentials import PotentialSpec

__version__ = "0.1.0"
