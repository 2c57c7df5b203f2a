"""High-field Wigner-BGK kinetics in 1D and its quantum drift-diffusion limit:
closed-form asymptotic objects, kinetic and macroscopic solvers, and an
empirical convergence harness."""

from .core import (DensityField, GridMismatchError, NonZeroMassError, NormSpec,
                   PhaseGrid, PhysicalParams, SpaceGrid, StabilityViolation,
                   WignerField, density, dft_v, idft_v, norm_l2, norm_xk,
                   total_mass)
from .potential import (AperiodicPotentialError, Potential, delta_v,
                        derivatives, make_potential, require_periodic)
from .pseudodiff import ThetaOperator, apply_theta, build_theta, resolvent
from .equilibrium import (KernelM, Maxwellian, f2_correction, kernel_m,
                          kernel_moments_closed_form, maxwellian, omega_apply,
                          project_p, project_q)
from .transport import (EllipticityViolation, TransportCoeffs, build_coeffs,
                        check_ellipticity, diffusion_coeff, drift_coeff,
                        field_coeff)
from .qdd import (QddProblem, QddTrajectory, initial_correction_n1, qdd_solve,
                  qdd_step)
from .kinetic import (KineticProblem, KineticStepper, KineticTrajectory,
                      collision_field_substep, kinetic_solve,
                      transport_substep)
from .layer import (LayerTerms, QuadratureNotConverged, build_layer_terms,
                    semigroup_g)
from .assembler import (AsymptoticSolution, TimeNotInTrajectory,
                        composite_error, error_split, make_psi_bar_1,
                        psi_bar_1, verify_d2_d1)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
