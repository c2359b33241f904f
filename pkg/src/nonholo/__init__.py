"""Numerical toolkit for nonholonomic Lagrangian systems."""

from .complete_solutions import (CompleteSolution, ObservableOnD,
                                 conservation_check, first_integrals,
                                 hamiltonian_section, involution_check,
                                 nonholonomic_bracket, transversality_defect,
                                 verify_flavor)
from .dynamics import (ConstrainedState, OmegaLD, Trajectory, integrate,
                       omega_LD, sode_accel, sode_accel_symplectic, sode_rhs)
from .errors import (FrameDegenerateError, InvalidCompleteSolutionError,
                     NonholoError, NumericDomainError, RegularityError,
                     ScenarioError)
from .frames import (FrameField, StructureCoefficients,
                     bracket_generating_rank, frame_from_B, lie_bracket,
                     structure_coefficients)
from .hamilton_jacobi import (Section, denergy_annihilator_residual,
                              energy_pullback, general_hj_residual,
                              restricted_hj_residual, verify_solution_by_flow)
from .lagrangian import LagrangianDef, QuasiLagrangian, SystemDefinition
from .systems import (SOLUTION_REGISTRY, SYSTEM_REGISTRY, make_free_particle,
                      make_general_solution, make_holonomic_plane,
                      make_restricted_solution)

__version__ = "0.1.0"
