"""Diophantine approximation over totally real number fields.

Solves the effective Dirichlet problem in K_S^m, diagnoses singular vectors
through divergence of the diagonal flow on O_K-module lattices, estimates
uniform exponents, and constructs totally irrational singular vectors on
analytic graph surfaces with verifiable per-stage certificates.
"""

from .fields import (BoxTooLarge, EmbeddingTable, Field, FieldElement,
                     FieldError, FieldSpec, IntegralBasisRequired,
                     NotTotallyReal, PrecisionExhausted, Reducible,
                     create_field, embed, enumerate_integers, house,
                     parse_field_file)
from .lattices import (KSVector, ModuleLattice, SingularBlock, SystoleResult,
                       content, identity_lattice, restriction_of_scalars,
                       systole_content)
from .enumeration import (BudgetExceeded as EnumerationBudgetExceeded,
                          NumericalBreakdown, lattice_points_in_box,
                          lll_reduce)
from .flows import (Diagnostic, GradeOutOfRange, Inconclusive, SystoleTrace,
                    WedgeVector, apply_flow, covolume_lower_bound,
                    flow_blocks, flow_lattice, paucity_report,
                    singularity_diagnostic, systole_trace, wedge_action,
                    wedge_subsets)
from .diophantine import (BudgetExceeded, DirichletSolution, EtaResult,
                          EtaZero, ExactPoint, ExponentEstimate,
                          IrrationalityVerdict, NoSolutionInBox,
                          dirichlet_solve, eta, integer_kernel,
                          totally_irrational_certificate,
                          uniform_exponent_estimate)
from .construct import (ConstructionOutput, ConstructError, LineMember,
                        NotPrimitiveWarning, PolyK, StageCertificate,
                        StageStuck, SurfaceSpec, VerificationFailure,
                        construct_singular, construction_from_json,
                        construction_to_json, line_family, product_surface,
                        verify_certificate, zeta_from_descriptor)

__version__ = "0.1.0"
