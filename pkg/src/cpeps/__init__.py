"""Gaussian continuous PEPS: dispersions, fidelities, lattice and CTNS maps."""
from .errors import (
    ConfigError,
    CPEPSError,
    DegenerateDenominator,
    DomainError,
    InfeasibleStart,
    InterpolationError,
    NonGaussianInput,
    NonPhysical,
    NonPositiveC,
    NonUnitaryRep,
    NumericalError,
    ObjectiveFailure,
    PadeDegenerate,
    PoleError,
    QuadratureFailure,
    ShapeMismatch,
    SingularSystem,
    TopologyError,
)
from .gaussian_core import (
    GaussianParams,
    RationalDispersion,
    PolynomialPair,
    EliminationTrace,
    eval_dispersion_schur,
    dispersion_many,
    eliminate_chain,
    derive_cf_params,
    params_to_rational,
    rational_eval,
    check_physical,
    parent_hamiltonian_split,
)
from .approximants import FreeDispersion, omega_free, cf_truncate, pade_sqrt, sup_error
from .fidelity import (
    FidelityReport,
    RescaledDispersion,
    mode_log_overlap,
    log_fidelity_density,
    per_site_log_fidelity,
    finite_lattice_log_fidelity,
    finite_lattice_per_site,
    rescale_to_unit_cutoff,
    unit_cutoff_family,
    universal_per_site,
    irrelevant_remainder,
    fidelity_report,
)
from .optimizer import (
    OptimizationProblem,
    OptimizationResult,
    is_admissible,
    optimize_universal_per_site,
)
from .lattice_symmetry import (
    LatticeModel,
    QuadraticKernel,
    GroupRepresentation,
    lattice_symbol,
    lattice_dispersion,
    renormalize_couplings,
    bare_from_continuum,
    isotropic_kernel,
    rotation_map,
    rotation_invariance_check,
    global_symmetry_check,
    u1_representation,
    o2_representation,
)
from .ctns_bridge import CTNSGaussianData, ctns_to_cpeps_kernel, cpeps_to_ctns
from .kernels import BACKEND

__version__ = "0.1.0"
