"""Photon subtraction on displaced phase-averaged coherent states.

Photon statistics, conditional states after photon-number-resolved
conditioning at a balanced beam splitter, Wigner functions, non-Gaussianity
measures and a Monte-Carlo emulation of the counting experiment.
"""

__version__ = "0.1.0"

from dphav.detect import (
    JointDetectedDistribution,
    bernoulli_map,
    correlation_formula,
    correlation_from_stats,
    joint_detected_dist,
    rescaling_equivalence_check,
)
from dphav.estimators import ConditionalHistogram, ConditionalStateModel
from dphav.exceptions import (
    DomainError,
    DphavError,
    EmptyConditionError,
    InvalidCovarianceError,
    NumericalError,
    TruncationError,
    VanishingAcceptanceError,
)
from dphav.fock import (
    FockDensityMatrix,
    TruncationPolicy,
    choose_cutoff,
    coherent_overlap,
    von_neumann_entropy,
)
from dphav.nongauss import (
    CovarianceSummary,
    NonGaussReport,
    covariance_of_conditional,
    delta_diagonal,
    delta_full,
    epsilon_bound,
    reference_gaussian_entropy,
)
from dphav.shotsim import (
    RunConfig,
    fidelity,
    reconstruct_conditional,
    simulate_shots,
)
from dphav.splitcond import (
    AcceptanceRule,
    PhaseDistribution,
    SplitAmplitudes,
    acceptance_probability_at_phase,
    conditional_density_matrix,
    conditional_detected_dist,
    conditional_mean,
    gaussian_approx,
    peak_locations,
    phase_distribution,
    split,
)
from dphav.states import (
    ClosedFormCheck,
    DphavSpec,
    PhotonDistribution,
    closedform_crosscheck,
    PhotonMoments,
    dphav_density_matrix,
    dphav_moments,
    dphav_photon_dist_closedform,
    dphav_photon_dist_quadrature,
    phav_photon_dist,
)
from dphav.wigner import wigner_of_phase_mixture
