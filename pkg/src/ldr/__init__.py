"""Linear dimensionality reduction as optimization over matrix manifolds."""
from .baselines import (
    SpectralSolution,
    cca_traditional,
    lda_heuristic,
    lpp_generalized_eig,
    maf_heuristic,
    pca_svd,
    ppca_closed_form,
    sym_inv_sqrt,
    sym_sqrt,
)
from .data import LabeledData, as_data_matrix, center, is_centered
from .errors import *  # noqa: F401,F403
from .experiments import (
    ExperimentResult,
    TrialSpec,
    gen_cca_pair,
    gen_gaussian_clusters,
    gen_random_cov_data,
    gen_spline_timeseries,
    improvement_metric,
    preset,
    run_benchmark,
    summarize,
)
from .geometry import (
    ManifoldKind,
    is_feasible,
    orthogonalize,
    project_tangent,
    random_frame,
    retract,
    retract_closed_form,
    rotation_invariance_probe,
)
from .objectives import (
    KernelPair,
    LaggedCovariances,
    NeighborhoodGraph,
    ScatterPair,
    cca_orthogonal_objective,
    cca_traditional_objective,
    kernel_pair,
    lagged_covariances,
    lda_objective,
    lpp_mapping,
    lpp_objective,
    maf_crosscov_objective,
    maf_objective,
    maf_sqdist_objective,
    mds_scatter_objective,
    mds_stress_objective,
    neighborhood_graph,
    npe_objective,
    ordered_pca_objective,
    pca_objective,
    scatter_matrices,
    sdr_objective,
    sfa_objective,
    time_derivative,
)
from .solver import Objective, SolveReport, SolverConfig, gradient_check, minimize
from .unconstrained import (
    GaussianLatentModel,
    NeighborSets,
    RegressionSplit,
    fa_fit,
    fa_nll,
    latent_nll,
    linreg_embedding,
    linreg_fit,
    linreg_objective,
    lmnn_margins,
    lmnn_objective,
    ppca_nll,
    target_neighbors,
)

__version__ = "0.1.0"
