"""Incompatibility of quantum measurements and channels.

Compute the mutual eigenspace disturbance of projective measurements, the
noncommutativity of channels as witnessed by a causal-order switch, finite
shot estimators for both, and compatibility clustering of noisy observables.
"""

from .cluster import (
    ClusterResult,
    DistanceMatrix,
    KMedoids,
    PairwiseIncompatibility,
    best_of_restarts,
    kmeanspp_seed,
    kmedoids,
    pairwise_dissimilarity,
    purity,
)
from .errors import InvariantError, ParseError
from .experiment import ExperimentConfig, ExperimentResult, run_clustering_experiment
from .generate import (
    gen_noisy_instruments,
    gen_observables,
    random_density_matrix,
    random_kraus_channel,
    random_partition,
    random_pure_density,
    random_pvm,
    random_unitary,
    sample_noise_model,
)
from .linalg import EigenDecomposition, hermitian_eig, partial_trace, psd_sqrt
from .measures import (
    ChoiOperator,
    TransferOperator,
    build_choi,
    build_transfer,
    commutator_weight,
    gmed,
    med,
    med_upper_bound,
    metric_distance_form,
    ncom,
    ncom_via_choi,
    ncom_via_dilation,
    prob_same_eigenspace,
    stinespring_isometry,
    stinespring_unitary,
)
from .quantum import (
    BlochObservable,
    DensityMatrix,
    KrausChannel,
    NoiseModel,
    ProjectorFamily,
    apply_channel,
    bell_measurement_channel,
    bell_pvm,
    bell_states,
    bloch_to_pvm,
    coarse_grain,
    computational_pvm,
    dephasing_channel,
    fourier_matrix,
    fourier_pvm,
    maximally_mixed,
    noisy_instrument,
    noisy_kraus_by_outcome,
    product_measurement_channel,
    pvm_from_observable,
)
from .rng import RandomStream
from .switch import (
    EstimationResult,
    SamplingPlan,
    SwitchChannel,
    apply_switch,
    build_switch,
    estimate_med_sequential,
    estimate_ncom_switch,
    exact_p_minus,
    hoeffding_shots,
)

__version__ = "0.1.0"

__all__ = [
    "BlochObservable",
    "ChoiOperator",
    "ClusterResult",
    "DensityMatrix",
    "DistanceMatrix",
    "EigenDecomposition",
    "EstimationResult",
    "ExperimentConfig",
    "ExperimentResult",
    "InvariantError",
    "KMedoids",
    "KrausChannel",
    "NoiseModel",
    "PairwiseIncompatibility",
    "ParseError",
    "ProjectorFamily",
    "RandomStream",
    "SamplingPlan",
    "SwitchChannel",
    "TransferOperator",
    "apply_channel",
    "apply_switch",
    "bell_measurement_channel",
    "bell_pvm",
    "bell_states",
    "best_of_restarts",
    "bloch_to_pvm",
    "build_choi",
    "build_switch",
    "build_transfer",
    "coarse_grain",
    "commutator_weight",
    "computational_pvm",
    "dephasing_channel",
    "estimate_med_sequential",
    "estimate_ncom_switch",
    "exact_p_minus",
    "fourier_matrix",
    "fourier_pvm",
    "gen_noisy_instruments",
    "gen_observables",
    "gmed",
    "hermitian_eig",
    "hoeffding_shots",
    "kmeanspp_seed",
    "kmedoids",
    "maximally_mixed",
    "med",
    "med_upper_bound",
    "metric_distance_form",
    "ncom",
    "ncom_via_choi",
    "ncom_via_dilation",
    "noisy_instrument",
    "noisy_kraus_by_outcome",
    "pairwise_dissimilarity",
    "partial_trace",
    "prob_same_eigenspace",
    "product_measurement_channel",
    "psd_sqrt",
    "purity",
    "pvm_from_observable",
    "random_density_matrix",
    "random_kraus_channel",
    "random_partition",
    "random_pure_density",
    "random_pvm",
    "random_unitary",
    "run_clustering_experiment",
    "sample_noise_model",
    "stinespring_isometry",
    "stinespring_unitary",
]
