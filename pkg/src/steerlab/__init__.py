"""steerlab: one-way steering state families, noisy-lossy measurements,
and joint-measurability certification."""

from .analysis import (
    RegionLabel,
    ThresholdReport,
    certified_d_steerable,
    certified_unsteerable,
    classify,
    eta_unsteerable_bound,
    p_threshold_all,
    p_threshold_two_mubs,
    phase_diagram,
    phase_diagram_csv,
    threshold_report,
)
from .assemblage import (
    Assemblage,
    apply_loss_to_assemblage,
    filter_loss,
    lhs_model_residual,
    steer,
)
from .certifier import (
    DiscreteParent,
    JmCertificate,
    SolverFailure,
    discretize_parent,
    exact_certificate,
    lp_feasibility,
    response_conditionals,
    verify_certificate,
)
from .covariant import (
    EffectEstimate,
    HaarSampler,
    MomentEstimate,
    ResponseFunctionModel,
    aligned_weight,
    analytic_effect,
    build_jm_model,
    effect_trace,
    mc_effect,
    mc_response_moments,
    model_reconstruction_residual,
    noise_params_from_threshold,
    orthogonal_weight,
    sample_haar,
    simulate_rank1_povm,
)
from .linalg import eig_hermitian, is_psd, partial_trace, tensor
from .lossy import (
    LossyDecomposition,
    NoiseParams,
    coarse_grain,
    embed_with_vacuum,
    noisify_povm,
    reduce_through_loss_dual,
)
from .objects import (
    NO_CLICK,
    Channel,
    Composition,
    DensityOperator,
    KrausChannel,
    Loss,
    Povm,
    PureState,
    WhiteNoise,
    apply_channel,
    dual_apply,
    lossy_noisy_channel,
    mub_pair,
    one_way_state,
    phi_plus,
    schmidt_rank,
)

__all__ = [
    "Assemblage",
    "Channel",
    "Composition",
    "DensityOperator",
    "DiscreteParent",
    "EffectEstimate",
    "HaarSampler",
    "JmCertificate",
    "KrausChannel",
    "Loss",
    "LossyDecomposition",
    "MomentEstimate",
    "NO_CLICK",
    "NoiseParams",
    "Povm",
    "PureState",
    "RegionLabel",
    "ResponseFunctionModel",
    "SolverFailure",
    "ThresholdReport",
    "WhiteNoise",
    "aligned_weight",
    "analytic_effect",
    "apply_channel",
    "apply_loss_to_assemblage",
    "build_jm_model",
    "certified_d_steerable",
    "certified_unsteerable",
    "classify",
    "coarse_grain",
    "discretize_parent",
    "dual_apply",
    "effect_trace",
    "eig_hermitian",
    "embed_with_vacuum",
    "eta_unsteerable_bound",
    "exact_certificate",
    "filter_loss",
    "is_psd",
    "lhs_model_residual",
    "lossy_noisy_channel",
    "lp_feasibility",
    "mc_effect",
    "mc_response_moments",
    "model_reconstruction_residual",
    "mub_pair",
    "noise_params_from_threshold",
    "noisify_povm",
    "one_way_state",
    "orthogonal_weight",
    "p_threshold_all",
    "p_threshold_two_mubs",
    "partial_trace",
    "phase_diagram",
    "phase_diagram_csv",
    "phi_plus",
    "reduce_through_loss_dual",
    "response_conditionals",
    "sample_haar",
    "schmidt_rank",
    "simulate_rank1_povm",
    "steer",
    "tensor",
    "threshold_report",
    "verify_certificate",
]

__version__ = "0.1.0"
