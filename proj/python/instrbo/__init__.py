"""Latent-space Bayesian optimization of instructions for black-box oracles.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from instrbo._core import (  # noqa: F401
    CampaignConfig,
    CampaignResult,
    CampaignSeeds,
    DistortionReport,
    EngineError,
    EvalRecord,
    GaussianPosterior,
    IterationStat,
    KernelState,
    LatentKernelSpec,
    ProjectionMatrix,
    SearchConfig,
    SearchResult,
    SyntheticGenerator,
    SyntheticTask,
    build_kernel_state,
    default_vocabulary,
    expected_improvement,
    expected_improvement_at,
    fit_gp,
    jl_distortion_report,
    latent_kernel,
    load_synthetic_task,
    maximize,
    metric_contain,
    metric_exact_match,
    metric_exact_set,
    metric_f1,
    normalize_answer,
    plant_default_task,
    plant_synthetic_task,
    project,
    propose_candidates,
    run_synthetic_campaign,
    sample_projection,
    save_synthetic_task,
    score_synthetic,
    select_batch,
    synthetic_predict,
    uniform_synthetic_baseline,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
