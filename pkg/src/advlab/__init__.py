"""advlab: a desk-scale laboratory for concept-based probabilistic
adversarial attacks.

Adversarial candidates are sampled with projected Langevin dynamics from the
product of a victim distribution (a classifier pushed toward a target class)
and a distance distribution (a normalized density around a point or a
concept's member set). The package also ships closed-form and brute-force
KL oracles plus a common-random-numbers Monte-Carlo estimator of
KL-divergence differences, so the sampling machinery can be checked against
exact ground truth.
"""

from .attack import (
    AttackCase,
    AttackConfig,
    AttackResult,
    aggregate_comparison,
    evaluate_attack,
    rejection_filter,
    run_attack,
    run_comparison,
    sample_adversarial_batch,
    select_candidate,
)
from .distributions import (
    AffineMap,
    Concept,
    IsotropicGaussianDist,
    KdeDist,
    LaplaceDist,
    NoiseSeed,
    augment_concept,
    fit_concept_kde,
    load_concept,
    reparam_sample,
    sample_noise,
    save_concept,
)
from .errors import ConfigurationError, ContractViolationError, OracleFailureError
from .kldiv import (
    DeltaEstimate,
    GridOracle,
    estimate_delta,
    grid_kl_oracle,
    kl_gaussians_closed_form,
    kl_vs_variance_sweep,
    padded_grid,
)
from .netgrad import (
    Classifier,
    LabeledDataset,
    accuracy,
    finite_diff_check,
    init_classifier,
    load_model,
    mean_loss,
    save_model,
    train_classifier,
)
from .numerics import GENERATOR_ID, RngStream, in_box, log_sum_exp, project_box
from .sampler import (
    GibbsTarget,
    LangevinConfig,
    default_init_for,
    langevin_step,
    run_chain,
    write_chain_trace,
)
from .victim import (
    ConstantVictim,
    QuadraticVictim,
    VictimDistribution,
    target_rank,
    topk_success,
)

__version__ = "0.1.0"
