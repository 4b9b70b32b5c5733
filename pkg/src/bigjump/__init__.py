"""Rare-event Monte Carlo laboratory for discounted heavy-tailed claim sums.

The package simulates a multivariate renewal risk model whose claims are
discounted along a stochastic return process, estimates rare-set entrance
and ruin probabilities, and checks them against per-epoch series and
closed-form asymptotics driven by the single-big-jump principle.
"""

__version__ = "0.1.0"

from .asymptotics import (
    ClosedFormInputs,
    SeriesEstimate,
    closed_form_inputs,
    closed_form_weak_dependence,
    closed_form_strong_dependence,
    evaluate_closed_form,
    moment_report,
    per_epoch_series,
    ruin_asymptotic,
    validation_report,
)
from .claims import (
    IndependentComponents,
    Scaled,
    Spectral,
    SpectralMRV,
    homogeneity_check,
    mu_limit,
    projection_law_check,
    sample_claim,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .dependence import (
    Comonotone,
    HMixture,
    Independent,
    expected_product_index,
    h_function,
    product_tail_index,
    sample_pair,
    tai_diagnostic,
    tilted_weight_sampler,
    weight_moment,
)
from .engine import (
    ModelBundle,
    PremiumSpec,
    TailCurveEstimate,
    TruncationPolicy,
    empirical_tail,
    finite_horizon_sum,
    renewal_function,
    ruin_and_tail,
    simulate_surplus_ruin,
    tail_curve,
    validate_bundle,
    wilson_interval,
)
from .levy import (
    BrownianDrift,
    CompoundPoissonSubordinator,
    DeterministicArrivals,
    Drift,
    ExponentialArrivals,
    GammaArrivals,
    GammaSubordinator,
    check_negativity,
    discount_moment,
    is_subordinator,
    laplace_exponent,
)
from .sets import (
    RareSet,
    RuinSetPreset,
    contains,
    from_ruin_set,
    preset_a1,
    preset_a2,
    preset_a3,
    projection,
)
from .tails import (
    Deterministic,
    Exponential,
    Lognormal,
    Pareto,
    SlowLog,
    Weibull,
    class_diagnostics,
    hill_estimate,
    karamata_lower_estimate,
    matuszewska_estimate,
    subexp_convolution_ratio,
)
