"""Monte Carlo core: discounted claim sums, tail curves, ruin probabilities.

Simulates the vector of discounted aggregate claims

    D = sum_i X^(i) * Pi_i,   Pi_i = W_1 ... W_i,

per path, projects it onto a rare set's supporting directions, and turns
exceedance counts into survival curves with Wilson intervals.  The engine is
deterministic under parallelism: paths are processed in fixed-size chunks,
each chunk owns a counter-based stream keyed by (seed, label, chunk index),
and chunk results are integer counts merged in chunk order, so any worker
count produces bit-identical output.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._rng import DEFAULT_CHUNK_SIZE, chunk_sizes, stream
from .claims import ClaimModel, direction_dots, sample_claim
from .dependence import (
    Comonotone,
    DependenceSpec,
    HMixture,
    Independent,
    _comonotone_draw,
    sample_pair,
    weight_moment,
)
from .levy import (
    InterArrivalLaw,
    DeterministicArrivals,
    ExponentialArrivals,
    GammaArrivals,
    LevyModel,
    MomentConditionError,
    is_subordinator,
    sample_increment,
)
from .sets import RareSet, RuinSetPreset, from_ruin_set

__all__ = [
    "Z95",
    "ModelBundle",
    "TruncationPolicy",
    "PremiumSpec",
    "TailCurveEstimate",
    "RenewalEstimate",
    "validate_bundle",
    "domination_report",
    "wilson_interval",
    "empirical_tail",
    "renewal_function",
    "simulate_discounted_claims",
    "tail_curve",
    "finite_horizon_sum",
    "simulate_surplus_ruin",
    "ruin_and_tail",
]

Z95 = 1.959963984540054


@dataclass(frozen=True)
class ModelBundle:
    """Immutable model assembly: dependence, claims, returns, arrivals.

    Construction checks shapes and presence only; the regime conditions
    (subordinator returns, contracting weight moments) are enforced by
    ``validate_bundle`` so that diagnostic toys outside the asymptotic
    regimes can still be simulated where that is sound.
    """

    dependence: DependenceSpec
    claims: ClaimModel | None = None
    levy: LevyModel | None = None
    arrival: InterArrivalLaw | None = None
    moment_order: float | None = None

    def __post_init__(self):
        dep = self.dependence
        if isinstance(dep, Independent):
            if self.claims is None:
                raise ValueError("independent dependence needs a claim model")
            if self.levy is None or self.arrival is None:
                raise ValueError("independent dependence needs a return process and arrivals")
        elif isinstance(dep, HMixture):
            if self.claims is not None:
                raise ValueError("h_mixture carries its own claim models; omit claims")
            if self.levy is None or self.arrival is None:
                raise ValueError("h_mixture dependence needs a return process and arrivals")
        elif isinstance(dep, Comonotone):
            if self.claims is not None:
                raise ValueError("comonotone dependence carries its own claim law; omit claims")
            if self.levy is not None or self.arrival is not None:
                raise ValueError(
                    "comonotone dependence defines its own weight law; omit the return process and arrivals"
                )
        else:
            raise TypeError(f"unknown dependence spec {type(dep).__name__}")
        if self.moment_order is not None and not (
            math.isfinite(self.moment_order) and self.moment_order > 0.0
        ):
            raise ValueError("moment_order must be strictly positive")

    @property
    def regime(self) -> str:
        return "strong_dependence" if isinstance(self.dependence, Comonotone) else "weak_dependence"

    @property
    def dim(self) -> int:
        if isinstance(self.dependence, Independent):
            return self.claims.dim
        return self.dependence.dim


def validate_bundle(bundle: ModelBundle, S: RareSet | None = None) -> None:
    """Enforce the regime conditions; raise ValueError on violation.

    weak_dependence needs an almost surely non-decreasing return process
    (a subordinator).  strong_dependence needs a declared moment order p
    above the product tail index with E[W^p] < 1.  With a rare set in hand,
    mixture bundles additionally get a heavy-dominates-light tail probe.
    """
    dep = bundle.dependence
    if bundle.regime == "weak_dependence":
        if not is_subordinator(bundle.levy):
            raise ValueError(
                "weak_dependence regime needs a subordinator return process "
                f"(almost surely non-decreasing): {bundle.levy!r} is not one"
            )
        if S is not None and isinstance(dep, HMixture):
            report = domination_report(dep, S)
            if not report["dominated"]:
                raise ValueError(
                    "heavy claim model must dominate the light model on the rare set: "
                    f"tail ratio light/heavy = {report['ratio']:.3g} at x = {report['x']:.3g}"
                )
    else:
        p = bundle.moment_order
        if p is None:
            raise ValueError("strong_dependence regime needs a declared moment order p")
        kappa = dep.kappa
        if p <= kappa:
            raise ValueError(
                f"moment order p = {p} must exceed the product tail index {kappa}"
            )
        try:
            moment = weight_moment(dep, None, None, p)
        except MomentConditionError as err:
            raise ValueError(f"strong_dependence regime needs E[W^p] < 1: {err}") from err
        if moment >= 1.0:
            raise ValueError(
                f"strong_dependence regime needs E[W^p] < 1: E[W^{p}] = {moment}"
            )


def domination_report(
    spec: HMixture, S: RareSet, n: int = 200_000, seed: int = 707_070, level: float = 1e-3
) -> dict:
    """Probe that the heavy population out-tails the light one on ``S``.

    Picks x at the heavy projection's empirical ``level`` quantile and
    reports the light/heavy exceedance ratio there.
    """
    gen = stream(seed, "domination-probe")
    P = S.matrix()
    heavy = direction_dots(spec.heavy, gen, n, P).max(axis=0)
    x = float(np.quantile(heavy, 1.0 - level))
    p_heavy = float(np.mean(heavy > x))
    p_light = float(np.mean(direction_dots(spec.light, gen, n, P).max(axis=0) > x))
    ratio = p_light / p_heavy if p_heavy > 0.0 else math.inf
    return {"x": x, "p_heavy": p_heavy, "p_light": p_light, "ratio": ratio, "dominated": ratio < 0.5}


@dataclass(frozen=True)
class TruncationPolicy:
    """Stopping rule for the infinite discounted series."""

    eps_discount: float = 1e-8
    n_min: int = 10
    n_max: int = 10_000

    def __post_init__(self):
        if not (0.0 < self.eps_discount < 1.0):
            raise ValueError("eps_discount must lie in (0, 1)")
        if not (1 <= self.n_min <= self.n_max):
            raise ValueError("need 1 <= n_min <= n_max")


@dataclass(frozen=True)
class PremiumSpec:
    """Per-line premium income rates per unit time."""

    rates: tuple[float, ...]

    def __post_init__(self):
        rates = tuple(float(c) for c in self.rates)
        if not rates:
            raise ValueError("premium rates must be non-empty")
        if any(not math.isfinite(c) or c < 0.0 for c in rates):
            raise ValueError("premium rates must be finite and non-negative")
        object.__setattr__(self, "rates", rates)


@dataclass(frozen=True)
class TailCurveEstimate:
    """Empirical survival curve with 95% Wilson intervals."""

    x_grid: tuple[float, ...]
    n_samples: int
    counts: tuple[int, ...]
    p_hat: tuple[float, ...]
    ci_low: tuple[float, ...]
    ci_high: tuple[float, ...]
    mean_epochs: float | None = None
    max_residual_discount: float | None = None
    truncation_suspect: int | None = None


def wilson_interval(k, n: int):
    """95% Wilson score interval, vectorized over counts.

    Zero counts report the rule-of-three upper bound 3/n instead, which is
    the honest envelope when nothing was observed.
    """
    k = np.asarray(k, dtype=float)
    z2 = Z95 * Z95
    denom = n + z2
    center = (k + 0.5 * z2) / denom
    half = Z95 * np.sqrt(k * (n - k) / n + 0.25 * z2) / denom
    lo = np.where(k == 0, 0.0, np.maximum(center - half, 0.0))
    # p = 1 solves the score equation at k = n; spell it out so rounding
    # cannot leave the point estimate above the upper limit
    hi = np.where(k == 0, min(3.0 / n, 1.0), np.where(k == n, 1.0, np.minimum(center + half, 1.0)))
    return lo, hi


def _check_grid(x_grid) -> np.ndarray:
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("x_grid must be a non-empty 1-d array")
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise ValueError("x_grid must be strictly positive and finite")
    if np.any(np.diff(x) <= 0.0):
        raise ValueError("x_grid must be strictly increasing")
    return x


def empirical_tail(values, x_grid) -> TailCurveEstimate:
    """Empirical survival of ``values`` over ``x_grid`` (strict exceedance)."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("values must be non-empty")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    x = _check_grid(x_grid)
    v = np.sort(v)
    counts = v.size - np.searchsorted(v, x, side="right")
    lo, hi = wilson_interval(counts, v.size)
    return TailCurveEstimate(
        x_grid=tuple(x),
        n_samples=int(v.size),
        counts=tuple(int(c) for c in counts),
        p_hat=tuple(counts / v.size),
        ci_low=tuple(lo),
        ci_high=tuple(hi),
    )


@dataclass(frozen=True)
class RenewalEstimate:
    """Expected number of arrivals by a horizon, exact or Monte Carlo."""

    value: float
    ci_low: float
    ci_high: float
    method: str


def renewal_function(
    arrival: InterArrivalLaw, t: float, n: int = 200_000, seed: int = 717_171
) -> RenewalEstimate:
    """Mean arrival count over [0, t].

    Exponential and deterministic gaps have closed forms; gamma gaps fall
    back to a Monte Carlo mean with a normal interval.
    """
    t = float(t)
    if not (math.isfinite(t) and t >= 0.0):
        raise ValueError("horizon t must be finite and non-negative")
    if isinstance(arrival, ExponentialArrivals):
        v = arrival.rate * t
        return RenewalEstimate(v, v, v, "closed_form")
    if isinstance(arrival, DeterministicArrivals):
        v = float(math.floor(t / arrival.delta))
        return RenewalEstimate(v, v, v, "closed_form")
    if not isinstance(arrival, GammaArrivals):
        raise TypeError(f"unknown arrival law {type(arrival).__name__}")
    if t == 0.0:
        return RenewalEstimate(0.0, 0.0, 0.0, "monte_carlo")
    gen = stream(seed, "renewal-mc")
    mean_gap = arrival.mean
    n = int(n)
    block = max(int(t / mean_gap + 6.0 * math.sqrt(t / mean_gap) + 25.0), 8)
    counts = np.zeros(n, dtype=np.int64)
    elapsed = np.zeros(n)
    open_paths = np.arange(n)
    while open_paths.size:
        gaps = arrival.sample(gen, open_paths.size * block).reshape(open_paths.size, block)
        csum = elapsed[open_paths, None] + np.cumsum(gaps, axis=1)
        counts[open_paths] += np.sum(csum <= t, axis=1)
        elapsed[open_paths] = csum[:, -1]
        open_paths = open_paths[csum[:, -1] <= t]
    mean = float(counts.mean())
    half = Z95 * float(counts.std()) / math.sqrt(n)
    return RenewalEstimate(mean, mean - half, mean + half, "monte_carlo")


def simulate_discounted_claims(
    bundle: ModelBundle, policy: TruncationPolicy, gen: np.random.Generator
) -> dict:
    """One path of the discounted claim vector, epoch by epoch.

    Walks epochs drawing coupled (claim, weight) pairs, accumulating
    ``D += claim * Pi`` until the discount falls below ``eps_discount``
    (after ``n_min`` epochs) or ``n_max`` is hit, in which case the path is
    flagged truncation-suspect but still returned.
    """
    D = np.zeros(bundle.dim)
    pi = 1.0
    epochs = 0
    for i in range(1, policy.n_max + 1):
        pair = sample_pair(
            bundle.dependence, bundle.claims, bundle.levy, bundle.arrival, gen, 1
        )
        pi *= float(pair.weight[0])
        D += pair.claim[0] * pi
        epochs = i
        if pi < policy.eps_discount and i >= policy.n_min:
            break
    return {
        "D": D,
        "epochs": epochs,
        "final_discount": pi,
        "truncation_suspect": pi >= policy.eps_discount,
    }


def _epoch_draw(bundle: ModelBundle, gen: np.random.Generator, k: int, P: np.ndarray, proj_atoms):
    """One epoch of coupled draws for k live paths: (dots, weight, theta, dR).

    Draw order is fixed per epoch so that chunk streams are reproducible:
    gaps, return increments, mixture selectors, then claims.
    """
    dep = bundle.dependence
    if isinstance(dep, Comonotone):
        _, radius, atom_idx, w = _comonotone_draw(dep, gen, k)
        return radius * proj_atoms[:, atom_idx], w, None, None
    theta = bundle.arrival.sample(gen, k)
    dR = sample_increment(bundle.levy, theta, gen)
    w = np.exp(-dR)
    if isinstance(dep, HMixture):
        pick = gen.random(k) < dep.q(w)
        dots = np.empty((P.shape[0], k))
        kh = int(np.count_nonzero(pick))
        if kh:
            dots[:, pick] = direction_dots(dep.heavy, gen, kh, P)
        if kh < k:
            dots[:, ~pick] = direction_dots(dep.light, gen, k - kh, P)
    else:
        dots = direction_dots(bundle.claims, gen, k, P)
    return dots, w, theta, dR


def _grid_counts(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    v = np.sort(values)
    return (v.size - np.searchsorted(v, x, side="right")).astype(np.int64)


def _truncated_chunk(bundle, policy, P, pc, x, seed, label, index, m):
    """Simulate one chunk of m truncated infinite-horizon paths.

    Returns exceedance counts of the final projection, running-max surplus
    counts per premium row, and truncation diagnostics.
    """
    gen = stream(seed, label, index)
    proj_atoms = P @ bundle.dependence.thetas().T if isinstance(bundle.dependence, Comonotone) else None
    n_dirs = P.shape[0]
    n_prem = pc.shape[0]
    v = np.zeros((n_dirs, m))
    s = np.zeros(m)
    pi = np.ones(m)
    M = np.full((n_prem, m), -np.inf)
    alive = np.ones(m, dtype=bool)
    epochs_total = 0
    i = 0
    while i < policy.n_max:
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        i += 1
        k = idx.size
        epochs_total += k
        dots, w, theta, dR = _epoch_draw(bundle, gen, k, P, proj_atoms)
        if n_prem and theta is not None:
            # discounted premium time over the gap: exact for the linear
            # interpolant of R between epoch knots, with the flat limit at dR=0
            seg = pi[idx] * theta * np.where(dR > 1e-12, -np.expm1(-dR) / np.where(dR > 1e-12, dR, 1.0), 1.0)
            s[idx] += seg
        pi_idx = pi[idx] * w
        pi[idx] = pi_idx
        v[:, idx] += dots * pi_idx
        if n_prem:
            live_v = v[:, idx]
            live_s = s[idx]
            for j in range(n_prem):
                cur = (live_v - pc[j][:, None] * live_s).max(axis=0)
                M[j, idx] = np.maximum(M[j, idx], cur)
        done = (pi_idx < policy.eps_discount) & (i >= policy.n_min)
        alive[idx[done]] = False
    suspect = int(np.count_nonzero(alive))
    proj = v.max(axis=0)
    counts_final = _grid_counts(proj, x)
    counts_M = np.stack([_grid_counts(M[j], x) for j in range(n_prem)]) if n_prem else np.zeros((0, x.size), dtype=np.int64)
    return {
        "counts_final": counts_final,
        "counts_M": counts_M,
        "epochs_total": epochs_total,
        "max_residual": float(pi.max()),
        "suspect": suspect,
    }


def _fixed_chunk(bundle, n_terms, P, x, seed, label, index, m):
    """Simulate one chunk of m exact n_terms-epoch paths (no truncation)."""
    gen = stream(seed, label, index)
    proj_atoms = P @ bundle.dependence.thetas().T if isinstance(bundle.dependence, Comonotone) else None
    v = np.zeros((P.shape[0], m))
    pi = np.ones(m)
    counts_term = np.zeros((n_terms, x.size), dtype=np.int64)
    for i in range(n_terms):
        dots, w, _, _ = _epoch_draw(bundle, gen, m, P, proj_atoms)
        pi = pi * w
        term = dots.max(axis=0) * pi
        counts_term[i] = _grid_counts(term, x)
        v += dots * pi
    counts_sum = _grid_counts(v.max(axis=0), x)
    return {"counts_sum": counts_sum, "counts_term": counts_term}


def _run_chunks(task_fn, static_args, n: int, seed: int, label: str, workers: int):
    sizes = chunk_sizes(n, DEFAULT_CHUNK_SIZE)
    tasks = [static_args + (seed, label, index, m) for index, m in enumerate(sizes)]
    if workers <= 1:
        return [task_fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task_fn, *zip(*tasks), chunksize=1))


def _paths_to_curves(bundle, S, premium_rows, x_grid, n, policy, seed, workers):
    P = S.matrix()
    if P.shape[1] != bundle.dim:
        raise ValueError("rare set dimension does not match the model dimension")
    x = _check_grid(x_grid)
    n = int(n)
    if n <= 0:
        raise ValueError("need a positive path count")
    pc = np.array([P @ np.asarray(c, dtype=float) for c in premium_rows]).reshape(
        len(premium_rows), P.shape[0]
    )
    results = _run_chunks(
        _truncated_chunk, (bundle, policy, P, pc, x), n, seed, "paths", workers
    )
    counts_final = np.zeros(x.size, dtype=np.int64)
    counts_M = np.zeros((len(premium_rows), x.size), dtype=np.int64)
    epochs_total = 0
    max_residual = 0.0
    suspect = 0
    for r in results:
        counts_final += r["counts_final"]
        counts_M += r["counts_M"]
        epochs_total += r["epochs_total"]
        max_residual = max(max_residual, r["max_residual"])
        suspect += r["suspect"]

    def curve(counts):
        lo, hi = wilson_interval(counts, n)
        return TailCurveEstimate(
            x_grid=tuple(x),
            n_samples=n,
            counts=tuple(int(c) for c in counts),
            p_hat=tuple(counts / n),
            ci_low=tuple(lo),
            ci_high=tuple(hi),
            mean_epochs=epochs_total / n,
            max_residual_discount=max_residual,
            truncation_suspect=suspect,
        )

    return curve(counts_final), [curve(counts_M[j]) for j in range(len(premium_rows))]


def tail_curve(
    bundle: ModelBundle,
    S: RareSet,
    x_grid,
    n: int,
    policy: TruncationPolicy | None = None,
    seed: int = 0,
    workers: int = 1,
) -> TailCurveEstimate:
    """Survival curve of the discounted claim projection over ``x_grid``.

    One simulation pass serves the whole grid; the truncation policy and its
    diagnostics ride along in the estimate.
    """
    validate_bundle(bundle, S)
    final, _ = _paths_to_curves(
        bundle, S, [], x_grid, n, policy or TruncationPolicy(), seed, workers
    )
    return final


def ruin_and_tail(
    bundle: ModelBundle,
    premium: PremiumSpec,
    ruin_set: RuinSetPreset,
    x_grid,
    n: int,
    policy: TruncationPolicy | None = None,
    seed: int = 0,
    workers: int = 1,
) -> tuple[TailCurveEstimate, TailCurveEstimate]:
    """Ruin curve and premium-free tail curve from one simulation pass.

    Premium arithmetic consumes no randomness, so both curves see identical
    paths and the ruin probability is dominated by the tail curve surely,
    not just in expectation.
    """
    if isinstance(bundle.dependence, Comonotone) and any(c > 0.0 for c in premium.rates):
        raise ValueError(
            "premiums are not supported under comonotone dependence: "
            "the coupling defines no return path to discount them along"
        )
    S = from_ruin_set(ruin_set)
    validate_bundle(bundle, S)
    if len(premium.rates) != bundle.dim:
        raise ValueError("premium rates must match the model dimension")
    zero = tuple(0.0 for _ in premium.rates)
    _, (psi, tail) = _paths_to_curves(
        bundle, S, [premium.rates, zero], x_grid, n, policy or TruncationPolicy(), seed, workers
    )
    return psi, tail


def simulate_surplus_ruin(
    bundle: ModelBundle,
    premium: PremiumSpec,
    ruin_set: RuinSetPreset,
    x_grid,
    n: int,
    policy: TruncationPolicy | None = None,
    seed: int = 0,
    workers: int = 1,
) -> TailCurveEstimate:
    """Ruin-probability curve: survival of the running surplus-deficit max.

    Per path, each claim epoch updates the discounted claims minus
    discounted premiums, and ruin occurs when the projected deficit exceeds
    x at any epoch.  Checking at claim epochs only is exact because the
    deficit can only move away from the ruin set between claims.
    """
    psi, _ = ruin_and_tail(bundle, premium, ruin_set, x_grid, n, policy, seed, workers)
    return psi


def finite_horizon_sum(
    bundle: ModelBundle,
    n_terms: int,
    S: RareSet,
    x_grid,
    n: int,
    seed: int = 0,
    workers: int = 1,
) -> dict:
    """Exact finite sums S_k = sum_{i<=k} X^(i) Pi_i and their term curves.

    No truncation and no regime validation: finite sums are well defined
    even for non-contracting weights, which the diagnostic toys exploit.
    Reports the single-big-jump ratio p_sum / sum of per-term tails.
    """
    n_terms = int(n_terms)
    if n_terms < 1:
        raise ValueError("n_terms must be at least 1")
    P = S.matrix()
    if P.shape[1] != bundle.dim:
        raise ValueError("rare set dimension does not match the model dimension")
    x = _check_grid(x_grid)
    n = int(n)
    if n <= 0:
        raise ValueError("need a positive path count")
    results = _run_chunks(
        _fixed_chunk, (bundle, n_terms, P, x), n, seed, "finite-horizon", workers
    )
    counts_sum = np.zeros(x.size, dtype=np.int64)
    counts_term = np.zeros((n_terms, x.size), dtype=np.int64)
    for r in results:
        counts_sum += r["counts_sum"]
        counts_term += r["counts_term"]

    def curve(counts):
        lo, hi = wilson_interval(counts, n)
        return TailCurveEstimate(
            x_grid=tuple(x),
            n_samples=n,
            counts=tuple(int(c) for c in counts),
            p_hat=tuple(counts / n),
            ci_low=tuple(lo),
            ci_high=tuple(hi),
        )

    term_total = counts_term.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(term_total > 0, counts_sum / term_total, np.nan)
    return {
        "p_sum": curve(counts_sum),
        "per_term": [curve(counts_term[i]) for i in range(n_terms)],
        "ratio": tuple(float(r) for r in ratio),
    }
