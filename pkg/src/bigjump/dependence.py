"""Claim/discount dependence structures and their diagnostics.

Two mechanisms couple a claim vector to the discount weight ``W`` earned
over its inter-arrival gap:

* ``HMixture`` draws the claim from a heavy or a light model with a
  weight-dependent mixing probability ``q(W)`` (clipped affine).  The
  conditional claim law given ``W = y`` tilts the marginal by
  ``h(y) = q(y) / E[q(W)]`` up to the light model's negligible tail, and
  ``E[h(W)] = 1`` by construction.  Rejection sampling off the bounded
  envelope ``sup h`` produces weights from the tilted law.
* ``Comonotone`` drives both the claim radius and the weight by one shared
  uniform, the strongest positive dependence.  Products then follow an
  exact power law with index ``kappa = alpha beta / (alpha + beta)``.

``Independent`` couples nothing and simply pairs the bundle's claim model
with the weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ._rng import stream
from .claims import ClaimModel, direction_dots, model_alpha, sample_claim
from .levy import (
    BrownianDrift,
    CompoundPoissonSubordinator,
    DeterministicArrivals,
    Drift,
    GammaSubordinator,
    InterArrivalLaw,
    LevyModel,
    MomentConditionError,
    discount_moment,
    sample_increment,
)
from .sets import RareSet
from .tails import IndexEstimate, Pareto, hill_estimate

__all__ = [
    "DependenceSpec",
    "Independent",
    "HMixture",
    "Comonotone",
    "CoupledPair",
    "HFunction",
    "TiltedWeightSampler",
    "sample_pair",
    "h_function",
    "verify_h_normalization",
    "tilted_weight_sampler",
    "expected_product_index",
    "product_tail_index",
    "weight_moment",
    "weight_support",
    "comonotone_product_law",
    "conditional_tail_profile",
    "tai_diagnostic",
]


class DependenceSpec:
    """Base marker for dependence structures."""


@dataclass(frozen=True)
class Independent(DependenceSpec):
    """No coupling; claims come from the bundle's claim model."""


@dataclass(frozen=True)
class HMixture(DependenceSpec):
    """Two-population mixture with clipped-affine mixing ``q(y) = clip(a + b y)``."""

    a: float
    b: float
    heavy: ClaimModel
    light: ClaimModel

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("mixing coefficients must be finite")
        if self.heavy.dim != self.light.dim:
            raise ValueError("heavy and light models must share one dimension")

    def q(self, y):
        return np.clip(self.a + self.b * np.asarray(y, dtype=float), 0.0, 1.0)

    @property
    def dim(self) -> int:
        return self.heavy.dim


@dataclass(frozen=True)
class Comonotone(DependenceSpec):
    """One uniform drives claim radius ``U^{-1/alpha}`` and weight ``s0 U^{-1/beta}``."""

    alpha: float
    beta: float
    s0: float
    atoms: tuple[tuple[float, tuple[float, ...]], ...]

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be strictly positive")
        if not (math.isfinite(self.s0) and 0.0 < self.s0 < 1.0):
            # s0 >= 1 would stop the discounted series from contracting
            raise ValueError("s0 must lie in (0, 1)")
        if not self.atoms:
            raise ValueError("at least one angular atom is required")
        total = 0.0
        d = len(self.atoms[0][1])
        cleaned = []
        for w, theta in self.atoms:
            w = float(w)
            theta = tuple(float(t) for t in theta)
            arr = np.asarray(theta)
            if len(theta) != d or np.any(arr < 0.0) or abs(float(arr.max()) - 1.0) > 1e-9:
                raise ValueError("atoms must be non-negative with sup-norm 1 and one dimension")
            if w < 0.0:
                raise ValueError("atom weights must be non-negative")
            total += w
            cleaned.append((w, theta))
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"atom weights must sum to 1 (got {total!r})")
        object.__setattr__(self, "atoms", tuple(cleaned))

    @property
    def dim(self) -> int:
        return len(self.atoms[0][1])

    @property
    def kappa(self) -> float:
        return self.alpha * self.beta / (self.alpha + self.beta)

    def thetas(self) -> np.ndarray:
        return np.array([t for _, t in self.atoms])

    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.atoms])


@dataclass(frozen=True)
class CoupledPair:
    """One batch of coupled draws: claims (n, d) and weights (n,)."""

    claim: np.ndarray
    weight: np.ndarray


def _comonotone_draw(spec: Comonotone, gen: np.random.Generator, n: int):
    u = 1.0 - gen.random(n)
    radius = u ** (-1.0 / spec.alpha)
    w = spec.s0 * u ** (-1.0 / spec.beta)
    cum = np.cumsum(spec.weights())
    cum[-1] = 1.0
    idx = np.searchsorted(cum, gen.random(n), side="right")
    return u, radius, idx, w


def sample_pair(
    spec: DependenceSpec,
    claims: ClaimModel | None,
    levy: LevyModel | None,
    arrival: InterArrivalLaw | None,
    gen: np.random.Generator,
    n: int,
) -> CoupledPair:
    """Draw ``n`` coupled (claim, weight) pairs.

    Independent and mixture variants earn the weight from the return process
    over a fresh inter-arrival gap; the comonotone variant ignores ``levy``
    and ``arrival`` entirely and couples through its shared uniform.
    """
    n = int(n)
    if isinstance(spec, Comonotone):
        _, radius, idx, w = _comonotone_draw(spec, gen, n)
        return CoupledPair(claim=radius[:, None] * spec.thetas()[idx], weight=w)
    if levy is None or arrival is None:
        raise ValueError("this dependence variant needs a return process and arrivals")
    theta = arrival.sample(gen, n)
    w = np.exp(-sample_increment(levy, theta, gen))
    if isinstance(spec, Independent):
        if claims is None:
            raise ValueError("independent dependence needs a claim model")
        return CoupledPair(claim=sample_claim(claims, gen, n), weight=w)
    if isinstance(spec, HMixture):
        pick_heavy = gen.random(n) < spec.q(w)
        out = np.empty((n, spec.dim))
        n_heavy = int(np.count_nonzero(pick_heavy))
        if n_heavy:
            out[pick_heavy] = sample_claim(spec.heavy, gen, n_heavy)
        if n_heavy < n:
            out[~pick_heavy] = sample_claim(spec.light, gen, n - n_heavy)
        return CoupledPair(claim=out, weight=w)
    raise TypeError(f"unknown dependence spec {type(spec).__name__}")


def weight_support(levy: LevyModel, arrival: InterArrivalLaw) -> tuple[float, float]:
    """Support bounds of ``W = e^{-R(theta)}`` as (inf, sup)."""
    if isinstance(levy, BrownianDrift):
        return 0.0, math.inf
    if isinstance(arrival, DeterministicArrivals):
        if isinstance(levy, Drift):
            w = math.exp(-levy.r * arrival.delta)
            return w, w
        drift = levy.drift if isinstance(levy, (GammaSubordinator, CompoundPoissonSubordinator)) else 0.0
        return 0.0, math.exp(-drift * arrival.delta)
    # arrival gaps reach down to 0, so the weight stretches up to 1
    return 0.0, 1.0


@dataclass(frozen=True)
class HFunction:
    """Mixture tilt ``h(y) = q(y) / E[q(W)]`` with its envelope bound."""

    fn: Callable[[np.ndarray], np.ndarray]
    expected_q: float
    sup: float
    method: str

    def __call__(self, y):
        return self.fn(y)


def h_function(
    spec: HMixture,
    levy: LevyModel,
    arrival: InterArrivalLaw,
    n_fallback: int = 1_000_000,
    seed: int = 606_060,
) -> HFunction:
    """Normalized tilt of the weight law induced by the mixture.

    ``E[q(W)]`` evaluates in closed form whenever the affine expression never
    clips on the weight's support (then ``E[q(W)] = a + b E[W]`` with the
    one-step discount moment); otherwise it falls back to a Monte Carlo
    average over ``n_fallback`` draws.  Independent structures carry the
    trivial tilt ``h == 1``; the comonotone variant has no tilt and is
    rejected.
    """
    if isinstance(spec, Comonotone):
        raise TypeError("the comonotone variant has no mixture tilt")
    if isinstance(spec, Independent):
        fn = lambda y: np.ones_like(np.asarray(y, dtype=float))
        return HFunction(fn=fn, expected_q=1.0, sup=1.0, method="closed_form")
    if not isinstance(spec, HMixture):
        raise TypeError("h_function needs an HMixture dependence spec")
    w_lo, w_hi = weight_support(levy, arrival)
    lo_val = spec.a + spec.b * w_lo
    hi_val = spec.a + spec.b * (0.0 if math.isinf(w_hi) else w_hi)
    clips = (
        math.isinf(w_hi)
        and spec.b != 0.0
        or not (0.0 <= lo_val <= 1.0)
        or not (0.0 <= hi_val <= 1.0)
    )
    if not clips:
        expected_q = spec.a + spec.b * discount_moment(levy, arrival, 1.0).value
        method = "closed_form"
    else:
        gen = stream(seed, "h-expected-q")
        theta = arrival.sample(gen, n_fallback)
        w = np.exp(-sample_increment(levy, theta, gen))
        expected_q = float(np.mean(spec.q(w)))
        method = "monte_carlo"
    if expected_q <= 0.0:
        raise ValueError("tilt is degenerate: E[q(W)] = 0")
    q_max = float(np.max(spec.q(np.array([w_lo, min(w_hi, 1e308)]))))
    fn = lambda y: spec.q(y) / expected_q
    return HFunction(fn=fn, expected_q=expected_q, sup=q_max / expected_q, method=method)


def verify_h_normalization(
    spec: HMixture,
    levy: LevyModel,
    arrival: InterArrivalLaw,
    n: int = 1_000_000,
    seed: int = 616_161,
) -> dict:
    """Monte Carlo check that ``E[h(W)] = 1`` within three standard errors."""
    h = h_function(spec, levy, arrival)
    gen = stream(seed, "h-normalization")
    theta = arrival.sample(gen, int(n))
    w = np.exp(-sample_increment(levy, theta, gen))
    vals = h(w)
    mean = float(np.mean(vals))
    se = float(np.std(vals)) / math.sqrt(int(n))
    return {
        "mean_h": mean,
        "standard_error": se,
        "within_3se": abs(mean - 1.0) <= 3.0 * se,
        "method": h.method,
    }


@dataclass(frozen=True)
class TiltedWeightSampler:
    """Rejection sampler for the ``h``-tilted weight law."""

    spec: HMixture
    levy: LevyModel
    arrival: InterArrivalLaw
    h: HFunction

    @property
    def acceptance_rate(self) -> float:
        # E[h(W)] / sup h = 1 / sup h
        return 1.0 / self.h.sup

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        out = np.empty(int(n))
        filled = 0
        q_max = self.h.sup * self.h.expected_q
        while filled < n:
            batch = max(int((n - filled) / max(self.acceptance_rate, 1e-3)) + 16, 1024)
            theta = self.arrival.sample(gen, batch)
            w = np.exp(-sample_increment(self.levy, theta, gen))
            keep = w[gen.random(batch) * q_max < self.spec.q(w)]
            take = min(keep.size, n - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
        return out


def tilted_weight_sampler(
    spec: HMixture, levy: LevyModel, arrival: InterArrivalLaw
) -> TiltedWeightSampler:
    """Build the rejection sampler off the bounded envelope ``sup h``.

    The clipped mixing function keeps ``sup h <= 1 / E[q(W)]`` finite; a
    vanishing ``E[q(W)]`` is a construction error.
    """
    h = h_function(spec, levy, arrival)
    if not math.isfinite(h.sup) or h.sup <= 0.0:
        raise ValueError("tilt envelope is unbounded or degenerate")
    return TiltedWeightSampler(spec=spec, levy=levy, arrival=arrival, h=h)


def expected_product_index(spec: DependenceSpec, claims: ClaimModel | None = None) -> float:
    """Analytic tail index of one claim/weight product term.

    Weak variants inherit the claim index (heavy population for mixtures);
    the comonotone coupling contracts it to ``alpha beta / (alpha + beta)``.
    """
    if isinstance(spec, Comonotone):
        return spec.kappa
    if isinstance(spec, HMixture):
        alpha = model_alpha(spec.heavy)
    elif isinstance(spec, Independent):
        if claims is None:
            raise ValueError("independent dependence needs the claim model")
        alpha = model_alpha(claims)
    else:
        raise TypeError(f"unknown dependence spec {type(spec).__name__}")
    if alpha is None:
        raise ValueError("claim model declares no tail index")
    return float(alpha)


def product_tail_index(
    spec: DependenceSpec,
    claims: ClaimModel | None,
    levy: LevyModel | None,
    arrival: InterArrivalLaw | None,
    S: RareSet,
    n: int = 1_000_000,
    k: int = 10_000,
    seed: int = 808_080,
) -> IndexEstimate:
    """Hill estimate of the tail index of one projected claim/weight product.

    Draws single-epoch coupled pairs, projects the claim through the rare
    set's directions, multiplies by the weight, and runs the Hill estimator
    on the top ``k`` order statistics.  Non-positive projections carry no
    tail information and are dropped (their count lands in the details),
    and the analytic expectation rides along for comparison.
    """
    n = int(n)
    pair = sample_pair(spec, claims, levy, arrival, stream(seed, "product-index"), n)
    P = S.matrix()
    if P.shape[1] != pair.claim.shape[1]:
        raise ValueError("rare set dimension does not match the claim dimension")
    proj = np.max(pair.claim @ P.T, axis=1) * pair.weight
    positive = proj[proj > 0.0]
    dropped = n - positive.size
    est = hill_estimate(positive, k)
    details = dict(est.details)
    details["n"] = n
    details["n_dropped"] = int(dropped)
    details["expected"] = expected_product_index(spec, claims)
    return IndexEstimate(
        value=est.value,
        standard_error=est.standard_error,
        method="hill_product",
        details=details,
    )


def weight_moment(
    spec: DependenceSpec,
    levy: LevyModel | None,
    arrival: InterArrivalLaw | None,
    p: float,
) -> float:
    """``E[W^p]`` for the structure's weight law.

    Comonotone closed form ``s0^p / (1 - p/beta)`` exists only for
    ``p < beta``; weak variants delegate to the exact discount moment.
    """
    p = float(p)
    if isinstance(spec, Comonotone):
        if p >= spec.beta:
            raise MomentConditionError(f"E[W^p] diverges: p = {p} >= beta = {spec.beta}")
        return spec.s0**p / (1.0 - p / spec.beta)
    if levy is None or arrival is None:
        raise ValueError("this dependence variant needs a return process and arrivals")
    return discount_moment(levy, arrival, p).value


def comonotone_product_law(spec: Comonotone, S: RareSet) -> dict:
    """Exact product tail under comonotone coupling.

    Over atoms, ``P(X_A W > x) = sum_k w_k (s0 proj_k / x) ** kappa``: a pure
    power law with reference tail ``Pareto(kappa, s0)`` and limit mass
    ``mu_hat(A) = sum_k w_k proj_k ** kappa``.
    """
    P = S.matrix()
    if P.shape[1] != spec.dim:
        raise ValueError("set dimension does not match atom dimension")
    proj = (P @ spec.thetas().T).max(axis=0)
    mu_hat = float(np.sum(spec.weights() * proj**spec.kappa))
    return {"kappa": spec.kappa, "mu_hat": mu_hat, "reference": Pareto(spec.kappa, spec.s0)}


def conditional_tail_profile(
    spec: HMixture,
    levy: LevyModel,
    arrival: InterArrivalLaw,
    S: RareSet,
    x: float,
    bins: Sequence[tuple[float, float]],
    n: int = 10_000_000,
    seed: int = 626_262,
) -> list[dict]:
    """Conditional claim-projection tails across weight bins.

    For each bin ``[lo, hi]`` the empirical ``P(X_A > x | W in bin)`` is
    compared with the mixture prediction
    ``q(mid) P_heavy(X_A > x) + (1 - q(mid)) P_light(X_A > x)``, the heavy
    and light tails estimated from dedicated samples.
    """
    gen = stream(seed, "conditional-tail")
    P = S.matrix()
    n = int(n)
    n_side = max(n // 10, 100_000)
    p_heavy = float(
        np.count_nonzero(direction_dots(spec.heavy, gen, n_side, P).max(axis=0) > x) / n_side
    )
    p_light = float(
        np.count_nonzero(direction_dots(spec.light, gen, n_side, P).max(axis=0) > x) / n_side
    )
    lows = np.array([b[0] for b in bins])
    highs = np.array([b[1] for b in bins])
    hits = np.zeros(len(bins), dtype=np.int64)
    counts = np.zeros(len(bins), dtype=np.int64)
    remaining = n
    while remaining > 0:
        m = min(remaining, 1_000_000)
        pair = sample_pair(spec, None, levy, arrival, gen, m)
        proj = (P @ pair.claim.T).max(axis=0)
        for i in range(len(bins)):
            mask = (pair.weight >= lows[i]) & (pair.weight <= highs[i])
            counts[i] += int(np.count_nonzero(mask))
            hits[i] += int(np.count_nonzero(proj[mask] > x))
        remaining -= m
    out = []
    for i, (lo, hi) in enumerate(bins):
        mid = 0.5 * (lo + hi)
        expected = float(spec.q(mid)) * p_heavy + (1.0 - float(spec.q(mid))) * p_light
        p_cond = hits[i] / counts[i] if counts[i] else math.nan
        out.append(
            {
                "bin": (float(lo), float(hi)),
                "n_bin": int(counts[i]),
                "p_conditional": float(p_cond),
                "expected": expected,
                "ratio": float(p_cond / expected) if expected > 0.0 and counts[i] else math.nan,
            }
        )
    return out


def tai_diagnostic(p_i: np.ndarray, p_j: np.ndarray, x_levels: Sequence[float]) -> dict:
    """Tail asymptotic independence probe for two product-term samples.

    For each probability level ``u`` the quantiles ``x_i, x_j`` are taken per
    series and the conditional rate ``P(P_i > x_i | P_j > x_j)`` is
    estimated.  Identical inputs short-circuit to a flagged unit curve, and
    levels whose conditioning event holds fewer than 30 samples are dropped
    with a starvation flag instead of reporting noise.
    """
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    if p_i.shape != p_j.shape or p_i.ndim != 1:
        raise ValueError("need two equal-length 1-d sample arrays")
    levels = sorted(float(u) for u in x_levels)
    if not levels or levels[0] <= 0.0 or levels[-1] >= 1.0:
        raise ValueError("x_levels must be probabilities in (0, 1)")
    if np.array_equal(p_i, p_j):
        return {
            "levels": levels,
            "conditional": [1.0] * len(levels),
            "flags": ["identical_inputs"],
        }
    out_levels = []
    cond = []
    flags: list[str] = []
    for u in sorted(levels, reverse=True):
        xi = float(np.quantile(p_i, 1.0 - u))
        xj = float(np.quantile(p_j, 1.0 - u))
        given = p_j > xj
        n_given = int(np.count_nonzero(given))
        if n_given < 30:
            flags.append(f"starved_at_{u:g}")
            continue
        out_levels.append(u)
        cond.append(float(np.count_nonzero(p_i[given] > xi) / n_given))
    return {"levels": out_levels, "conditional": cond, "flags": flags}
