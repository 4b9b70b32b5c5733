"""Log-return processes, their Laplace exponents, and discount moments.

The return process ``R`` discounts claims through ``e^{-R(t)}``.  Four
variants are supported: pure drift, Brownian motion with drift, a gamma
subordinator, and a compound-Poisson subordinator with exponential jumps,
all parameterized so that ``E[e^{-s R(t)}] = exp(t * phi(s))`` with ``phi``
available in closed form.  Inter-arrival laws carry their moment generating
functions with explicit domains, so the one-step discount moment

    E[W^s] = E[e^{-s R(theta)}] = mgf_theta(phi(s))

is exact; a violated mgf domain raises :class:`MomentConditionError`, the
signal that the requested moment does not exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MomentConditionError",
    "LevyModel",
    "Drift",
    "BrownianDrift",
    "GammaSubordinator",
    "CompoundPoissonSubordinator",
    "InterArrivalLaw",
    "ExponentialArrivals",
    "GammaArrivals",
    "DeterministicArrivals",
    "DiscountMoment",
    "laplace_exponent",
    "sample_increment",
    "check_negativity",
    "discount_moment",
    "is_subordinator",
    "discounted_premium_integral",
]


class MomentConditionError(ValueError):
    """A requested exponential moment does not exist."""


class LevyModel:
    """Base marker for return-process models."""


@dataclass(frozen=True)
class Drift(LevyModel):
    """Deterministic return ``R(t) = r t``.

    ``r = 0`` is constructible for finite-horizon toys but is not a
    subordinator, so infinite-horizon discounting rejects it downstream.
    """

    r: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0.0):
            raise ValueError("drift r must be non-negative and finite")


@dataclass(frozen=True)
class BrownianDrift(LevyModel):
    """``R(t) = r t + sigma B(t)``; paths move both ways, never a subordinator."""

    r: float
    sigma: float

    def __post_init__(self):
        if not math.isfinite(self.r):
            raise ValueError("drift r must be finite")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError("sigma must be strictly positive (use Drift for sigma = 0)")


@dataclass(frozen=True)
class GammaSubordinator(LevyModel):
    """Gamma(shape a t, rate b) increments plus drift ``r t``."""

    shape: float
    rate: float
    drift: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise ValueError("shape must be strictly positive")
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ValueError("rate must be strictly positive")
        if not (math.isfinite(self.drift) and self.drift >= 0.0):
            raise ValueError("drift must be non-negative")


@dataclass(frozen=True)
class CompoundPoissonSubordinator(LevyModel):
    """Poisson(jump_rate t) exponential jumps (mean 1/jump_exp_rate) plus drift."""

    jump_rate: float
    jump_exp_rate: float
    drift: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.jump_rate) and self.jump_rate > 0.0):
            raise ValueError("jump_rate must be strictly positive")
        if not (math.isfinite(self.jump_exp_rate) and self.jump_exp_rate > 0.0):
            raise ValueError("jump_exp_rate must be strictly positive")
        if not (math.isfinite(self.drift) and self.drift >= 0.0):
            raise ValueError("drift must be non-negative")


def laplace_exponent(model: LevyModel, s: float) -> float:
    """``phi(s)`` with ``E[e^{-s R(t)}] = exp(t phi(s))``.

    Outside a variant's analytic domain the error names the violated bound.
    """
    s = float(s)
    if isinstance(model, Drift):
        return -s * model.r
    if isinstance(model, BrownianDrift):
        return -s * model.r + 0.5 * s * s * model.sigma**2
    if isinstance(model, GammaSubordinator):
        if s <= -model.rate:
            raise ValueError(f"laplace exponent needs s > -rate = {-model.rate}")
        return -s * model.drift - model.shape * math.log1p(s / model.rate)
    if isinstance(model, CompoundPoissonSubordinator):
        if s <= -model.jump_exp_rate:
            raise ValueError(f"laplace exponent needs s > -jump_exp_rate = {-model.jump_exp_rate}")
        return -s * model.drift - model.jump_rate * s / (model.jump_exp_rate + s)
    raise TypeError(f"unknown return model {type(model).__name__}")


def sample_increment(model: LevyModel, t, gen: np.random.Generator) -> np.ndarray:
    """Exact-law increments ``R(t)`` over horizons ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("horizons must be non-negative")
    if isinstance(model, Drift):
        return model.r * t
    if isinstance(model, BrownianDrift):
        return model.r * t + model.sigma * np.sqrt(t) * gen.standard_normal(t.shape)
    if isinstance(model, GammaSubordinator):
        return model.drift * t + gen.gamma(model.shape * t, 1.0 / model.rate)
    if isinstance(model, CompoundPoissonSubordinator):
        counts = gen.poisson(model.jump_rate * t)
        jumps = gen.gamma(counts, 1.0 / model.jump_exp_rate)
        return model.drift * t + jumps
    raise TypeError(f"unknown return model {type(model).__name__}")


def check_negativity(model: LevyModel, p: float) -> dict:
    """Report ``phi(p)`` and whether the discounting condition ``phi(p) < 0`` holds."""
    phi = laplace_exponent(model, p)
    return {"phi": phi, "negative": phi < 0.0}


def is_subordinator(model: LevyModel) -> bool:
    """True when sample paths are almost surely non-decreasing."""
    if isinstance(model, Drift):
        return model.r > 0.0
    if isinstance(model, BrownianDrift):
        return False
    if isinstance(model, (GammaSubordinator, CompoundPoissonSubordinator)):
        return True
    raise TypeError(f"unknown return model {type(model).__name__}")


class InterArrivalLaw:
    """Base marker for claim inter-arrival laws."""

    def sample(self, gen: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def convolution_sample(self, gen: np.random.Generator, n: int, count: int) -> np.ndarray:
        """Draws of the sum of ``count`` independent inter-arrival gaps."""
        raise NotImplementedError

    def mgf(self, u: float) -> float:
        raise NotImplementedError

    @property
    def mean(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class ExponentialArrivals(InterArrivalLaw):
    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ValueError("rate must be strictly positive")

    def sample(self, gen, n):
        return gen.exponential(1.0 / self.rate, n)

    def convolution_sample(self, gen, n, count):
        if count == 0:
            return np.zeros(n)
        return gen.gamma(float(count), 1.0 / self.rate, n)

    def mgf(self, u):
        if u >= self.rate:
            raise MomentConditionError(f"arrival mgf diverges: u = {u} >= rate = {self.rate}")
        return self.rate / (self.rate - u)

    @property
    def mean(self):
        return 1.0 / self.rate


@dataclass(frozen=True)
class GammaArrivals(InterArrivalLaw):
    shape: float
    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise ValueError("shape must be strictly positive")
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ValueError("rate must be strictly positive")

    def sample(self, gen, n):
        return gen.gamma(self.shape, 1.0 / self.rate, n)

    def convolution_sample(self, gen, n, count):
        if count == 0:
            return np.zeros(n)
        return gen.gamma(self.shape * count, 1.0 / self.rate, n)

    def mgf(self, u):
        if u >= self.rate:
            raise MomentConditionError(f"arrival mgf diverges: u = {u} >= rate = {self.rate}")
        return (1.0 - u / self.rate) ** (-self.shape)

    @property
    def mean(self):
        return self.shape / self.rate


@dataclass(frozen=True)
class DeterministicArrivals(InterArrivalLaw):
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0.0):
            raise ValueError("delta must be strictly positive")

    def sample(self, gen, n):
        return np.full(n, self.delta)

    def convolution_sample(self, gen, n, count):
        return np.full(n, self.delta * count)

    def mgf(self, u):
        return math.exp(u * self.delta)

    @property
    def mean(self):
        return self.delta


@dataclass(frozen=True)
class DiscountMoment:
    """One-step discount moment ``E[W^s]`` with its contraction verdict."""

    value: float
    contractive: bool

    def __float__(self) -> float:
        return self.value


def discount_moment(model: LevyModel, arrival: InterArrivalLaw, s: float) -> DiscountMoment:
    """Exact ``E[W^s] = mgf_theta(phi(s))`` for one inter-arrival step.

    ``contractive`` reports ``value < 1``, the geometric-decay condition the
    discounted series rests on.  A violated mgf domain raises
    :class:`MomentConditionError` naming the bound.
    """
    phi = laplace_exponent(model, s)
    value = float(arrival.mgf(phi))
    return DiscountMoment(value=value, contractive=value < 1.0)


def discounted_premium_integral(times, r_values, rate: float) -> float:
    """Exact ``int c e^{-R(t)} dt`` for a piecewise-linear return path.

    ``times`` and ``r_values`` list the path knots; ``rate`` is the constant
    premium intensity c.  Each segment integrates in closed form; a flat
    segment contributes ``c * dt * e^{-R}``.
    """
    t = np.asarray(times, dtype=float)
    r = np.asarray(r_values, dtype=float)
    if t.ndim != 1 or t.shape != r.shape or t.size < 2:
        raise ValueError("need matching 1-d knot arrays with at least two points")
    if np.any(np.diff(t) <= 0.0):
        raise ValueError("times must be strictly increasing")
    dt = np.diff(t)
    dr = np.diff(r)
    slope = dr / dt
    base = np.exp(-r[:-1])
    with np.errstate(invalid="ignore"):
        seg = np.where(
            np.abs(dr) > 1e-12,
            base * -np.expm1(-slope * dt) / np.where(slope == 0.0, 1.0, slope),
            base * dt,
        )
    return float(rate) * float(np.sum(seg))
