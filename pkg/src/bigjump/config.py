"""Experiment configuration: schema checks, canonical form, digests.

Configs are JSON objects with sections ``claims`` / ``levy`` / ``arrivals``
/ ``dependence`` / ``set`` / ``mc`` / ``premiums`` / ``outputs`` / ``index``.
Every schema failure names the offending key by path, unknown keys are
rejected, and a parsed config re-serializes to a canonical dict whose
digest is stable under key reordering in the source file.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .claims import ClaimModel, IndependentComponents, Scaled, Spectral, SpectralMRV
from .dependence import Comonotone, DependenceSpec, HMixture, Independent
from .engine import ModelBundle, PremiumSpec, TruncationPolicy
from .levy import (
    BrownianDrift,
    CompoundPoissonSubordinator,
    DeterministicArrivals,
    Drift,
    ExponentialArrivals,
    GammaArrivals,
    GammaSubordinator,
    InterArrivalLaw,
    LevyModel,
)
from .sets import RareSet, RuinSetPreset, from_ruin_set, preset_a1, preset_a2, preset_a3
from .tails import Deterministic, Exponential, Lognormal, Pareto, SlowLog, TailLaw, Weibull

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "McSection",
    "OutputSection",
    "IndexSection",
    "parse_config",
    "load_config",
    "canonical_form",
    "config_digest",
    "law_from_config",
    "law_to_config",
]


class ConfigError(ValueError):
    """Schema violation; the message starts with the path to the bad key."""


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _as_map(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    return obj


def _reject_unknown(obj: dict, path: str, known):
    for key in obj:
        if key not in known:
            _fail(f"{path}.{key}", "unknown key")


def _number(obj: dict, key: str, path: str, *, default=None, minimum=None, strict=False):
    if key not in obj:
        if default is None:
            _fail(f"{path}.{key}", "missing required key")
        return float(default)
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        _fail(f"{path}.{key}", "expected a finite number")
    v = float(v)
    if minimum is not None and (v < minimum or (strict and v == minimum)):
        op = ">" if strict else ">="
        _fail(f"{path}.{key}", f"must be {op} {minimum:g}")
    return v


def _integer(obj: dict, key: str, path: str, *, default=None, minimum=None):
    if key not in obj:
        if default is None:
            _fail(f"{path}.{key}", "missing required key")
        return int(default)
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(f"{path}.{key}", "expected an integer")
    if minimum is not None and v < minimum:
        _fail(f"{path}.{key}", f"must be >= {minimum}")
    return v


def _vector(obj: dict, key: str, path: str, *, required=True):
    if key not in obj:
        if required:
            _fail(f"{path}.{key}", "missing required key")
        return None
    v = obj[key]
    if not isinstance(v, list) or (required and not v):
        _fail(f"{path}.{key}", "expected a non-empty array of numbers")
    out = []
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
            _fail(f"{path}.{key}[{i}]", "expected a finite number")
        out.append(float(item))
    return tuple(out)


# ---------------------------------------------------------------------------
# scalar tail laws


_LAW_FIELDS = {
    "pareto": ("alpha", "scale"),
    "lognormal": ("mu", "sigma"),
    "weibull": ("shape", "scale"),
    "exponential": ("rate",),
    "slow_log": (),
    "deterministic": ("value",),
}


def law_from_config(obj, path: str) -> TailLaw:
    obj = _as_map(obj, path)
    kind = obj.get("kind")
    if kind not in _LAW_FIELDS:
        _fail(f"{path}.kind", f"expected one of {sorted(_LAW_FIELDS)}")
    _reject_unknown(obj, path, ("kind",) + _LAW_FIELDS[kind])
    try:
        if kind == "pareto":
            return Pareto(
                _number(obj, "alpha", path, minimum=0.0, strict=True),
                _number(obj, "scale", path, default=1.0, minimum=0.0, strict=True),
            )
        if kind == "lognormal":
            return Lognormal(
                _number(obj, "mu", path, default=0.0),
                _number(obj, "sigma", path, default=1.0, minimum=0.0, strict=True),
            )
        if kind == "weibull":
            return Weibull(
                _number(obj, "shape", path, minimum=0.0, strict=True),
                _number(obj, "scale", path, default=1.0, minimum=0.0, strict=True),
            )
        if kind == "exponential":
            return Exponential(_number(obj, "rate", path, default=1.0, minimum=0.0, strict=True))
        if kind == "deterministic":
            return Deterministic(_number(obj, "value", path, minimum=0.0))
        return SlowLog()
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        _fail(path, str(err))


def law_to_config(law: TailLaw) -> dict:
    if isinstance(law, Pareto):
        return {"kind": "pareto", "alpha": law.alpha, "scale": law.scale}
    if isinstance(law, Lognormal):
        return {"kind": "lognormal", "mu": law.mu, "sigma": law.sigma}
    if isinstance(law, Weibull):
        return {"kind": "weibull", "shape": law.shape, "scale": law.scale}
    if isinstance(law, Exponential):
        return {"kind": "exponential", "rate": law.rate}
    if isinstance(law, Deterministic):
        return {"kind": "deterministic", "value": law.value}
    if isinstance(law, SlowLog):
        return {"kind": "slow_log"}
    raise TypeError(f"no serialization for law {type(law).__name__}")


# ---------------------------------------------------------------------------
# claim models


def _atoms_from_config(obj: dict, path: str):
    raw = obj.get("atoms")
    if not isinstance(raw, list) or not raw:
        _fail(f"{path}.atoms", "expected a non-empty array of atoms")
    atoms = []
    for i, atom in enumerate(raw):
        apath = f"{path}.atoms[{i}]"
        atom = _as_map(atom, apath)
        _reject_unknown(atom, apath, ("w", "theta"))
        w = _number(atom, "w", apath, minimum=0.0)
        theta = _vector(atom, "theta", apath)
        atoms.append((w, theta))
    return tuple(atoms)


def _atoms_to_config(atoms) -> list:
    return [{"w": float(w), "theta": [float(t) for t in theta]} for w, theta in atoms]


def claims_from_config(obj, path: str) -> ClaimModel:
    obj = _as_map(obj, path)
    variant = obj.get("variant")
    try:
        if variant == "spectral":
            _reject_unknown(obj, path, ("variant", "alpha", "radial", "atoms"))
            return Spectral(
                SpectralMRV(
                    _number(obj, "alpha", path, minimum=0.0, strict=True),
                    law_from_config(obj.get("radial"), f"{path}.radial"),
                    _atoms_from_config(obj, path),
                )
            )
        if variant == "independent_components":
            _reject_unknown(obj, path, ("variant", "components"))
            raw = obj.get("components")
            if not isinstance(raw, list) or not raw:
                _fail(f"{path}.components", "expected a non-empty array of laws")
            laws = tuple(
                law_from_config(law, f"{path}.components[{i}]") for i, law in enumerate(raw)
            )
            return IndependentComponents(laws)
        if variant == "scaled":
            _reject_unknown(obj, path, ("variant", "base", "scale"))
            return Scaled(
                claims_from_config(obj.get("base"), f"{path}.base"),
                _vector(obj, "scale", path),
            )
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        _fail(path, str(err))
    _fail(f"{path}.variant", "expected one of ['independent_components', 'scaled', 'spectral']")


def claims_to_config(model: ClaimModel) -> dict:
    if isinstance(model, Spectral):
        m = model.model
        return {
            "variant": "spectral",
            "alpha": m.alpha,
            "radial": law_to_config(m.radial),
            "atoms": _atoms_to_config(m.atoms),
        }
    if isinstance(model, IndependentComponents):
        return {
            "variant": "independent_components",
            "components": [law_to_config(law) for law in model.components],
        }
    if isinstance(model, Scaled):
        return {
            "variant": "scaled",
            "base": claims_to_config(model.base),
            "scale": [float(s) for s in model.scale],
        }
    raise TypeError(f"no serialization for claim model {type(model).__name__}")


# ---------------------------------------------------------------------------
# return process and arrivals


def levy_from_config(obj, path: str) -> LevyModel:
    obj = _as_map(obj, path)
    variant = obj.get("variant")
    try:
        if variant == "drift":
            _reject_unknown(obj, path, ("variant", "r"))
            return Drift(_number(obj, "r", path))
        if variant == "brownian_drift":
            _reject_unknown(obj, path, ("variant", "r", "sigma"))
            return BrownianDrift(_number(obj, "r", path), _number(obj, "sigma", path))
        if variant == "gamma_subordinator":
            _reject_unknown(obj, path, ("variant", "shape", "rate", "drift"))
            return GammaSubordinator(
                _number(obj, "shape", path),
                _number(obj, "rate", path),
                _number(obj, "drift", path, default=0.0),
            )
        if variant == "compound_poisson":
            _reject_unknown(obj, path, ("variant", "jump_rate", "jump_exp_rate", "drift"))
            return CompoundPoissonSubordinator(
                _number(obj, "jump_rate", path),
                _number(obj, "jump_exp_rate", path),
                _number(obj, "drift", path, default=0.0),
            )
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        _fail(path, str(err))
    _fail(
        f"{path}.variant",
        "expected one of ['brownian_drift', 'compound_poisson', 'drift', 'gamma_subordinator']",
    )


def levy_to_config(model: LevyModel) -> dict:
    if isinstance(model, Drift):
        return {"variant": "drift", "r": model.r}
    if isinstance(model, BrownianDrift):
        return {"variant": "brownian_drift", "r": model.r, "sigma": model.sigma}
    if isinstance(model, GammaSubordinator):
        return {
            "variant": "gamma_subordinator",
            "shape": model.shape,
            "rate": model.rate,
            "drift": model.drift,
        }
    if isinstance(model, CompoundPoissonSubordinator):
        return {
            "variant": "compound_poisson",
            "jump_rate": model.jump_rate,
            "jump_exp_rate": model.jump_exp_rate,
            "drift": model.drift,
        }
    raise TypeError(f"no serialization for return process {type(model).__name__}")


def arrivals_from_config(obj, path: str) -> InterArrivalLaw:
    obj = _as_map(obj, path)
    variant = obj.get("variant")
    try:
        if variant == "exponential":
            _reject_unknown(obj, path, ("variant", "rate"))
            return ExponentialArrivals(_number(obj, "rate", path))
        if variant == "gamma":
            _reject_unknown(obj, path, ("variant", "shape", "rate"))
            return GammaArrivals(_number(obj, "shape", path), _number(obj, "rate", path))
        if variant == "deterministic":
            _reject_unknown(obj, path, ("variant", "delta"))
            return DeterministicArrivals(_number(obj, "delta", path))
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        _fail(path, str(err))
    _fail(f"{path}.variant", "expected one of ['deterministic', 'exponential', 'gamma']")


def arrivals_to_config(law: InterArrivalLaw) -> dict:
    if isinstance(law, ExponentialArrivals):
        return {"variant": "exponential", "rate": law.rate}
    if isinstance(law, GammaArrivals):
        return {"variant": "gamma", "shape": law.shape, "rate": law.rate}
    if isinstance(law, DeterministicArrivals):
        return {"variant": "deterministic", "delta": law.delta}
    raise TypeError(f"no serialization for arrival law {type(law).__name__}")


# ---------------------------------------------------------------------------
# dependence


def dependence_from_config(obj, path: str):
    """Returns (spec, moment_order); the declared order rides with the coupling."""
    obj = _as_map(obj, path)
    variant = obj.get("variant")
    try:
        if variant == "independent":
            _reject_unknown(obj, path, ("variant",))
            return Independent(), None
        if variant == "h_mixture":
            _reject_unknown(obj, path, ("variant", "a", "b", "heavy", "light"))
            return (
                HMixture(
                    _number(obj, "a", path),
                    _number(obj, "b", path),
                    claims_from_config(obj.get("heavy"), f"{path}.heavy"),
                    claims_from_config(obj.get("light"), f"{path}.light"),
                ),
                None,
            )
        if variant == "comonotone":
            _reject_unknown(obj, path, ("variant", "alpha", "beta", "s0", "atoms", "moment_order"))
            spec = Comonotone(
                _number(obj, "alpha", path, minimum=0.0, strict=True),
                _number(obj, "beta", path, minimum=0.0, strict=True),
                _number(obj, "s0", path, minimum=0.0, strict=True),
                _atoms_from_config(obj, path),
            )
            order = None
            if "moment_order" in obj:
                order = _number(obj, "moment_order", path, minimum=0.0, strict=True)
            return spec, order
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        _fail(path, str(err))
    _fail(f"{path}.variant", "expected one of ['comonotone', 'h_mixture', 'independent']")


def dependence_to_config(spec: DependenceSpec, moment_order) -> dict:
    if isinstance(spec, Independent):
        return {"variant": "independent"}
    if isinstance(spec, HMixture):
        return {
            "variant": "h_mixture",
            "a": spec.a,
            "b": spec.b,
            "heavy": claims_to_config(spec.heavy),
            "light": claims_to_config(spec.light),
        }
    if isinstance(spec, Comonotone):
        out = {
            "variant": "comonotone",
            "alpha": spec.alpha,
            "beta": spec.beta,
            "s0": spec.s0,
            "atoms": _atoms_to_config(spec.atoms),
        }
        if moment_order is not None:
            out["moment_order"] = float(moment_order)
        return out
    raise TypeError(f"no serialization for dependence {type(spec).__name__}")


# ---------------------------------------------------------------------------
# rare sets


_SET_PRESETS = ("A1", "A2", "A3", "ruin_per_line", "ruin_aggregate")


def set_from_config(obj, path: str):
    """Returns (RareSet, RuinSetPreset | None, canonical dict)."""
    obj = _as_map(obj, path)
    if "directions" in obj:
        _reject_unknown(obj, path, ("directions",))
        raw = obj["directions"]
        if not isinstance(raw, list) or not raw:
            _fail(f"{path}.directions", "expected a non-empty array of direction vectors")
        dirs = []
        for i, vec in enumerate(raw):
            if not isinstance(vec, list):
                _fail(f"{path}.directions[{i}]", "expected an array of numbers")
            dirs.append(_vector({"d": vec}, "d", path))
        try:
            S = RareSet(tuple(dirs))
        except ValueError as err:
            _fail(f"{path}.directions", str(err))
        return S, None, {"directions": [[float(v) for v in d] for d in S.directions]}
    preset = obj.get("preset")
    if preset not in _SET_PRESETS:
        _fail(f"{path}.preset", f"expected one of {sorted(_SET_PRESETS)} or a directions array")
    try:
        if preset == "A1":
            _reject_unknown(obj, path, ("preset", "b"))
            b = _vector(obj, "b", path)
            return preset_a1(b), None, {"preset": "A1", "b": list(b)}
        if preset == "A2":
            _reject_unknown(obj, path, ("preset", "l", "b"))
            l = _vector(obj, "l", path)
            b = _number(obj, "b", path, default=1.0)
            return preset_a2(l, b), None, {"preset": "A2", "b": b, "l": list(l)}
        if preset == "A3":
            _reject_unknown(obj, path, ("preset", "l"))
            l = _vector(obj, "l", path)
            return preset_a3(l), None, {"preset": "A3", "l": list(l)}
        _reject_unknown(obj, path, ("preset", "l"))
        l = _vector(obj, "l", path)
        kind = "per_line" if preset == "ruin_per_line" else "aggregate"
        ruin = RuinSetPreset(kind, l)
        return from_ruin_set(ruin), ruin, {"preset": preset, "l": list(l)}
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        _fail(path, str(err))


# ---------------------------------------------------------------------------
# run sections


@dataclass(frozen=True)
class McSection:
    samples: int = 100_000
    seed: int = 0
    workers: int | None = None
    x_grid: tuple[float, ...] = ()
    truncation: TruncationPolicy = field(default_factory=TruncationPolicy)
    series_samples: int | None = None
    series_tol: float = 1e-3


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv", "json", "png")


@dataclass(frozen=True)
class IndexSection:
    law: TailLaw | None = None
    sample_file: str | None = None
    hill_k: int | None = None


def mc_from_config(obj, path: str) -> McSection:
    obj = _as_map(obj, path)
    _reject_unknown(
        obj,
        path,
        ("samples", "seed", "workers", "x_grid", "truncation", "series_samples", "series_tol"),
    )
    samples = _integer(obj, "samples", path, default=100_000, minimum=1)
    seed = _integer(obj, "seed", path, default=0, minimum=0)
    workers = None
    if "workers" in obj:
        workers = _integer(obj, "workers", path, minimum=1)
    grid = _vector(obj, "x_grid", path, required=False) or ()
    for i, v in enumerate(grid):
        if v <= 0.0:
            _fail(f"{path}.x_grid[{i}]", "levels must be strictly positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        _fail(f"{path}.x_grid", "levels must be strictly increasing")
    policy = TruncationPolicy()
    if "truncation" in obj:
        tpath = f"{path}.truncation"
        tobj = _as_map(obj["truncation"], tpath)
        _reject_unknown(tobj, tpath, ("eps_discount", "n_min", "n_max"))
        try:
            policy = TruncationPolicy(
                eps_discount=_number(tobj, "eps_discount", tpath, default=1e-8),
                n_min=_integer(tobj, "n_min", tpath, default=10),
                n_max=_integer(tobj, "n_max", tpath, default=10_000),
            )
        except ValueError as err:
            if isinstance(err, ConfigError):
                raise
            _fail(tpath, str(err))
    series_samples = None
    if "series_samples" in obj:
        series_samples = _integer(obj, "series_samples", path, minimum=1)
    series_tol = _number(obj, "series_tol", path, default=1e-3)
    if not 0.0 < series_tol < 1.0:
        _fail(f"{path}.series_tol", "must lie in (0, 1)")
    return McSection(samples, seed, workers, grid, policy, series_samples, series_tol)


def outputs_from_config(obj, path: str) -> OutputSection:
    obj = _as_map(obj, path)
    _reject_unknown(obj, path, ("directory", "formats"))
    directory = obj.get("directory", "out")
    if not isinstance(directory, str) or not directory:
        _fail(f"{path}.directory", "expected a non-empty string")
    formats = obj.get("formats", ["csv", "json", "png"])
    if not isinstance(formats, list) or not formats:
        _fail(f"{path}.formats", "expected a non-empty array")
    for i, fmt in enumerate(formats):
        if fmt not in ("csv", "json", "png"):
            _fail(f"{path}.formats[{i}]", "expected one of ['csv', 'json', 'png']")
    return OutputSection(directory, tuple(dict.fromkeys(formats)))


def index_from_config(obj, path: str) -> IndexSection:
    obj = _as_map(obj, path)
    _reject_unknown(obj, path, ("law", "sample_file", "hill_k"))
    law = None
    sample_file = None
    if "law" in obj:
        law = law_from_config(obj["law"], f"{path}.law")
    if "sample_file" in obj:
        sample_file = obj["sample_file"]
        if not isinstance(sample_file, str) or not sample_file:
            _fail(f"{path}.sample_file", "expected a non-empty string")
    if (law is None) == (sample_file is None):
        _fail(path, "needs exactly one of 'law' or 'sample_file'")
    hill_k = None
    if "hill_k" in obj:
        hill_k = _integer(obj, "hill_k", path, minimum=1)
    return IndexSection(law, sample_file, hill_k)


# ---------------------------------------------------------------------------
# whole configs


@dataclass(frozen=True)
class ExperimentConfig:
    bundle: ModelBundle | None
    rare_set: RareSet | None
    ruin: RuinSetPreset | None
    premiums: PremiumSpec | None
    mc: McSection
    outputs: OutputSection
    index: IndexSection | None
    set_canonical: dict | None


_TOP_KEYS = ("claims", "levy", "arrivals", "dependence", "set", "mc", "premiums", "outputs", "index")


def parse_config(obj) -> ExperimentConfig:
    obj = _as_map(obj, "config")
    _reject_unknown(obj, "config", _TOP_KEYS)
    claims = levy = arrival = None
    dependence, moment_order = None, None
    if "claims" in obj:
        claims = claims_from_config(obj["claims"], "claims")
    if "levy" in obj:
        levy = levy_from_config(obj["levy"], "levy")
    if "arrivals" in obj:
        arrival = arrivals_from_config(obj["arrivals"], "arrivals")
    if "dependence" in obj:
        dependence, moment_order = dependence_from_config(obj["dependence"], "dependence")
    bundle = None
    if dependence is not None or claims is not None or levy is not None or arrival is not None:
        # leaving dependence implicit means independent coupling
        if dependence is None:
            dependence = Independent()
        try:
            bundle = ModelBundle(
                dependence=dependence,
                claims=claims,
                levy=levy,
                arrival=arrival,
                moment_order=moment_order,
            )
        except (ValueError, TypeError) as err:
            _fail("dependence", str(err))
    rare_set = ruin = set_canonical = None
    if "set" in obj:
        rare_set, ruin, set_canonical = set_from_config(obj["set"], "set")
    premiums = None
    if "premiums" in obj:
        ppath = "premiums"
        pobj = _as_map(obj["premiums"], ppath)
        _reject_unknown(pobj, ppath, ("rates",))
        try:
            premiums = PremiumSpec(_vector(pobj, "rates", ppath))
        except ValueError as err:
            if isinstance(err, ConfigError):
                raise
            _fail(ppath, str(err))
    mc = mc_from_config(obj.get("mc", {}), "mc")
    outputs = outputs_from_config(obj.get("outputs", {}), "outputs")
    index = index_from_config(obj["index"], "index") if "index" in obj else None
    return ExperimentConfig(bundle, rare_set, ruin, premiums, mc, outputs, index, set_canonical)


def load_config(path: str) -> ExperimentConfig:
    """Read and parse a config file; raises OSError on unreadable paths."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config: not valid JSON ({err})") from err
    return parse_config(obj)


def canonical_form(cfg: ExperimentConfig) -> dict:
    """Parsed config re-serialized with defaults materialized.

    Parsing the result reproduces it verbatim, so the digest ignores key
    order and notation differences in the source file.
    """
    out: dict = {}
    bundle = cfg.bundle
    if bundle is not None:
        out["dependence"] = dependence_to_config(bundle.dependence, bundle.moment_order)
        if bundle.claims is not None:
            out["claims"] = claims_to_config(bundle.claims)
        if bundle.levy is not None:
            out["levy"] = levy_to_config(bundle.levy)
        if bundle.arrival is not None:
            out["arrivals"] = arrivals_to_config(bundle.arrival)
    if cfg.set_canonical is not None:
        out["set"] = cfg.set_canonical
    if cfg.premiums is not None:
        out["premiums"] = {"rates": [float(c) for c in cfg.premiums.rates]}
    mc = cfg.mc
    out["mc"] = {
        "samples": mc.samples,
        "seed": mc.seed,
        "x_grid": [float(x) for x in mc.x_grid],
        "truncation": {
            "eps_discount": mc.truncation.eps_discount,
            "n_min": mc.truncation.n_min,
            "n_max": mc.truncation.n_max,
        },
        "series_tol": mc.series_tol,
    }
    if mc.workers is not None:
        out["mc"]["workers"] = mc.workers
    if mc.series_samples is not None:
        out["mc"]["series_samples"] = mc.series_samples
    out["outputs"] = {"directory": cfg.outputs.directory, "formats": list(cfg.outputs.formats)}
    if cfg.index is not None:
        idx: dict = {}
        if cfg.index.law is not None:
            idx["law"] = law_to_config(cfg.index.law)
        if cfg.index.sample_file is not None:
            idx["sample_file"] = cfg.index.sample_file
        if cfg.index.hill_k is not None:
            idx["hill_k"] = cfg.index.hill_k
        out["index"] = idx
    return out


def config_digest(cfg: ExperimentConfig) -> str:
    text = json.dumps(canonical_form(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
