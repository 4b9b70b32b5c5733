"""Config schema: round trips, canonical forms, digests, path-named errors."""

import json

import pytest

from bigjump.claims import IndependentComponents, Scaled, Spectral
from bigjump.config import (
    ConfigError,
    arrivals_from_config,
    arrivals_to_config,
    canonical_form,
    claims_from_config,
    claims_to_config,
    config_digest,
    dependence_from_config,
    dependence_to_config,
    index_from_config,
    law_from_config,
    law_to_config,
    levy_from_config,
    levy_to_config,
    load_config,
    mc_from_config,
    outputs_from_config,
    parse_config,
    set_from_config,
)
from bigjump.dependence import Comonotone, HMixture, Independent
from bigjump.levy import (
    BrownianDrift,
    CompoundPoissonSubordinator,
    DeterministicArrivals,
    Drift,
    ExponentialArrivals,
    GammaArrivals,
    GammaSubordinator,
)
from bigjump.sets import RuinSetPreset, from_ruin_set, preset_a2
from bigjump.tails import (
    Deterministic,
    Exponential,
    Lognormal,
    Pareto,
    SlowLog,
    Weibull,
)

WEAK_CONFIG = {
    "dependence": {
        "variant": "h_mixture",
        "a": 0.0,
        "b": 1.0,
        "heavy": {
            "variant": "spectral",
            "alpha": 2.0,
            "radial": {"kind": "pareto", "alpha": 2.0, "scale": 1.0},
            "atoms": [
                {"w": 0.5, "theta": [1.0, 0.0]},
                {"w": 0.5, "theta": [0.0, 1.0]},
            ],
        },
        "light": {
            "variant": "independent_components",
            "components": [
                {"kind": "exponential", "rate": 1.0},
                {"kind": "exponential", "rate": 1.0},
            ],
        },
    },
    "levy": {"variant": "drift", "r": 0.1},
    "arrivals": {"variant": "exponential", "rate": 1.0},
    "set": {"preset": "A2", "l": [0.5, 0.5], "b": 1.0},
    "mc": {"samples": 1000, "seed": 7, "x_grid": [10.0, 20.0]},
}


class TestLawRoundTrip:
    LAWS = (
        Pareto(2.5, 3.0),
        Lognormal(0.3, 1.2),
        Weibull(0.7, 2.0),
        Exponential(0.4),
        SlowLog(),
        Deterministic(5.0),
    )

    @pytest.mark.parametrize("law", LAWS, ids=lambda l: type(l).__name__)
    def test_round_trip(self, law):
        assert law_from_config(law_to_config(law), "law") == law

    def test_unknown_kind_names_path(self):
        with pytest.raises(ConfigError, match=r"index\.law\.kind"):
            law_from_config({"kind": "cauchy"}, "index.law")

    def test_extra_field_rejected(self):
        with pytest.raises(ConfigError, match=r"law\.rate: unknown key"):
            law_from_config({"kind": "pareto", "alpha": 2.0, "rate": 1.0}, "law")


class TestClaimsRoundTrip:
    def test_spectral(self):
        cfg = WEAK_CONFIG["dependence"]["heavy"]
        model = claims_from_config(cfg, "claims")
        assert isinstance(model, Spectral)
        assert claims_from_config(claims_to_config(model), "claims") == model

    def test_independent_components(self):
        model = IndependentComponents((Pareto(2.0, 1.0), Exponential(2.0)))
        assert claims_from_config(claims_to_config(model), "claims") == model

    def test_scaled(self):
        base = IndependentComponents((Pareto(3.0, 1.0),))
        model = Scaled(base, (2.5,))
        assert claims_from_config(claims_to_config(model), "claims") == model

    def test_bad_atom_weight_names_path(self):
        cfg = {
            "variant": "spectral",
            "alpha": 2.0,
            "radial": {"kind": "pareto", "alpha": 2.0, "scale": 1.0},
            "atoms": [{"w": -0.5, "theta": [1.0, 0.0]}],
        }
        with pytest.raises(ConfigError, match="claims"):
            claims_from_config(cfg, "claims")


class TestLevyAndArrivals:
    MODELS = (
        Drift(0.2),
        BrownianDrift(0.1, 0.3),
        GammaSubordinator(2.0, 5.0, 0.1),
        CompoundPoissonSubordinator(1.5, 4.0, 0.0),
    )
    ARRIVALS = (
        ExponentialArrivals(2.0),
        GammaArrivals(2.0, 3.0),
        DeterministicArrivals(0.5),
    )

    @pytest.mark.parametrize("model", MODELS, ids=lambda m: type(m).__name__)
    def test_levy_round_trip(self, model):
        assert levy_from_config(levy_to_config(model), "levy") == model

    @pytest.mark.parametrize("law", ARRIVALS, ids=lambda a: type(a).__name__)
    def test_arrivals_round_trip(self, law):
        assert arrivals_from_config(arrivals_to_config(law), "arrivals") == law

    def test_unknown_variant(self):
        with pytest.raises(ConfigError, match=r"levy\.variant"):
            levy_from_config({"variant": "stable"}, "levy")


class TestDependenceSection:
    def test_independent(self):
        spec, order = dependence_from_config({"variant": "independent"}, "dependence")
        assert spec == Independent()
        assert order is None

    def test_h_mixture_round_trip(self):
        spec, order = dependence_from_config(WEAK_CONFIG["dependence"], "dependence")
        assert isinstance(spec, HMixture)
        assert order is None
        again, _ = dependence_from_config(dependence_to_config(spec, None), "dependence")
        assert again == spec

    def test_comonotone_carries_moment_order(self):
        cfg = {
            "variant": "comonotone",
            "alpha": 2.0,
            "beta": 2.0,
            "s0": 0.2,
            "atoms": [{"w": 1.0, "theta": [1.0, 1.0]}],
            "moment_order": 1.5,
        }
        spec, order = dependence_from_config(cfg, "dependence")
        assert isinstance(spec, Comonotone)
        assert order == 1.5
        assert dependence_to_config(spec, order) == cfg


class TestSetSection:
    def test_explicit_directions(self):
        S, ruin, canonical = set_from_config({"directions": [[1.0, 0.5]]}, "set")
        assert S.directions == ((1.0, 0.5),)
        assert ruin is None
        assert canonical == {"directions": [[1.0, 0.5]]}

    def test_a2_default_threshold(self):
        S, _, canonical = set_from_config({"preset": "A2", "l": [0.5, 0.5]}, "set")
        assert S == preset_a2((0.5, 0.5), 1.0)
        assert canonical["b"] == 1.0

    def test_ruin_preset_links_set_and_preset(self):
        S, ruin, canonical = set_from_config(
            {"preset": "ruin_per_line", "l": [0.3, 0.7]}, "set"
        )
        assert ruin == RuinSetPreset("per_line", (0.3, 0.7))
        assert S == from_ruin_set(ruin)
        assert canonical == {"preset": "ruin_per_line", "l": [0.3, 0.7]}

    def test_missing_allocation_names_path(self):
        with pytest.raises(ConfigError, match=r"set\.l: missing required key"):
            set_from_config({"preset": "A2"}, "set")

    def test_unknown_preset_lists_choices(self):
        with pytest.raises(ConfigError, match=r"set\.preset"):
            set_from_config({"preset": "A9"}, "set")


class TestRunSections:
    def test_mc_defaults(self):
        mc = mc_from_config({}, "mc")
        assert mc.samples == 100_000
        assert mc.seed == 0
        assert mc.workers is None
        assert mc.x_grid == ()

    def test_mc_rejects_nonpositive_level(self):
        with pytest.raises(ConfigError, match=r"mc\.x_grid\[0\]"):
            mc_from_config({"x_grid": [-1.0]}, "mc")

    def test_mc_rejects_unsorted_grid(self):
        with pytest.raises(ConfigError, match="strictly increasing"):
            mc_from_config({"x_grid": [5.0, 2.0]}, "mc")

    def test_outputs_dedupes_formats(self):
        out = outputs_from_config({"formats": ["csv", "csv", "json"]}, "outputs")
        assert out.formats == ("csv", "json")

    def test_outputs_rejects_unknown_format(self):
        with pytest.raises(ConfigError, match=r"outputs\.formats\[1\]"):
            outputs_from_config({"formats": ["csv", "svg"]}, "outputs")

    def test_index_needs_exactly_one_source(self):
        with pytest.raises(ConfigError, match="exactly one"):
            index_from_config({}, "index")
        with pytest.raises(ConfigError, match="exactly one"):
            index_from_config(
                {"law": {"kind": "pareto", "alpha": 2.0, "scale": 1.0}, "sample_file": "x.csv"},
                "index",
            )

    def test_index_law_source(self):
        idx = index_from_config(
            {"law": {"kind": "pareto", "alpha": 2.0, "scale": 1.0}, "hill_k": 500}, "index"
        )
        assert idx.law == Pareto(2.0, 1.0)
        assert idx.hill_k == 500


class TestParseConfig:
    def test_weak_config_builds_bundle(self):
        cfg = parse_config(WEAK_CONFIG)
        assert isinstance(cfg.bundle.dependence, HMixture)
        assert cfg.bundle.levy == Drift(0.1)
        assert cfg.rare_set == preset_a2((0.5, 0.5), 1.0)
        assert cfg.mc.samples == 1000
        assert cfg.mc.x_grid == (10.0, 20.0)

    def test_implicit_dependence_is_independent(self):
        cfg = parse_config(
            {
                "claims": {
                    "variant": "independent_components",
                    "components": [{"kind": "pareto", "alpha": 2.0, "scale": 1.0}],
                },
                "levy": {"variant": "drift", "r": 0.1},
                "arrivals": {"variant": "exponential", "rate": 1.0},
            }
        )
        assert cfg.bundle.dependence == Independent()

    def test_model_conflict_reported_at_dependence(self):
        bad = {
            "claims": {
                "variant": "independent_components",
                "components": [{"kind": "pareto", "alpha": 2.0, "scale": 1.0}],
            }
        }
        with pytest.raises(ConfigError, match="dependence"):
            parse_config(bad)

    def test_unknown_top_key(self):
        with pytest.raises(ConfigError, match=r"config\.claim: unknown key"):
            parse_config({"claim": {}})

    def test_sample_floor_named(self):
        with pytest.raises(ConfigError, match=r"mc\.samples: must be >= 1"):
            parse_config({**WEAK_CONFIG, "mc": {"samples": 0}})


class TestCanonicalDigest:
    def test_canonical_reparse_is_stable(self):
        cfg = parse_config(WEAK_CONFIG)
        canonical = canonical_form(cfg)
        assert canonical_form(parse_config(canonical)) == canonical

    def test_digest_ignores_key_order(self):
        reordered = json.loads(json.dumps(WEAK_CONFIG))
        reordered["mc"] = {"x_grid": [10.0, 20.0], "seed": 7, "samples": 1000}
        reordered = dict(reversed(list(reordered.items())))
        assert config_digest(parse_config(WEAK_CONFIG)) == config_digest(
            parse_config(reordered)
        )

    def test_digest_sees_model_changes(self):
        changed = json.loads(json.dumps(WEAK_CONFIG))
        changed["levy"]["r"] = 0.2
        assert config_digest(parse_config(WEAK_CONFIG)) != config_digest(
            parse_config(changed)
        )

    def test_canonical_materializes_mc_defaults(self):
        cfg = parse_config({"set": {"preset": "A1", "b": [1.0, 1.0]}})
        canonical = canonical_form(cfg)
        assert canonical["mc"]["samples"] == 100_000
        assert canonical["mc"]["truncation"]["n_max"] == 10_000


class TestLoadConfig:
    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_config(str(tmp_path / "absent.json"))

    def test_bad_json_is_schema_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="config"):
            load_config(str(path))

    def test_load_round_trip(self, tmp_path):
        path = tmp_path / "weak.json"
        path.write_text(json.dumps(WEAK_CONFIG), encoding="utf-8")
        cfg = load_config(str(path))
        assert config_digest(cfg) == config_digest(parse_config(WEAK_CONFIG))
