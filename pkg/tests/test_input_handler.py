import json
import math

import pytest

from config import Config
from errors import ConfigError
from input_handler import SAMPLE_CONFIGS, InputHandler, RunConfig, create_sample_input


def parse(construction, **extra):
    return InputHandler().parse({"construction": construction, **extra})


# ==========================================================================
# FILES
# ==========================================================================

class TestReadConfig:
    @pytest.mark.parametrize("name", sorted(set(SAMPLE_CONFIGS) - {"bad_radii"}))
    def test_shipped_configs_parse(self, name):
        config = InputHandler(Config.INPUT_DIR / f"{name}.json").load()
        assert config.name == name
        assert config.source.name == f"{name}.json"

    def test_bad_radii(self):
        """r1^2 + r2^2 != 1 is reported as a parameter constraint violation."""
        with pytest.raises(ConfigError, match="parameter constraint violated"):
            InputHandler(Config.INPUT_DIR / "bad_radii.json").load()

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            InputHandler(tmp_path / "absent.json").load()

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"construction": ', encoding="utf-8")
        with pytest.raises(ConfigError, match="invalid JSON"):
            InputHandler(path).load()

    def test_top_level_array(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[]", encoding="utf-8")
        with pytest.raises(ConfigError, match="object"):
            InputHandler(path).load()

    def test_create_sample_input(self, tmp_path):
        written = create_sample_input(tmp_path)
        assert len(written) == len(SAMPLE_CONFIGS)
        raw = json.loads((tmp_path / "calabi_cp2.json").read_text(encoding="utf-8"))
        assert raw["name"] == "calabi_cp2"


# ==========================================================================
# VALIDATION
# ==========================================================================

class TestParse:
    def test_defaults(self):
        config = parse({"kind": "calabi_cp", "r1": "sqrt(2/3)", "r2": "sqrt(1/3)"})
        assert isinstance(config, RunConfig)
        assert config.samples == Config.DEFAULT_SAMPLES and config.seed == Config.DEFAULT_SEED
        assert config.construction["r1"] == pytest.approx(math.sqrt(2.0 / 3.0))
        assert config.construction["factor"] == "great_circle"
        assert config.construction["a"] == 1.0
        assert config.name == "calabi_cp"

    def test_missing_construction(self):
        with pytest.raises(ConfigError, match="Missing required field"):
            InputHandler().parse({"samples": 3})

    def test_unknown_field(self):
        with pytest.raises(ConfigError, match="Unknown field"):
            parse({"kind": "minimal_two"}, verbose=True)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError, match="Unknown construction kind"):
            parse({"kind": "helix"})

    def test_tolerance_overrides(self):
        config = parse({"kind": "minimal_two"}, tolerances={"gauss": "1e-5"})
        assert config.tolerances["gauss"] == 1e-5
        assert config.tolerances["codazzi"] == Config.TOL_CODAZZI

    @pytest.mark.parametrize("tolerances", [{"gaus": 1e-5}, {"gauss": 0}, {"gauss": -1e-3}])
    def test_bad_tolerances(self, tolerances):
        with pytest.raises(ConfigError):
            parse({"kind": "minimal_two"}, tolerances=tolerances)

    def test_samples_must_be_positive_integers(self):
        with pytest.raises(ConfigError):
            parse({"kind": "minimal_two"}, samples=0)
        with pytest.raises(ConfigError):
            parse({"kind": "minimal_two"}, samples=2.5)
        with pytest.raises(ConfigError):
            parse({"kind": "minimal_two"}, seed=True)

    def test_bad_expression(self):
        """Expression errors surface as config errors."""
        with pytest.raises(ConfigError, match="lambda1"):
            parse({"kind": "warped", "profile": {"lambda1": "2+", "lambda2_0": 0.3}})

    def test_unknown_factor(self):
        with pytest.raises(ConfigError, match="unknown factor"):
            parse({"kind": "minimal_two", "factors": ["great_circle", "lemniscate"]})

    def test_ch_case_needs_matching_factor(self):
        with pytest.raises(ConfigError, match="case 1"):
            parse({"kind": "calabi_ch", "r1": "sqrt(2)", "r2": 1, "case": 1,
                   "factor": {"name": "totally_geodesic_hyperbolic", "dim": 1}})

    def test_minimal_cp_dimension(self):
        with pytest.raises(ConfigError, match="need n - 1"):
            parse({"kind": "minimal_cp", "n": 3, "factor": "great_circle"})

    def test_minimal_two_dimensions(self):
        with pytest.raises(ConfigError, match="does not match"):
            parse({"kind": "minimal_two", "n1": 2})

    def test_profile_target_mismatch(self):
        with pytest.raises(ConfigError, match="does not match the target"):
            parse({"kind": "warped", "target": "CP", "profile": {"c": -1, "lambda2_0": 0.3}})

    def test_null_warp_defaults(self):
        """The null case defaults to lambda2(0) = 0, k(0) = 1 on [0, 0.25]."""
        profile = parse({"kind": "null_warp"}).construction["profile"]
        assert (profile["lambda2_0"], profile["k_0"], profile["c"]) == (0.0, 1.0, -1.0)
        assert profile["interval"] == [0.0, 0.25]


# ==========================================================================
# CHART BUILDING
# ==========================================================================

class TestBuildChart:
    def test_calabi_cp(self):
        handler = InputHandler()
        chart = handler.build_chart(handler.load())
        assert chart.metadata["kind"] == "calabi"
        assert chart.dim == 2

    def test_second_slot(self):
        handler = InputHandler()
        config = handler.parse({"construction": {"kind": "calabi_cp", "r1": "sqrt(1/3)", "r2": "sqrt(2/3)",
                                                 "slot": 2}})
        chart = handler.build_chart(config)
        assert chart.f1.is_point and chart.f2.name == "great_circle"

    def test_phase_eps(self):
        handler = InputHandler()
        chart = handler.build_chart(handler.parse(SAMPLE_CONFIGS["phase_perturbed"]))
        assert chart.metadata["kind"] == "perturbed"
        assert chart.metadata["eps"] == 0.01

    def test_null_warp(self):
        handler = InputHandler()
        chart = handler.build_chart(handler.parse(SAMPLE_CONFIGS["null_warp"]))
        assert chart.metadata["kind"] == "null_warp"
        assert chart.space.is_lorentz

    def test_construction_failure(self):
        """A case that contradicts the sign of u fails at build time."""
        handler = InputHandler()
        config = handler.parse({"construction": {
            "kind": "warped", "target": "CH", "case": "u_neg",
            "profile": {"lambda1": "3", "lambda2_0": 0.2, "k_0": 1.5, "interval": [-0.2, 0.2]},
        }})
        with pytest.raises(ConfigError, match="construction\\[warped\\]"):
            handler.build_chart(config)
