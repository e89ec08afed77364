"""
Input Handler module for the Lagrangian product toolkit.
Reads run configs (one JSON document per run) and builds the chart they describe.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from config import Config
from errors import ConfigError, ParameterError, ToolkitError
from expr_parser import parse_expr, parse_number
from factors import FactorLift, build_factor, build_psi3, point
from jets import ImmersionChart
from legendre import CalabiParams, ProfileFunctions, Target, UCase
from products import (
    calabi_product,
    minimal_calabi_cp,
    minimal_calabi_two_factor,
    null_warp_ch,
    phase_perturbed,
    warped_product_from_profile,
)

logger = logging.getLogger(__name__)

CONSTRUCTION_KINDS = ("calabi_cp", "calabi_ch", "warped", "minimal_cp", "minimal_two", "null_warp")


@dataclass
class RunConfig:
    """A validated run config: construction, sampling and the applied tolerance ladder."""

    name: str
    construction: Dict[str, Any]
    samples: int = Config.DEFAULT_SAMPLES
    seed: int = Config.DEFAULT_SEED
    tolerances: Dict[str, float] = field(default_factory=Config.tolerances)
    report_path: Optional[Path] = None
    source: Optional[Path] = None

    @property
    def kind(self) -> str:
        return self.construction["kind"]

    def to_dict(self) -> Dict[str, Any]:
        """Echo written into reports."""
        return {
            "name": self.name,
            "construction": self.construction,
            "samples": self.samples,
            "seed": self.seed,
            "tolerances": dict(self.tolerances),
            "report_path": str(self.report_path) if self.report_path else None,
        }


# ==========================================================================
# FIELD HELPERS
# ==========================================================================

def _value(raw: Any, where: str) -> float:
    try:
        return parse_number(raw)
    except ToolkitError as e:
        raise ConfigError(f"{where}: {e}") from e


def _number(section: Dict[str, Any], key: str, where: str, default: Any = None) -> float:
    if key not in section:
        if default is None:
            raise ConfigError(f"{where}: missing required field {key!r}")
        return float(default)
    return _value(section[key], f"{where}.{key}")


def _integer(section: Dict[str, Any], key: str, where: str, default: Optional[int] = None) -> int:
    value = section.get(key, default)
    if value is None:
        raise ConfigError(f"{where}: missing required field {key!r}")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}.{key}: expected an integer, got {value!r}")
    return value


def _expression(value: Any, where: str) -> str:
    text = str(value)
    try:
        parse_expr(text)
    except ToolkitError as e:
        raise ConfigError(f"{where}: {e}") from e
    return text


def _factor(entry: Any, where: str) -> FactorLift:
    try:
        return build_factor(entry)
    except ToolkitError as e:
        raise ConfigError(f"{where}: {e}") from e


def _calabi_params(section: Dict[str, Any], target: Target, where: str) -> CalabiParams:
    r1 = _number(section, "r1", where)
    r2 = _number(section, "r2", where)
    a = _number(section, "a", where, default=1.0)
    try:
        return CalabiParams(r1, r2, a, target)
    except ParameterError as e:
        raise ConfigError(f"{where}: {e}") from e


class InputHandler:
    """Handles reading run configs from JSON files."""

    REQUIRED_FIELDS = ["construction"]
    OPTIONAL_FIELDS = ["name", "samples", "seed", "tolerances", "report_path"]

    def __init__(self, file_path: Optional[str] = None):
        """
        Initialize input handler with a config path.

        Args:
            file_path: Path to a JSON run config. Defaults to input/calabi_cp2.json
        """
        if file_path:
            self.file_path = Path(file_path)
        else:
            self.file_path = Config.INPUT_DIR / "calabi_cp2.json"

    def read_config(self) -> Dict[str, Any]:
        """Raw JSON document of the config file."""
        if not self.file_path.exists():
            raise ConfigError(f"Config file not found: {self.file_path}")
        try:
            with open(self.file_path, encoding="utf-8") as f:
                raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{self.file_path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"{self.file_path}: top level must be an object")
        return raw

    def load(self) -> RunConfig:
        return self.parse(self.read_config(), source=self.file_path)

    # ==========================================================================
    # VALIDATION
    # ==========================================================================

    def parse(self, raw: Dict[str, Any], source: Optional[Path] = None) -> RunConfig:
        """
        Validate a raw config document.

        Every builtin name is resolved and every CalabiParams constraint is
        checked here, so a config that parses is buildable.

        Raises:
            ConfigError: unknown fields, kinds or builtins; malformed numbers or
                expressions; "parameter constraint violated" for bad radii
        """
        for key in self.REQUIRED_FIELDS:
            if key not in raw:
                raise ConfigError(f"Missing required field: {key}")
        unknown = set(raw) - set(self.REQUIRED_FIELDS) - set(self.OPTIONAL_FIELDS)
        if unknown:
            raise ConfigError(f"Unknown field(s): {', '.join(sorted(unknown))}")

        construction = self._parse_construction(raw["construction"])
        samples = _integer(raw, "samples", "config", Config.DEFAULT_SAMPLES)
        if samples < 1:
            raise ConfigError(f"config.samples must be at least 1, got {samples}")
        seed = _integer(raw, "seed", "config", Config.DEFAULT_SEED)

        report_path = raw.get("report_path")
        name = str(raw.get("name") or (source.stem if source else construction["kind"]))
        config = RunConfig(
            name=name,
            construction=construction,
            samples=samples,
            seed=seed,
            tolerances=self._parse_tolerances(raw.get("tolerances") or {}),
            report_path=Path(report_path) if report_path else None,
            source=source,
        )
        logger.debug("parsed config %s (%s)", config.name, config.kind)
        return config

    def _parse_tolerances(self, overrides: Dict[str, Any]) -> Dict[str, float]:
        ladder = Config.tolerances()
        if not isinstance(overrides, dict):
            raise ConfigError("config.tolerances must be an object")
        for key in overrides:
            if key not in ladder:
                raise ConfigError(f"Unknown tolerance {key!r}; known: {', '.join(sorted(ladder))}")
            value = _number(overrides, key, "config.tolerances")
            if not value > 0:
                raise ConfigError(f"config.tolerances.{key} must be positive, got {value}")
            ladder[key] = value
        return ladder

    def _parse_construction(self, section: Any) -> Dict[str, Any]:
        if not isinstance(section, dict):
            raise ConfigError("config.construction must be an object")
        kind = section.get("kind")
        if kind not in CONSTRUCTION_KINDS:
            raise ConfigError(f"Unknown construction kind {kind!r}; known: {', '.join(CONSTRUCTION_KINDS)}")
        where = f"construction[{kind}]"
        parsed = getattr(self, f"_parse_{kind}")(section, where)
        parsed["kind"] = kind
        if "phase_eps" in section:
            parsed["phase_eps"] = _number(section, "phase_eps", where)
        return parsed

    def _parse_calabi_cp(self, section, where):
        params = _calabi_params(section, Target.CP, where)
        parsed = {"r1": params.r1, "r2": params.r2, "a": params.a}
        if "factors" in section:
            parsed["factors"] = self._factor_pair(section["factors"], where)
            return parsed
        slot = _integer(section, "slot", where, 1)
        if slot not in (1, 2):
            raise ConfigError(f"{where}.slot must be 1 or 2, got {slot}")
        factor = section.get("factor", "great_circle")
        _factor(factor, where)
        parsed.update({"factor": factor, "slot": slot})
        return parsed

    def _parse_calabi_ch(self, section, where):
        params = _calabi_params(section, Target.CH, where)
        parsed = {"r1": params.r1, "r2": params.r2, "a": params.a}
        if "factors" in section:
            parsed["factors"] = self._factor_pair(section["factors"], where)
            return parsed
        case = _integer(section, "case", where, 1)
        if case not in (1, 2):
            raise ConfigError(f"{where}.case must be 1 (CP factor) or 2 (CH factor), got {case}")
        default = "great_circle" if case == 1 else {"name": "totally_geodesic_hyperbolic", "dim": 1}
        factor = section.get("factor", default)
        lift = _factor(factor, where)
        if lift.is_lorentz != (case == 2):
            raise ConfigError(f"{where}: case {case} needs a {'CH' if case == 2 else 'CP'} factor, got {lift.name}")
        parsed.update({"factor": factor, "case": case})
        return parsed

    def _parse_warped(self, section, where):
        target = section.get("target", "CP")
        if target not in (Target.CP.value, Target.CH.value):
            raise ConfigError(f"{where}.target must be CP or CH, got {target!r}")
        profile = self._parse_profile(section.get("profile"), f"{where}.profile",
                                      1.0 if target == Target.CP.value else -1.0)
        factor = section.get("factor", "great_circle")
        _factor(factor, where)
        parsed = {"target": target, "profile": profile, "factor": factor}
        if "case" in section:
            try:
                parsed["case"] = UCase(section["case"]).value
            except ValueError as e:
                raise ConfigError(f"{where}.case must be u_pos or u_neg, got {section['case']!r}") from e
        return parsed

    def _parse_minimal_cp(self, section, where):
        n = _integer(section, "n", where)
        if n < 2:
            raise ConfigError(f"{where}.n must be at least 2, got {n}")
        factor = section.get("factor", "great_circle" if n == 2 else {"name": "totally_geodesic_sphere", "dim": n - 1})
        lift = _factor(factor, where)
        if lift.dim != n - 1:
            raise ConfigError(f"{where}: factor {lift.name} has dim {lift.dim}, need n - 1 = {n - 1}")
        return {"n": n, "factor": factor}

    def _parse_minimal_two(self, section, where):
        factors = self._factor_pair(section.get("factors", ["great_circle", "great_circle"]), where)
        dims = [_factor(f, where).dim for f in factors]
        for key, dim in zip(("n1", "n2"), dims):
            if key in section and _integer(section, key, where) != dim:
                raise ConfigError(f"{where}.{key} = {section[key]} does not match factor dim {dim}")
        return {"n1": dims[0], "n2": dims[1], "factors": factors}

    def _parse_null_warp(self, section, where):
        profile = dict(section.get("profile") or {})
        profile.setdefault("lambda2_0", 0.0)
        profile.setdefault("k_0", 1.0)
        profile.setdefault("interval", [0.0, 0.25])
        psi3 = section.get("psi3", {"name": "plane", "dim": 1})
        try:
            build_psi3(psi3)
        except ToolkitError as e:
            raise ConfigError(f"{where}: {e}") from e
        return {"profile": self._parse_profile(profile, f"{where}.profile", -1.0), "psi3": psi3}

    def _parse_profile(self, section: Any, where: str, c: float) -> Dict[str, Any]:
        if not isinstance(section, dict):
            raise ConfigError(f"{where} must be an object")
        profile = {"lambda1": _expression(section.get("lambda1", "1"), f"{where}.lambda1"), "c": c}
        if "c" in section and _number(section, "c", where) != c:
            raise ConfigError(f"{where}.c = {section['c']} does not match the target")
        if "lambda2" in section:
            profile["lambda2"] = _expression(section["lambda2"], f"{where}.lambda2")
        else:
            profile["lambda2_0"] = _number(section, "lambda2_0", where)
            profile["k_0"] = _number(section, "k_0", where, default=0.0)
        interval = section.get("interval", [-0.5, 0.5])
        if not isinstance(interval, (list, tuple)) or len(interval) != 2:
            raise ConfigError(f"{where}.interval must be a [lo, hi] pair")
        profile["interval"] = [_value(x, f"{where}.interval") for x in interval]
        return profile

    def _factor_pair(self, factors: Any, where: str) -> List[Any]:
        if not isinstance(factors, list) or len(factors) != 2:
            raise ConfigError(f"{where}.factors must list exactly two factors")
        for f in factors:
            _factor(f, where)
        return factors

    # ==========================================================================
    # CHART BUILDING
    # ==========================================================================

    def build_chart(self, config: RunConfig) -> ImmersionChart:
        """
        Materialize the chart of a parsed config.

        Raises:
            ConfigError: the construction rejects its inputs (signatures,
                preconditions, profile admissibility)
        """
        construction = config.construction
        try:
            chart = self._build(construction)
            if "phase_eps" in construction:
                chart = phase_perturbed(chart, construction["phase_eps"])
        except ConfigError:
            raise
        except ToolkitError as e:
            raise ConfigError(f"construction[{construction['kind']}]: {e}") from e
        logger.info("built %s (dim %d)", chart.name, chart.dim)
        return chart

    def _build(self, construction: Dict[str, Any]) -> ImmersionChart:
        kind = construction["kind"]
        if kind in ("calabi_cp", "calabi_ch"):
            target = Target.CP if kind == "calabi_cp" else Target.CH
            params = CalabiParams(construction["r1"], construction["r2"], construction["a"], target)
            if "factors" in construction:
                f1, f2 = (build_factor(f) for f in construction["factors"])
            elif kind == "calabi_cp":
                f1, f2 = build_factor(construction["factor"]), point()
                if construction["slot"] == 2:
                    f1, f2 = f2, f1
            elif construction["case"] == 1:
                f1, f2 = point("Lorentz"), build_factor(construction["factor"])
            else:
                f1, f2 = build_factor(construction["factor"]), point()
            return calabi_product(f1, f2, params)
        if kind == "warped":
            target = Target(construction["target"])
            case = UCase(construction["case"]) if "case" in construction else None
            return warped_product_from_profile(build_factor(construction["factor"]), self.build_profile(construction["profile"]),
                                               target, case)
        if kind == "minimal_cp":
            return minimal_calabi_cp(build_factor(construction["factor"]), construction["n"])
        if kind == "minimal_two":
            f1, f2 = (build_factor(f) for f in construction["factors"])
            return minimal_calabi_two_factor(f1, f2)
        return null_warp_ch(build_psi3(construction["psi3"]), self.build_profile(construction["profile"]))

    @staticmethod
    def build_profile(profile: Dict[str, Any]) -> ProfileFunctions:
        return ProfileFunctions(
            profile["lambda1"],
            profile["c"],
            lambda2=profile.get("lambda2"),
            lambda2_0=profile.get("lambda2_0"),
            k_0=profile.get("k_0", 0.0),
            interval=tuple(profile["interval"]),
            name="config_profile",
        )


# ==========================================================================
# CREATE SAMPLE INPUT FILES
# ==========================================================================

SAMPLE_CONFIGS: Dict[str, Dict[str, Any]] = {
    "calabi_cp2": {
        "construction": {"kind": "calabi_cp", "r1": "sqrt(2/3)", "r2": "sqrt(1/3)", "a": 1,
                         "factor": "great_circle"},
    },
    "calabi_ch_case1": {
        "construction": {"kind": "calabi_ch", "r1": "sqrt(2)", "r2": 1, "a": 1, "case": 1,
                         "factor": "great_circle"},
    },
    "calabi_ch_case2": {
        "construction": {"kind": "calabi_ch", "r1": "sqrt(2)", "r2": 1, "a": 1, "case": 2,
                         "factor": {"name": "totally_geodesic_hyperbolic", "dim": 1}},
    },
    "minimal_cp3": {
        "construction": {"kind": "minimal_cp", "n": 3, "factor": {"name": "totally_geodesic_sphere", "dim": 2}},
        "samples": 20,
    },
    "minimal_two": {
        "construction": {"kind": "minimal_two", "n1": 1, "n2": 1, "factors": ["great_circle", "great_circle"]},
        "samples": 20,
    },
    "warped_profile": {
        "construction": {"kind": "warped", "target": "CP", "factor": "great_circle",
                         "profile": {"lambda1": "2+sin(t)", "lambda2_0": 0.3, "k_0": 0, "interval": [-0.5, 0.5]}},
        "samples": 20,
    },
    "null_warp": {
        "construction": {"kind": "null_warp", "psi3": {"name": "plane", "dim": 1},
                         "profile": {"lambda1": "1", "interval": [0, 0.25]}},
        "samples": 20,
    },
    "phase_perturbed": {
        "construction": {"kind": "calabi_cp", "r1": "sqrt(2/3)", "r2": "sqrt(1/3)", "a": 1,
                         "factor": "great_circle", "phase_eps": 0.01},
        "samples": 20,
    },
    "bad_radii": {
        "construction": {"kind": "calabi_cp", "r1": "sqrt(0.6)", "r2": "sqrt(0.3)", "a": 1,
                         "factor": "great_circle"},
    },
}


def create_sample_input(directory: Optional[Path] = None) -> List[Path]:
    """Write the sample run configs as JSON files."""
    target = Path(directory) if directory else Config.INPUT_DIR
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for name, raw in SAMPLE_CONFIGS.items():
        path = target / f"{name}.json"
        with open(path, "w", encoding="utf-8") as f:
            json.dump({"name": name, **raw}, f, indent=2)
            f.write("\n")
        written.append(path)
    print(f"✅ {len(written)} sample config(s) written to {target}")
    return written


# ==========================================================================
# TEST
# ==========================================================================
if __name__ == "__main__":
    print("=" * 60)
    print("INPUT HANDLER TEST")
    print("=" * 60)

    sample_path = Config.INPUT_DIR / "calabi_cp2.json"
    if not sample_path.exists():
        print("\n📝 Creating sample input files...")
        create_sample_input()

    for path in sorted(Config.INPUT_DIR.glob("*.json")):
        handler = InputHandler(path)
        try:
            config = handler.load()
            chart = handler.build_chart(config)
            print(f"✅ {path.name}: {chart.name} (dim {chart.dim})")
        except ConfigError as e:
            print(f"❌ {path.name}: {e}")
