"""
Configuration module for the Lagrangian product toolkit.
Loads environment variables and provides centralized config access.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load .env file from the project root
PROJECT_ROOT = Path(__file__).parent
load_dotenv(PROJECT_ROOT / ".env")


def _float_env(name: str, default: float) -> float:
    return float(os.getenv(name, str(default)))


class Config:
    """Centralized configuration for constructions, checks and reports."""

    # ==========================================================================
    # PROJECT PATHS
    # ==========================================================================
    PROJECT_ROOT = PROJECT_ROOT
    INPUT_DIR = PROJECT_ROOT / "input"
    OUTPUT_DIR = PROJECT_ROOT / "output"

    # ==========================================================================
    # TOLERANCE LADDER
    # ==========================================================================
    # construction residuals (norm, horizontality)
    TOL_CONSTRUCTION = _float_env("LAGRANGE_TOL_CONSTRUCTION", 1e-10)
    # first-derivative identities (Lagrangian, cubic-form symmetry)
    TOL_FIRST_ORDER = _float_env("LAGRANGE_TOL_FIRST_ORDER", 1e-8)
    # second/third-derivative identities (Gauss)
    TOL_GEOMETRY = _float_env("LAGRANGE_TOL_GEOMETRY", 1e-6)
    TOL_CODAZZI = _float_env("LAGRANGE_TOL_CODAZZI", 1e-7)
    TOL_CLASSIFIER = _float_env("LAGRANGE_TOL_CLASSIFIER", 1e-6)

    HOPF_TOL = 1e-9
    QUAD_TOL = 1e-10
    LOCUS_TOL = 1e-6
    GRAM_DET_MIN = 1e-12
    NULL_U_TOL = 1e-10

    # ==========================================================================
    # RUN DEFAULTS
    # ==========================================================================
    DEFAULT_SAMPLES = int(os.getenv("LAGRANGE_SAMPLES", "50"))
    DEFAULT_SEED = int(os.getenv("LAGRANGE_SEED", "7"))
    ODE_GRID_POINTS = 100
    ARTIFACT_VERSION = "1.0.0"

    # ==========================================================================
    # PARALLELISM
    # ==========================================================================
    MAX_WORKERS = int(os.getenv("LAGRANGE_MAX_WORKERS", str(min(8, os.cpu_count() or 1))))

    @classmethod
    def tolerances(cls) -> dict:
        """Default tolerance ladder keyed the way run configs name them."""
        return {
            "construction": cls.TOL_CONSTRUCTION,
            "lagrangian": cls.TOL_FIRST_ORDER,
            "symmetry": cls.TOL_FIRST_ORDER,
            "gauss": cls.TOL_GEOMETRY,
            "codazzi": cls.TOL_CODAZZI,
            "classifier": cls.TOL_CLASSIFIER,
            "ode": cls.TOL_FIRST_ORDER,
            "conserved": cls.TOL_CODAZZI,
        }

    @classmethod
    def validate(cls) -> dict:
        """Validate that config values are usable."""
        issues = {}

        for key, value in cls.tolerances().items():
            if not value > 0:
                issues[f"tolerance.{key}"] = f"Tolerance must be positive, got {value}"
        if cls.MAX_WORKERS < 1:
            issues["LAGRANGE_MAX_WORKERS"] = "Worker cap must be at least 1"
        if cls.DEFAULT_SAMPLES < 1:
            issues["LAGRANGE_SAMPLES"] = "Sample count must be at least 1"

        return issues

    @classmethod
    def print_status(cls):
        """Print configuration status for debugging."""
        print("=" * 60)
        print("LAGRANGIAN PRODUCT TOOLKIT - CONFIGURATION STATUS")
        print("=" * 60)

        print(f"\n📁 Project Root: {cls.PROJECT_ROOT}")
        print(f"📁 Input Dir: {cls.INPUT_DIR}")
        print(f"📁 Output Dir: {cls.OUTPUT_DIR}")

        print("\n📐 Tolerances:")
        for key, value in cls.tolerances().items():
            print(f"   {key:<12} {value:.1e}")
        print(f"   {'hopf':<12} {cls.HOPF_TOL:.1e}")
        print(f"   {'quadrature':<12} {cls.QUAD_TOL:.1e}")

        print(f"\n🎲 Samples: {cls.DEFAULT_SAMPLES}  Seed: {cls.DEFAULT_SEED}")
        print(f"🧵 Max Workers: {cls.MAX_WORKERS}")
        print(f"🏷️  Artifact Version: {cls.ARTIFACT_VERSION}")

        issues = cls.validate()
        if issues:
            print("\n⚠️  CONFIGURATION ISSUES:")
            for key, msg in issues.items():
                print(f"   - {key}: {msg}")
        else:
            print("\n✅ Configuration is valid!")

        print("=" * 60)


# Create directories if they don't exist
Config.INPUT_DIR.mkdir(exist_ok=True)
Config.OUTPUT_DIR.mkdir(exist_ok=True)


if __name__ == "__main__":
    Config.print_status()
