"""
Main Orchestrator for the Lagrangian product toolkit.
Provides the CLI and runs build / verify / classify / ode-check on one run config.
"""

import argparse
import logging
import sys
import time
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ambient import fiber_phase, space_residual
from classifier import VerdictKind, classify, expected_lambdas, parallel_residual
from compiler import ReportCompiler
from config import Config
from errors import ConfigError, ToolkitError
from geometry import point_summary, sweep
from input_handler import InputHandler, RunConfig
from jets import ImmersionChart
from odecheck import (
    U_ZERO,
    build_solutions,
    derivative_identities,
    independence_check,
    null_f_constancy,
    ode_residual,
    profile_for_chart,
    riccati_residual,
    u_constancy,
)

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_NUMERIC_FAIL = 1
EXIT_CONFIG_ERROR = 2

COMMANDS = ("build", "verify", "classify", "ode-check")
GRID_MARGIN = 0.01


def check_record(name: str, max_residual: float, tolerance: float) -> Dict[str, Any]:
    max_residual = float(max_residual)
    return {
        "name": name,
        "max_residual": max_residual,
        "tolerance": float(tolerance),
        "pass": bool(np.isfinite(max_residual) and max_residual <= tolerance),
    }


class VerificationOrchestrator:
    """Coordinates config loading, the numerical checks and report output."""

    def __init__(self, compiler: Optional[ReportCompiler] = None):
        self.handler = InputHandler()
        self.compiler = compiler or ReportCompiler()

    # ==========================================================================
    # COMMANDS
    # ==========================================================================

    def build(self, config: RunConfig, chart: ImmersionChart) -> Tuple[List[Dict], Dict[str, Any]]:
        """Sample the chart and record lift values, norms and fiber phases."""
        points = chart.sample_points(config.samples, config.seed)
        reference = chart.point(chart.center())
        rows = []
        for u in points:
            z = chart.point(u)
            rows.append({
                "u": [float(x) for x in u],
                "lift": [[float(c.real), float(c.imag)] for c in z],
                "space_residual": space_residual(z, chart.space),
                "fiber_phase": fiber_phase(reference, z, chart.space),
            })
        worst = max(r["space_residual"] for r in rows)
        checks = [check_record("space", worst, config.tolerances["construction"])]
        extra = {"chart": self._chart_block(chart), "samples": rows}
        return checks, extra

    def verify(self, config: RunConfig, chart: ImmersionChart) -> Tuple[List[Dict], Dict[str, Any]]:
        """Geometric residual suite at every sample point."""
        tol = config.tolerances
        points = chart.sample_points(config.samples, config.seed)
        rows = sweep(point_summary, chart, points)

        def worst(key: str) -> float:
            return max(r[key] for r in rows)

        checks = [
            check_record("space", worst("space"), tol["construction"]),
            check_record("frame", worst("frame"), tol["construction"]),
            check_record("lagrangian", worst("lagrangian"), tol["lagrangian"]),
            check_record("symmetry", worst("symmetry"), tol["symmetry"]),
            check_record("gauss", worst("gauss"), tol["gauss"]),
            check_record("codazzi", worst("codazzi"), tol["codazzi"]),
        ]
        if str(chart.metadata.get("kind", "")).startswith("minimal"):
            checks.append(check_record("mean_curvature", worst("mean_curvature"), tol["codazzi"]))
        extra = {
            "chart": self._chart_block(chart),
            "mean_curvature_max": worst("mean_curvature"),
            "nabla_h_max": worst("nabla_h"),
        }
        return checks, extra

    def classify(self, config: RunConfig, chart: ImmersionChart) -> Tuple[List[Dict], Dict[str, Any]]:
        """Classifier verdict plus its agreement with what the construction promises."""
        tol = config.tolerances
        points = chart.sample_points(config.samples, config.seed)
        verdict = classify(chart, points, tol=tol["classifier"], strict=False)
        checks = [check_record("lagrangian", verdict.diagnostics["lagrangian"], tol["lagrangian"])]

        expected = expected_lambdas(chart, tol["classifier"])
        if expected is not None:
            if len(expected) == len(verdict.lambdas):
                gap = max(abs(a - b) for a, b in zip(expected, verdict.lambdas))
            else:
                gap = float("inf")
            checks.append(check_record("expected_lambdas", gap, tol["classifier"]))
        if "lambda_relation" in verdict.diagnostics:
            checks.append(check_record("lambda_relation", verdict.diagnostics["lambda_relation"], tol["lagrangian"]))

        classification = verdict.to_dict()
        classification["expected"] = expected
        if verdict.kind in (VerdictKind.CALABI_WITH_POINT, VerdictKind.CALABI_TWO_FACTOR):
            classification["parallel"] = parallel_residual(chart, points).to_dict()
        return checks, {"chart": self._chart_block(chart), "classification": classification}

    def ode_check(self, config: RunConfig, chart: ImmersionChart) -> Tuple[List[Dict], Dict[str, Any]]:
        """Profile ODE suite on a uniform grid inside the working interval."""
        tol = config.tolerances
        prof = profile_for_chart(chart)
        if prof is None:
            raise ConfigError(f"{chart.name}: construction has no profile to check")
        lo, hi = prof.working_interval()
        pad = GRID_MARGIN * (hi - lo)
        grid = np.linspace(lo + pad, hi - pad, Config.ODE_GRID_POINTS)
        bundle = build_solutions(prof)

        riccati = max(riccati_residual(prof, t) for t in grid)
        mean, maxdev = u_constancy(prof, grid)
        conserved = maxdev if abs(mean) <= Config.NULL_U_TOL else maxdev / abs(mean)
        solutions = max(ode_residual(g, prof, t) for t in grid
                        for g in (bundle.g1, bundle.g2, bundle.g1tilde))
        identities = max(max(derivative_identities(bundle, t).values()) for t in grid)
        independence = [independence_check(bundle, prof, t, tol["conserved"]) for t in grid]

        checks = [
            check_record("riccati", riccati, tol["ode"]),
            check_record("u_constancy", conserved, tol["conserved"]),
            check_record("ode_solutions", solutions, tol["ode"]),
            check_record("derivative_identities", identities, tol["ode"]),
        ]
        null_case = independence[0].case == U_ZERO
        if null_case:
            fprime = max(abs(r.fprime) for r in independence)
            checks.append(check_record("independence", fprime, tol["conserved"]))
            checks.append(check_record("null_f_constancy", null_f_constancy(bundle, grid), tol["ode"]))
        else:
            checks.append(check_record("independence", max(r.residual for r in independence), tol["conserved"]))
        failed = [r for r in independence if not r.passed]
        if failed:
            checks.append(check_record("independence_flags", float(len(failed)), 0.0))

        extra = {
            "chart": self._chart_block(chart),
            "profile": {**prof.describe(), "u_mean": mean, "grid": [float(grid[0]), float(grid[-1]), len(grid)]},
            "independence": {
                "case": independence[0].case,
                "min_abs_fprime": min(abs(r.fprime) for r in independence),
                "min_abs_ftilde_prime": min(abs(r.ftilde_prime) for r in independence),
            },
        }
        return checks, extra

    # ==========================================================================
    # RUN
    # ==========================================================================

    def run(self, command: str, config: RunConfig) -> Tuple[Dict[str, Any], int]:
        """
        Run one command and assemble its report.

        Raises:
            ConfigError: the construction cannot be built from the config
        """
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}")
        started = time.perf_counter()
        chart = self.handler.build_chart(config)
        step = getattr(self, command.replace("-", "_"))
        try:
            checks, extra = step(config, chart)
        except ConfigError:
            raise
        except ToolkitError as e:
            logger.warning("%s on %s failed: %s", command, chart.name, e)
            checks = [{"name": "evaluation", "max_residual": float("inf"), "tolerance": 0.0,
                       "pass": False, "error": str(e)}]
            extra = {"chart": self._chart_block(chart)}

        passed = all(c["pass"] for c in checks)
        report = {
            "artifact_version": Config.ARTIFACT_VERSION,
            "command": command,
            "config": config.to_dict(),
            "checks": checks,
            "pass": passed,
            "verdict": self._verdict(command, passed, extra),
            "timing": {
                "started": datetime.now().isoformat(timespec="seconds"),
                "seconds": time.perf_counter() - started,
            },
        }
        report.update(extra)
        return report, EXIT_PASS if passed else EXIT_NUMERIC_FAIL

    @staticmethod
    def _verdict(command: str, passed: bool, extra: Dict[str, Any]) -> str:
        if command == "classify" and "classification" in extra:
            return extra["classification"]["kind"]
        return "pass" if passed else "fail"

    @staticmethod
    def _chart_block(chart: ImmersionChart) -> Dict[str, Any]:
        return {
            "name": chart.name,
            "dim": chart.dim,
            "ambient_dim": chart.space.complex_dim,
            "signature": chart.space.signature.value,
            "c": chart.space.c,
            "metadata": chart.metadata,
        }

    def execute(self, command: str, config: RunConfig, formats: Optional[List[str]] = None,
                report_path: Optional[str] = None) -> Tuple[Dict[str, Any], int]:
        """Run a command, print its summary and write the report files."""
        print("\n" + "=" * 60)
        print(f"{command.upper()}: {config.name}")
        print("=" * 60)

        report, code = self.run(command, config)
        for check in report["checks"]:
            icon = "✅" if check["pass"] else "❌"
            print(f"   {icon} {check['name']:<24} {check['max_residual']:.3e} <= {check['tolerance']:.1e}")
        if command == "classify":
            print(f"\n🔎 Verdict: {report['verdict']}")
            lambdas = report["classification"]["lambdas"]
            if lambdas:
                print(f"   lambdas: {', '.join(f'{x:.10f}' for x in lambdas)}")

        path = report_path or config.report_path
        print()
        files = self.compiler.compile_report(report, formats or ["json"], path)
        report["files"] = files
        print(f"\n📊 Result: {'✅ PASS' if code == EXIT_PASS else '❌ FAIL'} (exit {code})")
        return report, code

    # ==========================================================================
    # STATUS
    # ==========================================================================

    def show_status(self) -> int:
        Config.print_status()
        configs = sorted(Config.INPUT_DIR.glob("*.json"))
        print(f"\n📁 Run configs in {Config.INPUT_DIR}:")
        if not configs:
            print("   📭 none. Run: python input_handler.py")
        for path in configs:
            try:
                config = InputHandler(path).load()
                print(f"   ✅ {path.name}: {config.kind}")
            except ConfigError as e:
                print(f"   ⚠️  {path.name}: {e}")
        return EXIT_CONFIG_ERROR if Config.validate() else EXIT_PASS


# ==========================================================================
# CLI INTERFACE
# ==========================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Lagrangian product toolkit - build, verify and classify warped/Calabi product lifts",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    run_options = argparse.ArgumentParser(add_help=False)
    run_options.add_argument("--config", required=True, help="Path to a JSON run config")
    run_options.add_argument("--samples", type=int, help="Number of quasi-random sample points")
    run_options.add_argument("--seed", type=int, help="Sampling seed")
    run_options.add_argument("--tol-geom", type=float, help="Override the Gauss and Codazzi tolerances")
    run_options.add_argument("--report", help="Report path (JSON; other formats go next to it)")
    run_options.add_argument("--formats", nargs="+", choices=["json", "txt", "pdf"], default=["json"],
                             help="Report formats")
    run_options.add_argument("--verbose", action="store_true", help="Log library progress")

    subparsers.add_parser("build", parents=[run_options], help="Build the chart and sample it")
    subparsers.add_parser("verify", parents=[run_options], help="Run the geometric residual suite")
    subparsers.add_parser("classify", parents=[run_options], help="Detect Calabi product structure")
    subparsers.add_parser("ode-check", parents=[run_options], help="Check the profile ODE machinery")
    subparsers.add_parser("status", help="Show configuration status")
    return parser


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.samples is not None:
        if args.samples < 1:
            raise ConfigError(f"--samples must be at least 1, got {args.samples}")
        config.samples = args.samples
    if args.seed is not None:
        config.seed = args.seed
    if args.tol_geom is not None:
        if not args.tol_geom > 0:
            raise ConfigError(f"--tol-geom must be positive, got {args.tol_geom}")
        config.tolerances["gauss"] = args.tol_geom
        config.tolerances["codazzi"] = args.tol_geom
    return config


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_CONFIG_ERROR

    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    orchestrator = VerificationOrchestrator()

    if args.command == "status":
        return orchestrator.show_status()

    try:
        config = apply_overrides(InputHandler(args.config).load(), args)
        _, code = orchestrator.execute(args.command, config, args.formats, args.report)
        return code
    except ConfigError as e:
        print(f"❌ Config error: {e}")
        return EXIT_CONFIG_ERROR
    except ToolkitError as e:
        print(f"❌ Construction error: {e}")
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
