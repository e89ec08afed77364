"""
Builtin factor lifts and flat Lagrangian charts.

A factor is a horizontal, C-totally-real lift into S^{2d+1}(1) or
H_1^{2d+1}(-1); d = 0 is the point factor, the constant lift 1. Factor
charts are evaluated inside product charts with parameter jets that carry
the product's directions, so every builder below is written against jets of
any direction count.

The psi3 charts of the null case are Lagrangian in flat C^d; their
HermitianSpace is only used for the pairing.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

import jets
from ambient import HermitianSpace, Signature, apply_J, real_inner, space_residual
from config import Config
from errors import ConstructionError, ParameterError, ToolkitError
from geometry import LocalGeometry, lagrangian_residual
from jets import CJet, ImmersionChart, eval_chart_jet

logger = logging.getLogger(__name__)


class FactorLift(ImmersionChart):
    """A factor chart ready to be placed in a product slot."""

    def __init__(self, space: HermitianSpace, domain, name: str,
                 fn: Callable[[Sequence[jets.Jet3]], List],
                 metadata: Optional[Dict[str, Any]] = None):
        super().__init__(space, domain, name, metadata)
        self._fn = fn

    @property
    def is_point(self) -> bool:
        return self.dim == 0

    @property
    def is_lorentz(self) -> bool:
        return self.space.is_lorentz

    def evaluate(self, params):
        return list(self._fn(list(params)))


class FlatChart(FactorLift):
    """Chart into flat C^d (used for psi3); no model hypersurface applies."""


# ==========================================================================
# FACTOR BUILDERS
# ==========================================================================

def point(signature: str = "Definite") -> FactorLift:
    """The point factor: the constant lift 1 in C (or C_1)."""
    sig = Signature(signature)
    space = HermitianSpace(1, sig, -1.0 if sig == Signature.LORENTZ else 1.0)
    return FactorLift(space, np.zeros((0, 2)), f"point_{sig.value.lower()}",
                      lambda p: [1.0 + 0.0j],
                      metadata={"builtin": "point", "signature": sig.value})


def great_circle() -> FactorLift:
    """s -> (cos s, sin s), the totally geodesic real circle in S^3."""
    return FactorLift(HermitianSpace.cp(1), [[-1.2, 1.2]], "great_circle",
                      lambda p: [jets.cos(p[0]), jets.sin(p[0])],
                      metadata={"builtin": "great_circle", "minimal": True, "parallel": True})


def totally_geodesic_sphere(dim: int) -> FactorLift:
    """Real S^dim in S^{2 dim + 1} in nested spherical coordinates."""
    if dim < 1:
        raise ParameterError(f"totally_geodesic_sphere needs dim >= 1, got {dim}")

    def fn(p):
        coords = []
        running = None
        for a in range(dim):
            c = jets.cos(p[a])
            coords.append(c if running is None else running * c)
            s = jets.sin(p[a])
            running = s if running is None else running * s
        coords.append(running)
        return coords

    return FactorLift(HermitianSpace.cp(dim), [[0.3, 1.3]] * dim, f"totally_geodesic_sphere{dim}", fn,
                      metadata={"builtin": "totally_geodesic_sphere", "dim": dim,
                                "minimal": True, "parallel": True})


def totally_geodesic_hyperbolic(dim: int) -> FactorLift:
    """Real hyperboloid u -> (sqrt(1 + |u|^2), u) in H_1^{2 dim + 1}(-1)."""
    if dim < 1:
        raise ParameterError(f"totally_geodesic_hyperbolic needs dim >= 1, got {dim}")

    def fn(p):
        radius2 = 1.0
        for x in p:
            radius2 = x * x + radius2
        return [jets.sqrt(radius2)] + list(p)

    return FactorLift(HermitianSpace.ch(dim), [[-0.5, 0.5]] * dim, f"totally_geodesic_hyperbolic{dim}", fn,
                      metadata={"builtin": "totally_geodesic_hyperbolic", "dim": dim,
                                "minimal": True, "parallel": True})


def flat_torus(frequencies: Sequence[float]) -> FactorLift:
    """
    Clifford torus (e^{i w_1 s_1}, ..., e^{i w_d s_d}, e^{-i sum w_j s_j}) / sqrt(d + 1).

    Flat, minimal and with parallel second fundamental form for any nonzero
    frequencies (they only reparametrize the same torus).
    """
    freqs = [float(w) for w in frequencies]
    if not freqs or any(w == 0.0 for w in freqs):
        raise ParameterError(f"flat_torus needs nonzero frequencies, got {frequencies}")
    d = len(freqs)
    scale = 1.0 / math.sqrt(d + 1)

    def fn(p):
        phases = [p[j] * freqs[j] for j in range(d)]
        last = phases[0]
        for ph in phases[1:]:
            last = last + ph
        phases.append(-last)
        return [CJet(jets.cos(ph), jets.sin(ph)) * scale for ph in phases]

    return FactorLift(HermitianSpace.cp(d), [[0.0, 1.5]] * d, f"flat_torus{d}", fn,
                      metadata={"builtin": "flat_torus", "frequencies": freqs,
                                "minimal": True, "parallel": True})


def legendre_spiral(twist: float = 1.0) -> FactorLift:
    """
    (cos s e^{i w (s/2 - sin 2s / 4)}, sin s e^{-i w (s/2 + sin 2s / 4)}).

    A horizontal curve in S^3 whose cubic form varies along the curve, so its
    second fundamental form is not parallel.
    """
    w = float(twist)

    def fn(p):
        s = p[0]
        wobble = jets.sin(s * 2.0) * 0.25
        th1 = (s * 0.5 - wobble) * w
        th2 = (s * 0.5 + wobble) * (-w)
        return [CJet(jets.cos(th1), jets.sin(th1)) * jets.cos(s),
                CJet(jets.cos(th2), jets.sin(th2)) * jets.sin(s)]

    return FactorLift(HermitianSpace.cp(1), [[0.3, 1.2]], "legendre_spiral", fn,
                      metadata={"builtin": "legendre_spiral", "twist": w,
                                "minimal": False, "parallel": False})


# ==========================================================================
# FLAT CHARTS (PSI3)
# ==========================================================================

def plane(dim: int) -> FlatChart:
    """Real plane u -> (u_1, ..., u_dim) in C^dim."""
    if dim < 1:
        raise ParameterError(f"plane needs dim >= 1, got {dim}")
    return FlatChart(HermitianSpace(dim), [[-0.5, 0.5]] * dim, f"plane{dim}",
                     lambda p: list(p), metadata={"builtin": "plane", "dim": dim})


def cubic_graph(dim: int, kappa: float = 0.5) -> FlatChart:
    """Gradient graph u -> (u_j + i kappa u_j^2); Lagrangian with Im A0 = kappa sum u_j^3 / 3."""
    if dim < 1:
        raise ParameterError(f"cubic_graph needs dim >= 1, got {dim}")
    k = float(kappa)
    return FlatChart(HermitianSpace(dim), [[-0.5, 0.5]] * dim, f"cubic_graph{dim}",
                     lambda p: [CJet(x, x * x * k) for x in p],
                     metadata={"builtin": "cubic_graph", "dim": dim, "kappa": k})


# ==========================================================================
# REGISTRY
# ==========================================================================

FACTORS: Dict[str, Callable[..., FactorLift]] = {
    "point": point,
    "great_circle": great_circle,
    "totally_geodesic_sphere": totally_geodesic_sphere,
    "totally_geodesic_hyperbolic": totally_geodesic_hyperbolic,
    "flat_torus": flat_torus,
    "legendre_spiral": legendre_spiral,
}

PSI3_CHARTS: Dict[str, Callable[..., FlatChart]] = {
    "plane": plane,
    "cubic_graph": cubic_graph,
}


def _build(registry: Dict[str, Callable], kind: str, entry) -> ImmersionChart:
    if isinstance(entry, str):
        name, params = entry, {}
    elif isinstance(entry, dict):
        params = dict(entry)
        name = params.pop("name", None)
    else:
        raise ConstructionError(f"{kind} must be a name or an object, got {type(entry).__name__}")
    if name not in registry:
        raise ConstructionError(f"unknown {kind} {name!r}; known: {', '.join(sorted(registry))}")
    try:
        return registry[name](**params)
    except ToolkitError:
        raise
    except (TypeError, ValueError) as e:
        raise ConstructionError(f"bad parameters for {kind} {name!r}: {e}") from e


def build_factor(entry) -> FactorLift:
    """Factor from a registry name or {"name": ..., **params}."""
    return _build(FACTORS, "factor", entry)


def build_psi3(entry) -> FlatChart:
    return _build(PSI3_CHARTS, "psi3 chart", entry)


# ==========================================================================
# VALIDATION
# ==========================================================================

def flat_lagrangian_residual(chart: ImmersionChart, u) -> float:
    """max |<J d_a psi, d_b psi>| for a chart into flat C^d."""
    lift = eval_chart_jet(chart, u, order=1)
    JX = apply_J(lift.d1)
    return float(np.max(np.abs(real_inner(JX[:, None, :], lift.d1[None, :, :], chart.space))))


def factor_residual(factor: FactorLift, count: int = 20, seed: int = Config.DEFAULT_SEED) -> float:
    """Worst model-hypersurface and Lagrangian residual over samples."""
    if factor.is_point:
        return space_residual(factor.point([]), factor.space)
    worst = 0.0
    for u in factor.sample_points(count, seed):
        worst = max(worst, space_residual(factor.point(u), factor.space),
                    lagrangian_residual(factor, u))
    return worst


def validate_factor(factor: FactorLift, tol: float = Config.TOL_CONSTRUCTION) -> float:
    """Raise ConstructionError unless the factor is a valid horizontal lift to tol."""
    residual = factor_residual(factor)
    if residual > tol:
        raise ConstructionError(f"{factor.name}: not a horizontal C-totally-real lift (residual {residual:.3e})")
    logger.debug("%s validated, residual %.3e", factor.name, residual)
    return residual


def factor_mean_curvature(factor: FactorLift, count: int = 20, seed: int = Config.DEFAULT_SEED) -> float:
    """Max |H| of the factor over samples (0 for a point)."""
    if factor.is_point:
        return 0.0
    return max(LocalGeometry(factor, u).mean_curvature()[1] for u in factor.sample_points(count, seed))
