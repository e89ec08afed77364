"""
Warped-product, Calabi-product and null-warp lift charts.

A product chart places a factor lift in each component slot of a Legendre
curve, (t, p, q) -> (gamma_1(t) psi_1(p), gamma_2(t) psi_2(q)), with the curve
parameter first so the first frame vector is the distinguished direction E1.
"""

import logging
import math
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from ambient import HermitianSpace, Signature
from config import Config
from errors import ConstructionError, InvalidPsi3Error, PreconditionError, WrongCaseError
from factors import FactorLift, FlatChart, factor_mean_curvature, point, validate_factor
from jets import CJet, ImmersionChart, Jet3, cexp, eval_chart_jet, lift_1d
from legendre import CalabiCurve, CalabiParams, LegendreCurve, ProfileCurve, ProfileFunctions, Target, UCase

logger = logging.getLogger(__name__)

PSI3_CLOSED_TOL = 1e-6


# ==========================================================================
# PRODUCT CHART
# ==========================================================================

class ProductChart(ImmersionChart):
    """Warped product of two factor lifts along a Legendre curve."""

    def __init__(self, f1: FactorLift, f2: FactorLift, curve: LegendreCurve,
                 kind: str = "warped", expected: Optional[Dict[str, Any]] = None,
                 extra: Optional[Dict[str, Any]] = None):
        target = self._check_signatures(f1, f2, curve)
        residuals = [validate_factor(f) for f in (f1, f2)]
        N = f1.space.complex_dim + f2.space.complex_dim
        space = HermitianSpace(N, Signature.LORENTZ, -1.0) if target == Target.CH else HermitianSpace(N)
        domain = np.vstack([curve.domain, f1.domain.reshape(-1, 2), f2.domain.reshape(-1, 2)])
        name = f"{kind}_{target.value.lower()}({f1.name},{f2.name})"

        self.f1 = f1
        self.f2 = f2
        self.curve = curve
        self.target = target
        self.radii = self._radii(curve)
        self.slots = self._slots()
        metadata = {
            "kind": kind,
            "target": target.value,
            "factors": [f1.name, f2.name],
            "slots": self.slots,
            "expected": expected,
            "factor_residuals": residuals,
        }
        metadata.update(extra or {})
        super().__init__(space, domain, name, metadata)
        logger.debug("built %s with dim %d in C^%d", name, self.dim, N)

    @staticmethod
    def _check_signatures(f1: FactorLift, f2: FactorLift, curve: LegendreCurve) -> Target:
        if not curve.space.is_lorentz:
            if f1.space.is_lorentz or f2.space.is_lorentz:
                raise ConstructionError("CP products need definite factors and a curve in S^3")
            return Target.CP
        if not f1.space.is_lorentz or f2.space.is_lorentz:
            raise ConstructionError("CH products need a Lorentz first factor and a definite second factor")
        return Target.CH

    @staticmethod
    def _radii(curve: LegendreCurve) -> Tuple[Optional[float], Optional[float]]:
        if isinstance(curve, CalabiCurve):
            return curve.params.r1, curve.params.r2
        return None, None

    def _slots(self) -> List[Dict[str, Any]]:
        slots = []
        start = 1
        for f, radius in zip((self.f1, self.f2), self.radii):
            slots.append({"factor": f.name, "indices": [start, start + f.dim], "dim": f.dim, "radius": radius})
            start += f.dim
        return slots

    def factor_params(self, u) -> Tuple[np.ndarray, np.ndarray]:
        """Split a product parameter into the factor parameters (p, q)."""
        u = np.asarray(u, dtype=float).reshape(-1)
        n1 = self.f1.dim
        return u[1:1 + n1], u[1 + n1:]

    def evaluate(self, params):
        n1 = self.f1.dim
        t = params[0]
        c1, c2 = self.curve.components(t)
        return ([c1 * z for z in self.f1.evaluate(params[1:1 + n1])]
                + [c2 * z for z in self.f2.evaluate(params[1 + n1:])])


def _expected_calabi(params: CalabiParams, f1: FactorLift, f2: FactorLift) -> Dict[str, Any]:
    v1, v2 = params.block_values()
    blocks = [[v, f.dim] for v, f in ((v1, f1), (v2, f2)) if f.dim > 0]
    return {"lambda1": params.lambda1(), "blocks": blocks}


# ==========================================================================
# CONSTRUCTIONS
# ==========================================================================

def warped_product(f1: FactorLift, f2: FactorLift, curve: LegendreCurve) -> ProductChart:
    """
    Warped product chart of two factor lifts along a Legendre curve.

    Raises:
        ConstructionError: factor/curve signatures do not fit CP or CH
    """
    return ProductChart(f1, f2, curve, kind="warped")


def calabi_product(f1: FactorLift, f2: FactorLift, params: CalabiParams) -> ProductChart:
    """Warped product along the Calabi curve of params; records the expected eigenvalues."""
    return ProductChart(f1, f2, CalabiCurve(params), kind="calabi",
                        expected=_expected_calabi(params, f1, f2),
                        extra={"params": {"r1": params.r1, "r2": params.r2, "a": params.a}})


def warped_product_from_profile(factor: FactorLift, prof: ProfileFunctions, target: Target,
                                case: Optional[UCase] = None) -> ProductChart:
    """Warped product over the profile curve of prof with the factor in the warp slot."""
    curve = ProfileCurve(prof, target, case)
    if target == Target.CP:
        f1, f2 = factor, point()
    elif curve.warp_slot == 1:
        f1, f2 = point("Lorentz"), factor
    else:
        f1, f2 = factor, point()
    return ProductChart(f1, f2, curve, kind="warped",
                        extra={"profile": prof.describe(), "case": curve.case.value if curve.case else None})


def _require_minimal(f: FactorLift):
    if f.is_point:
        return
    measured = factor_mean_curvature(f)
    if measured > Config.TOL_FIRST_ORDER:
        raise PreconditionError(f"factor {f.name} is not minimal: |H| = {measured:.3e}", measured=measured)


def minimal_calabi_cp(f1: FactorLift, n: int) -> ProductChart:
    """
    Minimal Calabi product in CP^n over a minimal factor of dimension n - 1:

        (sqrt(n/(n+1)) e^{i t/(n+1)} psi_1, sqrt(1/(n+1)) e^{-i n t/(n+1)})

    Raises:
        PreconditionError: the factor has the wrong dimension or is not minimal
    """
    if f1.dim != n - 1:
        raise PreconditionError(f"factor dimension {f1.dim} != n - 1 = {n - 1}", measured=float(f1.dim))
    _require_minimal(f1)
    params = CalabiParams(math.sqrt(n / (n + 1.0)), math.sqrt(1.0 / (n + 1.0)),
                          math.sqrt(n) / (n + 1.0), Target.CP)
    chart = calabi_product(f1, point(), params)
    chart.metadata["kind"] = "minimal_calabi"
    return chart


def minimal_calabi_two_factor(f1: FactorLift, f2: FactorLift) -> ProductChart:
    """Minimal two-factor Calabi product in CP^{n1+n2+1}; both factors must be minimal."""
    _require_minimal(f1)
    _require_minimal(f2)
    n1, n2 = f1.dim, f2.dim
    N = n1 + n2 + 2.0
    params = CalabiParams(math.sqrt((n1 + 1) / N), math.sqrt((n2 + 1) / N),
                          math.sqrt((n1 + 1) * (n2 + 1)) / N, Target.CP)
    chart = calabi_product(f1, f2, params)
    chart.metadata["kind"] = "minimal_calabi_two_factor"
    return chart


class PhasePerturbedChart(ImmersionChart):
    """psi e^{i eps u_1}: breaks horizontality along the first parameter."""

    def __init__(self, base: ImmersionChart, eps: float):
        super().__init__(base.space, base.domain, f"{base.name}~phase({eps:g})",
                         {**base.metadata, "kind": "perturbed", "eps": eps, "base": base.name})
        self.base = base
        self.eps = float(eps)

    def evaluate(self, params):
        phase = cexp(CJet(Jet3.constant(0.0, len(params)), params[0] * self.eps))
        return [phase * z for z in self.base.evaluate(params)]


def phase_perturbed(chart: ImmersionChart, eps: float) -> PhasePerturbedChart:
    return PhasePerturbedChart(chart, eps)


# ==========================================================================
# NULL CASE (u = 0)
# ==========================================================================

class NullWarpChart(ImmersionChart):
    """
    The u = 0 chart into H_1^{2n+1}(-1) over a flat Lagrangian psi3 in C^{n-1}:

        e^{int (k + i l2)} (X, w (X - 1), psi3),   X = A0 - int (k + i l2) e^{-2 int k}

    with w = i l2(0) - k(0) (|w| = 1 when u = 0), Re A0 = 1 + |psi3|^2 / 2 and
    d(Im A0) the pulled-back form v -> <psi3_*(v), J psi3>.
    """

    def __init__(self, psi3: FlatChart, prof: ProfileFunctions):
        if prof.c != -1.0:
            raise WrongCaseError(f"null-warp charts need c = -1, got {prof.c}")
        if abs(prof.u) > Config.NULL_U_TOL:
            raise WrongCaseError(f"null-warp charts need u = 0, got u = {prof.u:.6g}")
        lo, hi = psi3.domain[:, 0], psi3.domain[:, 1]
        self.origin = np.clip(np.zeros(psi3.dim), lo, hi)
        if np.any(self.origin != 0.0):
            raise ConstructionError(f"{psi3.name}: parameter box must contain the origin")

        d = psi3.dim
        domain = np.vstack([[prof.interval], psi3.domain])
        super().__init__(HermitianSpace(d + 2, Signature.LORENTZ, -1.0), domain,
                         f"null_warp({psi3.name})",
                         {"kind": "null_warp", "target": Target.CH.value, "psi3": psi3.name,
                          "profile": prof.describe(), "expected": None})
        self.psi3 = psi3
        self.prof = prof
        self.w = complex(-prof.k_0, prof.lambda2_0)

    # ----------------------------------------------------------------------
    # Im A0
    # ----------------------------------------------------------------------

    def _omega(self, u) -> np.ndarray:
        """Pulled-back form omega_a = Im(psi_a conj(psi)) at u."""
        lift = eval_chart_jet(self.psi3, u, order=1)
        return np.imag(lift.d1 @ np.conj(lift.value))

    def im_a0(self, u) -> float:
        """Im A0 by staircase integration of omega from the origin."""
        u = np.asarray(u, dtype=float).reshape(-1)
        total = 0.0
        base = self.origin.copy()
        for a in range(self.psi3.dim):
            if u[a] != base[a]:
                def integrand(s, a=a, base=base.copy()):
                    x = base.copy()
                    x[a] = s
                    return self._omega(x)[a]

                value, _ = quad(integrand, base[a], u[a],
                                epsabs=Config.QUAD_TOL, epsrel=Config.QUAD_TOL, limit=200)
                total += value
            base[a] = u[a]
        return total

    def _im_a0_jet(self, params: List[Jet3]) -> Jet3:
        u = np.array([p.value for p in params])
        lift = eval_chart_jet(self.psi3, u, order=3)
        z, X1, X2, X3 = np.conj(lift.value), lift.d1, lift.d2, lift.d3
        Xc1, Xc2 = np.conj(X1), np.conj(X2)
        f1 = np.imag(X1 @ z)
        f2 = np.imag(X2 @ z + np.einsum("aN,bN->ab", X1, Xc1))
        asym = float(np.max(np.abs(f2 - f2.T))) if f2.size else 0.0
        if asym > PSI3_CLOSED_TOL:
            raise InvalidPsi3Error(f"{self.psi3.name}: d(Im A0) form not closed (mixed-partial residual {asym:.3e})")
        f3 = np.imag(X3 @ z
                     + np.einsum("abN,cN->abc", X2, Xc1)
                     + np.einsum("acN,bN->abc", X2, Xc1)
                     + np.einsum("aN,bcN->abc", X1, Xc2))
        return Jet3.compose(params, self.im_a0(u), f1, 0.5 * (f2 + f2.T), f3)

    # ----------------------------------------------------------------------
    # Coordinates
    # ----------------------------------------------------------------------

    def evaluate(self, params):
        t, rest = params[0], params[1:]
        pj = self.prof.local_jets(t.value)
        E = lift_1d(cexp(CJet(pj.int_k, pj.int_lambda2)), t)
        N = lift_1d(pj.N, t)
        psi3 = [z if isinstance(z, CJet) else CJet.from_real(z) for z in self.psi3.evaluate(rest)]
        norm2 = psi3[0].abs2()
        for z in psi3[1:]:
            norm2 = norm2 + z.abs2()
        A0 = CJet(norm2 * 0.5 + 1.0, self._im_a0_jet(list(rest)))
        X = A0 - N
        return [E * X, E * self.w * (X - 1.0)] + [E * z for z in psi3]

    def re_a0_residual(self, u) -> float:
        """|Re A0 - 1 - |psi3|^2 / 2| recovered from the chart's own coordinates."""
        u = np.asarray(u, dtype=float).reshape(-1)
        pj = self.prof.local_jets(float(u[0]))
        E = complex(np.exp(pj.int_k.value + 1j * pj.int_lambda2.value))
        value = self.point(u)
        A0 = value[0] / E + pj.N.value
        psi3 = value[2:] / E
        return abs(A0.real - 1.0 - 0.5 * float(np.sum(np.abs(psi3) ** 2)))


def null_profile(lambda1: str = "1", interval: Tuple[float, float] = (0.0, 0.25)) -> ProfileFunctions:
    """Integrated CH profile with lambda2(0) = 0, k(0) = 1, so u = 0."""
    return ProfileFunctions(lambda1, -1.0, lambda2_0=0.0, k_0=1.0, interval=interval, name="null_profile")


def null_warp_ch(psi3: FlatChart, prof: ProfileFunctions) -> NullWarpChart:
    """
    Raises:
        WrongCaseError: prof is not a c = -1, u = 0 profile
        InvalidPsi3Error: the Im A0 form of psi3 is not closed (raised on evaluation)
    """
    return NullWarpChart(psi3, prof)
