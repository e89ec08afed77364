"""
Checks of the profile ODE machinery.

For an admissible profile (lambda1, lambda2, k; c) every solution g of

    g'' + i lambda1 g' + (i lambda1' + c) g = 0

is built from the running integrals the profile already carries. The bundle
below assembles the explicit solution pairs and their companion functions as
one-variable complex jets, so first and second derivatives come from the
integrands rather than from differencing.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional

import numpy as np

from config import Config
from errors import ContractViolationError, EvaluationError, ExcludedLocusError
from jets import CJet, Jet3, cexp
from legendre import INT_K, ProfileFunctions, ProfileJets, Target

logger = logging.getLogger(__name__)

U_ZERO = "u_zero"
U_NONZERO = "u_nonzero"
G2_MIN = 1e-12


# ==========================================================================
# SOLUTION BUNDLE
# ==========================================================================

@dataclass
class SolutionFunction:
    """Complex function of t evaluated as a one-variable jet."""

    name: str
    jet_fn: Callable[[float], CJet]

    def jet(self, t: float) -> CJet:
        return self.jet_fn(float(t))

    def __call__(self, t: float) -> complex:
        return self.jet(t).value

    def derivative(self, t: float, order: int = 1) -> complex:
        j = self.jet(t)
        if order == 0:
            return j.value
        if order == 1:
            return complex(j.first[0])
        if order == 2:
            return complex(j.second[0, 0])
        raise ContractViolationError(f"derivative order {order} not available")


ZERO = SolutionFunction("zero", lambda t: CJet.constant(0.0, 1))


class SolutionBundle:
    """
    The solution pairs of the profile ODE and the f-functions built from them:

        g1 = (k - i l2) exp int (k - i l2)          f1 = c exp int (k - i l2)
        g2 = exp int (k + i (l2 - l1))              f2 = -g2 (k + i l2)
        g1tilde = g2 G                              f1tilde = -g1tilde' - i l1 g1tilde
        f = g1 / g2                                 ftilde = g1tilde / g2 = G

    with G = int exp(i (int l1 - 2 int l2) - 2 int k).
    """

    MEMBERS = ("g1", "g2", "g1tilde", "f1", "f2", "f1tilde", "f", "ftilde")

    def __init__(self, prof: ProfileFunctions):
        self.prof = prof
        self.c = prof.c
        for name in self.MEMBERS:
            setattr(self, name, SolutionFunction(name, self._member(name)))

    def _member(self, name: str) -> Callable[[float], CJet]:
        return lambda t: self.at(t)[name]

    def at(self, t: float) -> Dict[str, CJet]:
        """All eight functions as jets at t."""
        pj: ProfileJets = self.prof.local_jets(float(t))
        k, l2 = pj.k, pj.lambda2
        Ik, Il2, Il1 = pj.int_k, pj.int_lambda2, pj.int_lambda1
        k_minus = CJet(k, -l2)
        k_plus = CJet(k, l2)
        base = cexp(CJet(Ik, -Il2))
        g1 = k_minus * base
        g2 = cexp(CJet(Ik, Il2 - Il1))
        g1t = g2 * pj.G
        dG = cexp(CJet(-2.0 * Ik, Il1 - 2.0 * Il2))
        if abs(g2.value) < G2_MIN:
            raise EvaluationError(f"g2({t}) vanishes")
        return {
            "g1": g1,
            "g2": g2,
            "g1tilde": g1t,
            "f1": base * self.c,
            "f2": -(g2 * k_plus),
            "f1tilde": -(k_plus * g1t) - g2 * dG,
            "f": g1 / g2,
            "ftilde": pj.G,
        }


def build_solutions(prof: ProfileFunctions) -> SolutionBundle:
    return SolutionBundle(prof)


# ==========================================================================
# CHECKS
# ==========================================================================

def _lambda1_jet(prof: ProfileFunctions, t: float) -> Jet3:
    value = prof.lambda1(Jet3.variable(t, 0, 1))
    return value if isinstance(value, Jet3) else Jet3.constant(float(value), 1)


def riccati_residual(prof: ProfileFunctions, t: float) -> float:
    """
    |k' + k^2 + lambda1 lambda2 - lambda2^2 + c| at t.

    Raises:
        ExcludedLocusError: |lambda1 - 2 lambda2| < Config.LOCUS_TOL at t
    """
    gap = prof.lambda_gap(t)
    if abs(gap) < Config.LOCUS_TOL:
        raise ExcludedLocusError(f"lambda1 - 2 lambda2 = {gap:.3e} at t = {t}")
    return abs(prof.riccati_defect(t))


def u_constancy(prof: ProfileFunctions, grid: Iterable[float]):
    """(mean, max deviation) of u(t) = e^{2 int k} (c + k^2 + lambda2^2) over the grid."""
    values = np.array([prof.u_at(float(t)) for t in grid])
    mean = float(np.mean(values))
    return mean, float(np.max(np.abs(values - mean)))


def ode_residual(g: SolutionFunction, prof: ProfileFunctions, t: float) -> float:
    """|g'' + i lambda1 g' + (i lambda1' + c) g| at t."""
    j = g.jet(t)
    l1 = _lambda1_jet(prof, t)
    g0, g1, g2 = j.value, complex(j.first[0]), complex(j.second[0, 0])
    return abs(g2 + 1j * l1.value * g1 + (1j * l1.first[0] + prof.c) * g0)


def derivative_identities(bundle: SolutionBundle, t: float) -> Dict[str, float]:
    """f1' = c g1, f2' = c g2, f1tilde' = c g1tilde and f2 = -g2 (k + i lambda2)."""
    jets_ = bundle.at(t)
    c = bundle.c
    pj = bundle.prof.local_jets(t)
    return {
        "f1_prime": abs(complex(jets_["f1"].first[0]) - c * jets_["g1"].value),
        "f2_prime": abs(complex(jets_["f2"].first[0]) - c * jets_["g2"].value),
        "f1tilde_prime": abs(complex(jets_["f1tilde"].first[0]) - c * jets_["g1tilde"].value),
        "f2_closed_form": abs(jets_["f2"].value + jets_["g2"].value * complex(pj.k.value, pj.lambda2.value)),
    }


@dataclass
class IndependenceResult:
    fprime: complex
    ftilde_prime: complex
    case: str
    expected_modulus: float   # |u| e^{-2 int k}
    residual: float           # ||f'| - expected_modulus|
    passed: bool

    def to_dict(self) -> Dict:
        return {
            "fprime": [self.fprime.real, self.fprime.imag],
            "ftilde_prime": [self.ftilde_prime.real, self.ftilde_prime.imag],
            "case": self.case,
            "expected_modulus": self.expected_modulus,
            "residual": self.residual,
            "pass": self.passed,
        }


def independence_check(bundle: SolutionBundle, prof: ProfileFunctions, t: float,
                       tol: float = Config.TOL_FIRST_ORDER) -> IndependenceResult:
    """
    Nonvanishing derivative of the solution ratio.

    For u != 0, f' = -u exp(i int (l1 - 2 l2) - 2 int k), so |f'| = |u| e^{-2 int k} > 0.
    For u = 0, f' vanishes identically and the second pair is used: ftilde' != 0.

    Raises:
        EvaluationError: g2(t) vanishes
    """
    j = bundle.at(t)
    y = prof.state_at(t)
    fprime = complex(j["f"].first[0])
    ftilde_prime = complex(j["ftilde"].first[0])
    expected = abs(prof.u) * float(np.exp(-2.0 * y[INT_K]))
    residual = abs(abs(fprime) - expected)
    if abs(prof.u) <= Config.NULL_U_TOL:
        case = U_ZERO
        passed = abs(fprime) <= 1e-9 and abs(ftilde_prime) > 1e-9
    else:
        case = U_NONZERO
        passed = residual <= tol and abs(fprime) > 0.0
    return IndependenceResult(fprime, ftilde_prime, case, expected, residual, passed)


def null_f_constancy(bundle: SolutionBundle, grid: Iterable[float]) -> float:
    """max |f(t) - (k(0) - i lambda2(0))| over the grid; zero in the u = 0 case."""
    prof = bundle.prof
    target = complex(prof.k_0, -prof.lambda2_0)
    return max(abs(bundle.f(float(t)) - target) for t in grid)


def profile_for_chart(chart) -> Optional[ProfileFunctions]:
    """Profile behind a product chart: the stored one, or the constant profile of a Calabi chart."""
    prof = getattr(getattr(chart, "curve", None), "prof", None) or getattr(chart, "prof", None)
    if prof is not None:
        return prof
    expected = chart.metadata.get("expected")
    if not expected or len(expected["blocks"]) != 1:
        logger.info("%s: no single-block profile to check", chart.name)
        return None
    c = 1.0 if chart.metadata.get("target") == Target.CP.value else -1.0
    return ProfileFunctions.constant(expected["lambda1"], expected["blocks"][0][0], c)
