"""
Legendre curves in S^3(1) and H_1^3(-1).

Two families are built here:

* Calabi curves, the exponential-phase curves with constant radii r1, r2.
* Profile curves, synthesized from the eigenvalue functions lambda1(t),
  lambda2(t) of a warped product. Their ingredients are integrals
  int_0^t (...) ds, carried as ODE state next to lambda2 and k so that jets can
  differentiate them exactly (the t-derivative of an integral is its integrand).
"""

import logging
import math
from abc import abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

import jets
from ambient import HermitianSpace, apply_J, real_inner
from config import Config
from errors import (
    ExcludedLocusError,
    InadmissibleProfileError,
    NullCaseError,
    OutOfDomainError,
    ParameterError,
    WrongCaseError,
)
from expr_parser import parse_expr
from jets import CJet, ImmersionChart, Jet3, antiderivative, cexp, derivative_1d, eval_chart_jet, lift_1d

logger = logging.getLogger(__name__)

ScalarFn = Callable[[Union[float, Jet3]], Union[float, Jet3]]

CALABI_CONSTRAINT_TOL = 1e-12


class Target(str, Enum):
    CP = "CP"
    CH = "CH"


class UCase(str, Enum):
    U_POS = "u_pos"
    U_NEG = "u_neg"


# ==========================================================================
# CALABI CURVES
# ==========================================================================

@dataclass(frozen=True)
class CalabiParams:
    """Radii and speed of a Calabi curve; r1^2 + r2^2 = 1 (CP) or -r1^2 + r2^2 = -1 (CH)."""

    r1: float
    r2: float
    a: float
    target: Target = Target.CP

    def __post_init__(self):
        if min(self.r1, self.r2, self.a) <= 0:
            raise ParameterError(
                f"parameter constraint violated: r1, r2, a must be positive "
                f"(got {self.r1}, {self.r2}, {self.a})"
            )
        if abs(self.constraint_defect()) > CALABI_CONSTRAINT_TOL:
            rule = "r1^2 + r2^2 = 1" if self.target == Target.CP else "-r1^2 + r2^2 = -1"
            raise ParameterError(
                f"parameter constraint violated: {rule} (defect {self.constraint_defect():.3e})"
            )

    def constraint_defect(self) -> float:
        if self.target == Target.CP:
            return self.r1 ** 2 + self.r2 ** 2 - 1.0
        return -self.r1 ** 2 + self.r2 ** 2 + 1.0

    @property
    def alpha(self) -> float:
        """Phase rate of the first component."""
        return self.r2 * self.a / self.r1

    @property
    def beta(self) -> float:
        """Phase rate (modulus) of the second component."""
        return self.r1 * self.a / self.r2

    def lambda1(self) -> float:
        if self.target == Target.CP:
            return self.r2 / self.r1 - self.r1 / self.r2
        return self.r2 / self.r1 + self.r1 / self.r2

    def block_values(self) -> Tuple[float, float]:
        """h(E1, X) = value * JX for X tangent to the slot-1 / slot-2 factor."""
        if self.target == Target.CP:
            return self.r2 / self.r1, -self.r1 / self.r2
        return self.r2 / self.r1, self.r1 / self.r2


def calabi_params_for_constant_profile(lambda2: float, target: Target) -> Tuple[CalabiParams, Optional[UCase]]:
    """
    Calabi parameters whose curve is the profile curve of constant lambda2.

    CP: r1 = 1/sqrt(1 + l2^2), r2 = l2 r1. CH with l2^2 > 1 puts the factor in
    the second slot (r1 = l2 r2); l2^2 < 1 puts it in the first (r2 = l2 r1).
    """
    l2 = abs(lambda2)
    if l2 == 0:
        raise ParameterError("constant lambda2 must be nonzero")
    if target == Target.CP:
        r1 = 1.0 / math.sqrt(1.0 + l2 * l2)
        return CalabiParams(r1, l2 * r1, 1.0, Target.CP), None
    if abs(l2 * l2 - 1.0) <= Config.NULL_U_TOL:
        raise NullCaseError("lambda2^2 = 1 gives u = 0; use the null-warp construction")
    if l2 > 1.0:
        r2 = 1.0 / math.sqrt(l2 * l2 - 1.0)
        return CalabiParams(l2 * r2, r2, 1.0, Target.CH), UCase.U_POS
    r1 = 1.0 / math.sqrt(1.0 - l2 * l2)
    return CalabiParams(r1, l2 * r1, 1.0, Target.CH), UCase.U_NEG


class LegendreCurve(ImmersionChart):
    """One-parameter horizontal chart into C^2 or C_1^2."""

    @abstractmethod
    def components(self, t: Jet3) -> List[CJet]:
        """Both coordinates as jets in the directions carried by t."""

    def evaluate(self, params):
        return self.components(params[0])


class CalabiCurve(LegendreCurve):
    """
    t -> (r1 e^{i alpha t}, r2 e^{-+ i beta t}).

    The second phase runs backwards for CP and forwards for CH, which is the
    sign that keeps the curve horizontal for the respective form.
    """

    def __init__(self, params: CalabiParams, interval: Tuple[float, float] = (-math.pi, math.pi)):
        space = HermitianSpace.cp(1) if params.target == Target.CP else HermitianSpace.ch(1)
        super().__init__(
            space, [interval], f"calabi_curve_{params.target.value.lower()}",
            metadata={"kind": "calabi", "r1": params.r1, "r2": params.r2, "a": params.a},
        )
        self.params = params
        self._sign2 = -1.0 if params.target == Target.CP else 1.0

    def components(self, t):
        p = self.params
        th1 = t * p.alpha
        th2 = t * (self._sign2 * p.beta)
        return [
            CJet(jets.cos(th1), jets.sin(th1)) * p.r1,
            CJet(jets.cos(th2), jets.sin(th2)) * p.r2,
        ]


def calabi_curve_cp(r1: float, r2: float, a: float) -> CalabiCurve:
    """Calabi curve in S^3(1); raises ParameterError unless r1^2 + r2^2 = 1."""
    return CalabiCurve(CalabiParams(r1, r2, a, Target.CP))


def calabi_curve_ch(r1: float, r2: float, a: float) -> CalabiCurve:
    """Calabi curve in H_1^3(-1); raises ParameterError unless -r1^2 + r2^2 = -1."""
    return CalabiCurve(CalabiParams(r1, r2, a, Target.CH))


# ==========================================================================
# PROFILE FUNCTIONS
# ==========================================================================

# state layout
L2, K, INT_K, INT_L2, INT_L1, RE_G, IM_G, RE_N, IM_N = range(9)
STATE_SIZE = 9


@dataclass
class ProfileJets:
    """One-variable jets of every profile quantity at t0."""

    t0: float
    lambda1: Jet3
    lambda2: Jet3
    k: Jet3
    int_k: Jet3
    int_lambda2: Jet3
    int_lambda1: Jet3
    G: CJet   # int_0^t exp(i(int l1 - 2 int l2) - 2 int k) ds
    N: CJet   # int_0^t (k + i l2) exp(-2 int k) ds


def _as_function(entry: Union[str, float, int, ScalarFn]) -> ScalarFn:
    if callable(entry):
        return entry
    if isinstance(entry, str):
        return parse_expr(entry)
    value = float(entry)
    return lambda t: value


def _as_jet(x: Union[float, Jet3], m: int = 1) -> Jet3:
    return x if isinstance(x, Jet3) else Jet3.constant(float(x), m)


class ProfileFunctions:
    """
    Eigenvalue profile (lambda1, lambda2) with c, k and the conserved u.

    lambda2 is either given explicitly or integrated from lambda2(0) together
    with k through

        lambda2' = (lambda1 - 2 lambda2) k
        k'       = -k^2 - lambda1 lambda2 + lambda2^2 - c

    All integrals start at t = 0, which must lie in the interval. The working
    interval is clipped where |lambda1 - 2 lambda2| reaches Config.LOCUS_TOL.
    """

    def __init__(
        self,
        lambda1: Union[str, float, ScalarFn],
        c: float,
        lambda2: Optional[Union[str, float, ScalarFn]] = None,
        lambda2_0: Optional[float] = None,
        k_0: float = 0.0,
        interval: Tuple[float, float] = (0.0, 1.0),
        name: str = "profile",
    ):
        if c not in (1.0, -1.0):
            raise ParameterError(f"profiles are normalized to c = +-1, got {c}")
        lo, hi = float(interval[0]), float(interval[1])
        if not lo <= 0.0 <= hi or lo == hi:
            raise ParameterError(f"interval {interval} must contain 0 and have positive length")
        if lambda2 is None and lambda2_0 is None:
            raise ParameterError("either lambda2 or lambda2_0 must be given")

        self.c = float(c)
        self.name = name
        self.lambda1 = _as_function(lambda1)
        self.explicit = lambda2 is not None
        self.lambda2 = _as_function(lambda2) if self.explicit else None
        self.requested_interval = (lo, hi)
        self.lambda2_0 = float(self._eval_lambda2_value(0.0) if self.explicit else lambda2_0)
        self.k_0 = float(self._k_definition(0.0).value if self.explicit else k_0)

        self._check_locus(0.0, self.lambda2_0)
        self._y0 = np.zeros(STATE_SIZE)
        self._y0[L2] = self.lambda2_0
        self._y0[K] = self.k_0
        self._forward = None
        self._backward = None
        self.interval = self._solve(lo, hi)
        if self.explicit:
            self.check_admissible()

    @classmethod
    def constant(cls, lambda1: float, lambda2: float, c: float,
                 interval: Tuple[float, float] = (-1.0, 1.0)) -> "ProfileFunctions":
        return cls(float(lambda1), c, lambda2=float(lambda2), interval=interval, name="constant")

    # ----------------------------------------------------------------------
    # Pointwise evaluation
    # ----------------------------------------------------------------------

    def _eval_lambda1(self, t: float) -> float:
        return float(self.lambda1(t))

    def _eval_lambda2_value(self, t: float) -> float:
        return float(self.lambda2(t))

    def _explicit_jets(self, t: float) -> Tuple[Jet3, Jet3]:
        T = Jet3.variable(t, 0, 1)
        return _as_jet(self.lambda1(T)), _as_jet(self.lambda2(T))

    def _k_definition(self, t: float) -> Jet3:
        """k = lambda2' / (lambda1 - 2 lambda2) for explicit profiles (exact to order 2)."""
        l1, l2 = self._explicit_jets(t)
        gap = l1 - 2.0 * l2
        if abs(gap.value) < Config.LOCUS_TOL:
            raise ExcludedLocusError(f"lambda1 - 2 lambda2 = {gap.value:.3e} at t = {t}")
        return derivative_1d(l2) / gap

    def _check_locus(self, t: float, lambda2: float):
        gap = self._eval_lambda1(t) - 2.0 * lambda2
        if abs(gap) < Config.LOCUS_TOL:
            raise ExcludedLocusError(f"lambda1 - 2 lambda2 = {gap:.3e} at t = {t}")

    def _rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        l1 = self._eval_lambda1(t)
        dy = np.empty(STATE_SIZE)
        if self.explicit:
            _, l2_jet = self._explicit_jets(t)
            k_jet = self._k_definition(t)
            l2, k = l2_jet.value, k_jet.value
            dy[L2] = l2_jet.first[0]
            dy[K] = k_jet.first[0]
        else:
            l2, k = y[L2], y[K]
            dy[L2] = (l1 - 2.0 * l2) * k
            dy[K] = -k * k - l1 * l2 + l2 * l2 - self.c
        amp = math.exp(-2.0 * y[INT_K])
        phase = y[INT_L1] - 2.0 * y[INT_L2]
        dy[INT_K] = k
        dy[INT_L2] = l2
        dy[INT_L1] = l1
        dy[RE_G] = amp * math.cos(phase)
        dy[IM_G] = amp * math.sin(phase)
        dy[RE_N] = amp * k
        dy[IM_N] = amp * l2
        return dy

    def _locus_event(self):
        def event(t, y):
            l2 = self._eval_lambda2_value(t) if self.explicit else y[L2]
            return abs(self._eval_lambda1(t) - 2.0 * l2) - Config.LOCUS_TOL
        event.terminal = True
        return event

    def _solve(self, lo: float, hi: float) -> Tuple[float, float]:
        reached = [lo, hi]
        for index, end in ((1, hi), (0, lo)):
            if end == 0.0:
                continue
            sol = solve_ivp(
                self._rhs, (0.0, end), self._y0, method="RK45",
                rtol=Config.QUAD_TOL, atol=Config.QUAD_TOL,
                dense_output=True, events=[self._locus_event()],
            )
            stop = float(sol.t[-1])
            if sol.status == 1:
                logger.warning("%s: excluded locus reached at t = %.6f, interval clipped", self.name, stop)
            elif sol.status == -1:
                logger.warning("%s: integration stopped at t = %.6f (%s)", self.name, stop, sol.message)
            logger.debug("%s: %d RHS evaluations towards t = %g", self.name, sol.nfev, end)
            reached[index] = stop
            if index == 1:
                self._forward = sol.sol
            else:
                self._backward = sol.sol
        return reached[0], reached[1]

    def working_interval(self) -> Tuple[float, float]:
        return self.interval

    def state_at(self, t: float) -> np.ndarray:
        """Full ODE state at t (lambda2, k and every running integral)."""
        lo, hi = self.interval
        if not lo <= t <= hi:
            raise OutOfDomainError(f"{self.name}: t = {t} outside working interval [{lo}, {hi}]")
        if t == 0.0:
            y = self._y0.copy()
        elif t > 0.0:
            y = np.asarray(self._forward(t), dtype=float)
        else:
            y = np.asarray(self._backward(t), dtype=float)
        if self.explicit:
            y[L2] = self._eval_lambda2_value(t)
            y[K] = self._k_definition(t).value
        return y

    # ----------------------------------------------------------------------
    # Jets and conserved quantity
    # ----------------------------------------------------------------------

    def local_jets(self, t0: float) -> ProfileJets:
        """Exact third-order jets in t of every profile quantity at t0."""
        y = self.state_at(t0)
        T = Jet3.variable(t0, 0, 1)
        l1 = _as_jet(self.lambda1(T))
        if self.explicit:
            l2 = _as_jet(self.lambda2(T))
            k = Jet3.constant(y[K], 1)
            for _ in range(3):
                k = antiderivative(-k * k - l1 * l2 + l2 * l2 - self.c, y[K])
        else:
            l2 = Jet3.constant(y[L2], 1)
            k = Jet3.constant(y[K], 1)
            # each Picard pass fixes one more Taylor order
            for _ in range(3):
                l2, k = (antiderivative((l1 - 2.0 * l2) * k, y[L2]),
                         antiderivative(-k * k - l1 * l2 + l2 * l2 - self.c, y[K]))
        int_k = antiderivative(k, y[INT_K])
        int_l2 = antiderivative(l2, y[INT_L2])
        int_l1 = antiderivative(l1, y[INT_L1])
        amp = jets.exp(-2.0 * int_k)
        dG = cexp(CJet(-2.0 * int_k, int_l1 - 2.0 * int_l2))
        G = CJet(antiderivative(dG.re, y[RE_G]), antiderivative(dG.im, y[IM_G]))
        N = CJet(antiderivative(k * amp, y[RE_N]), antiderivative(l2 * amp, y[IM_N]))
        return ProfileJets(t0, l1, l2, k, int_k, int_l2, int_l1, G, N)

    @property
    def u(self) -> float:
        """Conserved quantity at t = 0: c + k(0)^2 + lambda2(0)^2."""
        return self.c + self.k_0 ** 2 + self.lambda2_0 ** 2

    def u_at(self, t: float) -> float:
        y = self.state_at(t)
        return math.exp(2.0 * y[INT_K]) * (self.c + y[K] ** 2 + y[L2] ** 2)

    def lambda_gap(self, t: float) -> float:
        y = self.state_at(t)
        return self._eval_lambda1(t) - 2.0 * y[L2]

    def riccati_defect(self, t: float) -> float:
        """k' + k^2 + lambda1 lambda2 - lambda2^2 + c (k' from the defining quotient when explicit)."""
        if self.explicit:
            l1, l2 = self._explicit_jets(t)
            k = self._k_definition(t)
            return k.first[0] + k.value ** 2 + l1.value * l2.value - l2.value ** 2 + self.c
        pj = self.local_jets(t)
        k, l1, l2 = pj.k, pj.lambda1.value, pj.lambda2.value
        return k.first[0] + k.value ** 2 + l1 * l2 - l2 ** 2 + self.c

    def check_admissible(self, grid: Optional[np.ndarray] = None, tol: float = Config.TOL_GEOMETRY) -> float:
        """Max Riccati defect over the grid; raises InadmissibleProfileError above tol."""
        if grid is None:
            lo, hi = self.interval
            grid = np.linspace(lo, hi, Config.ODE_GRID_POINTS)
        worst = max(abs(self.riccati_defect(float(t))) for t in grid)
        if worst > tol:
            raise InadmissibleProfileError(f"{self.name}: Riccati defect {worst:.3e} exceeds {tol:.1e}")
        return worst

    def describe(self) -> Dict[str, float]:
        return {
            "c": self.c,
            "lambda2_0": self.lambda2_0,
            "k_0": self.k_0,
            "u": self.u,
            "interval": list(self.interval),
        }


# ==========================================================================
# PROFILE CURVES
# ==========================================================================

class ProfileCurve(LegendreCurve):
    """
    Legendre curve synthesized from a profile.

    CP:        (e^{A}/sqrt(u), (i l2 - k) e^{B}/sqrt(u))
    CH, u > 0: ((i l2 - k) e^{B}/sqrt(u), e^{A}/sqrt(u))
    CH, u < 0: (e^{A}/sqrt(-u), (i l2 - k) e^{B}/sqrt(-u))

    with A = int (k + i l2) and B = int (k + i (l1 - l2)). `warp_slot` is the
    component carrying e^{A}, the one a non-trivial factor is attached to.
    """

    def __init__(self, prof: ProfileFunctions, target: Target, case: Optional[UCase] = None):
        u = prof.u
        if target == Target.CP:
            if prof.c != 1.0:
                raise InadmissibleProfileError("CP profile curves need c = 1")
            if u <= 0.0:
                raise InadmissibleProfileError(f"CP profile curves need u > 0, got {u:.6g}")
            case = None
            space = HermitianSpace.cp(1)
            self.warp_slot = 0
        else:
            if prof.c != -1.0:
                raise InadmissibleProfileError("CH profile curves need c = -1")
            if abs(u) <= Config.NULL_U_TOL:
                raise NullCaseError(f"u = {u:.3e} is the null case; use the null-warp construction")
            actual = UCase.U_POS if u > 0 else UCase.U_NEG
            if case is None:
                case = actual
            if UCase(case) != actual:
                raise WrongCaseError(f"requested {UCase(case).value} but u = {u:.6g}")
            case = actual
            space = HermitianSpace.ch(1)
            self.warp_slot = 1 if case == UCase.U_POS else 0
        super().__init__(
            space, [prof.interval], f"profile_curve_{target.value.lower()}",
            metadata={"kind": "profile", "u": u, "case": case.value if case else None},
        )
        self.prof = prof
        self.target = target
        self.case = case
        self._scale = 1.0 / math.sqrt(abs(u))

    def components_1d(self, t0: float) -> Tuple[CJet, CJet]:
        pj = self.prof.local_jets(t0)
        A = CJet(pj.int_k, pj.int_lambda2)
        B = CJet(pj.int_k, pj.int_lambda1 - pj.int_lambda2)
        w = CJet(-pj.k, pj.lambda2)
        warp = cexp(A) * self._scale
        other = w * cexp(B) * self._scale
        if self.warp_slot == 0:
            return warp, other
        return other, warp

    def components(self, t):
        first, second = self.components_1d(t.value)
        return [lift_1d(first, t), lift_1d(second, t)]


def profile_curve_cp(prof: ProfileFunctions, t: float) -> np.ndarray:
    """Point of the CP profile curve at t."""
    return ProfileCurve(prof, Target.CP).point([t])


def profile_curve_ch(prof: ProfileFunctions, t: float, case: Union[UCase, str]) -> np.ndarray:
    """Point of the CH profile curve at t for the given sign case of u."""
    return ProfileCurve(prof, Target.CH, UCase(case)).point([t])


# ==========================================================================
# CHECKS
# ==========================================================================

def horizontality_residual(curve: ImmersionChart, t: float) -> float:
    """|<gamma', J gamma>| with the curve's signature."""
    lift = eval_chart_jet(curve, [t], order=1)
    return abs(real_inner(lift.d1[0], apply_J(lift.value), curve.space))


def curve_speed(curve: ImmersionChart, t: float) -> float:
    lift = eval_chart_jet(curve, [t], order=1)
    return math.sqrt(abs(real_inner(lift.d1[0], lift.d1[0], curve.space)))
