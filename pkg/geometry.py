"""
Induced geometry of a horizontal, C-totally-real lift.

Everything is computed upstairs in flat C^{n+1} (or C_1^{n+1}) from the jets of
the lift psi: the Lagrangian immersion into CP^n / CH^n is only ever seen
through the submersion. Index conventions:

    X1[a]        = psi_a                  (n, N)
    X2[a, b]     = psi_ab                 (n, n, N)
    X3[a, b, c]  = psi_abc                (n, n, n, N)
    P            = inverse Cholesky factor of the metric g, E = P @ X1
    C[a, b, c]   = <h(E_a, E_b), J E_c>
    D[w, a, b, c] = <(nabla h)(E_w, E_a, E_b), J E_c>
    R[a, b, c, d] = <R(E_a, E_b) E_c, E_d>
"""

import concurrent.futures
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, List, Sequence, TypeVar

import numpy as np

from ambient import apply_J, real_inner, space_residual
from config import Config
from errors import NotLagrangianError, RankDeficiencyError
from jets import ImmersionChart, LiftJets, eval_chart_jet

logger = logging.getLogger(__name__)

T = TypeVar("T")


# ==========================================================================
# RESULT TYPES
# ==========================================================================

@dataclass
class FrameData:
    """Orthonormal tangent frame and intrinsic connection data at a point."""

    point: np.ndarray           # psi(u), (N,)
    tangent_frame: np.ndarray   # E_a as rows, (n, N)
    metric: np.ndarray          # g_ab of the coordinate tangents, (n, n)
    christoffel: np.ndarray     # Gamma^c_ab stored as [c, a, b]
    transform: np.ndarray       # P with E = P @ X1
    connection: np.ndarray      # omega[a, b, c] = <nabla_{E_a} E_b, E_c>


@dataclass
class CubicForm:
    C: np.ndarray

    @property
    def n(self) -> int:
        return self.C.shape[0]

    def shape_matrix(self, v: np.ndarray) -> np.ndarray:
        """A_{Jv} as the matrix sum_c C[:, :, c] v_c."""
        return np.einsum("abc,c->ab", self.C, v)

    def symmetry_residual(self) -> float:
        C = self.C
        return float(max(
            np.max(np.abs(C - C.transpose(1, 0, 2))),
            np.max(np.abs(C - C.transpose(0, 2, 1))),
            np.max(np.abs(C - C.transpose(2, 1, 0))),
        ))

    def trace_vector(self) -> np.ndarray:
        """sum_a C[a, a, c] for each c."""
        return np.einsum("aac->c", self.C)


@dataclass
class NablaH:
    D: np.ndarray

    def codazzi_residual(self) -> float:
        D = self.D
        return float(max(
            np.max(np.abs(D - D.transpose(1, 0, 2, 3))),
            np.max(np.abs(D - D.transpose(0, 1, 3, 2))),
        ))

    def full_symmetry_residual(self) -> float:
        D = self.D
        return float(max(
            self.codazzi_residual(),
            np.max(np.abs(D - D.transpose(0, 2, 1, 3))),
        ))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.D))) if self.D.size else 0.0


@dataclass
class Decomposition:
    """Split of psi_ab along psi, J psi, the frame E and J E."""

    position: np.ndarray     # c <psi_ab, psi>, (n, n)
    fiber: np.ndarray        # c <psi_ab, J psi>, (n, n)
    tangential: np.ndarray   # <psi_ab, E_e>, (n, n, n)
    normal: np.ndarray       # <psi_ab, J E_e>, (n, n, n)
    remainder: float         # max Euclidean norm of what is left
    christoffel_check: float  # |tangential part - Christoffel prediction|


# ==========================================================================
# POINTWISE GEOMETRY
# ==========================================================================

def _phi(A: np.ndarray) -> np.ndarray:
    """Lower triangle with halved diagonal."""
    return np.tril(A) - 0.5 * np.diag(np.diag(A))


class LocalGeometry:
    """All induced quantities of a chart at one parameter point, computed lazily."""

    def __init__(self, chart: ImmersionChart, u):
        self.chart = chart
        self.space = chart.space
        self.c = chart.space.c
        self.lift: LiftJets = eval_chart_jet(chart, u, order=3)
        self.n = chart.dim

    def _ri(self, z, w):
        return real_inner(z, w, self.space)

    # ----------------------------------------------------------------------
    # Metric and frame
    # ----------------------------------------------------------------------

    @cached_property
    def metric(self) -> np.ndarray:
        X1 = self.lift.d1
        return self._ri(X1[:, None, :], X1[None, :, :])

    @cached_property
    def transform(self) -> np.ndarray:
        g = self.metric
        det = float(np.linalg.det(g))
        if det < Config.GRAM_DET_MIN:
            raise RankDeficiencyError(
                f"{self.chart.name}: Gram determinant {det:.3e} below {Config.GRAM_DET_MIN:.0e}"
            )
        try:
            L = np.linalg.cholesky(g)
        except np.linalg.LinAlgError as exc:
            raise RankDeficiencyError(f"{self.chart.name}: metric not positive definite") from exc
        return np.linalg.inv(L)

    @cached_property
    def frame(self) -> np.ndarray:
        return self.transform @ self.lift.d1

    @cached_property
    def metric_inverse(self) -> np.ndarray:
        return np.linalg.inv(self.metric)

    @cached_property
    def christoffel_low(self) -> np.ndarray:
        """Gamma_low[a, b, d] = 1/2 (d_a g_bd + d_b g_ad - d_d g_ab)."""
        dg = self.metric_derivative
        return 0.5 * (dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0))

    @cached_property
    def metric_derivative(self) -> np.ndarray:
        """dg[k, i, j] = d_k g_ij."""
        X1, X2 = self.lift.d1, self.lift.d2
        S = self._ri(X2[:, :, None, :], X1[None, None, :, :])   # S[i, k, j]
        return np.einsum("ikj->kij", S) + np.einsum("jki->kij", S)

    @cached_property
    def metric_second_derivative(self) -> np.ndarray:
        """ddg[l, k, i, j] = d_l d_k g_ij."""
        X1, X2, X3 = self.lift.d1, self.lift.d2, self.lift.d3
        Q = self._ri(X3[:, :, :, None, :], X1[None, None, None, :, :])   # Q[i, k, l, j]
        W = self._ri(X2[:, :, None, None, :], X2[None, None, :, :, :])   # W[i, k, j, l]
        return (np.einsum("iklj->lkij", Q) + np.einsum("ikjl->lkij", W)
                + np.einsum("jkli->lkij", Q) + np.einsum("jkil->lkij", W))

    @cached_property
    def christoffel(self) -> np.ndarray:
        """Gamma[c, a, b] = Gamma^c_ab."""
        return np.einsum("cd,abd->cab", self.metric_inverse, self.christoffel_low)

    @cached_property
    def christoffel_derivative(self) -> np.ndarray:
        """dGamma[e, c, a, b] = d_e Gamma^c_ab."""
        ginv = self.metric_inverse
        dg = self.metric_derivative
        ddg = self.metric_second_derivative
        dginv = -np.einsum("cp,epq,qd->ecd", ginv, dg, ginv)
        dlow = 0.5 * (ddg + ddg.transpose(0, 2, 1, 3) - ddg.transpose(0, 2, 3, 1))
        return (np.einsum("ecd,abd->ecab", dginv, self.christoffel_low)
                + np.einsum("cd,eabd->ecab", ginv, dlow))

    @cached_property
    def connection(self) -> np.ndarray:
        """omega[a, b, c] = <nabla_{E_a} E_b, E_c> from the derivative of the Cholesky frame."""
        P = self.transform
        dg = self.metric_derivative
        phis = np.stack([_phi(P @ dg[i] @ P.T) for i in range(self.n)])   # [i, b, c]
        inner = -phis + np.einsum("bj,ijd,cd->ibc", P, self.christoffel_low, P)
        return np.einsum("ai,ibc->abc", P, inner)

    def frame_data(self) -> FrameData:
        return FrameData(
            point=self.lift.value,
            tangent_frame=self.frame,
            metric=self.metric,
            christoffel=self.christoffel,
            transform=self.transform,
            connection=self.connection,
        )

    # ----------------------------------------------------------------------
    # Residuals of the lift itself
    # ----------------------------------------------------------------------

    def space_residual(self) -> float:
        return space_residual(self.lift.value, self.space)

    @cached_property
    def lagrangian_residual(self) -> float:
        E = self.frame
        JE = apply_J(E)
        Jpsi = apply_J(self.lift.value)
        totally_real = np.abs(self._ri(JE[:, None, :], E[None, :, :]))
        horizontal = np.abs(self._ri(E, Jpsi))
        return float(max(np.max(totally_real), np.max(horizontal)))

    def frame_residual(self) -> float:
        E = self.frame
        gram = self._ri(E[:, None, :], E[None, :, :])
        return float(np.max(np.abs(gram - np.eye(self.n))))

    def require_lagrangian(self, tol: float = Config.TOL_FIRST_ORDER):
        residual = self.lagrangian_residual
        if residual > tol:
            raise NotLagrangianError(
                f"{self.chart.name}: Lagrangian residual {residual:.3e} exceeds {tol:.1e} "
                f"at u = {self.lift.point.tolist()}",
                residual=residual,
            )

    # ----------------------------------------------------------------------
    # Second fundamental form
    # ----------------------------------------------------------------------

    @cached_property
    def decomposition(self) -> Decomposition:
        psi = self.lift.value
        Jpsi = apply_J(psi)
        X2 = self.lift.d2
        E = self.frame
        JE = apply_J(E)
        position = self.c * self._ri(X2, psi)
        fiber = self.c * self._ri(X2, Jpsi)
        tangential = self._ri(X2[:, :, None, :], E[None, None, :, :])
        normal = self._ri(X2[:, :, None, :], JE[None, None, :, :])
        rebuilt = (position[:, :, None] * psi + fiber[:, :, None] * Jpsi
                   + np.einsum("abe,eN->abN", tangential, E)
                   + np.einsum("abe,eN->abN", normal, JE))
        remainder = float(np.max(np.abs(X2 - rebuilt))) if X2.size else 0.0
        predicted = np.einsum("abd,ed->abe", self.christoffel_low, self.transform)
        check = float(np.max(np.abs(tangential - predicted))) if X2.size else 0.0
        return Decomposition(position, fiber, tangential, normal, remainder, check)

    @cached_property
    def cubic_form(self) -> CubicForm:
        P = self.transform
        normal = self.decomposition.normal
        return CubicForm(np.einsum("ai,bj,ijc->abc", P, P, normal))

    def mean_curvature(self):
        trace = self.cubic_form.trace_vector() / self.n
        H = np.einsum("c,cN->N", trace, apply_J(self.frame))
        return H, float(np.linalg.norm(trace))

    # ----------------------------------------------------------------------
    # Covariant derivative of h and curvature
    # ----------------------------------------------------------------------

    @cached_property
    def nabla_h(self) -> NablaH:
        X1, X2, X3 = self.lift.d1, self.lift.d2, self.lift.d3
        JX1 = apply_J(X1)
        JX2 = apply_J(X2)
        T = self._ri(X2[:, :, None, :], JX1[None, None, :, :])                       # T[a, b, c]
        dT = (self._ri(X3[:, :, :, None, :], JX1[None, None, None, :, :]).transpose(2, 0, 1, 3)
              + self._ri(X2[:, :, None, None, :], JX2[None, None, :, :, :]).transpose(3, 0, 1, 2))
        G = self.christoffel
        covariant = (dT
                     - np.einsum("ewa,ebc->wabc", G, T)
                     - np.einsum("ewb,aec->wabc", G, T)
                     - np.einsum("ewc,abe->wabc", G, T))
        P = self.transform
        return NablaH(np.einsum("wi,aj,bk,cl,ijkl->wabc", P, P, P, P, covariant))

    @cached_property
    def curvature(self) -> np.ndarray:
        """Intrinsic R[a, b, c, d] = <R(E_a, E_b) E_c, E_d> from the Christoffel jets."""
        G = self.christoffel
        dG = self.christoffel_derivative
        R_up = (np.einsum("iljk->lijk", dG) - np.einsum("jlik->lijk", dG)
                + np.einsum("lim,mjk->lijk", G, G) - np.einsum("ljm,mik->lijk", G, G))
        R_low = np.einsum("pl,pijk->ijkl", self.metric, R_up)
        P = self.transform
        return np.einsum("ai,bj,ck,dl,ijkl->abcd", P, P, P, P, R_low)

    def gauss_expected(self) -> np.ndarray:
        C = self.cubic_form.C
        delta = np.eye(self.n)
        return (np.einsum("bce,ade->abcd", C, C) - np.einsum("ace,bde->abcd", C, C)
                + self.c * (np.einsum("ad,bc->abcd", delta, delta)
                            - np.einsum("ac,bd->abcd", delta, delta)))

    def gauss_residual(self) -> float:
        return float(np.max(np.abs(self.curvature - self.gauss_expected())))


# ==========================================================================
# PUBLIC OPERATIONS
# ==========================================================================

def analyze(chart: ImmersionChart, u) -> LocalGeometry:
    return LocalGeometry(chart, u)


def frame_at(chart: ImmersionChart, u) -> FrameData:
    """
    Orthonormal frame (Gram-Schmidt in coordinate order) and Christoffel symbols.

    Raises:
        RankDeficiencyError: Gram determinant below Config.GRAM_DET_MIN
    """
    return LocalGeometry(chart, u).frame_data()


def lagrangian_residual(chart: ImmersionChart, u) -> float:
    """max(|<J E_a, E_b>|, |<E_a, J psi>|); zero iff the lift is horizontal and C-totally real."""
    return LocalGeometry(chart, u).lagrangian_residual


def second_fundamental_form(chart: ImmersionChart, u, check: bool = True) -> CubicForm:
    """
    Cubic form C_abc = <h(E_a, E_b), J E_c>.

    Raises:
        NotLagrangianError: the Lagrangian residual exceeds Config.TOL_FIRST_ORDER
    """
    geo = LocalGeometry(chart, u)
    if check:
        geo.require_lagrangian()
    return geo.cubic_form


def decompose_second_derivatives(chart: ImmersionChart, u) -> Decomposition:
    return LocalGeometry(chart, u).decomposition


def mean_curvature(chart: ImmersionChart, u):
    """Mean curvature vector H = (1/n) sum_a h(E_a, E_a) in the ambient, and its norm."""
    geo = LocalGeometry(chart, u)
    geo.require_lagrangian()
    return geo.mean_curvature()


def nabla_h(chart: ImmersionChart, u) -> NablaH:
    geo = LocalGeometry(chart, u)
    geo.require_lagrangian()
    return geo.nabla_h


def gauss_residual(chart: ImmersionChart, u) -> float:
    geo = LocalGeometry(chart, u)
    geo.require_lagrangian()
    return geo.gauss_residual()


def codazzi_residual(chart: ImmersionChart, u) -> float:
    """Codazzi symmetry in (w, a) plus slot symmetry in (b, c); D is never symmetrized."""
    geo = LocalGeometry(chart, u)
    geo.require_lagrangian()
    return geo.nabla_h.codazzi_residual()


def sectional_curvature(chart: ImmersionChart, u, a: int, b: int) -> float:
    """K(E_a, E_b) from the intrinsic curvature tensor."""
    return float(LocalGeometry(chart, u).curvature[a, b, b, a])


def warp_connection_residual(chart: ImmersionChart, u, k: float) -> float:
    """
    Deviation from the warped-product connection identities

        nabla_{E_1} E_1 = 0,   <nabla_{E_i} E_j, E_1> = -k delta_ij   (i, j >= 2)

    with k = 0 for Calabi products (which also gives nabla_{E_i} E_1 = 0).
    """
    omega = LocalGeometry(chart, u).connection
    n = omega.shape[0]
    along = np.abs(omega[0, 0, :])
    if n == 1:
        return float(np.max(along))
    fiber = omega[1:, 1:, 0] + k * np.eye(n - 1)
    return float(max(np.max(along), np.max(np.abs(fiber))))


def point_summary(chart: ImmersionChart, u) -> dict:
    """Every residual of the verification suite at one point."""
    geo = LocalGeometry(chart, u)
    lagrangian = geo.lagrangian_residual
    _, h_norm = geo.mean_curvature()
    return {
        "space": geo.space_residual(),
        "frame": geo.frame_residual(),
        "lagrangian": lagrangian,
        "symmetry": geo.cubic_form.symmetry_residual(),
        "gauss": geo.gauss_residual(),
        "codazzi": geo.nabla_h.codazzi_residual(),
        "mean_curvature": h_norm,
        "nabla_h": geo.nabla_h.max_abs(),
        "remainder": geo.decomposition.remainder,
        "christoffel_check": geo.decomposition.christoffel_check,
    }


# ==========================================================================
# SWEEPS
# ==========================================================================

def sweep(fn: Callable[[ImmersionChart, np.ndarray], T], chart: ImmersionChart,
          points: Sequence, max_workers: int = None) -> List[T]:
    """Evaluate fn(chart, u) at every point on a thread pool; result order = point order."""
    points = list(points)
    workers = max_workers or Config.MAX_WORKERS
    if workers <= 1 or len(points) <= 1:
        return [fn(chart, u) for u in points]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, chart, u) for u in points]
        return [f.result() for f in futures]
