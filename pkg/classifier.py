"""
Detection of Calabi-product structure from sampled cubic forms.

At every sample the cubic form C is searched for a unit direction v with

    A_v v = lambda1 v,    A_v |_{v-perp} = lambda2 Id          (one block)
    A_v |_{v-perp} = lambda2 Id_{n1} + lambda3 Id_{n2}          (two blocks)

where A_v = sum_c C[:, :, c] v_c. The verdict then asks whether the detected
eigenvalues are constant over the samples.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import null_space

from config import Config
from errors import ContractViolationError, NotLagrangianError
from geometry import CubicForm, LocalGeometry, sweep
from jets import ImmersionChart

logger = logging.getLogger(__name__)

MAX_REFINE = 50
HOPM_STEPS = 100
NOT_CALABI_FACTOR = 1e3
# spreads closer than TIE_WIDTH * tol count as equal; the earlier candidate wins
TIE_WIDTH = 0.1


class VerdictKind(str, Enum):
    CALABI_WITH_POINT = "CalabiWithPoint"
    CALABI_TWO_FACTOR = "CalabiTwoFactor"
    NOT_CALABI = "NotCalabi"
    UNDETERMINED = "Undetermined"


@dataclass
class E1Detection:
    v: np.ndarray          # distinguished direction in frame coordinates
    lambda1: float
    lambda2: float
    spread: float          # width of the complementary spectrum
    residual: float        # |A_v v - lambda1 v|


@dataclass
class ThreeDetection:
    v: np.ndarray
    lambda1: float
    lambda2: float
    lambda3: float
    dims: Tuple[int, int]
    spread: float
    residual: float
    cross_block: float


# ==========================================================================
# NORMALIZATION
# ==========================================================================

def normalize_two(lambda1: float, lambda2: float, tol: float) -> Tuple[float, float, float]:
    """Flip v -> -v so lambda2 > 0 (or lambda1 >= 0 when lambda2 vanishes); returns the sign too."""
    if abs(lambda2) > tol:
        sign = 1.0 if lambda2 > 0 else -1.0
    else:
        sign = 1.0 if lambda1 >= 0 else -1.0
    return sign * lambda1, sign * lambda2, sign


def normalize_three(lambda1: float, blocks: Sequence[Tuple[float, int]], tol: float):
    """
    lambda1 > 0 when it is not negligible, otherwise the block of largest
    |value| is made positive; blocks are returned in descending order.
    """
    if abs(lambda1) >= tol:
        sign = 1.0 if lambda1 > 0 else -1.0
    else:
        big = max(blocks, key=lambda b: abs(b[0]))
        sign = 1.0 if big[0] >= 0 else -1.0
    flipped = sorted(((sign * value, dim) for value, dim in blocks), key=lambda b: -b[0])
    return sign * lambda1, flipped[0], flipped[1], sign


def expected_lambdas(chart: ImmersionChart, tol: float = Config.TOL_CLASSIFIER) -> Optional[List[float]]:
    """Eigenvalues a construction promises, normalized like detections."""
    expected = chart.metadata.get("expected")
    if not expected:
        return None
    blocks = [(float(v), int(d)) for v, d in expected["blocks"]]
    if len(blocks) == 1:
        l1, l2, _ = normalize_two(expected["lambda1"], blocks[0][0], tol)
        return [l1, l2]
    if len(blocks) == 2:
        l1, b2, b3, _ = normalize_three(expected["lambda1"], blocks, tol)
        return [l1, b2[0], b3[0]]
    return None


# ==========================================================================
# SPECTRAL HELPERS
# ==========================================================================

def _as_array(C: Union[CubicForm, np.ndarray]) -> np.ndarray:
    return C.C if isinstance(C, CubicForm) else np.asarray(C, dtype=float)


def _shape(C: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("abc,c->ab", C, v)


def _clusters(values: np.ndarray, merge: float) -> List[List[int]]:
    """Indices of values grouped so that neighbours closer than merge share a cluster."""
    order = np.argsort(values)
    groups: List[List[int]] = []
    for i in order:
        if groups and values[i] - values[groups[-1][-1]] <= merge:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    return groups


def _cluster_spread(values: np.ndarray, groups: List[List[int]]) -> float:
    return max((float(np.ptp(values[g])) for g in groups), default=0.0)


def _complement(A: np.ndarray, v: np.ndarray):
    Q = null_space(v[None, :])
    vals, vecs = np.linalg.eigh(Q.T @ A @ Q)
    return vals, Q @ vecs


def _candidates(C: np.ndarray) -> List[np.ndarray]:
    n = C.shape[0]
    starts = [row for row in np.eye(n)]
    for a in range(n):
        _, vecs = np.linalg.eigh(C[:, :, a])
        starts.extend(vecs.T)
    # shifted symmetric higher-order power iteration towards Z-eigenvectors
    alpha = float(np.sqrt(np.sum(C * C))) + 1.0
    for v0 in list(np.eye(n)) + [np.ones(n) / math.sqrt(n)]:
        v = v0.copy()
        for _ in range(HOPM_STEPS):
            w = np.einsum("abc,a,b->c", C, v, v) + alpha * v
            v = w / np.linalg.norm(w)
        starts.append(v)
    return starts


def _refine(C: np.ndarray, v: np.ndarray, target: int, merge: float) -> np.ndarray:
    """Fixed point v <- eigenvector of A_v whose complementary spectrum best fits target clusters."""
    for _ in range(MAX_REFINE):
        vals, vecs = np.linalg.eigh(_shape(C, v))
        best, best_score = None, None
        for i in range(len(vals)):
            rest = np.delete(vals, i)
            groups = _clusters(rest, merge)
            w = vecs[:, i]
            score = (abs(len(groups) - target), _cluster_spread(rest, groups), -abs(float(w @ v)))
            if best_score is None or score < best_score:
                best, best_score = w, score
        if best @ v < 0:
            best = -best
        if np.linalg.norm(best - v) < 1e-15:
            return best
        v = best
    return v


def _eigen_data(C: np.ndarray, v: np.ndarray, merge: float):
    A = _shape(C, v)
    lambda1 = float(v @ A @ v)
    residual = float(np.linalg.norm(A @ v - lambda1 * v))
    vals, vecs = _complement(A, v)
    groups = _clusters(vals, merge)
    return lambda1, residual, vals, vecs, groups


# ==========================================================================
# DETECTION
# ==========================================================================

def detect_e1(C: Union[CubicForm, np.ndarray], tol: float = Config.TOL_CLASSIFIER) -> Optional[E1Detection]:
    """
    Distinguished direction with a single complementary eigenvalue, or None.

    Candidates (basis vectors, eigenvectors of A_{e_a}, power-iteration
    limits) are refined and the passing one with the narrowest complementary
    spectrum wins; ties go to the earlier candidate.
    """
    C = _as_array(C)
    n = C.shape[0]
    if n < 2:
        raise ContractViolationError(f"detect_e1 needs n >= 2, got {n}")
    merge = 10.0 * tol
    best: Optional[E1Detection] = None
    for start in _candidates(C):
        v = _refine(C, start, 1, merge)
        lambda1, residual, vals, _, groups = _eigen_data(C, v, merge)
        if residual > tol or len(groups) != 1:
            continue
        lambda2 = float(np.mean(vals))
        if abs(lambda1 - 2.0 * lambda2) < tol:
            continue
        spread = float(np.ptp(vals))
        if best is None or spread < best.spread - TIE_WIDTH * tol:
            best = E1Detection(v, lambda1, lambda2, spread, residual)
    if best is None:
        return None
    l1, l2, sign = normalize_two(best.lambda1, best.lambda2, tol)
    return E1Detection(sign * best.v, l1, l2, best.spread, best.residual)


def detect_three(C: Union[CubicForm, np.ndarray], tol: float = Config.TOL_CLASSIFIER) -> Optional[ThreeDetection]:
    """Distinguished direction whose complement splits into two blocks with no cross terms, or None."""
    C = _as_array(C)
    n = C.shape[0]
    if n < 3:
        raise ContractViolationError(f"detect_three needs n >= 3, got {n}")
    merge = 10.0 * tol
    best: Optional[ThreeDetection] = None
    for start in _candidates(C):
        v = _refine(C, start, 2, merge)
        lambda1, residual, vals, vecs, groups = _eigen_data(C, v, merge)
        if residual > tol or len(groups) != 2:
            continue
        B2, B3 = vecs[:, groups[0]], vecs[:, groups[1]]
        cross = float(np.max(np.abs(np.einsum("abc,ai,bj->ijc", C, B2, B3))))
        if cross > tol:
            continue
        l2, l3 = float(np.mean(vals[groups[0]])), float(np.mean(vals[groups[1]]))
        if min(abs(2 * l3 - lambda1), abs(lambda1 - 2 * l2), abs(2 * l2 - 2 * l3)) < tol:
            continue
        spread = _cluster_spread(vals, groups)
        if best is None or spread < best.spread - TIE_WIDTH * tol:
            best = ThreeDetection(v, lambda1, l2, l3, (len(groups[0]), len(groups[1])),
                                  spread, residual, cross)
    if best is None:
        return None
    l1, (l2, d2), (l3, d3), sign = normalize_three(
        best.lambda1, [(best.lambda2, best.dims[0]), (best.lambda3, best.dims[1])], tol)
    return ThreeDetection(sign * best.v, l1, l2, l3, (d2, d3), best.spread, best.residual, best.cross_block)


# ==========================================================================
# VERDICT
# ==========================================================================

@dataclass
class SampleResult:
    lagrangian: float
    one: Optional[E1Detection] = None
    three: Optional[ThreeDetection] = None
    mean_curvature: float = 0.0
    nabla_h: float = 0.0
    e1: Optional[np.ndarray] = None


@dataclass
class ClassifierVerdict:
    kind: VerdictKind
    e1: Optional[np.ndarray]
    lambdas: List[float]
    spread: List[float]
    constancy: bool
    minimal: bool
    parallel_h_residual: Optional[float]
    dims: Optional[Tuple[int, int]] = None
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "e1": None if self.e1 is None else [[float(z.real), float(z.imag)] for z in self.e1],
            "lambdas": [float(x) for x in self.lambdas],
            "spread": [float(x) for x in self.spread],
            "constancy": self.constancy,
            "minimal": self.minimal,
            "parallel_h_residual": None if self.parallel_h_residual is None else float(self.parallel_h_residual),
            "dims": None if self.dims is None else list(self.dims),
            "diagnostics": self.diagnostics,
        }


def _sample(chart: ImmersionChart, u, tol: float) -> SampleResult:
    geo = LocalGeometry(chart, u)
    lagrangian = geo.lagrangian_residual
    if lagrangian > Config.TOL_FIRST_ORDER:
        return SampleResult(lagrangian)
    C = geo.cubic_form.C
    one = detect_e1(C, tol) if geo.n >= 2 else None
    three = detect_three(C, tol) if geo.n >= 3 else None
    hit = three or one
    e1 = None if hit is None else hit.v @ geo.frame
    return SampleResult(lagrangian, one, three, geo.mean_curvature()[1], geo.nabla_h.max_abs(), e1)


def _spreads(rows: np.ndarray) -> List[float]:
    return [float(x) for x in np.ptp(rows, axis=0)] if len(rows) else []


def classify(chart: ImmersionChart, samples, tol: float = Config.TOL_CLASSIFIER,
             strict: bool = True) -> ClassifierVerdict:
    """
    Classify a Lagrangian lift chart from its cubic forms at the given samples.

    Raises:
        NotLagrangianError: some sample fails the Lagrangian precondition (strict mode)
    """
    points = np.asarray(samples, dtype=float).reshape(-1, chart.dim)
    results: List[SampleResult] = sweep(lambda ch, u: _sample(ch, u, tol), chart, points)
    lagrangian = max(r.lagrangian for r in results)
    diagnostics: Dict[str, Any] = {"samples": len(results), "lagrangian": lagrangian, "tolerance": tol}

    if lagrangian > Config.TOL_FIRST_ORDER:
        if strict:
            raise NotLagrangianError(
                f"{chart.name}: Lagrangian residual {lagrangian:.3e} exceeds {Config.TOL_FIRST_ORDER:.1e}",
                residual=lagrangian,
            )
        logger.info("%s: not Lagrangian (%.3e), verdict NotCalabi", chart.name, lagrangian)
        return ClassifierVerdict(VerdictKind.NOT_CALABI, None, [], [], False, False, None,
                                 diagnostics=diagnostics)

    threes = [r.three for r in results if r.three is not None]
    ones = [r.one for r in results if r.one is not None]
    dims = None
    if len(threes) == len(results):
        candidate = VerdictKind.CALABI_TWO_FACTOR
        rows = np.array([[d.lambda1, d.lambda2, d.lambda3] for d in threes])
        dims = threes[0].dims
        diagnostics["cross_block"] = max(d.cross_block for d in threes)
        diagnostics["eigen_residual"] = max(d.residual for d in threes)
        detected = len(threes)
    else:
        candidate = VerdictKind.CALABI_WITH_POINT
        rows = np.array([[d.lambda1, d.lambda2] for d in ones]).reshape(-1, 2)
        if ones:
            diagnostics["eigen_residual"] = max(d.residual for d in ones)
        detected = len(ones)

    spread = _spreads(rows)
    max_spread = max(spread, default=0.0)
    lambdas = [float(x) for x in rows.mean(axis=0)] if len(rows) else []
    constancy = bool(len(rows)) and max_spread <= tol
    diagnostics["detected"] = detected
    diagnostics["lambda_spread"] = max_spread
    diagnostics["mean_curvature_max"] = max(r.mean_curvature for r in results)

    if detected == len(results) and constancy:
        kind = candidate
    elif detected == 0 or max_spread > NOT_CALABI_FACTOR * tol:
        kind = VerdictKind.NOT_CALABI
    else:
        kind = VerdictKind.UNDETERMINED

    c = chart.space.c
    if kind == VerdictKind.CALABI_WITH_POINT:
        l1, l2 = lambdas
        diagnostics["lambda_relation"] = abs(l1 * l2 - l2 * l2 + c)
        minimal = c > 0 and abs(abs(l2) - 1.0 / math.sqrt(chart.dim)) <= tol
    elif kind == VerdictKind.CALABI_TWO_FACTOR:
        l1, l2, l3 = lambdas
        minimal = c > 0 and abs(l1 + dims[0] * l2 + dims[1] * l3) <= tol
    else:
        minimal = diagnostics["mean_curvature_max"] <= tol

    e1 = next((r.e1 for r in results if r.e1 is not None), None)
    verdict = ClassifierVerdict(kind, e1, lambdas, spread, constancy, bool(minimal),
                                max(r.nabla_h for r in results), dims, diagnostics)
    logger.info("%s: %s lambdas=%s spread=%.3e", chart.name, kind.value, lambdas, max_spread)
    return verdict


# ==========================================================================
# PARALLEL SECOND FUNDAMENTAL FORM
# ==========================================================================

@dataclass
class ParallelReport:
    max_abs: float
    factor_block: Optional[float] = None   # |D_block - D_factor / r^2|
    other_blocks: Optional[float] = None   # max |D| off the factor block

    def to_dict(self) -> Dict[str, Optional[float]]:
        return {"max_abs": self.max_abs, "factor_block": self.factor_block, "other_blocks": self.other_blocks}


def _single_factor_slot(chart: ImmersionChart):
    slots = chart.metadata.get("slots")
    if not slots or chart.metadata.get("expected") is None:
        return None
    nonpoint = [(i, s) for i, s in enumerate(slots) if s["dim"] > 0]
    if len(nonpoint) != 1 or nonpoint[0][1]["radius"] is None:
        return None
    return nonpoint[0]


def _parallel_sample(chart: ImmersionChart, u) -> Tuple[float, Optional[float], Optional[float]]:
    D = LocalGeometry(chart, u).nabla_h.D
    total = float(np.max(np.abs(D))) if D.size else 0.0
    found = _single_factor_slot(chart)
    if found is None:
        return total, None, None
    index, slot = found
    lo, hi = slot["indices"]
    factor = chart.f1 if index == 0 else chart.f2
    params = chart.factor_params(u)[index]
    D1 = LocalGeometry(factor, params).nabla_h.D
    block = D[lo:hi, lo:hi, lo:hi, lo:hi]
    block_residual = float(np.max(np.abs(block - D1 / slot["radius"] ** 2)))
    rest = D.copy()
    rest[lo:hi, lo:hi, lo:hi, lo:hi] = 0.0
    return total, block_residual, float(np.max(np.abs(rest)))


def parallel_residual(chart: ImmersionChart, samples) -> ParallelReport:
    """
    max |nabla h| over the samples. For a Calabi product with one non-point
    factor the factor block is compared with the factor's own nabla h, scaled
    by 1/r^2 for the warp radius r of its slot.
    """
    points = np.asarray(samples, dtype=float).reshape(-1, chart.dim)
    rows = sweep(_parallel_sample, chart, points)
    total = max(r[0] for r in rows)
    if rows[0][1] is None:
        return ParallelReport(total)
    return ParallelReport(total, max(r[1] for r in rows), max(r[2] for r in rows))
