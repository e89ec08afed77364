"""
Forward-mode derivative arithmetic truncated at total order 3.

Overview
========

A :class:`Jet3` carries a real value together with its gradient, Hessian and
third-derivative tensor with respect to ``m`` seed directions. Arithmetic on
jets propagates all four components exactly (Leibniz rule for products,
Faa di Bruno for unary primitives), so an immersion written with jet
primitives yields psi, psi_a, psi_ab and psi_abc in one evaluation.

Mixed partials are symmetric by construction: every operation gathers the
Hessian and third tensor from their sorted-index (upper simplex) entries, so
``second[a, b]`` and ``second[b, a]`` are the same stored number and all six
permutations of a third-order index agree bitwise.

Complex coordinates are carried as :class:`CJet`, a pair of real jets.

Charts
======

:class:`ImmersionChart` is a map from a parameter box into an ambient
:class:`~ambient.HermitianSpace`, written against jets.
:func:`eval_chart_jet` seeds one variable per parameter and returns the lift
with all derivatives as complex numpy arrays.

Quadrature-backed functions (the profile integrals of :mod:`legendre`, the
null-case potential of :mod:`products`) enter through :meth:`Jet3.compose`,
with derivatives supplied analytically from their integrands.
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.stats import qmc

from ambient import HermitianSpace
from errors import ContractViolationError, OutOfDomainError, SingularEvaluationError

logger = logging.getLogger(__name__)

DIV_MIN = 1e-300


# ==========================================================================
# SYMMETRIC STORAGE
# ==========================================================================

@lru_cache(maxsize=None)
def _simplex_gather3(m: int) -> np.ndarray:
    """Flat index of the sorted representative for every (i, j, k)."""
    index = np.empty(m ** 3, dtype=np.intp)
    for flat, (i, j, k) in enumerate(product(range(m), repeat=3)):
        a, b, c = sorted((i, j, k))
        index[flat] = (a * m + b) * m + c
    return index


def _canon2(M: np.ndarray) -> np.ndarray:
    upper = np.triu(M)
    return upper + np.triu(M, 1).T


def _canon3(T: np.ndarray) -> np.ndarray:
    m = T.shape[0]
    return T.reshape(-1)[_simplex_gather3(m)].reshape(m, m, m)


def _sym3(u: np.ndarray, M: np.ndarray) -> np.ndarray:
    """T_ijk = u_i M_jk + u_j M_ik + u_k M_ij."""
    return (np.einsum("i,jk->ijk", u, M)
            + np.einsum("j,ik->ijk", u, M)
            + np.einsum("k,ij->ijk", u, M))


# ==========================================================================
# REAL JETS
# ==========================================================================

class Jet3:
    """Truncated Taylor data (value, gradient, Hessian, third tensor) in m directions."""

    __slots__ = ("value", "first", "second", "third")
    __array_ufunc__ = None

    def __init__(self, value: float, first, second=None, third=None):
        self.value = float(value)
        self.first = np.asarray(first, dtype=float).reshape(-1)
        m = self.first.shape[0]
        self.second = (np.zeros((m, m)) if second is None
                       else _canon2(np.asarray(second, dtype=float).reshape(m, m)))
        self.third = (np.zeros((m, m, m)) if third is None
                      else _canon3(np.asarray(third, dtype=float).reshape(m, m, m)))

    @classmethod
    def constant(cls, value: float, m: int) -> "Jet3":
        return cls(value, np.zeros(m))

    @classmethod
    def variable(cls, value: float, index: int, m: int) -> "Jet3":
        first = np.zeros(m)
        first[index] = 1.0
        return cls(value, first)

    @property
    def m(self) -> int:
        return self.first.shape[0]

    def __repr__(self):
        return f"Jet3(value={self.value!r}, first={self.first.tolist()!r})"

    def _coerce(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            if other.m != self.m:
                raise ContractViolationError(f"jet directions differ: {self.m} vs {other.m}")
            return other
        if isinstance(other, (int, float, np.integer, np.floating)):
            return Jet3.constant(float(other), self.m)
        return NotImplemented

    # ----------------------------------------------------------------------
    # Chain rules
    # ----------------------------------------------------------------------

    def apply(self, f0: float, f1: float, f2: float, f3: float) -> "Jet3":
        """Jet of f(self) given f and its first three derivatives at self.value."""
        G1, G2, G3 = self.first, self.second, self.third
        return Jet3(
            f0,
            f1 * G1,
            f2 * np.outer(G1, G1) + f1 * G2,
            f3 * np.einsum("i,j,k->ijk", G1, G1, G1) + f2 * _sym3(G1, G2) + f1 * G3,
        )

    @staticmethod
    def compose(inputs: Sequence["Jet3"], f0: float, f1, f2, f3) -> "Jet3":
        """
        Jet of a multivariate function F(inputs) known through its derivatives.

        Args:
            inputs: K jets with a common direction count m
            f0: F at the input values
            f1: gradient of F, shape (K,)
            f2: Hessian of F, shape (K, K)
            f3: third derivatives of F, shape (K, K, K)
        """
        G1 = np.stack([g.first for g in inputs])
        G2 = np.stack([g.second for g in inputs])
        G3 = np.stack([g.third for g in inputs])
        f1 = np.asarray(f1, dtype=float)
        f2 = np.asarray(f2, dtype=float)
        f3 = np.asarray(f3, dtype=float)
        first = f1 @ G1
        second = (np.einsum("ab,ai,bj->ij", f2, G1, G1)
                  + np.einsum("a,aij->ij", f1, G2))
        cross = np.einsum("ab,ai,bjk->ijk", f2, G1, G2)
        third = (np.einsum("abc,ai,bj,ck->ijk", f3, G1, G1, G1)
                 + cross + cross.transpose(1, 0, 2) + cross.transpose(2, 1, 0)
                 + np.einsum("a,aijk->ijk", f1, G3))
        return Jet3(f0, first, second, third)

    def partial(self, a: int) -> "Jet3":
        """Jet of d/du_a, accurate through order 2."""
        return Jet3(self.first[a], self.second[a], self.third[a], None)

    # ----------------------------------------------------------------------
    # Arithmetic
    # ----------------------------------------------------------------------

    def __neg__(self):
        return Jet3(-self.value, -self.first, -self.second, -self.third)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, (complex, np.complexfloating)):
            return CJet.from_real(self) + other
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Jet3(self.value + other.value, self.first + other.first,
                    self.second + other.second, self.third + other.third)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Jet3(self.value - other.value, self.first - other.first,
                    self.second - other.second, self.third - other.third)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            s = float(other)
            return Jet3(self.value * s, self.first * s, self.second * s, self.third * s)
        if isinstance(other, (complex, np.complexfloating)):
            z = complex(other)
            return CJet(self * z.real, self * z.imag)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a0, A1, A2, A3 = self.value, self.first, self.second, self.third
        b0, B1, B2, B3 = other.value, other.first, other.second, other.third
        return Jet3(
            a0 * b0,
            a0 * B1 + A1 * b0,
            a0 * B2 + A2 * b0 + np.outer(A1, B1) + np.outer(B1, A1),
            a0 * B3 + A3 * b0 + _sym3(A1, B2) + _sym3(B1, A2),
        )

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet3":
        x = self.value
        if abs(x) < DIV_MIN:
            raise SingularEvaluationError("div", f"denominator {x!r} is zero")
        return self.apply(1.0 / x, -1.0 / x ** 2, 2.0 / x ** 3, -6.0 / x ** 4)

    def __truediv__(self, other):
        if isinstance(other, (int, float, np.integer, np.floating)):
            if abs(other) < DIV_MIN:
                raise SingularEvaluationError("div", f"denominator {other!r} is zero")
            return self * (1.0 / float(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.reciprocal()

    def __pow__(self, n):
        if not float(n).is_integer():
            raise SingularEvaluationError("pow", f"exponent {n!r} is not an integer")
        n = int(n)
        x = self.value
        if x == 0.0 and n < 0:
            raise SingularEvaluationError("pow", f"zero base with exponent {n}")
        coeffs = []
        falling = 1.0
        for j in range(4):
            coeffs.append(0.0 if falling == 0.0 else falling * x ** (n - j))
            falling *= (n - j)
        return self.apply(*coeffs)


def _is_jet(x) -> bool:
    return isinstance(x, Jet3)


# ==========================================================================
# UNARY PRIMITIVES (float or Jet3)
# ==========================================================================

def exp(x):
    if not _is_jet(x):
        return math.exp(x)
    e = math.exp(x.value)
    return x.apply(e, e, e, e)


def sin(x):
    if not _is_jet(x):
        return math.sin(x)
    s, c = math.sin(x.value), math.cos(x.value)
    return x.apply(s, c, -s, -c)


def cos(x):
    if not _is_jet(x):
        return math.cos(x)
    s, c = math.sin(x.value), math.cos(x.value)
    return x.apply(c, -s, -c, s)


def sqrt(x):
    value = x.value if _is_jet(x) else float(x)
    if not value > 0.0:
        if not _is_jet(x) and value == 0.0:
            return 0.0
        raise SingularEvaluationError("sqrt", f"argument {value!r} is not positive")
    if not _is_jet(x):
        return math.sqrt(value)
    r = math.sqrt(value)
    return x.apply(r, 0.5 / r, -0.25 / (r * value), 0.375 / (r * value * value))


def atan(x):
    if not _is_jet(x):
        return math.atan(x)
    w = x.value
    q = 1.0 + w * w
    return x.apply(math.atan(w), 1.0 / q, -2.0 * w / q ** 2, (6.0 * w * w - 2.0) / q ** 3)


def atan2(y, x):
    """Two-argument arctangent; either argument may be a jet."""
    if not (_is_jet(y) or _is_jet(x)):
        return math.atan2(y, x)
    m = y.m if _is_jet(y) else x.m
    y = y if _is_jet(y) else Jet3.constant(y, m)
    x = x if _is_jet(x) else Jet3.constant(x, m)
    y0, x0 = y.value, x.value
    if abs(x0) < DIV_MIN and abs(y0) < DIV_MIN:
        raise SingularEvaluationError("atan2", "both arguments are zero")
    # w has value 0; atan2 = atan2(y0, x0) + atan(w) near the base point
    w = (x0 * y - y0 * x) / (x0 * x + y0 * y)
    return atan(w) + math.atan2(y0, x0)


# ==========================================================================
# COMPLEX JETS
# ==========================================================================

Scalar = Union[int, float, complex, np.number]


class CJet:
    """Complex-valued jet stored as real and imaginary Jet3 parts."""

    __slots__ = ("re", "im")
    __array_ufunc__ = None

    def __init__(self, re: Jet3, im: Jet3):
        self.re = re
        self.im = im

    @classmethod
    def constant(cls, z: complex, m: int) -> "CJet":
        z = complex(z)
        return cls(Jet3.constant(z.real, m), Jet3.constant(z.imag, m))

    @classmethod
    def from_real(cls, x: Jet3) -> "CJet":
        return cls(x, Jet3.constant(0.0, x.m))

    @property
    def m(self) -> int:
        return self.re.m

    @property
    def value(self) -> complex:
        return complex(self.re.value, self.im.value)

    @property
    def first(self) -> np.ndarray:
        return self.re.first + 1j * self.im.first

    @property
    def second(self) -> np.ndarray:
        return self.re.second + 1j * self.im.second

    @property
    def third(self) -> np.ndarray:
        return self.re.third + 1j * self.im.third

    def __repr__(self):
        return f"CJet(value={self.value!r})"

    def _coerce(self, other) -> "CJet":
        if isinstance(other, CJet):
            return other
        if isinstance(other, Jet3):
            return CJet.from_real(other)
        if isinstance(other, (int, float, complex, np.number)):
            return CJet.constant(other, self.m)
        return NotImplemented

    def __neg__(self):
        return CJet(-self.re, -self.im)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return CJet(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return CJet(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            z = complex(other)
            return CJet(self.re * z.real - self.im * z.imag, self.im * z.real + self.re * z.imag)
        if isinstance(other, Jet3):
            return CJet(self.re * other, self.im * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return CJet(self.re * other.re - self.im * other.im,
                    self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            if abs(other) < DIV_MIN:
                raise SingularEvaluationError("div", "complex denominator is zero")
            return self * (1.0 / complex(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.conj() * other.abs2().reciprocal()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def conj(self) -> "CJet":
        return CJet(self.re, -self.im)

    def times_i(self) -> "CJet":
        return CJet(-self.im, self.re)

    def abs2(self) -> Jet3:
        return self.re * self.re + self.im * self.im


def cexp(z: Union[CJet, complex]) -> Union[CJet, complex]:
    """Complex exponential of a CJet (or a plain complex number)."""
    if not isinstance(z, CJet):
        return complex(np.exp(z))
    e = exp(z.re)
    return CJet(e * cos(z.im), e * sin(z.im))


def lift_1d(f: Union[Jet3, CJet], t: Jet3) -> Union[Jet3, CJet]:
    """Compose a one-variable jet f(t) (taken at t.value) onto a multi-direction jet t."""
    if isinstance(f, CJet):
        return CJet(lift_1d(f.re, t), lift_1d(f.im, t))
    return t.apply(f.value, f.first[0], f.second[0, 0], f.third[0, 0, 0])


def antiderivative(f: Jet3, v0: float) -> Jet3:
    """One-variable jet of F with F' = f and F(t0) = v0."""
    return Jet3(v0, [f.value], [[f.first[0]]], [[[f.second[0, 0]]]])


def derivative_1d(f: Jet3) -> Jet3:
    """One-variable jet of f' (its third order is not known and is set to 0)."""
    return Jet3(f.first[0], [f.second[0, 0]], [[f.third[0, 0, 0]]])


# ==========================================================================
# IMMERSION CHARTS
# ==========================================================================

class ImmersionChart(ABC):
    """
    A smooth map from a parameter box into an ambient Hermitian space.

    Subclasses implement :meth:`evaluate` with jet arithmetic; every other
    quantity (lift values, derivatives, samples) is derived from it.
    """

    SAMPLE_MARGIN = 0.05

    def __init__(self, space: HermitianSpace, domain, name: str,
                 metadata: Optional[Dict[str, Any]] = None):
        self.space = space
        self.domain = np.asarray(domain, dtype=float).reshape(-1, 2)
        self.name = name
        self.metadata = dict(metadata or {})
        if np.any(self.domain[:, 0] > self.domain[:, 1]):
            raise ContractViolationError(f"{name}: domain box has lo > hi")

    @property
    def dim(self) -> int:
        return self.domain.shape[0]

    @abstractmethod
    def evaluate(self, params: Sequence[Jet3]) -> List[Union[CJet, complex]]:
        """Ambient coordinates of the lift at the jet-seeded parameters."""

    def contains(self, u) -> bool:
        u = np.asarray(u, dtype=float).reshape(-1)
        if u.shape[0] != self.dim:
            return False
        return bool(np.all(u >= self.domain[:, 0]) and np.all(u <= self.domain[:, 1]))

    def sample_points(self, count: int, seed: int) -> np.ndarray:
        """Scrambled Halton points in the box shrunk by SAMPLE_MARGIN per side."""
        lo, hi = self.domain[:, 0], self.domain[:, 1]
        width = hi - lo
        if self.dim == 0:
            return np.zeros((count, 0))
        sampler = qmc.Halton(d=self.dim, scramble=True, seed=seed)
        unit = sampler.random(count)
        return lo + width * (self.SAMPLE_MARGIN + (1.0 - 2.0 * self.SAMPLE_MARGIN) * unit)

    def point(self, u) -> np.ndarray:
        """Lift value psi(u) as a complex vector."""
        return eval_chart_jet(self, u, order=1).value

    def center(self) -> np.ndarray:
        return self.domain.mean(axis=1)


class FunctionChart(ImmersionChart):
    """Chart given by a plain callable over jet parameters."""

    def __init__(self, space: HermitianSpace, domain, name: str, fn,
                 metadata: Optional[Dict[str, Any]] = None):
        super().__init__(space, domain, name, metadata)
        self._fn = fn

    def evaluate(self, params):
        return list(self._fn(params))


@dataclass
class LiftJets:
    """Lift psi(u) and its partials; the coordinate axis is last."""

    value: np.ndarray                 # (N,)
    d1: np.ndarray                    # (m, N)
    d2: Optional[np.ndarray] = None   # (m, m, N)
    d3: Optional[np.ndarray] = None   # (m, m, m, N)
    order: int = 3
    point: np.ndarray = field(default_factory=lambda: np.zeros(0))


def eval_chart_jet(chart: ImmersionChart, u, order: int = 3) -> LiftJets:
    """
    Evaluate a chart and its partial derivatives at a parameter point.

    Args:
        chart: the immersion chart
        u: parameter point inside chart.domain
        order: highest derivative order returned (1, 2 or 3)

    Returns:
        LiftJets with complex arrays; orders above `order` are None

    Raises:
        OutOfDomainError: u lies outside the chart's parameter box
    """
    if order not in (1, 2, 3):
        raise ContractViolationError(f"order must be 1, 2 or 3, got {order}")
    u = np.asarray(u, dtype=float).reshape(-1)
    if not chart.contains(u):
        raise OutOfDomainError(f"{chart.name}: point {u.tolist()} outside domain {chart.domain.tolist()}")
    m = chart.dim
    params = [Jet3.variable(u[a], a, m) for a in range(m)]
    coords = chart.evaluate(params)
    if len(coords) != chart.space.complex_dim:
        raise ContractViolationError(
            f"{chart.name}: produced {len(coords)} coordinates, space has {chart.space.complex_dim}"
        )

    N = len(coords)
    value = np.zeros(N, dtype=np.complex128)
    d1 = np.zeros((m, N), dtype=np.complex128)
    d2 = np.zeros((m, m, N), dtype=np.complex128)
    d3 = np.zeros((m, m, m, N), dtype=np.complex128)
    for k, z in enumerate(coords):
        if isinstance(z, Jet3):
            z = CJet.from_real(z)
        if isinstance(z, CJet):
            value[k] = z.value
            d1[:, k] = z.first
            d2[:, :, k] = z.second
            d3[:, :, :, k] = z.third
        else:
            value[k] = complex(z)

    return LiftJets(
        value=value,
        d1=d1,
        d2=d2 if order >= 2 else None,
        d3=d3 if order >= 3 else None,
        order=order,
        point=u,
    )
