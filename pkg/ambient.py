"""
Ambient complex spaces for the Lagrangian product toolkit.

C^{n+1} carries the standard Hermitian form, C_1^{n+1} the Lorentzian one that
negates the first coordinate. Vectors are numpy complex128 arrays with the
coordinate axis last, so every function below broadcasts over leading axes
(a stack of derivative vectors is paired in a single call).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from config import Config
from errors import ContractViolationError, DegenerateInputError, ParameterError

logger = logging.getLogger(__name__)

MIN_NORM = 1e-15

ArrayLike = Union[np.ndarray, list, tuple]


class Signature(str, Enum):
    DEFINITE = "Definite"
    LORENTZ = "Lorentz"


@dataclass(frozen=True)
class HermitianSpace:
    """C^{n+1} (Definite, c > 0) or C_1^{n+1} (Lorentz, c < 0)."""

    complex_dim: int
    signature: Signature = Signature.DEFINITE
    c: float = 1.0

    def __post_init__(self):
        if self.complex_dim < 1:
            raise ParameterError(f"complex_dim must be positive, got {self.complex_dim}")
        if self.c == 0:
            raise ParameterError("base curvature c must be nonzero")
        if self.signature == Signature.DEFINITE and self.c < 0:
            raise ParameterError("Definite signature requires c > 0")
        if self.signature == Signature.LORENTZ and self.c > 0:
            raise ParameterError("Lorentz signature requires c < 0")

    @property
    def weights(self) -> np.ndarray:
        """Diagonal of the Hermitian form (epsilon_k)."""
        eps = np.ones(self.complex_dim)
        if self.signature == Signature.LORENTZ:
            eps[0] = -1.0
        return eps

    @property
    def is_lorentz(self) -> bool:
        return self.signature == Signature.LORENTZ

    @classmethod
    def cp(cls, n: int) -> "HermitianSpace":
        """Ambient of the lift of CP^n(4): C^{n+1}, c = 1."""
        return cls(n + 1, Signature.DEFINITE, 1.0)

    @classmethod
    def ch(cls, n: int) -> "HermitianSpace":
        """Ambient of the lift of CH^n(-4): C_1^{n+1}, c = -1."""
        return cls(n + 1, Signature.LORENTZ, -1.0)


def as_cvector(z: ArrayLike) -> np.ndarray:
    return np.asarray(z, dtype=np.complex128)


def _check_dims(z: np.ndarray, space: HermitianSpace):
    if z.shape[-1] != space.complex_dim:
        raise ContractViolationError(
            f"vector has {z.shape[-1]} coordinates, space has {space.complex_dim}"
        )


# ==========================================================================
# FORMS AND STRUCTURE
# ==========================================================================

def herm_inner(z: ArrayLike, w: ArrayLike, space: HermitianSpace) -> Union[complex, np.ndarray]:
    """
    Hermitian pairing sum_k eps_k z_k conj(w_k).

    Args:
        z, w: complex arrays whose last axis has length space.complex_dim
        space: ambient space supplying the signature

    Returns:
        complex scalar (or array over the broadcast leading axes)
    """
    z = as_cvector(z)
    w = as_cvector(w)
    _check_dims(z, space)
    _check_dims(w, space)
    value = np.sum(space.weights * z * np.conj(w), axis=-1)
    return complex(value) if np.ndim(value) == 0 else value


def real_inner(z: ArrayLike, w: ArrayLike, space: HermitianSpace) -> Union[float, np.ndarray]:
    """Real inner product <z, w> (or <z, w>_1): the real part of herm_inner."""
    value = np.real(herm_inner(z, w, space))
    return float(value) if np.ndim(value) == 0 else value


def apply_J(z: ArrayLike) -> np.ndarray:
    """Complex structure: multiplication by i."""
    return 1j * as_cvector(z)


def space_residual(z: ArrayLike, space: HermitianSpace) -> Union[float, np.ndarray]:
    """Distance |<z,z> - 1/c| from the model hypersurface S^{2n+1}(c) / H_1^{2n+1}(c)."""
    value = np.abs(real_inner(z, z, space) - 1.0 / space.c)
    return float(value) if np.ndim(value) == 0 else value


# ==========================================================================
# HOPF FIBERS
# ==========================================================================

def fiber_phase(z: ArrayLike, w: ArrayLike, space: HermitianSpace) -> float:
    """Phase theta minimizing |w - e^{i theta} z| (phase of herm_inner(w, z))."""
    pairing = herm_inner(w, z, space) / space.c
    if abs(pairing) < MIN_NORM:
        return 0.0
    return float(np.angle(pairing))


def hopf_equivalent(z: ArrayLike, w: ArrayLike, space: HermitianSpace,
                    tol: float = Config.HOPF_TOL) -> bool:
    """
    Test whether w = e^{i theta} z for some theta (same Hopf fiber).

    Raises:
        DegenerateInputError: z has near-zero coordinates
    """
    z = as_cvector(z)
    w = as_cvector(w)
    _check_dims(z, space)
    _check_dims(w, space)
    if np.linalg.norm(z) < MIN_NORM:
        raise DegenerateInputError("hopf_equivalent: z has near-zero norm")
    theta = fiber_phase(z, w, space)
    distance = float(np.linalg.norm(w - np.exp(1j * theta) * z))
    logger.debug("hopf phase %.6f distance %.3e", theta, distance)
    return distance <= tol
