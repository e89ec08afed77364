import math

import numpy as np
import pytest

from ambient import (
    HermitianSpace,
    Signature,
    apply_J,
    fiber_phase,
    herm_inner,
    hopf_equivalent,
    real_inner,
    space_residual,
)
from errors import ContractViolationError, DegenerateInputError, ParameterError

C2 = HermitianSpace(2)
C2_1 = HermitianSpace(2, Signature.LORENTZ, -1.0)


# ==========================================================================
# SPACES
# ==========================================================================

class TestHermitianSpace:
    def test_signature_curvature_pairing(self):
        """Definite needs c > 0 and Lorentz needs c < 0."""
        with pytest.raises(ParameterError):
            HermitianSpace(2, Signature.DEFINITE, -1.0)
        with pytest.raises(ParameterError):
            HermitianSpace(2, Signature.LORENTZ, 1.0)

    def test_model_constructors(self):
        """cp(n) and ch(n) live in complex dimension n + 1."""
        assert HermitianSpace.cp(3).complex_dim == 4
        ch = HermitianSpace.ch(2)
        assert ch.is_lorentz and ch.c == -1.0
        assert ch.weights.tolist() == [-1.0, 1.0, 1.0]


# ==========================================================================
# FORMS
# ==========================================================================

class TestHermInner:
    def test_unit_vector(self):
        """(1, 0) has unit norm in the definite form."""
        assert herm_inner([1, 0], [1, 0], C2) == 1

    def test_lorentz_sign(self):
        """The Lorentz form negates the first coordinate."""
        assert herm_inner([1, 0], [1, 0], C2_1) == -1

    def test_conjugate_linear_second_slot(self):
        """(1, i) paired with (i, 1) gives -i + i = 0."""
        assert herm_inner([1, 1j], [1j, 1], C2) == pytest.approx(0.0)

    def test_dimension_mismatch(self):
        """Vectors must match the space's complex dimension."""
        with pytest.raises(ContractViolationError):
            herm_inner([1, 0, 0], [1, 0], C2)

    def test_broadcast_over_stacks(self):
        """Leading axes broadcast, one pairing per row."""
        z = np.array([[1, 0], [0, 1]], dtype=complex)
        assert np.allclose(real_inner(z, z, C2_1), [-1.0, 1.0])


class TestApplyJ:
    def test_examples(self):
        """J multiplies every coordinate by i."""
        assert np.allclose(apply_J([1, 0]), [1j, 0])
        assert np.allclose(apply_J([1j, 0]), [-1, 0])
        assert np.allclose(apply_J([2 + 1j, 3]), [-1 + 2j, 3j])

    def test_isometry_and_orthogonality(self):
        """J preserves the real form and <Jz, z> = 0 in both signatures."""
        rng = np.random.default_rng(3)
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        w = rng.normal(size=2) + 1j * rng.normal(size=2)
        for space in (C2, C2_1):
            assert real_inner(apply_J(z), apply_J(w), space) == pytest.approx(real_inner(z, w, space))
            assert abs(real_inner(apply_J(z), z, space)) < 1e-14


class TestSpaceResidual:
    def test_examples(self):
        """Residual is |<z, z> - 1/c|."""
        assert space_residual([1, 0], C2) == 0.0
        assert space_residual([1, 0], C2_1) == 0.0
        assert space_residual([2, 0], C2) == pytest.approx(3.0)


# ==========================================================================
# HOPF FIBERS
# ==========================================================================

class TestHopf:
    def test_same_fiber(self):
        """Vectors differing by a unit phase share a fiber."""
        assert hopf_equivalent([1, 0], [1j, 0], C2)
        s = 1.0 / math.sqrt(2.0)
        assert hopf_equivalent([s, s], [1j * s, 1j * s], C2)

    def test_orthogonal_fibers(self):
        """(1, 0) and (0, 1) lie on different fibers."""
        assert not hopf_equivalent([1, 0], [0, 1], C2)

    def test_phase_recovered(self):
        """fiber_phase returns theta with w = e^{i theta} z."""
        z = np.array([0.6, 0.8j])
        assert fiber_phase(z, np.exp(0.4j) * z, C2) == pytest.approx(0.4)

    def test_lorentz_phase(self):
        """The phase is read correctly when <z, z>_1 = -1."""
        z = np.array([math.sqrt(2.0), 1.0])
        assert fiber_phase(z, np.exp(-1.1j) * z, C2_1) == pytest.approx(-1.1)

    def test_degenerate_input(self):
        """A zero base vector has no fiber."""
        with pytest.raises(DegenerateInputError):
            hopf_equivalent([0, 0], [1, 0], C2)
