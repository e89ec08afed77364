import math

import numpy as np
import pytest

import jets
from ambient import HermitianSpace
from errors import NotLagrangianError, RankDeficiencyError
from factors import totally_geodesic_sphere
from geometry import (
    LocalGeometry,
    codazzi_residual,
    decompose_second_derivatives,
    frame_at,
    gauss_residual,
    lagrangian_residual,
    mean_curvature,
    nabla_h,
    point_summary,
    second_fundamental_form,
    sectional_curvature,
    sweep,
    warp_connection_residual,
)
from jets import FunctionChart
from products import phase_perturbed


# ==========================================================================
# FRAMES
# ==========================================================================

class TestFrame:
    def test_round_sphere_metric(self):
        """Nested spherical coordinates give g = diag(1, sin^2 u1)."""
        chart = totally_geodesic_sphere(2)
        frame = frame_at(chart, [0.8, 0.5])
        assert np.allclose(frame.metric, np.diag([1.0, math.sin(0.8) ** 2]), atol=1e-14)
        gram = np.real(frame.tangent_frame @ np.conj(frame.tangent_frame).T)
        assert np.allclose(gram, np.eye(2), atol=1e-12)

    def test_round_sphere_christoffel(self):
        """Gamma^1_22 = -sin cos and Gamma^2_12 = cot on the round sphere."""
        frame = frame_at(totally_geodesic_sphere(2), [0.8, 0.5])
        G = frame.christoffel
        assert G[0, 1, 1] == pytest.approx(-math.sin(0.8) * math.cos(0.8))
        assert G[1, 0, 1] == pytest.approx(math.cos(0.8) / math.sin(0.8))
        assert G[1, 1, 0] == pytest.approx(G[1, 0, 1])

    def test_rank_deficient_chart(self):
        """Coordinates that move along one curve have no frame."""
        chart = FunctionChart(HermitianSpace(2), [[-1.0, 1.0]] * 2, "degenerate",
                              lambda p: [jets.cos(p[0] + p[1]), jets.sin(p[0] + p[1])])
        with pytest.raises(RankDeficiencyError):
            frame_at(chart, [0.1, 0.2])


# ==========================================================================
# LAGRANGIAN CHECKS
# ==========================================================================

class TestLagrangian:
    def test_real_sphere(self):
        """A real chart is Lagrangian to machine precision."""
        assert lagrangian_residual(totally_geodesic_sphere(3), [0.5, 0.6, 0.7]) < 1e-14

    def test_product_charts(self, calabi_cp2, calabi_ch_case1, null_chart, samples):
        for chart in (calabi_cp2, calabi_ch_case1, null_chart):
            assert max(lagrangian_residual(chart, u) for u in samples(chart)) < 1e-8

    def test_phase_perturbation_detected(self, calabi_cp2):
        """Turning the phase along t breaks horizontality."""
        chart = phase_perturbed(calabi_cp2, 0.1)
        u = calabi_cp2.center()
        assert lagrangian_residual(chart, u) > 1e-3
        with pytest.raises(NotLagrangianError) as info:
            second_fundamental_form(chart, u)
        assert info.value.residual > 1e-3
        assert second_fundamental_form(chart, u, check=False).n == 2


# ==========================================================================
# SECOND FUNDAMENTAL FORM
# ==========================================================================

class TestCubicForm:
    def test_calabi_structure(self, calabi_cp2, samples):
        """C111 = lambda1, C1ii = lambda2 with lambda1 lambda2 - lambda2^2 + 1 = 0."""
        for u in samples(calabi_cp2):
            C = second_fundamental_form(calabi_cp2, u).C
            l1, l2 = C[0, 0, 0], C[0, 1, 1]
            assert abs(l1) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-8)
            assert abs(l2) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-8)
            assert abs(l1 * l2 - l2 * l2 + 1.0) < 1e-8
            assert abs(C[1, 1, 1]) < 1e-8 and abs(C[0, 0, 1]) < 1e-8

    def test_symmetry(self, warped_profile_chart, samples):
        for u in samples(warped_profile_chart, 4):
            assert LocalGeometry(warped_profile_chart, u).cubic_form.symmetry_residual() < 1e-8

    def test_totally_geodesic(self):
        """The real sphere has vanishing second fundamental form."""
        C = second_fundamental_form(totally_geodesic_sphere(2), [0.7, 0.4]).C
        assert np.max(np.abs(C)) < 1e-12


class TestMeanCurvature:
    def test_minimal_chart(self, minimal_cp2, samples):
        assert max(mean_curvature(minimal_cp2, u)[1] for u in samples(minimal_cp2)) < 1e-7

    def test_ch_never_minimal(self, calabi_ch_case1, calabi_ch_case2, samples):
        """Both CH Calabi cases keep |H| well away from zero."""
        for chart in (calabi_ch_case1, calabi_ch_case2):
            assert min(mean_curvature(chart, u)[1] for u in samples(chart)) > 0.1


# ==========================================================================
# GAUSS, CODAZZI, NABLA H
# ==========================================================================

class TestIntegrability:
    @pytest.mark.parametrize("fixture", ["calabi_cp2", "calabi_ch_case1", "calabi_ch_case2",
                                         "minimal_two", "warped_profile_chart", "null_chart"])
    def test_gauss_and_codazzi(self, fixture, request, samples):
        chart = request.getfixturevalue(fixture)
        for u in samples(chart, 4):
            assert gauss_residual(chart, u) < 1e-6
            assert codazzi_residual(chart, u) < 1e-7

    def test_parallel_calabi(self, calabi_cp2, samples):
        """A Calabi product of a great circle and a point has nabla h = 0."""
        assert max(nabla_h(calabi_cp2, u).max_abs() for u in samples(calabi_cp2)) < 1e-7

    def test_varying_profile_not_parallel(self, warped_profile_chart):
        assert nabla_h(warped_profile_chart, warped_profile_chart.center()).max_abs() > 1e-3


class TestIntrinsic:
    def test_sphere_sectional_curvature(self):
        assert sectional_curvature(totally_geodesic_sphere(2), [0.9, 0.4], 0, 1) == pytest.approx(1.0, abs=1e-8)

    def test_calabi_connection(self, calabi_cp2, samples):
        """nabla_{E1} E1 = 0 and <nabla_{Ei} Ej, E1> = 0 on a Calabi product."""
        for u in samples(calabi_cp2, 4):
            assert warp_connection_residual(calabi_cp2, u, 0.0) < 1e-8

    def test_decomposition(self, calabi_cp2):
        """psi_ab splits along psi, J psi, E and J E with nothing left over."""
        parts = decompose_second_derivatives(calabi_cp2, calabi_cp2.center())
        assert parts.remainder < 1e-10
        assert parts.christoffel_check < 1e-10


# ==========================================================================
# SUMMARIES AND SWEEPS
# ==========================================================================

class TestSweep:
    def test_point_summary_keys(self, calabi_cp2):
        summary = point_summary(calabi_cp2, calabi_cp2.center())
        assert set(summary) == {"space", "frame", "lagrangian", "symmetry", "gauss", "codazzi",
                                "mean_curvature", "nabla_h", "remainder", "christoffel_check"}
        assert summary["space"] < 1e-12

    def test_order_preserved(self, calabi_cp2, samples):
        """Threaded sweeps return results in sample order."""
        points = samples(calabi_cp2, 12)
        firsts = sweep(lambda chart, u: float(u[0]), calabi_cp2, points, max_workers=4)
        assert firsts == [float(u[0]) for u in points]
        assert sweep(lambda chart, u: float(u[1]), calabi_cp2, points, max_workers=1) == \
            [float(u[1]) for u in points]
