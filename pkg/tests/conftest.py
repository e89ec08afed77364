"""Shared charts for the test suite."""

import math

import pytest

from factors import great_circle, plane, point, totally_geodesic_hyperbolic
from legendre import CalabiParams, ProfileFunctions, Target
from products import (
    calabi_product,
    minimal_calabi_cp,
    minimal_calabi_two_factor,
    null_profile,
    null_warp_ch,
    warped_product_from_profile,
)

SAMPLES = 8
SEED = 7


@pytest.fixture(scope="session")
def calabi_cp2():
    """CP^2 Calabi product of a great circle and a point, r1 = sqrt(2/3)."""
    params = CalabiParams(math.sqrt(2.0 / 3.0), math.sqrt(1.0 / 3.0), 1.0, Target.CP)
    return calabi_product(great_circle(), point(), params)


@pytest.fixture(scope="session")
def calabi_ch_case1():
    """CH^2 Calabi product with the CP factor (great circle) in slot 2."""
    params = CalabiParams(math.sqrt(2.0), 1.0, 1.0, Target.CH)
    return calabi_product(point("Lorentz"), great_circle(), params)


@pytest.fixture(scope="session")
def calabi_ch_case2():
    """CH^2 Calabi product with the CH factor (real hyperbola) in slot 1."""
    params = CalabiParams(math.sqrt(2.0), 1.0, 1.0, Target.CH)
    return calabi_product(totally_geodesic_hyperbolic(1), point(), params)


@pytest.fixture(scope="session")
def minimal_cp2():
    return minimal_calabi_cp(great_circle(), 2)


@pytest.fixture(scope="session")
def minimal_two():
    return minimal_calabi_two_factor(great_circle(), great_circle())


@pytest.fixture(scope="session")
def varying_profile():
    return ProfileFunctions("2+sin(t)", 1.0, lambda2_0=0.3, k_0=0.0, interval=(-0.5, 0.5))


@pytest.fixture(scope="session")
def warped_profile_chart(varying_profile):
    return warped_product_from_profile(great_circle(), varying_profile, Target.CP)


@pytest.fixture(scope="session")
def null_chart():
    return null_warp_ch(plane(1), null_profile())


@pytest.fixture
def samples():
    return lambda chart, count=SAMPLES: chart.sample_points(count, SEED)
