import math

import numpy as np
import pytest

import jets
from ambient import HermitianSpace
from errors import OutOfDomainError, SingularEvaluationError
from jets import CJet, FunctionChart, Jet3, antiderivative, cexp, eval_chart_jet, lift_1d

H = 1e-5


def seeded(t: float) -> Jet3:
    return Jet3.variable(t, 0, 1)


def composite(t):
    """A composition tree touching every primitive."""
    num = jets.exp(t * -2.0) * (t + 1.0)
    den = jets.cos(t) + 2.0
    return num / den + jets.sqrt(t * t + 1.0) * jets.atan2(jets.sin(t), 2.0) - t ** 3


UNARY = [
    jets.sin,
    jets.cos,
    jets.atan,
    lambda x: jets.exp(jets.sin(x)),
    lambda x: jets.sqrt(x * x + 1.0),
    lambda x: jets.atan2(x, 2.0),
]
BINARY = [
    lambda a, b: a + b,
    lambda a, b: a - b,
    lambda a, b: a * b,
    lambda a, b: a / (b * b + 2.0),
]


def random_tree(rng, depth: int):
    """Random composition of primitives, at most depth operations deep; every leaf is affine in t."""
    if depth == 0 or rng.random() < 0.2:
        c, d = rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)
        return lambda t: t * c + d
    if rng.random() < 0.5:
        op, child = UNARY[rng.integers(len(UNARY))], random_tree(rng, depth - 1)
        return lambda t: op(child(t))
    op = BINARY[rng.integers(len(BINARY))]
    left, right = random_tree(rng, depth - 1), random_tree(rng, depth - 1)
    return lambda t: op(left(t), right(t))


# ==========================================================================
# PRIMITIVES
# ==========================================================================

class TestPrimitives:
    def test_square(self):
        """t^2 at 3: value 9, first 6, second 2, third 0."""
        j = seeded(3.0) * seeded(3.0)
        assert (j.value, j.first[0], j.second[0, 0], j.third[0, 0, 0]) == (9.0, 6.0, 2.0, 0.0)

    def test_exp_at_zero(self):
        """Every derivative of exp at 0 is 1."""
        j = jets.exp(seeded(0.0))
        assert [j.value, j.first[0], j.second[0, 0], j.third[0, 0, 0]] == [1.0, 1.0, 1.0, 1.0]

    def test_sin_of_square(self):
        """d/dt sin(t^2) at 1 is 2 cos(1)."""
        t = seeded(1.0)
        assert jets.sin(t * t).first[0] == pytest.approx(2.0 * math.cos(1.0), abs=1e-14)

    def test_integer_power(self):
        """t^-2 at 2 follows the falling-factorial rule."""
        j = seeded(2.0) ** -2
        assert j.value == pytest.approx(0.25)
        assert j.first[0] == pytest.approx(-0.25)
        assert j.second[0, 0] == pytest.approx(6.0 / 16.0)
        assert j.third[0, 0, 0] == pytest.approx(-24.0 / 32.0)

    def test_floats_pass_through(self):
        """Primitives accept plain floats."""
        assert jets.exp(0.0) == 1.0
        assert jets.sqrt(4.0) == 2.0


class TestSingularities:
    def test_division_by_zero(self):
        """Zero denominators raise with the operation name."""
        with pytest.raises(SingularEvaluationError) as info:
            seeded(1.0) / (seeded(1.0) - 1.0)
        assert info.value.operation == "div"

    def test_sqrt_of_negative(self):
        with pytest.raises(SingularEvaluationError) as info:
            jets.sqrt(seeded(-1.0))
        assert info.value.operation == "sqrt"

    def test_atan2_at_origin(self):
        with pytest.raises(SingularEvaluationError):
            jets.atan2(seeded(0.0) * 0.0, 0.0)


# ==========================================================================
# FINITE-DIFFERENCE AGREEMENT
# ==========================================================================

class TestFiniteDifferences:
    @pytest.mark.parametrize("t0", [-0.7, 0.0, 0.4, 1.3])
    def test_composite_against_differences(self, t0):
        """Each component matches a central difference of the one below it."""
        j = composite(seeded(t0))
        plus, minus = composite(seeded(t0 + H)), composite(seeded(t0 - H))
        assert j.value == pytest.approx(composite(t0), rel=1e-12)
        assert j.first[0] == pytest.approx((plus.value - minus.value) / (2 * H), rel=1e-6, abs=1e-7)
        assert j.second[0, 0] == pytest.approx((plus.first[0] - minus.first[0]) / (2 * H), rel=1e-6, abs=1e-7)
        assert j.third[0, 0, 0] == pytest.approx((plus.second[0, 0] - minus.second[0, 0]) / (2 * H), rel=1e-6, abs=1e-7)

    @pytest.mark.parametrize("seed", range(24))
    def test_random_trees(self, seed):
        """Seeded random trees up to depth 6 agree with cascaded central differences."""
        rng = np.random.default_rng(seed)
        f = random_tree(rng, 6)
        t0 = rng.uniform(-1.0, 1.0)
        j, plus, minus = f(seeded(t0)), f(seeded(t0 + H)), f(seeded(t0 - H))
        scale = 1.0 + max(abs(j.value), abs(j.first[0]), abs(j.second[0, 0]), abs(j.third[0, 0, 0]))
        assert j.value == pytest.approx(f(t0), rel=1e-12, abs=1e-15)
        differences = [
            (j.first[0], (plus.value - minus.value) / (2 * H)),
            (j.second[0, 0], (plus.first[0] - minus.first[0]) / (2 * H)),
            (j.third[0, 0, 0], (plus.second[0, 0] - minus.second[0, 0]) / (2 * H)),
        ]
        for exact, approx in differences:
            assert abs(exact - approx) <= 1e-6 * scale

    def test_two_variable_gradient_and_hessian(self):
        """Mixed partials of sin(xy) e^x agree with differences."""
        def f(x, y):
            return jets.sin(x * y) * jets.exp(x)

        x0, y0 = 0.3, -0.8
        j = f(Jet3.variable(x0, 0, 2), Jet3.variable(y0, 1, 2))
        assert j.first[0] == pytest.approx((f(x0 + H, y0) - f(x0 - H, y0)) / (2 * H), rel=1e-6, abs=1e-7)
        assert j.first[1] == pytest.approx((f(x0, y0 + H) - f(x0, y0 - H)) / (2 * H), rel=1e-6, abs=1e-7)
        gx = lambda y: f(Jet3.variable(x0, 0, 2), Jet3.variable(y, 1, 2)).first[0]
        assert j.second[0, 1] == pytest.approx((gx(y0 + H) - gx(y0 - H)) / (2 * H), rel=1e-6, abs=1e-7)


# ==========================================================================
# SYMMETRIC STORAGE
# ==========================================================================

class TestSymmetry:
    def test_mixed_partials_bitwise(self):
        """second and third are symmetric bit for bit."""
        x, y, z = (Jet3.variable(v, i, 3) for i, v in enumerate((0.2, 0.5, -0.4)))
        j = jets.exp(x * y) * jets.cos(y * z) / (x * x + 1.5) + z ** 3 * x
        assert np.array_equal(j.second, j.second.T)
        for perm in [(0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]:
            assert np.array_equal(j.third, j.third.transpose(perm))


# ==========================================================================
# COMPOSITION HELPERS
# ==========================================================================

class TestCompose:
    def test_product_via_compose(self):
        """F(a, b) = ab supplied through its derivatives equals direct multiplication."""
        a = jets.sin(Jet3.variable(0.4, 0, 2))
        b = jets.exp(Jet3.variable(-0.2, 1, 2))
        f2 = np.array([[0.0, 1.0], [1.0, 0.0]])
        via = Jet3.compose([a, b], a.value * b.value, [b.value, a.value], f2, np.zeros((2, 2, 2)))
        direct = a * b
        assert np.allclose(via.first, direct.first)
        assert np.allclose(via.second, direct.second)
        assert np.allclose(via.third, direct.third)

    def test_partial(self):
        """partial(0) of t^3 is the jet of 3 t^2."""
        d = (seeded(2.0) ** 3).partial(0)
        assert (d.value, d.first[0], d.second[0, 0]) == pytest.approx((12.0, 12.0, 6.0))

    def test_antiderivative_and_lift(self):
        """antiderivative shifts the orders; lift_1d reseeds onto a new direction."""
        F = antiderivative(jets.cos(seeded(0.0)), 0.0)
        assert (F.value, F.first[0], F.second[0, 0], F.third[0, 0, 0]) == (0.0, 1.0, 0.0, -1.0)
        lifted = lift_1d(F, Jet3.variable(0.0, 1, 2) * 2.0)
        assert lifted.first.tolist() == [0.0, 2.0]


class TestComplexJets:
    def test_cexp_of_i_t(self):
        """d/dt e^{i t} at 0 is i, second derivative -1."""
        t = seeded(0.0)
        z = cexp(CJet(Jet3.constant(0.0, 1), t))
        assert z.value == 1.0
        assert z.first[0] == pytest.approx(1j)
        assert z.second[0, 0] == pytest.approx(-1.0)

    def test_division_and_conjugate(self):
        """z / z = 1 with vanishing derivatives; z conj(z) = |z|^2."""
        t = seeded(0.7)
        z = CJet(jets.cos(t), t * t)
        q = z / z
        assert q.value == pytest.approx(1.0)
        assert np.allclose(q.first, 0.0) and np.allclose(q.second, 0.0)
        assert (z * z.conj()).re.value == pytest.approx(z.abs2().value)


# ==========================================================================
# CHARTS
# ==========================================================================

def unit_circle():
    return FunctionChart(HermitianSpace(1), [[-1.0, 1.0]], "circle",
                         lambda p: [CJet(jets.cos(p[0]), jets.sin(p[0]))])


class TestEvalChartJet:
    def test_unit_circle(self):
        """e^{it} at 0: value 1, first i, second -1."""
        lift = eval_chart_jet(unit_circle(), [0.0], order=2)
        assert lift.value[0] == pytest.approx(1.0)
        assert lift.d1[0, 0] == pytest.approx(1j)
        assert lift.d2[0, 0, 0] == pytest.approx(-1.0)

    def test_constant_chart(self):
        """A constant chart has no derivatives."""
        chart = FunctionChart(HermitianSpace(2), [[0.0, 1.0]] * 2, "const", lambda p: [1.0 + 0j, 0.5j])
        lift = eval_chart_jet(chart, [0.5, 0.5])
        assert np.all(lift.d1 == 0) and np.all(lift.d2 == 0) and np.all(lift.d3 == 0)

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomainError):
            eval_chart_jet(unit_circle(), [2.0])

    def test_samples_deterministic_and_interior(self):
        """Halton samples repeat for a seed and keep the 5 % margin."""
        chart = unit_circle()
        a = chart.sample_points(16, 7)
        assert np.array_equal(a, chart.sample_points(16, 7))
        assert np.all(np.abs(a) <= 0.9 + 1e-12)
