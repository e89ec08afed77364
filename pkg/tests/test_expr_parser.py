import math

import pytest

from errors import ExprSyntaxError, SingularEvaluationError, UnknownIdentifierError
from expr_parser import parse_expr, parse_number
from jets import Jet3


# ==========================================================================
# EVALUATION
# ==========================================================================

class TestEvaluate:
    def test_profile_expression(self):
        """2 + sin(t) at 0 is 3."""
        assert parse_expr("2+sin(t)")(0.0) == 3.0

    def test_constant_expression(self):
        assert parse_expr("1/sqrt(2)")(0.0) == pytest.approx(1.0 / math.sqrt(2.0))

    def test_jet_derivative(self):
        """d/dt exp(-2t)(1+t) at 0 is -1."""
        value = parse_expr("exp(-2*t)*(1+t)")(Jet3.variable(0.0, 0, 1))
        assert value.value == pytest.approx(1.0)
        assert value.first[0] == pytest.approx(-1.0)

    @pytest.mark.parametrize("text, expected", [
        ("1+2*3", 7.0),
        ("(1+2)*3", 9.0),
        ("2^3^2", 512.0),
        ("2**3", 8.0),
        ("-2^2", -4.0),
        ("8/4/2", 1.0),
        ("  1 +\t2 ", 3.0),
        ("2*pi", 2.0 * math.pi),
        ("1e-3*1000", 1.0),
    ])
    def test_precedence(self, text, expected):
        """Products bind tighter than sums; powers are right associative."""
        assert parse_expr(text)(0.0) == pytest.approx(expected)

    def test_division_by_zero(self):
        with pytest.raises(SingularEvaluationError):
            parse_expr("1/(t-1)")(1.0)


# ==========================================================================
# ERRORS
# ==========================================================================

class TestErrors:
    def test_dangling_operator(self):
        """A missing operand is reported at the end of input."""
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr("2+")
        assert info.value.position == 2

    def test_extra_paren(self):
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr("(1+2))")
        assert info.value.position == 5

    def test_unknown_identifier(self):
        """Unknown names carry their offset and subclass the syntax error."""
        with pytest.raises(UnknownIdentifierError) as info:
            parse_expr("1 + tan(t)")
        assert info.value.position == 4

    def test_function_needs_parentheses(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("sin t")

    def test_unexpected_character(self):
        """Characters outside the grammar are reported where they occur."""
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr("2 + $")
        assert info.value.position == 4
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr("é")
        assert info.value.position == 0

    def test_non_integer_exponent(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("t^0.5")


class TestParseNumber:
    def test_numbers_pass_through(self):
        assert parse_number(3) == 3.0
        assert parse_number(0.25) == 0.25

    def test_constant_expression(self):
        assert parse_number("sqrt(2/3)") == pytest.approx(math.sqrt(2.0 / 3.0))

    def test_rejects_dependence_on_t(self):
        with pytest.raises(ExprSyntaxError):
            parse_number("1+t")
