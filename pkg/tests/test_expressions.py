import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relikit import (
    EvaluationDomainError,
    ExpressionSyntaxError,
    GradientSettings,
    evaluate,
    gradient,
    parse,
    pretty,
)
from relikit.expressions import BinOp, Call, Neg, Num, Var


class TestParseAndEvaluate:
    def test_cubic_benchmark_expression(self):
        expr = parse("x1^2 + x2^3 - 50", arity=2)
        assert evaluate(expr, [7.0, 10.0]) == pytest.approx(999.0)

    def test_circle_expression(self):
        expr = parse("4 - sqrt(x1^2 + x2^2)", arity=2)
        assert evaluate(expr, [0.0, 0.0]) == pytest.approx(4.0)
        assert evaluate(expr, [4.0, 0.0]) == pytest.approx(0.0)

    def test_variable_index_exceeds_arity(self):
        with pytest.raises(ExpressionSyntaxError, match="exceeds arity"):
            parse("x3 + 1", arity=2)

    def test_unknown_identifier_with_offset(self):
        with pytest.raises(ExpressionSyntaxError, match="unknown identifier") as info:
            parse("x1 + foo(2)", arity=1)
        assert info.value.offset == 5

    def test_syntax_error_offset(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse("x1 + * 2", arity=1)
        assert info.value.offset == 5

    def test_unexpected_character_offset(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse("x1 + $", arity=1)
        assert info.value.offset == 5

    def test_empty_and_trailing(self):
        with pytest.raises(ExpressionSyntaxError):
            parse("", arity=1)
        with pytest.raises(ExpressionSyntaxError):
            parse("   ", arity=1)
        with pytest.raises(ExpressionSyntaxError):
            parse("x1 2", arity=1)
        with pytest.raises(ExpressionSyntaxError):
            parse("(x1", arity=1)

    def test_precedence_and_associativity(self):
        assert evaluate(parse("2 + 3 * 4", 1), [0.0]) == 14.0
        assert evaluate(parse("6 - 2 - 1", 1), [0.0]) == 3.0
        assert evaluate(parse("12 / 2 / 3", 1), [0.0]) == 2.0
        # ^ binds right-to-left and above unary minus
        assert evaluate(parse("2^3^2", 1), [0.0]) == 512.0
        assert evaluate(parse("-x1^2", 1), [3.0]) == -9.0
        assert evaluate(parse("2^-3", 1), [0.0]) == 0.125
        assert evaluate(parse("(-x1)^2", 1), [3.0]) == 9.0
        assert evaluate(parse("--x1", 1), [5.0]) == 5.0

    def test_functions(self):
        assert evaluate(parse("exp(0)", 1), [0.0]) == 1.0
        assert evaluate(parse("log(exp(2))", 1), [0.0]) == pytest.approx(2.0)
        assert evaluate(parse("abs(-3)", 1), [0.0]) == 3.0
        assert evaluate(parse("sin(0) + cos(0)", 1), [0.0]) == 1.0

    def test_scientific_notation_numbers(self):
        assert evaluate(parse("1e-5 + 2.5E2", 1), [0.0]) == pytest.approx(250.00001)
        assert evaluate(parse(".5 * 4", 1), [0.0]) == 2.0

    def test_whitespace_invariance(self):
        assert parse("x1+x2", 2).root == parse("  x1   +  x2 ", 2).root

    def test_batch_evaluation(self):
        expr = parse("x1^2 + x2", 2)
        x = np.array([[1.0, 2.0], [3.0, 4.0], [0.0, 0.0]])
        assert evaluate(expr, x) == pytest.approx([3.0, 13.0, 0.0])
        grid = x.reshape(3, 1, 2)
        assert evaluate(expr, grid).shape == (3, 1)

    def test_constant_expression_broadcasts(self):
        expr = parse("5 - 2", 1)
        assert evaluate(expr, np.zeros((4, 1))) == pytest.approx([3.0] * 4)

    def test_wrong_point_shape(self):
        expr = parse("x1 + x2", 2)
        with pytest.raises(ValueError):
            evaluate(expr, [1.0])


class TestDomainErrors:
    def test_log_of_negative(self):
        with pytest.raises(EvaluationDomainError) as info:
            evaluate(parse("log(x1)", 1), [-1.0])
        assert "log" in info.value.subexpression

    def test_sqrt_of_negative_carries_subexpression(self):
        with pytest.raises(EvaluationDomainError) as info:
            evaluate(parse("1 + sqrt(x1 - 2)", 1), [0.0])
        assert "sqrt" in info.value.subexpression

    def test_zero_over_zero(self):
        with pytest.raises(EvaluationDomainError):
            evaluate(parse("x1 / x1", 1), [0.0])

    def test_negative_base_fractional_power(self):
        with pytest.raises(EvaluationDomainError, match="non-integer power"):
            evaluate(parse("(0 - 2)^0.5", 1), [0.0])

    def test_negative_base_integer_power_ok(self):
        assert evaluate(parse("(0 - 2)^3", 1), [0.0]) == -8.0

    def test_batch_domain_error(self):
        expr = parse("sqrt(x1)", 1)
        with pytest.raises(EvaluationDomainError):
            evaluate(expr, np.array([[4.0], [-1.0]]))


class TestPretty:
    def test_round_trip_examples(self):
        for text in [
            "x1^2 + x2^3 - 50",
            "4 - sqrt(x1^2 + x2^2)",
            "-x1^2 + 2^-3",
            "(x1 + x2) * (x1 - x2) / (1 + x1^2)",
            "2^3^2 - -x1",
            "abs(sin(x1) * cos(x2))",
        ]:
            expr = parse(text, 2)
            printed = pretty(expr)
            assert parse(printed, 2).root == expr.root

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31))
    def test_round_trip_random_trees(self, seed):
        rng = np.random.default_rng(seed)

        def build(depth: int):
            choice = rng.integers(0, 6 if depth < 4 else 2)
            if choice == 0:
                return Num(float(np.round(rng.uniform(0, 9), 3)))
            if choice == 1:
                return Var(int(rng.integers(1, 3)))
            if choice == 2:
                return Neg(build(depth + 1))
            if choice == 3:
                func = ["sqrt", "exp", "log", "abs", "sin", "cos"][rng.integers(0, 6)]
                return Call(func, build(depth + 1))
            op = "+-*/^"[rng.integers(0, 5)]
            return BinOp(op, build(depth + 1), build(depth + 1))

        root = build(0)
        from relikit.expressions import LimitStateExpr

        expr = LimitStateExpr(root, 2, "<generated>")
        assert parse(pretty(expr), 2).root == root


class TestGradient:
    def test_forward_difference_benchmark(self):
        expr = parse("x1^2 + x2^3 - 50", 2)
        grad = gradient(expr, [7.0, 10.0], GradientSettings(h=1e-5, scheme="forward"))
        # analytic [14, 300] plus the forward-difference bias h and 3*x2*h
        assert grad == pytest.approx([14.00001, 300.0003], abs=1e-5)

    def test_linear_exact_both_schemes(self):
        expr = parse("2*x1 - 3*x2", 2)
        for scheme in ("forward", "central"):
            grad = gradient(expr, [17.0, -4.0], GradientSettings(scheme=scheme))
            assert grad == pytest.approx([2.0, -3.0], abs=1e-9)

    def test_central_difference_quadratic(self):
        expr = parse("x1^2", 1)
        grad = gradient(expr, [3.0], GradientSettings(h=1e-6, scheme="central"))
        assert grad == pytest.approx([6.0], abs=1e-6)

    def test_default_settings(self):
        expr = parse("x1^2", 1)
        assert gradient(expr, [1.0]) == pytest.approx([2.0], abs=1e-4)

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            GradientSettings(h=0.0)
        with pytest.raises(ValueError):
            GradientSettings(h=0.5)
        with pytest.raises(ValueError):
            GradientSettings(scheme="sideways")

    def test_domain_error_at_probe(self):
        expr = parse("sqrt(x1)", 1)
        with pytest.raises(EvaluationDomainError):
            gradient(expr, [0.0], GradientSettings(scheme="central"))

    @settings(max_examples=30, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=-4, max_value=4, allow_nan=False), min_size=3, max_size=3
        ),
        st.floats(min_value=0.5, max_value=3.0),
    )
    def test_polynomial_convergence_orders(self, coeffs, x0):
        a, b, c = coeffs
        expr = parse(f"{a} * x1^3 + {b} * x1^2 + {c} * x1", 1)
        analytic = 3 * a * x0**2 + 2 * b * x0 + c
        # forward error ~ C*h, central error ~ C*h^2 with C from derivatives
        curvature = abs(3 * a * x0 + b) + 1.0
        third = abs(a) + 1.0
        for h in (1e-4, 1e-5):
            fwd = gradient(expr, [x0], GradientSettings(h=h, scheme="forward"))[0]
            assert abs(fwd - analytic) <= 10 * curvature * h + 1e-7
            cen = gradient(expr, [x0], GradientSettings(h=h, scheme="central"))[0]
            assert abs(cen - analytic) <= 10 * third * h**2 + 1e-6
