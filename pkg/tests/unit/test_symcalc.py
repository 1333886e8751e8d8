"""
Unit tests for exact polynomial maps and their difference quotient maps
"""
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st


def _x2y_minus_y(ring):
    from src.difq_workbench.symcalc import PolyMap
    return PolyMap.from_terms(ring, 2, [{(2, 1): 1, (0, 1): -1}])


class TestPolyMap:
    """Test construction, arithmetic and evaluation"""

    def test_evaluate_over_f5(self, f5):
        """Test x²y − y at (2, 3) over F_5 gives 4"""
        from src.difq_workbench.symcalc import evaluate

        assert evaluate(_x2y_minus_y(f5), [2, 3])[0].value == 4

    def test_canonical_form_drops_zero_terms(self, f5):
        """Test that coefficients reducing to 0 disappear"""
        from src.difq_workbench.symcalc import PolyMap

        f = PolyMap.from_terms(f5, 1, [{(1,): 5, (0,): 2}])
        assert f.components == (((0,), 2),)

    def test_terms_are_ordered_by_graded_lex(self, q_ring):
        """Test the canonical monomial order"""
        from src.difq_workbench.symcalc import PolyMap

        f = PolyMap.from_terms(q_ring, 2, [{(0, 0): 1, (0, 2): 1, (1, 1): 1, (2, 0): 1}])
        assert [e for e, _ in f.components[0]] == [(2, 0), (1, 1), (0, 2), (0, 0)]

    def test_float_ring_rejected(self):
        """Test that polynomial maps need an exact ring"""
        from src.difq_workbench.errors import RingMismatch
        from src.difq_workbench.rings import ring_from_id
        from src.difq_workbench.symcalc import PolyMap

        with pytest.raises(RingMismatch):
            PolyMap.zero(ring_from_id("F64"), 1)

    def test_evaluate_arity_mismatch(self, q_ring):
        """Test that points of the wrong length are rejected"""
        from src.difq_workbench.errors import ArityMismatch
        from src.difq_workbench.symcalc import evaluate

        with pytest.raises(ArityMismatch):
            evaluate(_x2y_minus_y(q_ring), [1])

    def test_evaluate_ring_mismatch(self, q_ring, f7):
        """Test that elements of another ring are rejected"""
        from src.difq_workbench.errors import RingMismatch
        from src.difq_workbench.rings import RingElem
        from src.difq_workbench.symcalc import evaluate

        with pytest.raises(RingMismatch):
            evaluate(_x2y_minus_y(q_ring), [RingElem(f7, 1), RingElem(f7, 2)])

    def test_power_and_product(self, q_ring):
        """Test (x + 1)² = x² + 2x + 1"""
        from src.difq_workbench.symcalc import PolyMap, poly_equal

        x = PolyMap.variable(q_ring, 1, 0)
        one = PolyMap.constant(q_ring, 1, [1])
        expected = PolyMap.from_terms(q_ring, 1, [{(2,): 1, (1,): 2, (0,): 1}])
        assert poly_equal((x + one) ** 2, expected)

    def test_degree(self, q_ring):
        """Test total and per-variable degree"""
        from src.difq_workbench.symcalc import PolyMap

        f = _x2y_minus_y(q_ring)
        assert f.degree() == 3
        assert f.degree(0) == 2
        assert PolyMap.zero(q_ring, 2).degree() == -1

    def test_compose(self, q_ring):
        """Test x² ∘ (x + y) = x² + 2xy + y²"""
        from src.difq_workbench.symcalc import PolyMap, compose, poly_equal

        square = PolyMap.from_terms(q_ring, 1, [{(2,): 1}])
        total = PolyMap.from_terms(q_ring, 2, [{(1, 0): 1, (0, 1): 1}])
        expected = PolyMap.from_terms(q_ring, 2, [{(2, 0): 1, (1, 1): 2, (0, 2): 1}])
        assert poly_equal(compose(square, total), expected)

    def test_compose_arity_mismatch(self, q_ring):
        """Test that the inner map must match the outer arity"""
        from src.difq_workbench.errors import ArityMismatch
        from src.difq_workbench.symcalc import PolyMap, compose

        with pytest.raises(ArityMismatch):
            compose(_x2y_minus_y(q_ring), PolyMap.identity(q_ring, 3))

    def test_partial_eval(self, q_ring):
        """Test fixing y = 2 in x²y − y"""
        from src.difq_workbench.symcalc import PolyMap, partial_eval, poly_equal

        fixed = partial_eval(_x2y_minus_y(q_ring), {1: 2})
        assert poly_equal(fixed, PolyMap.from_terms(q_ring, 1, [{(2,): 2, (0,): -2}]))

    def test_pair_and_projection(self, q_ring):
        """Test that projecting a pairing recovers the parts"""
        from src.difq_workbench.symcalc import PolyMap, compose, pair, poly_equal

        f = _x2y_minus_y(q_ring)
        g = PolyMap.variable(q_ring, 2, 0)
        paired = pair(f, g)
        assert paired.m == 2
        assert poly_equal(compose(PolyMap.projection(q_ring, 2, [1]), paired), g)

    def test_derivative(self, q_ring):
        """Test ∂/∂x (x²y − y) = 2xy"""
        from src.difq_workbench.symcalc import PolyMap, derivative, poly_equal

        assert poly_equal(derivative(_x2y_minus_y(q_ring), 0),
                          PolyMap.from_terms(q_ring, 2, [{(1, 1): 2}]))

    def test_poly_equal_checks_arity(self, q_ring):
        """Test that maps of different arity are not comparable"""
        from src.difq_workbench.errors import ArityMismatch
        from src.difq_workbench.symcalc import PolyMap, poly_equal

        with pytest.raises(ArityMismatch):
            poly_equal(PolyMap.zero(q_ring, 1), PolyMap.zero(q_ring, 2))


class TestDifferenceQuotients:
    """Test f^[1], f^[k] and the formal variation"""

    def test_cube_over_f5(self, f5):
        """Test x³^[1] = 3x²u + 3xtu² + t²u³ over F_5"""
        from src.difq_workbench.symcalc import PolyMap, poly_equal, sym_difq1

        cube = PolyMap.from_terms(f5, 1, [{(3,): 1}])
        expected = PolyMap.from_terms(f5, 3, [{(2, 1, 0): 3, (1, 2, 1): 3, (0, 3, 2): 1}])
        assert poly_equal(sym_difq1(cube), expected)

    def test_constant_has_zero_quotient(self, q_ring):
        """Test that constants have f^[1] = 0"""
        from src.difq_workbench.symcalc import PolyMap, sym_difq1

        assert sym_difq1(PolyMap.constant(q_ring, 2, [5])).is_zero()

    def test_pointwise_quotient_at_unit(self, q_ring):
        """Test f^[1](x, u, t) = (f(x + tu) − f(x))/t at t = 1/2"""
        from src.difq_workbench.symcalc import evaluate, sym_difq1

        f = _x2y_minus_y(q_ring)
        x, u, t = [Fraction(1), Fraction(2)], [Fraction(3), Fraction(-1)], Fraction(1, 2)
        shifted = [a + t * b for a, b in zip(x, u)]
        quotient = (evaluate(f, shifted)[0].value - evaluate(f, x)[0].value) / t
        assert evaluate(sym_difq1(f), x + u + [t])[0].value == quotient

    @pytest.mark.parametrize("ring_id", ["Q", "Fp:7", "Fp:2"])
    @given(seed=st.integers(min_value=0, max_value=2**32))
    @settings(max_examples=25, deadline=None)
    def test_two_routes_agree(self, ring_id, seed):
        """Test binomial expansion against substitution on random maps"""
        from src.difq_workbench.rings import ring_from_id
        from src.difq_workbench.seeds import rng
        from src.difq_workbench.symcalc import (poly_equal, random_polymap, sym_difq1,
                                                sym_difq1_by_substitution)

        gen = rng(seed, "test")
        f = random_polymap(ring_from_id(ring_id), 2, 5, 4, gen, m=2)
        assert poly_equal(sym_difq1(f), sym_difq1_by_substitution(f))

    @pytest.mark.parametrize("n,k", [(1, 1), (1, 2), (2, 2), (1, 3)])
    def test_nested_arity(self, q_ring, n, k):
        """Test that f^[k] of an n-ary map has 2^k(n+1) − 1 arguments"""
        from src.difq_workbench.symcalc import PolyMap, sym_difq_k

        f = PolyMap.variable(q_ring, n, 0) ** 3
        assert sym_difq_k(f, k).n == 2 ** k * (n + 1) - 1

    def test_k_zero_is_identity(self, q_ring):
        """Test f^[0] = f"""
        from src.difq_workbench.symcalc import sym_difq_k

        f = _x2y_minus_y(q_ring)
        assert sym_difq_k(f, 0) is f

    def test_size_limit(self, q_ring):
        """Test that the monomial cap is enforced"""
        from src.difq_workbench.errors import SizeLimit
        from src.difq_workbench.symcalc import PolyMap, sym_difq_k

        f = (PolyMap.variable(q_ring, 2, 0) + PolyMap.variable(q_ring, 2, 1)) ** 6
        with pytest.raises(SizeLimit):
            sym_difq_k(f, 3, cap=100)

    def test_negative_k_rejected(self, q_ring):
        """Test k validation"""
        from src.difq_workbench.symcalc import sym_difq_k

        with pytest.raises(ValueError):
            sym_difq_k(_x2y_minus_y(q_ring), -1)

    def test_formal_variation(self, q_ring):
        """Test δ(x²y − y)(x, u) = 2xy·u₁ + (x² − 1)·u₂"""
        from src.difq_workbench.symcalc import PolyMap, formal_var, poly_equal

        expected = PolyMap.from_terms(q_ring, 4, [{(1, 1, 1, 0): 2, (2, 0, 0, 1): 1,
                                                   (0, 0, 0, 1): -1}])
        assert poly_equal(formal_var(_x2y_minus_y(q_ring)), expected)

    def test_integral_operator_variation_witness(self, q_ring):
        """Test δ of x² + xu + u²/3 at all ones gives 14/3"""
        from src.difq_workbench.symcalc import PolyMap, evaluate, formal_var

        # ∫₀¹ (x + su)² ds
        integral = PolyMap.from_terms(q_ring, 2, [{(2, 0): 1, (1, 1): 1, (0, 2): Fraction(1, 3)}])
        value = evaluate(formal_var(integral), [1, 1, 1, 1])[0].value
        assert value == Fraction(14, 3)


class TestFormatting:
    """Test textual forms"""

    def test_format_poly(self, q_ring, f7):
        """Test report formatting with coefficient styles"""
        from src.difq_workbench.symcalc import PolyMap, format_poly

        f = PolyMap.from_terms(q_ring, 2, [{(2, 1): Fraction(1, 2), (0, 1): -1}])
        assert format_poly(f) == "1/2*x1^2*x2 + -1*x2"
        assert format_poly(_x2y_minus_y(f7)) == "x1^2*x2 + 6 mod 7*x2"

    def test_format_poly_with_names(self, q_ring):
        """Test custom variable names"""
        from src.difq_workbench.symcalc import difq_variable_names, format_poly, sym_difq1

        f = _x2y_minus_y(q_ring)
        text = format_poly(sym_difq1(f), difq_variable_names(2, 1))
        assert "u1" in text and "t" in text

    def test_difq_variable_names(self):
        """Test names of nested quotient arguments"""
        from src.difq_workbench.symcalc import difq_variable_names

        assert difq_variable_names(1, 1) == ["x1", "u1", "t"]
        assert len(difq_variable_names(1, 2)) == 7

    def test_to_expr_text(self, q_ring):
        """Test parser-syntax rendering"""
        from src.difq_workbench.symcalc import PolyMap, to_expr_text

        f = PolyMap.from_terms(q_ring, 2, [{(2, 1): Fraction(1, 2), (0, 0): -3}])
        assert to_expr_text(f) == "(1/2)*x1^2*x2 + (-3)"
        assert to_expr_text(PolyMap.zero(q_ring, 1)) == "0"

    def test_to_expr_text_needs_q(self, f7):
        """Test that only scalar maps over Q are rendered"""
        from src.difq_workbench.symcalc import to_expr_text

        with pytest.raises(ValueError):
            to_expr_text(_x2y_minus_y(f7))


class TestExactDivisionSuite:
    """Test the seeded exact-division suite"""

    @pytest.mark.parametrize("ring_id", ["Q", "Fp:7"])
    def test_suite_passes(self, ring_id):
        """Test t·f^[1] = f(x+tu) − f(x) on random maps"""
        from src.difq_workbench.symcalc import exact_division_suite

        report = exact_division_suite(60, seed=1, ring_id=ring_id)
        assert report.passed, report.summary_lines()
        assert [c.name for c in report.checks] == ["exact_division", "directional_derivative",
                                                   "pointwise_quotient"]
        assert report.check("exact_division").trials == 60
