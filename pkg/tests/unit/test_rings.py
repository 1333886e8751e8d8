"""
Unit tests for scalar rings, partial inversion and dual numbers
"""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st


class TestRingIdentifiers:
    """Test ring construction from identifiers"""

    def test_known_identifiers(self):
        """Test that every documented identifier builds a ring"""
        from src.difq_workbench.rings import ring_from_id

        assert ring_from_id("Q").ring_id == "Q"
        assert ring_from_id("Fp:7").ring_id == "Fp:7"
        assert ring_from_id("F64").exact is False
        assert ring_from_id("Dual").exact is False

    def test_ring_instances_are_cached(self):
        """Test that one identifier always gives the same ring"""
        from src.difq_workbench.rings import ring_from_id

        assert ring_from_id("Fp:5") is ring_from_id("Fp:5")

    @pytest.mark.parametrize("ring_id", ["Z", "Fp:4", "Fp:1", "Fp:x", "Fp:2147483659"])
    def test_rejects_bad_identifiers(self, ring_id):
        """Test unknown names, composite moduli and moduli above 2^31"""
        from src.difq_workbench.rings import ring_from_id

        with pytest.raises(ValueError):
            ring_from_id(ring_id)


class TestInversion:
    """Test the partial inversion ι"""

    def test_inverse_in_f7(self, f7):
        """Test inv(3) = 5 in F_7"""
        from src.difq_workbench.rings import RingElem, inv

        assert inv(RingElem(f7, 3)) == RingElem(f7, 5)

    def test_inverse_in_q(self, q_ring):
        """Test ι on a rational"""
        from src.difq_workbench.rings import RingElem, inv

        assert inv(RingElem(q_ring, Fraction(-2, 3))).value == Fraction(-3, 2)

    @pytest.mark.parametrize("ring_id,zero", [("Q", 0), ("Fp:7", 7), ("F64", 0.0)])
    def test_zero_is_not_invertible(self, ring_id, zero):
        """Test that 0 raises NotInvertible"""
        from src.difq_workbench.errors import NotInvertible
        from src.difq_workbench.rings import RingElem, inv, ring_from_id

        with pytest.raises(NotInvertible):
            inv(RingElem(ring_from_id(ring_id), zero))

    def test_dual_with_zero_real_part_is_not_invertible(self):
        """Test that ε itself is not a unit"""
        from src.difq_workbench.errors import NotInvertible
        from src.difq_workbench.rings import DualNumber, RingElem, inv, ring_from_id

        with pytest.raises(NotInvertible):
            inv(RingElem(ring_from_id("Dual"), DualNumber(0.0, 1.0)))

    def test_not_invertible_is_arithmetic_error(self, q_ring):
        """Test that callers can catch ArithmeticError"""
        from src.difq_workbench.rings import RingElem

        with pytest.raises(ArithmeticError):
            RingElem(q_ring, 0).inv()

    @given(st.integers(min_value=1, max_value=100_002))
    @settings(max_examples=50, deadline=None)
    def test_inverse_product_is_one_in_large_prime_field(self, a):
        """Test t·ι(t) = 1 for every unit of F_100003"""
        from src.difq_workbench.rings import RingElem, inv, ring_from_id

        ring = ring_from_id("Fp:100003")
        t = RingElem(ring, a)
        assert t * inv(t) == RingElem(ring, 1)
        assert inv(inv(t)) == t


class TestRingElem:
    """Test ring element arithmetic"""

    def test_mixing_rings_raises(self, q_ring, f7):
        """Test that operands from different rings are rejected"""
        from src.difq_workbench.errors import RingMismatch
        from src.difq_workbench.rings import RingElem

        with pytest.raises(RingMismatch):
            RingElem(q_ring, 1) + RingElem(f7, 1)

    def test_prime_field_normalizes_payloads(self, f7):
        """Test reduction of integers and fractions mod p"""
        from src.difq_workbench.rings import RingElem

        assert RingElem(f7, 10).value == 3
        assert RingElem(f7, -1).value == 6
        assert RingElem(f7, Fraction(1, 2)).value == 4

    def test_rational_normalizes_payloads(self, q_ring):
        """Test that ints, floats, strings and fractions all land on an exact Fraction"""
        assert q_ring.normalize(3) == Fraction(3)
        assert q_ring.normalize(0.25) == Fraction(1, 4)
        assert q_ring.normalize(0.1) == Fraction(0.1)
        assert q_ring.normalize("3/4") == Fraction(3, 4)
        assert q_ring.normalize(Fraction(-2, 6)) == Fraction(-1, 3)
        assert all(isinstance(q_ring.normalize(v), Fraction) for v in (3, 0.25, "3/4"))

    def test_string_forms(self, q_ring, f7):
        """Test report formatting of elements"""
        from src.difq_workbench.rings import RingElem

        assert str(RingElem(q_ring, Fraction(3, 4))) == "3/4"
        assert str(RingElem(q_ring, 5)) == "5"
        assert str(RingElem(f7, 9)) == "2 mod 7"

    @given(st.integers(), st.integers(), st.integers())
    @settings(max_examples=100, deadline=None)
    def test_distributive_in_f7(self, a, b, c):
        """Test a(b + c) = ab + ac in F_7"""
        from src.difq_workbench.rings import RingElem, ring_from_id

        ring = ring_from_id("Fp:7")
        x, y, z = RingElem(ring, a), RingElem(ring, b), RingElem(ring, c)
        assert x * (y + z) == x * y + x * z

    @given(st.fractions(max_denominator=50), st.fractions(max_denominator=50))
    @settings(max_examples=100, deadline=None)
    def test_subtraction_inverts_addition_in_q(self, a, b):
        """Test (a + b) − b = a over Q"""
        from src.difq_workbench.rings import RingElem, ring_from_id

        ring = ring_from_id("Q")
        x, y = RingElem(ring, a), RingElem(ring, b)
        assert (x + y) - y == x


class TestDualNumbers:
    """Test forward-mode arithmetic"""

    def test_product_rule(self):
        """Test (a + bε)(c + dε) = ac + (ad + bc)ε"""
        from src.difq_workbench.rings import DualNumber

        product = DualNumber(2.0, 3.0) * DualNumber(5.0, 7.0)
        assert product == DualNumber(10.0, 29.0)

    def test_numpy_ufuncs_on_object_arrays(self):
        """Test that np.sin and np.exp dispatch to the dual methods"""
        from src.difq_workbench.rings import DualNumber

        arr = np.array([DualNumber(0.5, 1.0)], dtype=object)
        assert np.sin(arr)[0].b == pytest.approx(math.cos(0.5))
        assert np.exp(arr)[0].b == pytest.approx(math.exp(0.5))

    def test_dual_directional_of_sin_after_exp(self):
        """Test δ(sin∘exp)(0, 1) = cos 1"""
        from src.difq_workbench.rings import dual_directional

        value = dual_directional(lambda x: np.sin(np.exp(x[..., 0])), [0.0], [1.0])
        assert value[0] == pytest.approx(math.cos(1.0), abs=1e-15)

    def test_dual_directional_of_polynomial(self):
        """Test the directional derivative of x²y along (1, 2)"""
        from src.difq_workbench.rings import dual_directional

        value = dual_directional(lambda x: x[..., 0] ** 2 * x[..., 1], [3.0, 2.0], [1.0, 2.0])
        # 2xy·1 + x²·2
        assert value[0] == pytest.approx(12.0 + 18.0)


class TestRingAxiomSuite:
    """Test the seeded ring postulate suite"""

    @pytest.mark.parametrize("ring_id", ["Q", "Fp:7", "Fp:2", "F64", "Dual"])
    def test_suite_passes(self, ring_id):
        """Test that every supported ring satisfies the postulates"""
        from src.difq_workbench.rings import ring_axiom_suite

        report = ring_axiom_suite(ring_id, 200, seed=3)
        assert report.passed, report.summary_lines()
        assert report.check("distributive").trials == 200

    def test_suite_is_deterministic(self):
        """Test that a fixed seed gives the same report"""
        from src.difq_workbench.rings import ring_axiom_suite

        first = ring_axiom_suite("F64", 20, seed=11)
        second = ring_axiom_suite("F64", 20, seed=11)
        assert first.model_dump() == second.model_dump()

    def test_rejects_empty_sample(self):
        """Test sample_count validation"""
        from src.difq_workbench.rings import ring_axiom_suite

        with pytest.raises(ValueError):
            ring_axiom_suite("Q", 0, seed=0)
