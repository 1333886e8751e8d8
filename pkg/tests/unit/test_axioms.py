"""
Unit tests for the class postulate checks
"""
import pytest


def _square(ring):
    from src.difq_workbench.symcalc import PolyMap
    return PolyMap.from_terms(ring, 1, [{(2,): 1}])


class TestFnClassInstance:
    """Test class membership"""

    def test_full_polynomial_class(self, q_ring):
        """Test that every map between declared objects is a member"""
        from src.difq_workbench.axioms import FnClassInstance
        from src.difq_workbench.symcalc import PolyMap

        inst = FnClassInstance.polynomial_class("Q", 2)
        assert inst.objects == (1, 2)
        assert inst.contains(PolyMap.from_terms(q_ring, 2, [{(3, 1): 5}]))
        assert not inst.contains(PolyMap.identity(q_ring, 3))

    def test_ring_mismatch_is_not_member(self, f7):
        """Test that maps over another ring are not members"""
        from src.difq_workbench.axioms import FnClassInstance

        assert not FnClassInstance.polynomial_class("Q").contains(_square(f7))

    def test_generated_class(self, q_ring):
        """Test generators, identities, constants, pairs and one-level composites"""
        from src.difq_workbench.axioms import FnClassInstance
        from src.difq_workbench.symcalc import PolyMap, compose, pair

        g = _square(q_ring)
        inst = FnClassInstance("Q", (1, 2), (g,))
        assert inst.contains(g)
        assert inst.contains(compose(g, g))
        assert inst.contains(PolyMap.constant(q_ring, 2, [3]))
        assert inst.contains(pair(g, PolyMap.identity(q_ring, 1)))
        assert inst.contains(PolyMap.projection(q_ring, 2, [1]))
        assert not inst.contains(PolyMap.from_terms(q_ring, 1, [{(3,): 1}]))

    def test_generator_validation(self, q_ring, f7):
        """Test generators over a foreign ring or between undeclared objects"""
        from src.difq_workbench.axioms import FnClassInstance
        from src.difq_workbench.symcalc import PolyMap

        with pytest.raises(ValueError):
            FnClassInstance("Q", (1,), (_square(f7),))
        with pytest.raises(ValueError):
            FnClassInstance("Q", (1,), (PolyMap.identity(q_ring, 2),))

    def test_sample_member_with_fixed_arities(self):
        """Test seeded sampling"""
        from src.difq_workbench.axioms import FnClassInstance
        from src.difq_workbench.seeds import rng

        inst = FnClassInstance.polynomial_class("Fp:7", 3)
        f = inst.sample_member(rng(1, "test"), n=2, m=3)
        assert (f.n, f.m) == (2, 3)
        assert inst.contains(f)


class TestProductive:
    """Test the productive structure checks"""

    @pytest.mark.parametrize("ring_id", ["Q", "Fp:7"])
    def test_polynomial_class_is_productive(self, ring_id):
        """Test projections, pairing and uniqueness of the mediating map"""
        from src.difq_workbench.axioms import FnClassInstance, check_productive

        report = check_productive(FnClassInstance.polynomial_class(ring_id), 10, seed=4)
        assert report.passed, report.summary_lines()
        assert report.check("pairing").trials > 0

    def test_no_generators_is_vacuous(self):
        """Test the vacuous case"""
        from src.difq_workbench.axioms import FnClassInstance, check_productive

        report = check_productive(FnClassInstance("Q", (1, 2)), 5, seed=0)
        assert report.passed
        assert report.checks == []
        assert "vacuously" in report.notes[0]

    def test_trials_must_be_positive(self):
        """Test the trial count"""
        from src.difq_workbench.axioms import FnClassInstance, check_productive

        with pytest.raises(ValueError):
            check_productive(FnClassInstance.polynomial_class("Q"), 0, seed=0)


class TestPostulates:
    """Test composition, constants, inversion and determination"""

    @pytest.mark.parametrize("ring_id", ["Q", "Fp:7", "Fp:5"])
    def test_polynomial_class(self, ring_id):
        """Test the postulates on the full polynomial class"""
        from src.difq_workbench.axioms import IOTA_NOTE, FnClassInstance, check_bgn_postulates

        report = check_bgn_postulates(FnClassInstance.polynomial_class(ring_id), 30, seed=7)
        assert report.passed, report.summary_lines()
        assert {c.name for c in report.checks} == {"composition", "constants_identity",
                                                   "inversion", "determination"}
        assert IOTA_NOTE in report.notes
        assert report.check("inversion").trials == 30

    def test_inexact_ring_rejected(self):
        """Test that F64 is refused"""
        from src.difq_workbench.axioms import FnClassInstance, check_bgn_postulates

        with pytest.raises(ValueError):
            check_bgn_postulates(FnClassInstance("F64", (1,)), 5, seed=0)

    def test_interpolation(self, q_ring):
        """Test Lagrange interpolation of t²"""
        from src.difq_workbench.axioms import interpolate
        from src.difq_workbench.symcalc import poly_equal

        nodes = [q_ring.normalize(i) for i in (1, 2, 3)]
        values = [q_ring.normalize(i) for i in (1, 4, 9)]
        assert poly_equal(interpolate(q_ring, nodes, values), _square(q_ring))

    def test_interpolation_repeated_node(self, f7):
        """Test NotInvertible for coinciding nodes"""
        from src.difq_workbench.axioms import interpolate
        from src.difq_workbench.errors import NotInvertible

        nodes = [f7.normalize(1), f7.normalize(8)]
        with pytest.raises(NotInvertible):
            interpolate(f7, nodes, [f7.normalize(1), f7.normalize(2)])


class TestUniquenessAndRecursion:
    """Test f^[1] uniqueness by interpolation and the recursion rule"""

    @pytest.mark.parametrize("ring_id", ["Q", "Fp:7"])
    def test_uniqueness(self, ring_id):
        """Test x₁²x₂ − x₂ through both routes"""
        from src.difq_workbench.axioms import prop9_uniqueness
        from src.difq_workbench.rings import ring_from_id
        from src.difq_workbench.symcalc import PolyMap

        f = PolyMap.from_terms(ring_from_id(ring_id), 2, [{(2, 1): 1, (0, 1): -1}])
        report = prop9_uniqueness(f, seed=3, samples=4)
        assert report.passed, report.summary_lines()
        assert report.check("interpolation_matches_expansion").trials == 4

    def test_uniqueness_degree_cap(self, f5):
        """Test that F₅ cannot interpolate a degree 5 quotient"""
        from src.difq_workbench.axioms import prop9_uniqueness
        from src.difq_workbench.errors import DegreeCapExceeded
        from src.difq_workbench.symcalc import PolyMap

        with pytest.raises(DegreeCapExceeded):
            prop9_uniqueness(PolyMap.from_terms(f5, 1, [{(6,): 1}]))
        with pytest.raises(DegreeCapExceeded):
            prop9_uniqueness(PolyMap.from_terms(f5, 1, [{(4,): 1}]))

    def test_node_count_follows_f(self, q_ring, f7):
        """Test deg f + 1 nodes over Q and all six nonzero nodes of F₇ for x³"""
        from src.difq_workbench.axioms import prop9_uniqueness, uniqueness_nodes
        from src.difq_workbench.symcalc import PolyMap

        quintic = PolyMap.from_terms(q_ring, 2, [{(3, 2): 1, (1, 0): 4}])
        assert len(uniqueness_nodes(quintic)) == 6
        cube = PolyMap.from_terms(f7, 1, [{(3,): 1}])
        assert sorted(uniqueness_nodes(cube)) == [1, 2, 3, 4, 5, 6]
        report = prop9_uniqueness(cube, seed=1, samples=3)
        assert report.passed, report.summary_lines()
        assert "interpolation through 6 nodes" in report.notes

    def test_truncated_expansion_is_caught(self, f7, mocker):
        """Test that an f^[1] missing its top t-term disagrees with interpolation"""
        from src.difq_workbench.axioms import prop9_uniqueness
        from src.difq_workbench.symcalc import PolyMap

        cube = PolyMap.from_terms(f7, 1, [{(3,): 1}])
        # 3x²u + 3xu²t without u³t²
        truncated = PolyMap.from_terms(f7, 3, [{(2, 1, 0): 3, (1, 2, 1): 3}])
        mocker.patch("src.difq_workbench.axioms.sym_difq1", return_value=truncated)
        report = prop9_uniqueness(cube, seed=2, samples=6)
        assert not report.check("interpolation_matches_expansion").passed

    @pytest.mark.parametrize("k", [1, 2])
    def test_recursion(self, q_ring, k):
        """Test f^[k+1] = (f^[1])^[k] for x₁²x₂ − x₂"""
        from src.difq_workbench.axioms import RECURSION_NOTE, prop10_recursion
        from src.difq_workbench.symcalc import PolyMap

        f = PolyMap.from_terms(q_ring, 2, [{(2, 1): 1, (0, 1): -1}])
        report = prop10_recursion(f, k)
        assert report.passed
        assert report.notes == [RECURSION_NOTE]

    def test_recursion_sides_are_built_apart(self, q_ring, mocker):
        """Test that (f^[1])^[k] is nested by composition, not by the binomial loop"""
        from src.difq_workbench import axioms
        from src.difq_workbench.symcalc import PolyMap

        expand = mocker.spy(axioms, "sym_difq_k")
        substitute = mocker.spy(axioms, "sym_difq1_by_substitution")
        f = PolyMap.from_terms(q_ring, 2, [{(2, 1): 1, (0, 1): -1}])
        assert axioms.prop10_recursion(f, 2).passed
        assert expand.call_count == 1
        assert substitute.call_count == 3

    def test_recursion_order(self, q_ring):
        """Test k ≥ 1"""
        from src.difq_workbench.axioms import prop10_recursion

        with pytest.raises(ValueError):
            prop10_recursion(_square(q_ring), 0)

    def test_recursion_size_limit(self, q_ring):
        """Test that the monomial cap applies to nested expansions"""
        from src.difq_workbench.axioms import prop10_recursion
        from src.difq_workbench.errors import SizeLimit
        from src.difq_workbench.symcalc import PolyMap

        f = PolyMap.from_terms(q_ring, 2, [{(4, 0): 1, (2, 2): 3, (0, 4): 1}])
        with pytest.raises(SizeLimit):
            prop10_recursion(f, 2, cap=5)

    def test_suites(self):
        """Test the seeded uniqueness and recursion suites"""
        from src.difq_workbench.axioms import recursion_suite, uniqueness_suite

        assert uniqueness_suite(5, seed=0, ring_id="Fp:7").passed
        assert recursion_suite(3, seed=0).passed
