"""
Unit tests for numeric difference quotients and variations
"""
import math

import numpy as np
import pytest


class TestExtrapConfig:
    """Test extrapolation settings"""

    def test_defaults(self, cfg):
        """Test the documented defaults"""
        assert (cfg.t0, cfg.ratio, cfg.max_levels, cfg.richardson_order) == (0.1, 0.5, 12, 4)
        assert cfg.tol_conv == 1e-9

    @pytest.mark.parametrize("kwargs", [{"t0": 0.0}, {"ratio": 1.0}, {"max_levels": 2}])
    def test_invalid_values_rejected(self, kwargs):
        """Test field constraints"""
        from pydantic import ValidationError

        from src.difq_workbench.numdiff import ExtrapConfig

        with pytest.raises(ValidationError):
            ExtrapConfig(**kwargs)

    def test_steps_and_level_tolerance(self, cfg):
        """Test the geometric step sequence and per-order tolerance growth"""
        steps = cfg.steps()
        assert len(steps) == 12
        assert steps[1] == pytest.approx(0.05)
        assert cfg.level_tol(3) == pytest.approx(1e-9 * 1e6)


class TestSmoothFn:
    """Test black-box maps"""

    def test_domain_box(self):
        """Test that points outside the box raise DomainError"""
        from src.difq_workbench.errors import DomainError
        from src.difq_workbench.numdiff import SmoothFn

        f = SmoothFn.scalar(np.log, 1, "log", box=[(0.1, 10.0)])
        assert f([1.0])[0] == pytest.approx(0.0)
        with pytest.raises(DomainError):
            f([0.0])

    def test_non_finite(self):
        """Test that NaN outputs raise NonFinite"""
        from src.difq_workbench.errors import NonFinite
        from src.difq_workbench.numdiff import SmoothFn

        with pytest.raises(NonFinite):
            SmoothFn.scalar(np.log, 1, "log")([-1.0])

    def test_from_poly(self, q_ring):
        """Test numeric evaluation of an exact polynomial"""
        from src.difq_workbench.numdiff import SmoothFn
        from src.difq_workbench.symcalc import PolyMap

        f = SmoothFn.from_poly(PolyMap.from_terms(q_ring, 2, [{(2, 1): 1, (0, 1): -1}]))
        assert f([2.0, 3.0])[0] == pytest.approx(9.0)

    def test_compose_and_pair(self, exp_fn, square_fn):
        """Test composition and pairing"""
        from src.difq_workbench.numdiff import SmoothFn

        composite = SmoothFn.compose(square_fn, exp_fn)
        assert composite([1.0])[0] == pytest.approx(math.exp(2.0))
        paired = SmoothFn.pair(exp_fn, square_fn)
        np.testing.assert_allclose(paired([2.0]), [math.exp(2.0), 4.0])

    def test_product_map(self, exp_fn, cfg):
        """Test that f ×₂ g acts factorwise and varies factorwise"""
        from src.difq_workbench.errors import DomainError
        from src.difq_workbench.numdiff import SmoothFn, seip_var

        log_fn = SmoothFn.scalar(np.log, 1, "log", box=[(0.1, 10.0)])
        crossed = SmoothFn.product(exp_fn, log_fn)
        assert (crossed.n, crossed.m) == (2, 2)
        np.testing.assert_allclose(crossed([1.0, 2.0]), [math.exp(1.0), math.log(2.0)])
        with pytest.raises(DomainError):
            crossed([1.0, 0.0])
        value, _ = seip_var(crossed, [0.5, 2.0], [1.0, -3.0], cfg)
        np.testing.assert_allclose(value, [math.exp(0.5), -1.5], rtol=1e-8)

    def test_batch_evaluation(self, square_fn):
        """Test evaluation over a leading batch axis"""
        values = square_fn(np.array([[1.0], [2.0], [3.0]]))
        assert values.shape == (3, 1)
        np.testing.assert_allclose(values[:, 0], [1.0, 4.0, 9.0])


class TestFirstOrder:
    """Test difq_num, seip_var and bgn_difq_num"""

    def test_difq_num_of_exp(self, exp_fn):
        """Test (e^0.1 − 1)/0.1"""
        from src.difq_workbench.numdiff import difq_num

        assert difq_num(exp_fn, [0.0], [1.0], 0.1)[0] == pytest.approx(1.0517091808, abs=1e-9)

    def test_difq_num_rejects_zero_step(self, exp_fn):
        """Test that t = 0 is not a difference quotient"""
        from src.difq_workbench.errors import DomainError
        from src.difq_workbench.numdiff import difq_num

        with pytest.raises(DomainError):
            difq_num(exp_fn, [0.0], [1.0], 0.0)

    def test_seip_var_of_exp(self, exp_fn, cfg):
        """Test δexp(0.3, 2) = 2e^0.3"""
        from src.difq_workbench.numdiff import seip_var

        value, err = seip_var(exp_fn, [0.3], [2.0], cfg)
        assert value[0] == pytest.approx(2.0 * math.exp(0.3), rel=1e-10)
        assert err <= cfg.tol_conv * max(1.0, abs(value[0]))

    def test_chain_rule_value(self, cfg):
        """Test δ(sin∘exp)(0, 1) = cos 1"""
        from src.difq_workbench.numdiff import SmoothFn, seip_var

        f = SmoothFn.scalar(lambda a: np.sin(np.exp(a)), 1, "sin∘exp")
        assert seip_var(f, [0.0], [1.0], cfg)[0][0] == pytest.approx(math.cos(1.0), abs=1e-6)

    def test_kink_is_not_differentiable(self, cfg):
        """Test that |x| at 0 raises NotDifferentiable"""
        from src.difq_workbench.errors import NotDifferentiable
        from src.difq_workbench.numdiff import SmoothFn, seip_var

        with pytest.raises(NotDifferentiable) as info:
            seip_var(SmoothFn.scalar(np.abs, 1, "abs"), [0.0], [1.0], cfg)
        assert info.value.gap == pytest.approx(2.0)

    def test_near_box_boundary(self, cfg):
        """Test that steps shrink to stay inside the domain box"""
        from src.difq_workbench.numdiff import SmoothFn, seip_var

        f = SmoothFn.scalar(np.log, 1, "log", box=[(0.0, 5.0)])
        assert seip_var(f, [1e-3], [1.0], cfg)[0][0] == pytest.approx(1e3, rel=1e-8)

    def test_boundary_point_rejected(self, cfg):
        """Test that a base point on the box edge is not interior"""
        from src.difq_workbench.errors import DomainError
        from src.difq_workbench.numdiff import SmoothFn, seip_var

        f = SmoothFn.scalar(np.log, 1, "log", box=[(1.0, 5.0)])
        with pytest.raises(DomainError):
            seip_var(f, [1.0], [1.0], cfg)

    def test_no_convergence_with_tight_tolerance(self, cfg):
        """Test that an unreachable tolerance raises NoConvergence"""
        from src.difq_workbench.errors import NoConvergence
        from src.difq_workbench.numdiff import SmoothFn, seip_var

        f = SmoothFn.scalar(lambda a: np.exp(50.0 * a), 1, "exp50")
        with pytest.raises(NoConvergence) as info:
            seip_var(f, [0.5], [1.0], cfg, tol=1e-300)
        assert info.value.estimate is not None

    def test_bgn_difq_num_continues_at_zero(self, exp_fn, cfg):
        """Test f^[1] at t ≠ 0 and at t = 0"""
        from src.difq_workbench.numdiff import bgn_difq_num, difq_num

        np.testing.assert_array_equal(bgn_difq_num(exp_fn, [0.0], [1.0], 0.1, cfg),
                                      difq_num(exp_fn, [0.0], [1.0], 0.1))
        assert bgn_difq_num(exp_fn, [0.0], [1.0], 0.0, cfg)[0] == pytest.approx(1.0, abs=1e-10)

    def test_bgn_difq_num_consistent_in_t(self, cfg):
        """Test that values at shrinking t approach the t = 0 value"""
        from src.difq_workbench.numdiff import SmoothFn, bgn_difq_num

        f = SmoothFn.scalar(lambda a, b: np.sin(a) * np.exp(b), 2, "sin*exp")
        x, u = [0.4, -0.2], [1.0, 0.5]
        at_zero = bgn_difq_num(f, x, u, 0.0, cfg)[0]
        gaps = [abs(bgn_difq_num(f, x, u, t, cfg)[0] - at_zero) for t in (1e-1, 1e-2, 1e-3)]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_batch_matches_single(self, exp_fn, cfg):
        """Test that the batch engine agrees with single calls"""
        from src.difq_workbench.numdiff import seip_var, seip_var_batch

        xs = np.array([[0.0], [0.5], [1.0]])
        values, _ = seip_var_batch(exp_fn, xs, np.ones(1), cfg)
        for x, value in zip(xs, values):
            assert value[0] == pytest.approx(seip_var(exp_fn, x, [1.0], cfg)[0][0], rel=1e-12)

    def test_dual_cross_check(self, cfg):
        """Test numeric against dual-number derivatives"""
        from src.difq_workbench.numdiff import dual_cross_check, smooth_test_set

        for f, base in smooth_test_set():
            assert dual_cross_check(f, base, np.ones(f.n), cfg) < 1e-9, f.name


class TestHigherOrder:
    """Test seip_var_k"""

    def test_second_variation_of_sin_exp(self, cfg):
        """Test δ²(sin x · e^y) at (0.4, −0.2) along e₁, e₂"""
        from src.difq_workbench.numdiff import SmoothFn, seip_var_k

        f = SmoothFn.scalar(lambda a, b: np.sin(a) * np.exp(b), 2, "sin*exp")
        jet = seip_var_k(f, [0.4, -0.2], [[1.0, 0.0], [0.0, 1.0]], cfg)
        assert jet.order == 2
        assert jet.value[0] == pytest.approx(math.cos(0.4) * math.exp(-0.2), abs=1e-6)
        assert len(jet.level_errors) == 2

    def test_third_variation_of_cube(self, cfg):
        """Test δ³x³ = 6"""
        from src.difq_workbench.numdiff import SmoothFn, seip_var_k

        f = SmoothFn.scalar(lambda a: a ** 3, 1, "x^3")
        jet = seip_var_k(f, [0.7], [[1.0]] * 3, cfg)
        assert jet.value[0] == pytest.approx(6.0, abs=1e-4)

    def test_order_cap(self, exp_fn, cfg):
        """Test that orders above max_order raise OrderUnsupported"""
        from src.difq_workbench.errors import OrderUnsupported
        from src.difq_workbench.numdiff import seip_var_k

        with pytest.raises(OrderUnsupported):
            seip_var_k(exp_fn, [0.0], [[1.0]] * 5, cfg)

    def test_symmetry(self, cfg):
        """Test δ²f[u, v] = δ²f[v, u]"""
        from src.difq_workbench.numdiff import SmoothFn, seip_var_k

        f = SmoothFn.scalar(lambda a, b: a * a * b + b ** 3, 2, "x^2y+y^3")
        u, v = [0.3, -0.7], [0.9, 0.2]
        first = seip_var_k(f, [1.0, 0.5], [u, v], cfg).value[0]
        second = seip_var_k(f, [1.0, 0.5], [v, u], cfg).value[0]
        assert first == pytest.approx(second, rel=1e-6)


class TestSuites:
    """Test the seeded rule suites"""

    def test_linearity(self, cfg):
        """Test linearity of u ↦ δf(x, u)"""
        from src.difq_workbench.numdiff import SmoothFn, check_linearity

        f = SmoothFn.scalar(lambda a, b, c: np.exp(a * b) + np.cos(c), 3, "exp(xy)+cos z")
        report = check_linearity(f, [0.2, 0.5, -0.3], 10, seed=1, cfg=cfg)
        assert report.passed, report.summary_lines()
        assert report.check("linearity").trials == 10

    def test_calculus_rules(self, cfg):
        """Test chain rule, pairing, products, symmetry, padding and the linear rules"""
        from src.difq_workbench.numdiff import calculus_rule_suite, smooth_test_set

        report = calculus_rule_suite(smooth_test_set()[:3], 2, seed=5, cfg=cfg)
        assert report.passed, report.summary_lines()
        names = {c.name for c in report.checks}
        assert {"chain_rule", "pairing", "product", "symmetry", "zero_padding", "constant",
                "linear", "bilinear"} <= names
        assert report.check("product").trials == 6

    def test_symbolic_oracle(self, cfg):
        """Test numeric variations of random polynomials against the formal variation"""
        from src.difq_workbench.numdiff import symbolic_oracle_suite

        report = symbolic_oracle_suite(40, seed=2, cfg=cfg)
        assert report.check("oracle_agreement").passed, report.summary_lines()
        assert report.check("ill_conditioned").note is not None

    def test_variation_map(self, square_fn, cfg):
        """Test (x, u) ↦ δf(x, u) as a map of its own"""
        from src.difq_workbench.numdiff import variation_map

        first = variation_map(square_fn, cfg)
        assert first.n == 2
        assert first([1.5, 2.0])[0] == pytest.approx(6.0, rel=1e-10)
