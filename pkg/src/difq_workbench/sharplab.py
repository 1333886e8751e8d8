"""
Sharp Differentiability Lab

Numeric reproduction of the superposition-operator counterexample: for
f(x) = φ∘x near a constant function x ≡ ξ, the perturbed identity
h(u) = u + (ϱ(u))′ with remainder ϱ(u) = φ(ξ+u) − φ(ξ) − φ′(ξ)u is not
injective. Besides u₀ ≡ ε, every solution of u′ = (ε − u)/A(u) is a
preimage of u₀ under h, where

    A(η) = ∫₀¹∫₀¹ (s₁s²φ‴(ξ+s₁sη)η² + 2sφ″(ξ+s₁sη)η) ds ds₁.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, InstanceOf, field_validator
from scipy.interpolate import CubicHermiteSpline

from .errors import (DegenerateConfig, DomainError, NoConvergence, ResidualTooLarge,
                     SingularCoefficient)
from .funcgrid import GridFn, stencil_derivative
from .reports import VerificationReport

logger = logging.getLogger(__name__)

SINGULAR_A = 1e-6
QUAD_TOL = 1e-8

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PhiPack:
    """φ with its first three derivatives, all vectorized over numpy arrays."""

    phi: ArrayFn
    d1: ArrayFn
    d2: ArrayFn
    d3: ArrayFn
    name: str = "φ"
    domain: Tuple[float, float] = (-math.inf, math.inf)

    @classmethod
    def exp_plus_identity(cls) -> "PhiPack":
        """φ(t) = t + eᵗ."""
        return cls(lambda t: t + np.exp(t), lambda t: 1.0 + np.exp(t),
                   np.exp, np.exp, "t+exp(t)")

    @classmethod
    def square(cls) -> "PhiPack":
        """φ(t) = t²."""
        return cls(lambda t: t * t, lambda t: 2.0 * t,
                   lambda t: np.full_like(np.asarray(t, dtype=float), 2.0),
                   lambda t: np.zeros_like(np.asarray(t, dtype=float)), "t^2")

    @classmethod
    def affine(cls, alpha: float = 2.0, beta: float = 1.0) -> "PhiPack":
        """φ(t) = αt + β."""
        return cls(lambda t: alpha * t + beta,
                   lambda t: np.full_like(np.asarray(t, dtype=float), alpha),
                   lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                   lambda t: np.zeros_like(np.asarray(t, dtype=float)),
                   f"{alpha}t+{beta}")

    def check_domain(self, t: np.ndarray) -> None:
        lo, hi = self.domain
        if np.any((t < lo) | (t > hi)):
            raise DomainError(f"arguments leave the domain [{lo}, {hi}] of {self.name}")


class SharpConfig(BaseModel):
    """Parameters of the counterexample run."""

    model_config = ConfigDict(frozen=True)

    phi: InstanceOf[PhiPack] = Field(default_factory=PhiPack.exp_plus_identity)
    xi: float = 0.0
    eps: float = Field(0.1, gt=0)
    eta0: float = 0.12
    grid_n: int = Field(2000, ge=256)
    ode_steps: int = Field(1000, ge=100)
    quad_nodes: int = Field(65, ge=17)
    tol_demo: float = Field(1e-5, gt=0)
    chi_tol: float = Field(1e-8, gt=0)

    @field_validator("quad_nodes")
    @classmethod
    def _odd_nodes(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError("quad_nodes must be odd for composite Simpson")
        return value


def simpson_weights(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and composite Simpson weights on [0, 1] (nodes odd)."""
    s = np.linspace(0.0, 1.0, nodes)
    w = np.ones(nodes)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return s, w / (3.0 * (nodes - 1))


def _double_simpson(eta: np.ndarray, cfg: SharpConfig, nodes: int) -> np.ndarray:
    s, w = simpson_weights(nodes)
    s1 = s[:, None]
    ss = s[None, :]
    weights = w[:, None] * w[None, :]
    eta = np.asarray(eta, dtype=float)
    arg = cfg.xi + s1 * ss * eta[..., None, None]
    cfg.phi.check_domain(arg)
    e = eta[..., None, None]
    integrand = s1 * ss * ss * cfg.phi.d3(arg) * e * e + 2.0 * ss * cfg.phi.d2(arg) * e
    return np.sum(integrand * weights, axis=(-2, -1))


def coefficient_A(eta: Any, cfg: SharpConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    A(η) by nested composite Simpson on both axes.

    Args:
        eta: Scalar or array of η
        cfg: Run configuration

    Returns:
        Tuple of (A at quad_nodes, error estimate from one node doubling)

    Raises:
        NoConvergence: If the doubled rule disagrees by more than 1e-8
    """
    coarse = _double_simpson(eta, cfg, cfg.quad_nodes)
    fine = _double_simpson(eta, cfg, 2 * cfg.quad_nodes - 1)
    err = np.abs(coarse - fine)
    if np.any(err > QUAD_TOL * np.maximum(1.0, np.abs(fine))):
        raise NoConvergence(f"A(η) quadrature error {float(np.max(err)):.3g} at {cfg.quad_nodes} nodes",
                            estimate=float(np.max(err)))
    return coarse, err


class CoefficientMemo:
    """A(η) at quad_nodes with a memo on η quantized to 1e-12."""

    def __init__(self, cfg: SharpConfig):
        self.cfg = cfg
        self.values: Dict[int, float] = {}

    def __call__(self, eta: float) -> float:
        key = int(round(eta * 1e12))
        if key not in self.values:
            self.values[key] = float(_double_simpson(np.asarray(eta), self.cfg, self.cfg.quad_nodes))
        return self.values[key]


def remainder_rho(u: GridFn, cfg: SharpConfig) -> GridFn:
    """ϱ(u) = φ(ξ+u) − φ(ξ) − φ′(ξ)·u samplewise."""
    arg = cfg.xi + u.values
    cfg.phi.check_domain(arg)
    xi = np.asarray(cfg.xi, dtype=float)
    values = cfg.phi.phi(arg) - cfg.phi.phi(xi) - cfg.phi.d1(xi) * u.values
    return u.like(values)


def remainder_rho_integral(u: GridFn, cfg: SharpConfig) -> GridFn:
    """ϱ(u) in double-integral form ∫₀¹∫₀¹ s φ″(ξ + s₁su)·u² ds ds₁ (Simpson, both axes)."""
    s, w = simpson_weights(cfg.quad_nodes)
    s1 = s[:, None]
    ss = s[None, :]
    weights = w[:, None] * w[None, :]
    v = u.values[:, None, None]
    arg = cfg.xi + s1 * ss * v
    cfg.phi.check_domain(arg)
    values = np.sum(ss * cfg.phi.d2(arg) * weights, axis=(-2, -1)) * u.values ** 2
    return u.like(values)


def h_map(u: GridFn, cfg: SharpConfig) -> GridFn:
    """h(u) = u + (ϱ(u))′ with the 4th-order stencil derivative."""
    return u + stencil_derivative(remainder_rho(u, cfg), 1)


def chi(u: np.ndarray, du: np.ndarray, a_values: np.ndarray, eps: float) -> np.ndarray:
    """χ(u, u′) = u − ε + u′·A(u)."""
    return u - eps + du * a_values


@dataclass(frozen=True)
class OdeSolution:
    """RK4 trajectory of u′ = (ε − u)/A(u) with its a posteriori checks."""

    times: np.ndarray
    trajectory: GridFn
    solution: GridFn
    chi_residual: float
    halving_error: float
    steps: int


def _rk4(eta0: float, eps: float, steps: int, memo: CoefficientMemo) -> Tuple[np.ndarray, np.ndarray]:
    def rhs(u: float) -> float:
        a = memo(u)
        if abs(a) < SINGULAR_A:
            raise SingularCoefficient(f"A({u:.6g}) = {a:.3g} vanishes along the trajectory")
        return (eps - u) / a

    h = 1.0 / steps
    us = np.empty(steps + 1)
    us[0] = eta0
    u = eta0
    for i in range(steps):
        k1 = rhs(u)
        k2 = rhs(u + 0.5 * h * k1)
        k3 = rhs(u + 0.5 * h * k2)
        k4 = rhs(u + h * k3)
        u = u + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        us[i + 1] = u
    return np.linspace(0.0, 1.0, steps + 1), us


def _check_base(cfg: SharpConfig) -> float:
    a_eps, _ = coefficient_A(cfg.eps, cfg)
    a_eps = float(a_eps)
    if abs(a_eps) < SINGULAR_A:
        raise SingularCoefficient(f"A(ε) = {a_eps:.3g}: the coefficient vanishes at ε = {cfg.eps}")
    return a_eps


def _chi_residual(times: np.ndarray, us: np.ndarray, cfg: SharpConfig,
                  memo: CoefficientMemo) -> float:
    track = GridFn(0.0, 1.0, us)
    du = stencil_derivative(track, 1).values
    a_values = np.array([memo(u) for u in us])
    return float(np.max(np.abs(chi(us, du, a_values, cfg.eps))))


def solve_ode(eta0: float, cfg: SharpConfig, steps: Optional[int] = None,
              check: bool = True) -> OdeSolution:
    """
    Solve χ(u, u′) = 0, u(0) = η₀ with classical RK4 on [0, 1].

    The χ-residual uses a stencil derivative of the trajectory on the ODE
    grid; the solution is resampled onto the demo grid with cubic Hermite
    interpolation through the RK4 slopes.

    Args:
        eta0: Initial value
        cfg: Run configuration
        steps: Fixed step count (defaults to cfg.ode_steps)
        check: Raise ResidualTooLarge when the χ-residual exceeds cfg.chi_tol

    Raises:
        SingularCoefficient: If |A| < 1e-6 at ε or along the trajectory
        ResidualTooLarge: If the a posteriori residual check fails
    """
    steps = cfg.ode_steps if steps is None else steps
    _check_base(cfg)
    memo = CoefficientMemo(cfg)
    times, us = _rk4(eta0, cfg.eps, steps, memo)
    _, fine = _rk4(eta0, cfg.eps, 2 * steps, memo)
    halving_error = float(np.max(np.abs(us - fine[::2])))
    residual = _chi_residual(times, us, cfg, memo)
    logger.debug("solve_ode η₀=%g: %d steps, χ-residual %.3g, halving %.3g",
                 eta0, steps, residual, halving_error)
    if check and residual > cfg.chi_tol:
        raise ResidualTooLarge(f"χ-residual {residual:.3g} exceeds {cfg.chi_tol:.3g} "
                               f"with {steps} steps")
    slopes = np.array([(cfg.eps - u) / memo(u) for u in us])
    demo_nodes = np.linspace(0.0, 1.0, cfg.grid_n + 1)
    resampled = CubicHermiteSpline(times, us, slopes)(demo_nodes)
    resampled[0] = eta0
    return OdeSolution(times, GridFn(0.0, 1.0, us), GridFn(0.0, 1.0, resampled),
                       residual, halving_error, steps)


@dataclass(frozen=True)
class OrderStudy:
    """Observed RK4 order from successive step doublings."""

    steps: Tuple[int, ...]
    differences: Tuple[float, ...]
    residuals: Tuple[float, ...]
    order: float
    residual_order: float


def rk4_order_study(eta0: float, cfg: SharpConfig,
                    steps: Sequence[int] = (100, 200, 400)) -> OrderStudy:
    """
    Observed order of the RK4 solver.

    order compares successive solution differences on the coarsest grid;
    residual_order is the fitted log–log slope of the χ-residuals.
    """
    steps = tuple(int(s) for s in steps)
    if len(steps) < 3:
        raise ValueError("an order study needs at least three step counts")
    _check_base(cfg)
    memo = CoefficientMemo(cfg)
    runs = [_rk4(eta0, cfg.eps, s, memo) for s in steps]
    stride = [s // steps[0] for s in steps]
    coarse = [us[::k] for (_, us), k in zip(runs, stride)]
    differences = tuple(float(np.max(np.abs(coarse[i] - coarse[i + 1])))
                        for i in range(len(steps) - 1))
    order = float(np.log2(differences[-2] / differences[-1]) /
                  np.log2(steps[-1] / steps[-2]))
    residuals = tuple(_chi_residual(times, us, cfg, memo) for times, us in runs)
    slope, _ = np.polyfit(np.log(steps), np.log(residuals), 1)
    return OrderStudy(steps, differences, residuals, order, float(-slope))


@dataclass(frozen=True)
class SharpDemo:
    """Outcome of the non-injectivity demonstration."""

    report: VerificationReport
    u0: GridFn
    u1: GridFn
    h_u1: GridFn
    summary: Dict[str, Any]


def noninjectivity_demo(cfg: SharpConfig) -> SharpDemo:
    """
    Two distinct preimages of u₀ ≡ ε under h.

    Checks:
        distinct: ‖u₁ − u₀‖∞ ≥ |η₀ − ε|
        fixed_base: h(u₀) = u₀ exactly
        second_preimage: ‖h(u₁) − u₀‖∞ < tol_demo

    Raises:
        DegenerateConfig: If η₀ = ε
        SingularCoefficient: If A(ε) vanishes (e.g. affine φ)
    """
    if cfg.eta0 == cfg.eps:
        raise DegenerateConfig("η₀ = ε yields the same function twice")
    a_eps = _check_base(cfg)
    u0 = GridFn(0.0, 1.0, np.full(cfg.grid_n + 1, cfg.eps))
    ode = solve_ode(cfg.eta0, cfg)
    u1 = ode.solution
    h_u0 = h_map(u0, cfg)
    h_u1 = h_map(u1, cfg)

    separation = (u1 - u0).sup()
    preimage_gap = (h_u1 - u0).sup()
    report = VerificationReport(title="h is not injective")
    report.notes.append(f"φ = {cfg.phi.name}, ξ = {cfg.xi}, ε = {cfg.eps}, η₀ = {cfg.eta0}")
    report.check("distinct").record(separation >= abs(cfg.eta0 - cfg.eps) * (1 - 1e-12),
                                    separation, {"separation": separation})
    base_gap = (h_u0 - u0).sup()
    report.check("fixed_base").record(bool(np.array_equal(h_u0.values, u0.values)), base_gap,
                                      {"gap": base_gap})
    report.check("second_preimage").record(preimage_gap < cfg.tol_demo, preimage_gap,
                                           {"gap": preimage_gap, "tol": cfg.tol_demo})
    summary = {
        "A_eps": a_eps,
        "separation": separation,
        "h_u0_gap": base_gap,
        "h_u1_gap": preimage_gap,
        "chi_residual": ode.chi_residual,
        "halving_error": ode.halving_error,
        "ode_steps": ode.steps,
        "grid_n": cfg.grid_n,
    }
    return SharpDemo(report, u0, u1, h_u1, summary)
