"""
Grid Functions Module

Uniformly sampled functions on an interval standing in for C^∞(I) and
𝒟(ℝ): stencil derivatives, spline evaluation off the grid, superposition
and composition operators, their variations, grid seminorms and the
contraction fixed point of a superposition equation.

The closed interval is used directly as a grid domain.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, LipschitzViolated, NoConvergence, OrderUnsupported, WorkbenchError
from .numdiff import ExtrapConfig, SmoothFn, richardson_tableau
from .reports import VerificationReport, atomic_write_text, csv_text, dat_text
from .seeds import rng

logger = logging.getLogger(__name__)

MIN_CELLS = 8
MAX_STENCIL_ORDER = 4
CONTRACTION = 0.5
ORDER_CELLS = (128, 256, 512, 1024)


@lru_cache(maxsize=None)
def fornberg_weights(offsets: Tuple[int, ...], m: int) -> np.ndarray:
    """
    Finite difference weights for the m-th derivative at 0 (unit spacing).

    Fornberg's recursion over the nodes in offsets; exact for polynomials
    of degree < len(offsets).
    """
    nodes = np.asarray(offsets, dtype=float)
    count = len(nodes)
    c = np.zeros((count, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0]
    for i in range(1, count):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i]
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    weights = c[:, m].copy()
    weights.setflags(write=False)
    return weights


def _central_radius(m: int) -> int:
    return 2 if m <= 2 else 3


@dataclass(frozen=True)
class GridFn:
    """
    Samples x(t_j) at t_j = a + j·h, h = (b − a)/N, N ≥ 8.

    compact marks 𝒟-type data, extended by zero outside [a, b].
    """

    a: float
    b: float
    values: np.ndarray
    compact: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or len(values) < MIN_CELLS + 1:
            raise ValueError(f"a grid function needs at least {MIN_CELLS + 1} samples")
        if not self.b > self.a:
            raise ValueError(f"empty interval [{self.a}, {self.b}]")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid samples must be finite")

    @property
    def cells(self) -> int:
        return len(self.values) - 1

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.cells

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.cells + 1)

    @classmethod
    def sample(cls, fn: Union[SmoothFn, Callable[[np.ndarray], Any]], a: float, b: float,
               n: int, compact: bool = False) -> "GridFn":
        """
        Sample fn on N = n cells of [a, b].

        Args:
            fn: Vectorized callable t ↦ x(t), or a 1 → 1 SmoothFn
            a: Left end
            b: Right end
            n: Number of cells
            compact: Zero extension outside [a, b]
        """
        nodes = np.linspace(a, b, n + 1)
        if isinstance(fn, SmoothFn):
            values = fn(nodes[:, None])[:, 0]
        else:
            values = np.broadcast_to(np.asarray(fn(nodes), dtype=float), nodes.shape)
        return cls(a, b, values, compact)

    def like(self, values: np.ndarray, compact: Optional[bool] = None) -> "GridFn":
        return GridFn(self.a, self.b, values, self.compact if compact is None else compact)

    def _check_grid(self, other: "GridFn") -> None:
        if (other.a, other.b, other.cells) != (self.a, self.b, self.cells):
            raise ValueError("grid functions live on different grids")

    def __add__(self, other: "GridFn") -> "GridFn":
        self._check_grid(other)
        return self.like(self.values + other.values, self.compact and other.compact)

    def __sub__(self, other: "GridFn") -> "GridFn":
        self._check_grid(other)
        return self.like(self.values - other.values, self.compact and other.compact)

    def __mul__(self, other: Union["GridFn", float]) -> "GridFn":
        if isinstance(other, GridFn):
            self._check_grid(other)
            return self.like(self.values * other.values, self.compact or other.compact)
        return self.like(self.values * float(other))

    __rmul__ = __mul__

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def spline(self) -> CubicSpline:
        return CubicSpline(self.nodes, self.values, bc_type="natural")

    def at(self, points: Any) -> np.ndarray:
        """Natural cubic spline values at arbitrary points."""
        points = np.asarray(points, dtype=float)
        outside = (points < self.a) | (points > self.b)
        if np.any(outside) and not self.compact:
            raise DomainError(f"points leave [{self.a}, {self.b}]")
        values = self.spline()(np.clip(points, self.a, self.b))
        return np.where(outside, 0.0, values)

    def to_csv(self, path: Optional[Path] = None) -> str:
        text = csv_text(["t", "value"], zip(self.nodes.tolist(), self.values.tolist()))
        if path is not None:
            atomic_write_text(path, text)
        return text

    def to_dat(self, path: Optional[Path] = None) -> str:
        text = dat_text(self.nodes, self.values)
        if path is not None:
            atomic_write_text(path, text)
        return text


def stencil_derivative(x: GridFn, m: int) -> GridFn:
    """
    m-th derivative by 4th-order finite differences.

    Central stencils where they fit, one-sided windows of m + 4 nodes near
    the ends. Computed as Σ wᵢ (x_{j+i} − x_j), so constants give exactly 0.

    Raises:
        OrderUnsupported: If m is not in 0..4
    """
    if not 0 <= m <= MAX_STENCIL_ORDER:
        raise OrderUnsupported(f"stencil derivatives support orders 0..{MAX_STENCIL_ORDER}, got {m}")
    if m == 0:
        return x
    v = x.values
    count = len(v)
    r = _central_radius(m)
    out = np.zeros(count)
    central = fornberg_weights(tuple(range(-r, r + 1)), m)
    interior = slice(r, count - r)
    for w, off in zip(central, range(-r, r + 1)):
        if off:
            out[interior] += w * (v[r + off:count - r + off] - v[interior])
    width = m + 4
    for j in list(range(r)) + list(range(count - r, count)):
        start = 0 if j < r else count - width
        offsets = tuple(k - j for k in range(start, start + width))
        weights = fornberg_weights(offsets, m)
        out[j] = sum(w * (v[j + off] - v[j]) for w, off in zip(weights, offsets) if off)
    return x.like(out / x.h ** m)


def seminorm(x: GridFn, m: int, window: Optional[Tuple[float, float]] = None) -> float:
    """
    Grid seminorm p_{m,K}(x): max over nodes in K of the m-th stencil derivative.

    Raises:
        OrderUnsupported: If m > 4
        DomainError: If K is not inside [a, b]
    """
    if m > MAX_STENCIL_ORDER or m < 0:
        raise OrderUnsupported(f"seminorms support orders 0..{MAX_STENCIL_ORDER}, got {m}")
    lo, hi = (x.a, x.b) if window is None else window
    slack = 1e-12 * max(1.0, abs(x.a), abs(x.b))
    if lo < x.a - slack or hi > x.b + slack or lo > hi:
        raise DomainError(f"[{lo}, {hi}] is not inside [{x.a}, {x.b}]")
    nodes = x.nodes
    mask = (nodes >= lo - slack) & (nodes <= hi + slack)
    if not np.any(mask):
        raise DomainError(f"[{lo}, {hi}] contains no grid node")
    return float(np.max(np.abs(stencil_derivative(x, m).values[mask])))


def superpose(phi: SmoothFn, x: GridFn) -> GridFn:
    """Superposition x ↦ φ∘x; DomainError if a sample leaves φ's box."""
    if phi.n != 1 or phi.m != 1:
        raise ValueError("superposition needs a scalar map of one variable")
    return x.like(phi(x.values[:, None])[:, 0], compact=False)


def compose_shift(x: GridFn, y: GridFn) -> GridFn:
    """
    Composition (x, y) ↦ x∘(ι + y) through the natural spline of x.

    Raises:
        DomainError: If t + y(t) leaves [a, b] and x is not compact
    """
    x._check_grid(y)
    shift = y.values
    points = x.nodes + shift
    values = np.where(shift == 0.0, x.values, x.at(points))
    return x.like(values)


@dataclass(frozen=True)
class GridOperator:
    """Map from a tuple of grid functions to a grid function on the same grid."""

    arity: int
    evaluator: Callable[..., GridFn]
    name: str = "F"

    def __call__(self, *args: GridFn) -> GridFn:
        if len(args) != self.arity:
            raise ValueError(f"{self.name} takes {self.arity} grid functions, got {len(args)}")
        return self.evaluator(*args)

    @classmethod
    def superposition(cls, phi: SmoothFn) -> "GridOperator":
        return cls(1, lambda x: superpose(phi, x), f"superpose[{phi.name}]")

    @classmethod
    def composition(cls) -> "GridOperator":
        return cls(2, compose_shift, "compose_shift")


def operator_var(op: GridOperator, base: Sequence[GridFn], direction: Sequence[GridFn],
                 cfg: ExtrapConfig) -> GridFn:
    """
    Samplewise variation lim t⁻¹(F(base + t·dir) − F(base)).

    Symmetric quotients on steps t₀rʲ with t₀ ≤ h/(2‖dir‖∞), so that the
    shifted arguments stay within one grid cell, then the same Richardson
    tableau as the scalar engine.

    Raises:
        NoConvergence: With the worst sample's position
    """
    if len(base) != op.arity or len(direction) != op.arity:
        raise ValueError(f"{op.name} needs {op.arity} base and direction functions")
    head = base[0]
    spread = max(d.sup() for d in direction)
    t0 = cfg.t0 if spread == 0 else min(cfg.t0, 0.5 * head.h / spread)
    steps = cfg.steps(t0)
    quotients = []
    for t in steps:
        plus = op(*(b + d * t for b, d in zip(base, direction)))
        minus = op(*(b - d * t for b, d in zip(base, direction)))
        quotients.append((plus.values - minus.values) / (2.0 * t))
    values, errs = richardson_tableau(np.array(quotients)[..., None], cfg.ratio, cfg.richardson_order)
    values = values[:, 0]
    scale = np.maximum(1.0, np.abs(values))
    bad = ~(errs <= cfg.tol_conv * scale)
    if np.any(bad):
        worst = int(np.argmax(np.where(bad, errs / scale, -np.inf)))
        raise NoConvergence(f"{op.name}: variation at t={head.nodes[worst]:.6g} did not converge "
                            f"(error {errs[worst]:.3g})", estimate=float(values[worst]))
    return head.like(values)


@dataclass(frozen=True)
class FixedPoint:
    """Result of the contraction iteration for x = φ∘[id, x]."""

    solution: GridFn
    iterations: int
    first_change: float
    residual: float
    lipschitz: float
    contraction_ok: bool
    tol: float = 0.0

    @property
    def iteration_bound(self) -> int:
        """Geometric contraction bound ⌈log(tol·(1−½)/Δ₀)/log ½⌉."""
        if self.first_change == 0.0:
            return 1
        return int(math.ceil(math.log(self.tol * (1 - CONTRACTION) / self.first_change)
                             / math.log(CONTRACTION)))


def _pairs(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.stack([np.broadcast_to(s, t.shape), t], axis=-1)


def sampled_lipschitz(phi: SmoothFn, a: float, b: float, samples: int, seed: int,
                      t_range: Tuple[float, float] = (-10.0, 10.0)) -> float:
    """Largest sampled |φ(s,t₁) − φ(s,t₂)|/|t₁ − t₂| over random s, t₁, t₂."""
    gen = rng(seed, "funcgrid", "lipschitz")
    s = gen.uniform(a, b, samples)
    t1 = gen.uniform(*t_range, samples)
    t2 = t1 + gen.uniform(-1.0, 1.0, samples) * gen.choice([1e-3, 1e-1, 1.0, 5.0], samples)
    rise = np.abs(phi(_pairs(s, t1))[:, 0] - phi(_pairs(s, t2))[:, 0])
    run = np.abs(t1 - t2)
    keep = run > 0
    return float(np.max(rise[keep] / run[keep]))


def seip_norm_fixed_point(phi: SmoothFn, a: float, b: float, n: int, tol: float,
                          seed: int = 0, lipschitz_samples: int = 4096,
                          max_iterations: int = 10_000) -> FixedPoint:
    """
    Fixed point of x ↦ φ∘[id, x] on a grid by Banach iteration from x₀ ≡ 0.

    Args:
        phi: Map (s, t) ↦ φ(s, t), contracting by ½ in t
        a: Left end
        b: Right end
        n: Number of cells
        tol: Stop when the sup-change of one step is below tol
        seed: Seed for the Lipschitz and contraction samples
        lipschitz_samples: Number of sampled triples (s, t₁, t₂)
        max_iterations: Iteration cap

    Returns:
        FixedPoint record

    Raises:
        LipschitzViolated: If the sampled constant exceeds ½ + 1e-6
        NoConvergence: If the iteration cap is reached
    """
    if phi.n != 2 or phi.m != 1:
        raise ValueError("the fixed point map needs φ : ℝ² → ℝ")
    lipschitz = sampled_lipschitz(phi, a, b, lipschitz_samples, seed)
    if lipschitz > CONTRACTION + 1e-6:
        raise LipschitzViolated(f"sampled Lipschitz constant {lipschitz:.6g} exceeds {CONTRACTION}")
    nodes = np.linspace(a, b, n + 1)

    def step(values: np.ndarray) -> np.ndarray:
        return phi(_pairs(nodes, values))[:, 0]

    current = np.zeros(n + 1)
    first_change = None
    for iteration in range(1, max_iterations + 1):
        nxt = step(current)
        change = float(np.max(np.abs(nxt - current)))
        if first_change is None:
            first_change = change
        current = nxt
        if change < tol:
            break
    else:
        raise NoConvergence(f"fixed point iteration still moves {change:.3g} after "
                            f"{max_iterations} steps", level=max_iterations)
    logger.debug("fixed point: %d iterations, first change %.3g", iteration, first_change)

    residual = float(np.max(np.abs(current - step(current))))
    gen = rng(seed, "funcgrid", "contraction")
    other = current + gen.uniform(-1.0, 1.0, (8, n + 1))
    lhs = np.abs(step(current)[None, :] - np.array([step(o) for o in other]))
    rhs = CONTRACTION * np.abs(current[None, :] - other)
    contraction_ok = bool(np.all(lhs <= rhs * (1 + 1e-12) + 1e-15))
    return FixedPoint(GridFn(a, b, current), iteration, first_change, residual,
                      lipschitz, contraction_ok, tol)


def pointwise_fixed_point(phi: SmoothFn, s: float, tol: float,
                          max_iterations: int = 10_000) -> float:
    """Scalar Banach iteration x ← φ(s, x) from 0, an oracle for one grid node."""
    x = 0.0
    for _ in range(max_iterations):
        nxt = float(phi(np.array([s, x]))[0])
        if abs(nxt - x) < tol:
            return nxt
        x = nxt
    raise NoConvergence(f"pointwise iteration at s={s} did not settle", level=max_iterations)


def _bump(t: np.ndarray) -> np.ndarray:
    return np.sin(t) ** 4


def _bump_prime(t: np.ndarray) -> np.ndarray:
    return 4.0 * np.sin(t) ** 3 * np.cos(t)


def _bump_direction(t: np.ndarray) -> np.ndarray:
    return np.sin(t) ** 4 * np.cos(t)


def compose_variation(n: int, cfg: ExtrapConfig,
                      with_shift_direction: bool = True) -> Tuple[GridFn, GridFn]:
    """
    Numeric compose_shift variation and the analytic u∘(ι+y) + (x′∘(ι+y))·v
    for sin⁴-type data on [0, π].

    Args:
        n: Number of cells
        cfg: Extrapolation settings
        with_shift_direction: Vary y as well (v = cos/2); otherwise v = 0

    Returns:
        Tuple of (numeric variation, analytic variation)
    """
    a, b = 0.0, math.pi
    x = GridFn.sample(_bump, a, b, n, compact=True)
    y = GridFn.sample(lambda t: 0.1 * np.sin(t), a, b, n)
    u = GridFn.sample(_bump_direction, a, b, n, compact=True)
    v = GridFn.sample(lambda t: 0.5 * np.cos(t) if with_shift_direction else 0.0 * t, a, b, n)
    numeric = operator_var(GridOperator.composition(), [x, y], [u, v], cfg)
    shifted = x.nodes + y.values
    return numeric, numeric.like(_bump_direction(shifted) + _bump_prime(shifted) * v.values)


def compose_variation_error(n: int, cfg: ExtrapConfig, with_shift_direction: bool = True) -> float:
    """Sup-error of compose_variation at n cells."""
    numeric, exact = compose_variation(n, cfg, with_shift_direction)
    return (numeric - exact).sup()


def grid_suite(seed: int, cfg: ExtrapConfig, n: int = 1024) -> VerificationReport:
    """
    Operator variations and the contraction fixed point on grids.

    Checks:
        compose_variation: sup-error < 1e-5 at n cells
        compose_order: fitted refinement order ≥ 3.5 over 128..1024 cells (v = 0)
        superposition_variation: δ(sin∘x)(u) = cos(x)·u within 1e-8
        fixed_point: x = s + ½ sin x on [0, 1] with residual < 1e-10, oracle
            agreement < 1e-9 at sampled nodes and x(1) ≈ 1.4987
    """
    report = VerificationReport(title="grid operators", seed=seed)

    def attempt(name: str, threshold: float, witness: dict, compute: Callable[[], float],
                above: bool = False) -> None:
        try:
            value = float(compute())
        except WorkbenchError as exc:
            report.check(name).record(False, None, {**witness, "error": type(exc).__name__,
                                                    "message": str(exc)})
            return
        ok = value >= threshold if above else value < threshold
        report.check(name).record(ok, None if above else value, {**witness, "value": value})

    attempt("compose_variation", 1e-5, {"cells": n}, lambda: compose_variation_error(n, cfg))

    def order() -> float:
        cells = np.array(ORDER_CELLS)
        errors = [compose_variation_error(int(c), cfg, with_shift_direction=False) for c in cells]
        slope, _ = np.polyfit(np.log(cells), np.log(errors), 1)
        return -slope

    attempt("compose_order", 3.5, {"cells": list(ORDER_CELLS)}, order, above=True)

    def superposition_error() -> float:
        sine = SmoothFn.scalar(np.sin, 1, "sin")
        x = GridFn.sample(lambda t: np.cos(3.0 * t), 0.0, 1.0, n)
        u = GridFn.sample(lambda t: t * t, 0.0, 1.0, n)
        numeric = operator_var(GridOperator.superposition(sine), [x], [u], cfg)
        return float(np.max(np.abs(numeric.values - np.cos(x.values) * u.values)))

    attempt("superposition_variation", 1e-8, {"phi": "sin"}, superposition_error)

    phi = SmoothFn.scalar(lambda s, t: s + 0.5 * np.sin(t), 2, "s+sin(t)/2")
    try:
        fixed = seip_norm_fixed_point(phi, 0.0, 1.0, 256, 1e-13, seed=seed)
    except WorkbenchError as exc:
        report.check("fixed_point").record(False, None, {"error": type(exc).__name__, "message": str(exc)})
        return report
    check = report.check("fixed_point")
    check.record(fixed.residual < 1e-10 and fixed.contraction_ok, fixed.residual,
                 {"residual": fixed.residual, "lipschitz": fixed.lipschitz,
                  "contraction_ok": fixed.contraction_ok})
    nodes = fixed.solution.nodes
    gen = rng(seed, "funcgrid", "oracle")
    for j in sorted(set(gen.integers(0, len(nodes), 8).tolist()) | {len(nodes) - 1}):
        oracle = pointwise_fixed_point(phi, float(nodes[j]), 1e-14)
        gap = abs(oracle - fixed.solution.values[j])
        check.record(gap < 1e-9, gap, {"s": float(nodes[j]), "oracle": oracle,
                                       "grid": float(fixed.solution.values[j])})
    end_value = float(fixed.solution.values[-1])
    check.record(abs(end_value - 1.4987) < 5e-4, abs(end_value - 1.4987), {"x(1)": end_value})
    check.note = f"{fixed.iterations} iterations, sampled Lipschitz {fixed.lipschitz:.6f}"
    return report
