"""
Numeric Differentiation Module

Difference quotients and Seip variations of black-box smooth maps on ℝⁿ.
Limits t → 0 are estimated from symmetric quotients on a geometric step
sequence with a Ridders-style Richardson tableau; one-sided quotients
are compared to tell kinks (NotDifferentiable) from slow convergence
(NoConvergence).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import (DomainError, NoConvergence, NonFinite, NotDifferentiable,
                     OrderUnsupported)
from .reports import VerificationReport
from .rings import dual_directional, ring_from_id
from .seeds import rng
from .symcalc import PolyMap, evaluate, format_poly, formal_var, random_polymap

logger = logging.getLogger(__name__)

# Stop extrapolating once the diagonal is this much worse than the best error.
SAFE = 2.0
KINK_BAND = (0.9, 1.1)
KINK_LEVELS = 3
KINK_FLOOR = 1e-7
ILL_CONDITIONED = 1e8

Box = Tuple[Tuple[float, float], ...]


class ExtrapConfig(BaseModel):
    """Step sequence and stopping rules for the t → 0 extrapolation."""

    model_config = ConfigDict(frozen=True)

    t0: float = Field(0.1, gt=0)
    ratio: float = Field(0.5, gt=0, lt=1)
    max_levels: int = Field(12, ge=3)
    richardson_order: int = Field(4, ge=1)
    tol_conv: float = Field(1e-9, gt=0)
    max_order: int = Field(4, ge=1)
    order_tol_growth: float = Field(1e3, ge=1)

    def steps(self, t0: Optional[float] = None) -> np.ndarray:
        start = self.t0 if t0 is None else t0
        return start * self.ratio ** np.arange(self.max_levels)

    def level_tol(self, order: int) -> float:
        return self.tol_conv * self.order_tol_growth ** (order - 1)


def _as_box(box: Optional[Sequence[Sequence[float]]]) -> Optional[Box]:
    if box is None:
        return None
    return tuple((float(lo), float(hi)) for lo, hi in box)


@dataclass(frozen=True)
class SmoothFn:
    """
    Black-box numeric map ℝⁿ → ℝᵐ.

    The evaluator receives an array of shape (..., n) and returns an array
    of shape (..., m) (a trailing axis of length one may be omitted). It
    must be written with numpy operations so that it also accepts object
    arrays of DualNumber.
    """

    n: int
    m: int
    evaluator: Callable[[np.ndarray], Any]
    box: Optional[Box] = None
    name: str = "f"

    def __post_init__(self):
        object.__setattr__(self, "box", _as_box(self.box))
        if self.box is not None and len(self.box) != self.n:
            raise ValueError(f"box has {len(self.box)} axes, map has arity {self.n}")

    def raw(self, x: np.ndarray) -> np.ndarray:
        """Evaluate without domain or finiteness checks."""
        x = np.asarray(x)
        result = np.asarray(self.evaluator(x))
        return np.reshape(result, x.shape[:-1] + (self.m,))

    def inside(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.box is None:
            return np.ones(x.shape[:-1], dtype=bool)
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        return np.all((x >= lo) & (x <= hi), axis=-1)

    def __call__(self, x: Any) -> np.ndarray:
        """
        Evaluate on one point or a batch of points.

        Raises:
            DomainError: If a point lies outside the declared box
            NonFinite: If an output is NaN or infinite
        """
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.n,):
            raise DomainError(f"{self.name} expects {self.n} coordinates, got shape {x.shape}")
        inside = self.inside(x)
        if not np.all(inside):
            bad = x.reshape(-1, self.n)[~inside.reshape(-1)][0]
            raise DomainError(f"{self.name}: point {bad.tolist()} outside domain box")
        with np.errstate(all="ignore"):
            y = self.raw(x).astype(float)
        if not np.all(np.isfinite(y)):
            raise NonFinite(f"{self.name} returned a non-finite value")
        return y

    # constructors

    @classmethod
    def from_poly(cls, f: PolyMap, box: Optional[Sequence[Sequence[float]]] = None) -> "SmoothFn":
        """Numeric evaluator of a polynomial map with float coefficients."""
        comps = []
        for i in range(f.m):
            terms = f.components[i]
            exps = np.array([e for e, _ in terms], dtype=np.int64).reshape(len(terms), f.n)
            coeffs = np.array([f.ring.to_float(c) for _, c in terms], dtype=float)
            comps.append((exps, coeffs))

        def evaluator(x):
            out = []
            for exps, coeffs in comps:
                if len(coeffs) == 0:
                    out.append(x[..., 0] * 0.0)
                    continue
                monomials = np.prod(x[..., None, :] ** exps, axis=-1)
                out.append(np.sum(monomials * coeffs, axis=-1))
            return np.stack(out, axis=-1)

        return cls(f.n, f.m, evaluator, box, format_poly(f))

    @classmethod
    def constant(cls, n: int, values: Sequence[float], name: str = "const") -> "SmoothFn":
        values = np.asarray(values, dtype=float)

        def evaluator(x):
            return x[..., :1] * 0.0 + values

        return cls(n, len(values), evaluator, None, name)

    @classmethod
    def linear(cls, matrix: Any, offset: Optional[Sequence[float]] = None,
               name: str = "linear") -> "SmoothFn":
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        shift = np.zeros(matrix.shape[0]) if offset is None else np.asarray(offset, dtype=float)

        def evaluator(x):
            return x @ matrix.T + shift

        return cls(matrix.shape[1], matrix.shape[0], evaluator, None, name)

    @classmethod
    def scalar(cls, fn: Callable[..., Any], n: int = 1, name: str = "f",
               box: Optional[Sequence[Sequence[float]]] = None) -> "SmoothFn":
        """Wrap fn(x1, ..., xn) returning one value per point."""

        def evaluator(x):
            return fn(*(x[..., i] for i in range(n)))

        return cls(n, 1, evaluator, box, name)

    @staticmethod
    def compose(g: "SmoothFn", f: "SmoothFn") -> "SmoothFn":
        if g.n != f.m:
            raise ValueError(f"cannot compose {g.name} (arity {g.n}) after {f.name} ({f.m} outputs)")

        def evaluator(x):
            return g.raw(f.raw(x))

        return SmoothFn(f.n, g.m, evaluator, f.box, f"{g.name}∘{f.name}")

    @staticmethod
    def pair(f: "SmoothFn", g: "SmoothFn") -> "SmoothFn":
        if f.n != g.n:
            raise ValueError("paired maps need one domain")

        def evaluator(x):
            return np.concatenate([f.raw(x), g.raw(x)], axis=-1)

        return SmoothFn(f.n, f.m + g.m, evaluator, f.box or g.box, f"[{f.name}, {g.name}]")

    @staticmethod
    def product(f: "SmoothFn", g: "SmoothFn") -> "SmoothFn":
        """f ×₂ g = [f∘pr₁, g∘pr₂] on ℝⁿ⁺ᵏ, boxed by the product of the factor boxes."""
        box = None
        if f.box is not None or g.box is not None:
            unbounded = (-np.inf, np.inf)
            box = (f.box or (unbounded,) * f.n) + (g.box or (unbounded,) * g.n)
        first = SmoothFn.linear(np.eye(f.n, f.n + g.n), name="pr₁")
        second = SmoothFn.linear(np.eye(g.n, f.n + g.n, k=f.n), name="pr₂")
        paired = SmoothFn.pair(SmoothFn.compose(f, first), SmoothFn.compose(g, second))
        return SmoothFn(f.n + g.n, f.m + g.m, paired.raw, box, f"{f.name}×₂{g.name}")


@dataclass(frozen=True)
class JetTensor:
    """Value of δᵏf(x)[u₁..u_k] with its error estimate."""

    order: int
    x: np.ndarray
    dirs: Tuple[np.ndarray, ...]
    value: np.ndarray
    error: float
    converged: bool
    level_errors: Tuple[float, ...] = field(default_factory=tuple)


def _vec(v: Any, n: int, label: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(v, dtype=float))
    if arr.shape != (n,):
        raise DomainError(f"{label} must have {n} entries, got shape {arr.shape}")
    return arr


def _sup(a: np.ndarray) -> np.ndarray:
    return np.max(np.abs(a), axis=-1)


def _max_steps(f: SmoothFn, x: np.ndarray, spread: np.ndarray) -> np.ndarray:
    """Largest t per point with x ± t·spread inside the box (inf without box)."""
    if f.box is None:
        return np.full(x.shape[0], np.inf)
    lo = np.array([b[0] for b in f.box])
    hi = np.array([b[1] for b in f.box])
    room = np.minimum(x - lo, hi - x)
    with np.errstate(divide="ignore", invalid="ignore"):
        limits = np.where(spread > 0, room / spread, np.inf)
    return np.min(limits, axis=-1)


def _start_steps(f: SmoothFn, x: np.ndarray, spread: np.ndarray,
                 cfg: ExtrapConfig) -> np.ndarray:
    if not np.all(f.inside(x)):
        raise DomainError(f"{f.name}: base point outside domain box")
    limits = _max_steps(f, x, spread)
    if np.any(limits <= 0):
        raise DomainError(f"{f.name}: base point not interior to the domain box")
    return np.minimum(cfg.t0, 0.9 * limits)


def richardson_tableau(quotients: np.ndarray, ratio: float,
                 columns: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ridders tableau over a step sequence, vectorized over a batch axis.

    Args:
        quotients: Array (levels, batch, m) of symmetric quotients
        ratio: Step ratio r
        columns: Maximum number of Richardson columns

    Returns:
        Tuple of (best extrapolant (batch, m), error estimate (batch,))
    """
    levels, batch = quotients.shape[:2]
    fac0 = ratio ** -2
    best = quotients[0].copy()
    err = np.full(batch, np.inf)
    done = np.zeros(batch, dtype=bool)
    prev = [quotients[0]]
    for i in range(1, levels):
        row = [quotients[i]]
        fac = fac0
        for j in range(1, min(i, columns) + 1):
            nxt = (row[j - 1] * fac - prev[j - 1]) / (fac - 1.0)
            fac *= fac0
            errt = np.maximum(_sup(nxt - row[j - 1]), _sup(nxt - prev[j - 1]))
            improve = (errt <= err) & ~done
            best[improve] = nxt[improve]
            err[improve] = errt[improve]
            row.append(nxt)
        top = len(row) - 1
        worse = _sup(row[top] - prev[min(top, len(prev) - 1)]) >= SAFE * err
        done |= worse
        if np.all(done):
            logger.debug("extrapolation stopped early at level %d", i)
            break
        prev = row
    return best, err


def _kink_mask(gaps: np.ndarray, floor: np.ndarray) -> np.ndarray:
    """
    One-sided quotient gaps that refuse to shrink.

    Args:
        gaps: Array (levels, batch) of |q₊(t) − q₋(t)|
        floor: Per-point gap below which rounding dominates

    Returns:
        Boolean mask (batch,) of kinks
    """
    tail = gaps[-(KINK_LEVELS + 1):]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = tail[1:] / tail[:-1]
    steady = np.all((ratios > KINK_BAND[0]) & (ratios < KINK_BAND[1]), axis=0)
    return steady & (tail[-1] > floor)


def seip_var_batch(f: SmoothFn, xs: Any, us: Any, cfg: ExtrapConfig,
                   tol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    First-order variations δf(xᵢ, uᵢ) for a batch of points.

    Args:
        f: Smooth map
        xs: Base points, shape (batch, n)
        us: Directions, shape (batch, n) or (n,)
        cfg: Extrapolation settings
        tol: Convergence tolerance (defaults to cfg.tol_conv)

    Returns:
        Tuple of (values (batch, m), error estimates (batch,))

    Raises:
        DomainError: If a base point is not interior to the box
        NotDifferentiable: If one-sided quotients do not approach each other
        NoConvergence: If successive extrapolants never agree within tol
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    us = np.broadcast_to(np.asarray(us, dtype=float), xs.shape)
    tol = cfg.tol_conv if tol is None else tol
    start = _start_steps(f, xs, np.abs(us), cfg)
    steps = start[None, :] * cfg.ratio ** np.arange(cfg.max_levels)[:, None]
    offsets = steps[..., None] * us[None, :, :]
    centre = f(xs)
    plus = f(xs[None] + offsets)
    minus = f(xs[None] - offsets)
    quotients = (plus - minus) / (2.0 * steps[..., None])
    gaps = _sup(plus - 2.0 * centre[None] + minus) / steps
    values, errs = richardson_tableau(quotients, cfg.ratio, cfg.richardson_order)

    scale = np.maximum(1.0, _sup(values))
    kinks = _kink_mask(gaps, KINK_FLOOR * (1.0 + _sup(centre)))
    if np.any(kinks):
        idx = int(np.argmax(kinks))
        raise NotDifferentiable(
            f"{f.name}: one-sided quotients stay {gaps[-1, idx]:.3g} apart at {xs[idx].tolist()}",
            gap=float(gaps[-1, idx]))
    failed = ~(errs <= tol * scale)
    if np.any(failed):
        idx = int(np.argmax(failed))
        raise NoConvergence(
            f"{f.name}: extrapolants differ by {errs[idx]:.3g} at {xs[idx].tolist()}",
            level=cfg.max_levels, estimate=values[idx].tolist())
    return values, errs


def difq_num(f: SmoothFn, x: Any, u: Any, t: float) -> np.ndarray:
    """
    Difference quotient (f(x + tu) − f(x))/t.

    Raises:
        DomainError: If t = 0 or x, x + tu leave the box
        NonFinite: If f returns a non-finite value
    """
    if t == 0:
        raise DomainError("difference quotient needs t != 0")
    x = _vec(x, f.n, "x")
    u = _vec(u, f.n, "u")
    return (f(x + t * u) - f(x)) / t


def seip_var(f: SmoothFn, x: Any, u: Any, cfg: ExtrapConfig,
             tol: Optional[float] = None) -> Tuple[np.ndarray, float]:
    """
    Seip variation δf(x, u) = lim t⁻¹(f(x + tu) − f(x)).

    Args:
        f: Smooth map
        x: Base point, interior to f's box
        u: Direction
        cfg: Extrapolation settings
        tol: Convergence tolerance (defaults to cfg.tol_conv)

    Returns:
        Tuple of (value vector, error estimate)
    """
    x = _vec(x, f.n, "x")
    u = _vec(u, f.n, "u")
    values, errs = seip_var_batch(f, x[None], u[None], cfg, tol)
    return values[0], float(errs[0])


class _PointCache:
    """Memoized evaluations of one map, confined to a single call."""

    def __init__(self, f: SmoothFn):
        self.f = f
        self.values: Dict[bytes, np.ndarray] = {}
        self.hits = 0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        keys = [p.tobytes() for p in points]
        missing = {}
        for key, p in zip(keys, points):
            if key in self.values:
                self.hits += 1
            elif key not in missing:
                missing[key] = p
        if missing:
            fresh = self.f(np.array(list(missing.values())))
            for key, value in zip(missing, fresh):
                self.values[key] = value
        return np.array([self.values[key] for key in keys])


def _nested_quotients(cache: _PointCache, x: np.ndarray, dirs: Sequence[np.ndarray],
                      steps: np.ndarray) -> np.ndarray:
    """Order-k symmetric nested quotients for every step: shape (levels, m)."""
    k = len(dirs)
    signs = np.array(list(product((1.0, -1.0), repeat=k)))
    weights = np.prod(signs, axis=1)
    shifts = signs @ np.stack(dirs)
    out = []
    for t in steps:
        values = cache(x[None] + t * shifts)
        out.append(weights @ values / (2.0 * t) ** k)
    return np.array(out)


def seip_var_k(f: SmoothFn, x: Any, dirs: Sequence[Any], cfg: ExtrapConfig) -> JetTensor:
    """
    Order-k variation δᵏf(x)[u₁..u_k].

    Each level ℓ differentiates the level ℓ−1 quotient at x in direction
    u_ℓ with the same step, so the order-ℓ quotient is the symmetric mixed
    difference over x + t(±u₁ ± … ± u_ℓ). Level ℓ must converge within
    tol_conv·order_tol_growth^(ℓ−1); all levels share one point cache.

    Raises:
        OrderUnsupported: If k exceeds cfg.max_order
        NotDifferentiable: If the first level detects a kink
        NoConvergence: With the failing level attached
    """
    k = len(dirs)
    if k < 1:
        raise ValueError("seip_var_k needs at least one direction")
    if k > cfg.max_order:
        raise OrderUnsupported(f"order {k} exceeds the numeric cap {cfg.max_order}")
    x = _vec(x, f.n, "x")
    dirs = tuple(_vec(u, f.n, f"direction {i + 1}") for i, u in enumerate(dirs))

    level_errors: List[float] = []
    value = np.zeros(f.m)
    cache = _PointCache(f)
    for level in range(1, k + 1):
        if level == 1:
            value, err = seip_var(f, x, dirs[0], cfg)
            level_errors.append(err)
            continue
        spread = np.sum(np.abs(np.stack(dirs[:level])), axis=0)
        start = _start_steps(f, x[None], spread[None], cfg)[0]
        quotients = _nested_quotients(cache, x, dirs[:level], cfg.steps(start))
        best, errs = richardson_tableau(quotients[:, None, :], cfg.ratio, cfg.richardson_order)
        value, err = best[0], float(errs[0])
        level_errors.append(err)
        logger.debug("seip_var_k level %d: err %.3g (cache hits %d)", level, err, cache.hits)
        if not err <= cfg.level_tol(level) * max(1.0, float(np.max(np.abs(value)))):
            raise NoConvergence(f"{f.name}: order {level} variation did not converge "
                                f"(error {err:.3g})", level=level, estimate=value.tolist())
    return JetTensor(order=k, x=x, dirs=dirs, value=value, error=max(level_errors),
                     converged=True, level_errors=tuple(level_errors))


def bgn_difq_num(f: SmoothFn, x: Any, u: Any, t: float, cfg: ExtrapConfig) -> np.ndarray:
    """Difference quotient map f^[1](x, u, t), continued to t = 0 by the variation."""
    if t == 0:
        return seip_var(f, x, u, cfg)[0]
    return difq_num(f, x, u, t)


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) /
                 max(1.0, float(np.max(np.abs(b)))))


def check_linearity(f: SmoothFn, x: Any, trials: int, seed: int,
                    cfg: ExtrapConfig) -> VerificationReport:
    """
    Linearity of u ↦ δf(x, u) on seeded random α, β, u, v.

    A trial passes when the relative residual of
    δf(x, αu+βv) − αδf(x,u) − βδf(x,v) is below 1e-6.
    """
    x = _vec(x, f.n, "x")
    gen = rng(seed, "numdiff", "linearity", f.name)
    report = VerificationReport(title=f"linearity of δ{f.name}", seed=seed)
    check = report.check("linearity")
    for trial in range(trials):
        u, v = gen.uniform(-1.0, 1.0, f.n), gen.uniform(-1.0, 1.0, f.n)
        alpha, beta = gen.uniform(-2.0, 2.0, 2)
        witness = {"trial": trial, "x": x, "u": u, "v": v, "alpha": alpha, "beta": beta}
        try:
            values, _ = seip_var_batch(f, np.tile(x, (3, 1)),
                                       np.stack([alpha * u + beta * v, u, v]), cfg)
        except (NotDifferentiable, NoConvergence) as exc:
            check.record(False, None, {**witness, "error": type(exc).__name__, "message": str(exc)})
            continue
        combined = alpha * values[1] + beta * values[2]
        scale = max(1.0, abs(alpha) * float(np.max(np.abs(values[1]))) +
                    abs(beta) * float(np.max(np.abs(values[2]))))
        residual = float(np.max(np.abs(values[0] - combined))) / scale
        check.record(residual < 1e-6, residual, {**witness, "residual": residual})
    return report


def smooth_test_set() -> List[Tuple[SmoothFn, np.ndarray]]:
    """Standard smooth maps with a base point each, for the rule suites."""
    return [
        (SmoothFn.scalar(np.exp, 1, "exp"), np.array([0.3])),
        (SmoothFn.scalar(np.sin, 1, "sin"), np.array([0.7])),
        (SmoothFn.scalar(lambda a: a ** 3 - 2.0 * a, 1, "cubic"), np.array([1.2])),
        (SmoothFn.scalar(lambda a, b: np.sin(a) * np.exp(b), 2, "sin*exp"), np.array([0.4, -0.2])),
        (SmoothFn.scalar(lambda a, b: a * a * b + b ** 3, 2, "x^2y+y^3"), np.array([1.0, 0.5])),
        (SmoothFn.scalar(lambda a, b, c: np.exp(a * b) + np.cos(c), 3, "exp(xy)+cos z"),
         np.array([0.2, 0.5, -0.3])),
    ]


OUTER_FNS = [
    SmoothFn.scalar(np.sin, 1, "sin"),
    SmoothFn.scalar(np.exp, 1, "exp"),
    SmoothFn.scalar(lambda a: a ** 3 - a, 1, "y^3-y"),
]


def calculus_rule_suite(fns: Sequence[Tuple[SmoothFn, Any]], trials: int, seed: int,
                        cfg: ExtrapConfig) -> VerificationReport:
    """
    Calculus rules as numeric instance checks.

    Checks, per trial on seeded directions near each function's base point:
        chain_rule: δ(g∘f)(x,u) = δg(f(x), δf(x,u)) for scalar outer g
        constant: variation of a constant map is exactly 0
        linear: δℓ(x,u) = ℓ(u)
        bilinear: δb((x,y),(u,v)) = b(x,v) + b(u,y)
        pairing: δ[f,g] = [δf, δg]
        product: δ(f×₂g)((x,y),(u,w)) = (δf(x,u), δg(y,w)), g the next map in fns
        zero_padding: δ²f(x)[u,v] = δ(δf)((x,u))[(v,0)]
        symmetry: δ²f(x)[u,v] = δ²f(x)[v,u]

    Args:
        fns: (map, base point) pairs of scalar smooth maps
        trials: Trials per function
        seed: Run seed
        cfg: Extrapolation settings

    Returns:
        VerificationReport
    """
    gen = rng(seed, "numdiff", "calculus_rules")
    report = VerificationReport(title="calculus rules", seed=seed)

    def attempt(name: str, threshold: float, witness: dict, compute: Callable[[], Tuple[Any, Any]]):
        try:
            lhs, rhs = compute()
        except (NotDifferentiable, NoConvergence, DomainError) as exc:
            report.check(name).record(False, None, {**witness, "error": type(exc).__name__,
                                                    "message": str(exc)})
            return
        residual = _relative(lhs, rhs)
        ok = residual == 0.0 if threshold == 0.0 else residual < threshold
        report.check(name).record(ok, residual, {**witness, "lhs": lhs, "rhs": rhs})

    for index, (f, base) in enumerate(fns):
        base = _vec(base, f.n, "base point")
        partner, partner_base = fns[(index + 1) % len(fns)]
        partner_base = _vec(partner_base, partner.n, "base point")
        crossed = SmoothFn.product(f, partner)
        for trial in range(trials):
            x = base + gen.uniform(-0.1, 0.1, f.n)
            u, v = gen.uniform(-1.0, 1.0, f.n), gen.uniform(-1.0, 1.0, f.n)
            witness = {"f": f.name, "trial": trial, "x": x, "u": u, "v": v}

            g = OUTER_FNS[trial % len(OUTER_FNS)]
            composite = SmoothFn.compose(g, f)
            attempt("chain_rule", 1e-6, {**witness, "g": g.name}, lambda: (
                seip_var(composite, x, u, cfg)[0],
                seip_var(g, f(x), seip_var(f, x, u, cfg)[0], cfg)[0]))

            attempt("pairing", 1e-8, witness, lambda: (
                seip_var(SmoothFn.pair(f, composite), x, u, cfg)[0],
                np.concatenate([seip_var(f, x, u, cfg)[0], seip_var(composite, x, u, cfg)[0]])))

            attempt("symmetry", 1e-6, witness, lambda: (
                seip_var_k(f, x, [u, v], cfg).value, seip_var_k(f, x, [v, u], cfg).value))

            first = variation_map(f, cfg)
            attempt("zero_padding", 1e-5, witness, lambda: (
                seip_var_k(f, x, [u, v], cfg).value,
                seip_var(first, np.concatenate([x, u]),
                         np.concatenate([v, np.zeros(f.n)]), cfg, tol=cfg.level_tol(2))[0]))

            y = partner_base + gen.uniform(-0.1, 0.1, partner.n)
            w = gen.uniform(-1.0, 1.0, partner.n)
            attempt("product", 1e-7, {**witness, "g": partner.name, "y": y, "w": w}, lambda: (
                seip_var(crossed, np.concatenate([x, y]), np.concatenate([u, w]), cfg)[0],
                np.concatenate([seip_var(f, x, u, cfg)[0], seip_var(partner, y, w, cfg)[0]])))

    dim = 2
    for trial in range(trials):
        x, u = gen.uniform(-2.0, 2.0, 2 * dim), gen.uniform(-1.0, 1.0, 2 * dim)
        matrix = gen.uniform(-3.0, 3.0, (2, 2 * dim))
        values = gen.uniform(-5.0, 5.0, 2)
        witness = {"trial": trial, "x": x, "u": u}
        const = SmoothFn.constant(2 * dim, values)
        attempt("constant", 0.0, witness, lambda: (seip_var(const, x, u, cfg)[0], np.zeros(2)))
        lin = SmoothFn.linear(matrix, offset=values)
        attempt("linear", 1e-8, witness, lambda: (seip_var(lin, x, u, cfg)[0], matrix @ u))
        bil = SmoothFn.scalar(lambda a, b, c, d: a * c + b * d, 2 * dim, "x·y")
        attempt("bilinear", 1e-8, witness, lambda: (
            seip_var(bil, x, u, cfg)[0],
            np.array([x[:dim] @ u[dim:] + u[:dim] @ x[dim:]])))
    return report


def variation_map(f: SmoothFn, cfg: ExtrapConfig) -> SmoothFn:
    """The map (x, u) ↦ δf(x, u) on ℝ²ⁿ, each call a batch of variations."""

    def evaluator(z):
        z = np.asarray(z, dtype=float)
        flat = z.reshape(-1, 2 * f.n)
        values, _ = seip_var_batch(f, flat[:, :f.n], flat[:, f.n:], cfg)
        return values.reshape(z.shape[:-1] + (f.m,))

    return SmoothFn(2 * f.n, f.m, evaluator, None, f"δ{f.name}")


def dual_cross_check(f: SmoothFn, x: Any, u: Any, cfg: ExtrapConfig) -> float:
    """Relative gap between the numeric variation and the dual-number derivative."""
    x = _vec(x, f.n, "x")
    u = _vec(u, f.n, "u")
    numeric, _ = seip_var(f, x, u, cfg)
    forward = dual_directional(f.evaluator, x, u)
    return _relative(numeric, forward)


def _condition_number(g: PolyMap, point: Sequence[Fraction]) -> float:
    """Σ|terms| / |value| for evaluating a scalar polynomial at point."""
    total, absolute = Fraction(0), Fraction(0)
    for exps, coeff in g.components[0]:
        term = coeff
        for v, e in zip(point, exps):
            term *= v ** e
        total += term
        absolute += abs(term)
    if total == 0:
        return math.inf if absolute else 1.0
    return float(absolute / abs(total))


def symbolic_oracle_suite(count: int, seed: int, cfg: ExtrapConfig,
                          max_degree: int = 5, max_arity: int = 3) -> VerificationReport:
    """
    Numeric variations of random polynomials against the exact formal variation.

    Cases whose exact evaluation has condition number above 1e8 are
    excluded and counted in the "ill_conditioned" check.
    """
    ring = ring_from_id("Q")
    gen = rng(seed, "numdiff", "oracle")
    report = VerificationReport(title="symbolic oracle agreement", seed=seed)
    agreement = report.check("oracle_agreement")
    excluded = report.check("ill_conditioned")
    for trial in range(count):
        n = int(gen.integers(1, max_arity + 1))
        f = random_polymap(ring, n, max_degree, int(gen.integers(1, 7)), gen)
        x, u = gen.uniform(-1.0, 1.0, n), gen.uniform(-1.0, 1.0, n)
        point = [Fraction(float(v)) for v in np.concatenate([x, u])]
        exact_map = formal_var(f)
        exact = float(evaluate(exact_map, point)[0].value)
        cond = _condition_number(exact_map, point)
        witness = {"trial": trial, "f": format_poly(f), "x": x, "u": u, "condition": cond}
        try:
            numeric = float(seip_var(SmoothFn.from_poly(f), x, u, cfg)[0][0])
        except NoConvergence as exc:
            numeric = float("nan")
            witness["error"] = str(exc)
        residual = abs(numeric - exact) / max(1.0, abs(exact))
        if cond > ILL_CONDITIONED:
            excluded.record(True, residual, witness)
            continue
        agreement.record(residual < 1e-7, residual, {**witness, "numeric": numeric, "exact": exact})
    excluded.note = "cases excluded from oracle_agreement (condition number > 1e8)"
    return report
