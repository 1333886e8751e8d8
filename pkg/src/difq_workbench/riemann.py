"""
Riemann Integration Module

Riemann sums of vector-valued curves over tagged partitions, integration
by uniform refinement, the integral operators Iᵏ and numeric checks of the
mean value theorem, differentiation under the integral and the integral
representation of difference quotients.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, NoConvergence, NonFinite, PartitionMismatch, WorkbenchError
from .numdiff import ExtrapConfig, SmoothFn, bgn_difq_num, seip_var, seip_var_batch
from .reports import VerificationReport
from .seeds import rng

logger = logging.getLogger(__name__)

TAG_RULES = ("left", "midpoint", "right")
DEFAULT_MAX_CELLS = 2**20
# Don't stop on the first agreement of coarse sums.
MIN_CELLS = 16
DEFAULT_STENCIL_CELLS = 2**12


@dataclass(frozen=True)
class TaggedPartition:
    """
    Nodes t₀ ≤ … ≤ t_k of [a, b] with one tag sᵢ ∈ [tᵢ, tᵢ₊₁] per cell.
    """

    nodes: np.ndarray
    tags: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        tags = np.asarray(self.tags, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "tags", tags)
        if nodes.ndim != 1 or len(nodes) < 2:
            raise PartitionMismatch("a partition needs at least two nodes")
        if np.any(np.diff(nodes) < 0):
            raise PartitionMismatch("partition nodes must be nondecreasing")
        if tags.shape != (len(nodes) - 1,):
            raise PartitionMismatch(f"expected {len(nodes) - 1} tags, got {tags.shape}")
        if np.any(tags < nodes[:-1]) or np.any(tags > nodes[1:]):
            raise PartitionMismatch("every tag must lie in its cell")

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @classmethod
    def uniform(cls, a: float, b: float, cells: int, tag: str = "midpoint") -> "TaggedPartition":
        """
        Uniform partition with a tag rule.

        Args:
            a: Left end
            b: Right end
            cells: Number of cells (>= 1)
            tag: "left", "midpoint" or "right"
        """
        if cells < 1:
            raise PartitionMismatch("cells must be >= 1")
        if tag not in TAG_RULES:
            raise ValueError(f"unknown tag rule {tag!r}; use one of {TAG_RULES}")
        nodes = np.linspace(a, b, cells + 1)
        if tag == "left":
            tags = nodes[:-1]
        elif tag == "right":
            tags = nodes[1:]
        else:
            tags = 0.5 * (nodes[:-1] + nodes[1:])
        return cls(nodes, tags)


@dataclass(frozen=True)
class Curve:
    """
    Curve γ : [a, b] → ℝᵐ.

    A vectorized evaluator maps an array of parameters (k,) to (k,) or
    (k, m); otherwise it is called once per parameter.
    """

    a: float
    b: float
    evaluator: Callable[[Any], Any]
    vectorized: bool = True
    name: str = "γ"

    def __call__(self, s: Any) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.vectorized:
            values = np.asarray(self.evaluator(s), dtype=float)
        else:
            values = np.array([np.asarray(self.evaluator(float(v)), dtype=float) for v in s])
        values = values.reshape(len(s), -1)
        if not np.all(np.isfinite(values)):
            raise NonFinite(f"curve {self.name} returned a non-finite value")
        return values


def riemann_sum(curve: Curve, partition: TaggedPartition) -> np.ndarray:
    """
    Σᵢ (tᵢ₊₁ − tᵢ)·γ(sᵢ).

    Raises:
        PartitionMismatch: If the partition does not span the curve's domain
    """
    scale = max(1.0, abs(curve.a), abs(curve.b))
    if abs(partition.a - curve.a) > 1e-12 * scale or abs(partition.b - curve.b) > 1e-12 * scale:
        raise PartitionMismatch(f"partition spans [{partition.a}, {partition.b}], "
                                f"curve is defined on [{curve.a}, {curve.b}]")
    values = curve(partition.tags)
    return np.sum(partition.widths[:, None] * values, axis=0)


def integrate(curve: Curve, a: Optional[float] = None, b: Optional[float] = None,
              tol: float = 1e-10, tag: str = "midpoint",
              max_cells: int = DEFAULT_MAX_CELLS,
              trace: Optional[List[Tuple[int, np.ndarray, float]]] = None) -> Tuple[np.ndarray, float]:
    """
    Integrate by uniform refinement until two successive sums agree.

    Cell counts double from 1; the first stop is allowed at 16 cells.

    Args:
        curve: Integrand
        a: Left end (defaults to the curve's)
        b: Right end (defaults to the curve's)
        tol: Sup-norm tolerance on successive sums
        tag: Tag rule of the uniform partitions
        max_cells: Largest cell count tried
        trace: Optional list receiving (cells, sum, difference) rows

    Returns:
        Tuple of (integral vector, last successive difference)

    Raises:
        DomainError: If a >= b or [a, b] leaves the curve's domain
        NoConvergence: If max_cells is reached without agreement
    """
    a = curve.a if a is None else float(a)
    b = curve.b if b is None else float(b)
    if not a < b:
        raise DomainError(f"integration needs a < b, got [{a}, {b}]")
    if a < curve.a or b > curve.b:
        raise DomainError(f"[{a}, {b}] is outside the curve's domain [{curve.a}, {curve.b}]")
    piece = Curve(a, b, curve, True, curve.name)
    cells = 1
    previous = riemann_sum(piece, TaggedPartition.uniform(a, b, cells, tag))
    if trace is not None:
        trace.append((cells, previous, float("nan")))
    while cells < max_cells:
        cells *= 2
        current = riemann_sum(piece, TaggedPartition.uniform(a, b, cells, tag))
        diff = float(np.max(np.abs(current - previous)))
        if trace is not None:
            trace.append((cells, current, diff))
        if cells >= MIN_CELLS and diff < tol:
            logger.debug("integrate %s: %d cells, difference %.3g", curve.name, cells, diff)
            return current, diff
        previous = current
    raise NoConvergence(f"integral of {curve.name} still changes after {max_cells} cells",
                        level=max_cells, estimate=previous.tolist())


def refinement_table(curve: Curve, cells: Sequence[int],
                     tag: str = "midpoint") -> List[Tuple[int, np.ndarray, float]]:
    """Rows (cells, sum, successive difference) for the given cell counts."""
    rows = []
    previous = None
    for count in cells:
        current = riemann_sum(curve, TaggedPartition.uniform(curve.a, curve.b, count, tag))
        diff = float("nan") if previous is None else float(np.max(np.abs(current - previous)))
        rows.append((int(count), current, diff))
        previous = current
    return rows


def refinement_order(curve: Curve, exact: Any,
                     cells: Sequence[int] = tuple(2**j for j in range(4, 13)),
                     tag: str = "midpoint") -> float:
    """
    Fitted convergence order of uniform sums against a known integral.

    Returns:
        Negative slope of log(error) against log(cells)
    """
    exact = np.atleast_1d(np.asarray(exact, dtype=float))
    errors = [float(np.max(np.abs(row[1] - exact))) for row in refinement_table(curve, cells, tag)]
    slope, _ = np.polyfit(np.log(np.asarray(cells, dtype=float)), np.log(errors), 1)
    return float(-slope)


def _segment_curve(g: SmoothFn, x: np.ndarray, u: np.ndarray, weight: Callable[[np.ndarray], np.ndarray],
                   name: str) -> Curve:
    def evaluator(s):
        return weight(s)[:, None] * g(x[None, :] + s[:, None] * u[None, :])

    return Curve(0.0, 1.0, evaluator, True, name)


def _check_segment(g: SmoothFn, start: np.ndarray, end: np.ndarray) -> None:
    if not (np.all(g.inside(start)) and np.all(g.inside(end))):
        raise DomainError(f"segment {start.tolist()} → {end.tolist()} leaves the domain of {g.name}")


def integral_op_Ik(g: SmoothFn, k: int, x: Any, u: Any, tol: float = 1e-10) -> np.ndarray:
    """
    Iᵏg(x, u) = ∫₀¹ sᵏ g(x + su) ds.

    Raises:
        DomainError: If the segment x + [0,1]u leaves g's box
        NoConvergence: From integrate
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    _check_segment(g, x, x + u)
    curve = _segment_curve(g, x, u, lambda s: s ** k, f"I^{k}{g.name}")
    return integrate(curve, tol=tol)[0]


def integral_op_map(g: SmoothFn, k: int, cells: int = DEFAULT_STENCIL_CELLS) -> SmoothFn:
    """
    (x, u) ↦ Iᵏg(x, u) on a fixed midpoint partition.

    A fixed partition keeps the map smooth in (x, u), so it can be
    differentiated numerically.
    """
    s = (np.arange(cells) + 0.5) / cells
    weights = s ** k / cells
    n = g.n

    def evaluator(z):
        z = np.asarray(z, dtype=float)
        flat = z.reshape(-1, 2 * n)
        points = flat[:, None, :n] + s[None, :, None] * flat[:, None, n:]
        values = g(points)
        out = np.einsum("c,bcm->bm", weights, values)
        return out.reshape(z.shape[:-1] + (g.m,))

    return SmoothFn(2 * n, g.m, evaluator, None, f"I^{k}{g.name}")


def mvt_containment_check(curve: Curve, sample_count: int, tol: float,
                          cfg: ExtrapConfig) -> VerificationReport:
    """
    Mean value containment for a scalar curve.

    Verifies c(b) − c(a) ∈ (b − a)·[min c′, max c′] ± tol over derivative
    values sampled at cell midpoints of (a, b).

    Raises:
        NotDifferentiable: If the curve has a kink at a sample
    """
    fn = SmoothFn(1, 1, lambda s: curve(s[..., 0].reshape(-1)).reshape(s.shape[:-1] + (1,)),
                  ((curve.a, curve.b),), curve.name)
    samples = curve.a + (np.arange(sample_count) + 0.5) * (curve.b - curve.a) / sample_count
    slopes, _ = seip_var_batch(fn, samples[:, None], np.ones(1), cfg, tol=cfg.level_tol(2))
    lo, hi = float(np.min(slopes)), float(np.max(slopes))
    width = curve.b - curve.a
    increment = float(curve(curve.b)[0, 0] - curve(curve.a)[0, 0])
    report = VerificationReport(title=f"mean value containment for {curve.name}")
    ok = lo * width - tol <= increment <= hi * width + tol
    gap = max(0.0, lo * width - increment, increment - hi * width)
    report.check("containment").record(ok, gap, {"increment": increment,
                                                 "interval": [lo * width, hi * width]})
    return report


def containment_check(curve: Curve, lo: float, hi: float, tol: float,
                      samples: int = 257) -> VerificationReport:
    """
    Integral containment in scalar form: a curve with range in [lo, hi]
    has its mean ∫γ/(b − a) in [lo, hi] ± tol.
    """
    report = VerificationReport(title=f"integral containment for {curve.name}")
    values = curve(np.linspace(curve.a, curve.b, samples))[:, 0]
    in_range = bool(np.all((values >= lo) & (values <= hi)))
    report.check("range").record(in_range, None, {"min": float(values.min()), "max": float(values.max())})
    integral, err = integrate(curve, tol=tol)
    mean = float(integral[0]) / (curve.b - curve.a)
    ok = lo - tol <= mean <= hi + tol
    report.check("containment").record(ok, max(0.0, lo - mean, mean - hi),
                                       {"mean": mean, "interval": [lo, hi], "error": err})
    return report


def under_integral_deriv_check(family: Callable[[np.ndarray, np.ndarray], np.ndarray],
                               t: float, tol: float, cfg: ExtrapConfig,
                               cells: int = DEFAULT_STENCIL_CELLS) -> float:
    """
    |D c(t) − ∫₀¹ D(Γ(s))(t) ds| with c(t) = ∫₀¹ Γ(s)(t) ds.

    Args:
        family: Vectorized Γ(s, t) returning one value per (s, t) pair
        t: Parameter at which both sides are compared
        tol: Integration tolerance of the right-hand side
        cfg: Extrapolation settings
        cells: Midpoint cells for the differentiated integral

    Returns:
        Absolute residual
    """
    s_mid = (np.arange(cells) + 0.5) / cells

    def integral_of_family(z):
        z = np.asarray(z, dtype=float)
        tt = z[..., 0].reshape(-1)
        sums = np.mean(family(s_mid[None, :], tt[:, None]), axis=1)
        return sums.reshape(z.shape[:-1] + (1,))

    c = SmoothFn(1, 1, integral_of_family, None, "∫Γ")
    lhs = seip_var(c, [t], [1.0], cfg, tol=cfg.level_tol(2))[0]

    joint = SmoothFn.scalar(family, 2, "Γ")

    def derivative_curve(s):
        points = np.stack([s, np.full_like(s, t)], axis=-1)
        values, _ = seip_var_batch(joint, points, np.array([0.0, 1.0]), cfg, tol=cfg.level_tol(2))
        return values

    rhs, _ = integrate(Curve(0.0, 1.0, derivative_curve, True, "DΓ"), tol=tol)
    return float(np.max(np.abs(lhs - rhs)))


def thm52_identity_residual(f: SmoothFn, x: Any, u: Any, t: float, cfg: ExtrapConfig,
                            tol: float = 1e-10) -> float:
    """
    Sup-norm of f^[1](x, u, t) − ∫₀¹ δf(x + stu, u) ds.

    Raises:
        DomainError: If the segment x + [0,1]·tu leaves f's box
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    _check_segment(f, x, x + t * u)
    lhs = bgn_difq_num(f, x, u, t, cfg)

    def integrand(s):
        values, _ = seip_var_batch(f, x[None, :] + (s * t)[:, None] * u[None, :], u, cfg)
        return values

    rhs, _ = integrate(Curve(0.0, 1.0, integrand, True, f"δ{f.name}"), tol=tol)
    return float(np.max(np.abs(lhs - rhs)))


def lemma50_variation_residual(g: SmoothFn, k: int, x: Any, u: Any, y: Any, v: Any,
                               cfg: ExtrapConfig, tol: float = 1e-10,
                               cells: int = DEFAULT_STENCIL_CELLS) -> float:
    """
    Sup-norm of δ(Iᵏg)((x,u),(y,v)) − ∫₀¹ (sᵏ δg(x+su, y) + sᵏ⁺¹ δg(x+su, v)) ds.

    The left side differentiates Iᵏg on a fixed midpoint partition; the
    right side integrates numeric variations by refinement.
    """
    x, u, y, v = (np.atleast_1d(np.asarray(a, dtype=float)) for a in (x, u, y, v))
    _check_segment(g, x, x + u)
    operator = integral_op_map(g, k, cells)
    lhs = seip_var(operator, np.concatenate([x, u]), np.concatenate([y, v]), cfg,
                   tol=cfg.level_tol(2))[0]

    def integrand(s):
        base = x[None, :] + s[:, None] * u[None, :]
        along_y, _ = seip_var_batch(g, base, y, cfg)
        along_v, _ = seip_var_batch(g, base, v, cfg)
        return (s ** k)[:, None] * along_y + (s ** (k + 1))[:, None] * along_v

    rhs, _ = integrate(Curve(0.0, 1.0, integrand, True, f"δI^{k}{g.name}"), tol=tol)
    return float(np.max(np.abs(lhs - rhs)))


def riemann_suite(count: int, seed: int, cfg: ExtrapConfig, tol: float = 1e-9,
                  cells: int = DEFAULT_STENCIL_CELLS) -> VerificationReport:
    """
    Integration checks on standard integrands and seeded difference quotients.

    Checks:
        refinement_order: midpoint sums of eˢ on [0, 1] converge with slope 2 ± 0.2
        integral_exp: ∫₀¹ eˢ ds = e − 1 within 1e-8
        quotient_identity: f^[1](x,u,t) = ∫₀¹ δf(x+stu, u) ds, residual < 1e-6, t = 0 included
        integral_variation: the variation formula for Iᵏg, residual < 1e-5
        under_integral: differentiation under the integral for s·t² and e^{st}, residual < 1e-6
        mean_value: c(1) − c(0) lies in the sampled derivative range for s², sin

    integral_variation and under_integral differentiate on fixed midpoint
    partitions of `cells` cells.
    """
    gen = rng(seed, "riemann", "suite")
    report = VerificationReport(title="riemann integration", seed=seed)
    exp_curve = Curve(0.0, 1.0, np.exp, True, "exp")

    def attempt(name: str, threshold: float, witness: dict, compute: Callable[[], float]) -> None:
        try:
            residual = float(compute())
        except WorkbenchError as exc:
            report.check(name).record(False, None, {**witness, "error": type(exc).__name__,
                                                    "message": str(exc)})
            return
        report.check(name).record(residual < threshold, residual, {**witness, "residual": residual})

    attempt("refinement_order", 0.2, {"curve": "exp"},
            lambda: abs(refinement_order(exp_curve, np.e - 1.0) - 2.0))
    attempt("integral_exp", 1e-8, {"curve": "exp"},
            lambda: abs(float(integrate(exp_curve, tol=1e-10)[0][0]) - (np.e - 1.0)))

    fns = [
        SmoothFn.scalar(np.exp, 1, "exp"),
        SmoothFn.scalar(np.sin, 1, "sin"),
        SmoothFn.scalar(lambda a: a ** 3 - 2.0 * a, 1, "cubic"),
        SmoothFn.scalar(lambda a, b: np.sin(a) * np.exp(b), 2, "sin*exp"),
        SmoothFn.linear([[1.0, -2.0], [0.5, 3.0]], name="linear"),
    ]
    for trial in range(count):
        f = fns[trial % len(fns)]
        x = gen.uniform(-1.0, 1.0, f.n)
        u = gen.uniform(-1.0, 1.0, f.n)
        t = 0.0 if trial % 5 == 0 else float(gen.uniform(-0.5, 0.5))
        attempt("quotient_identity", 1e-6, {"f": f.name, "x": x, "u": u, "t": t},
                lambda: thm52_identity_residual(f, x, u, t, cfg, tol))

    square = SmoothFn.scalar(lambda a: a * a, 1, "x^2")
    for g, k in ((square, 0), (SmoothFn.scalar(np.exp, 1, "exp"), 0), (square, 2)):
        attempt("integral_variation", 1e-5, {"g": g.name, "k": k},
                lambda: lemma50_variation_residual(g, k, [0.0 if g is not square else 1.0], [1.0],
                                                   [1.0], [1.0], cfg, tol, cells))

    families = (
        ("s*t^2", lambda s, t: s * t * t),
        ("exp(s*t)", lambda s, t: np.exp(s * t)),
    )
    for name, family in families:
        attempt("under_integral", 1e-6, {"family": name},
                lambda: under_integral_deriv_check(family, 0.5, tol, cfg, cells))

    for curve in (Curve(0.0, 1.0, lambda s: s * s, True, "s^2"), Curve(0.0, 1.0, np.sin, True, "sin")):
        try:
            containment = mvt_containment_check(curve, 64, 1e-9, cfg)
        except WorkbenchError as exc:
            report.check("mean_value").record(False, None, {"curve": curve.name, "error": str(exc)})
            continue
        for check in containment.checks:
            check.name = "mean_value"
        report.merge_checks(containment)
    return report
