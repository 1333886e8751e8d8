"""
Command Line Module

Batch front end: parses expressions and flags, dispatches to the
workbench modules and writes report.json (plus CSV and .dat data) into the
output directory.

Exit codes:
    0  every check passed
    1  a verification failed (witnesses are in report.json)
    2  usage error, bad input or a domain violation
    3  numeric non-convergence
"""
import argparse
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError

from .axioms import (FnClassInstance, check_bgn_postulates, check_productive, recursion_suite,
                     uniqueness_suite)
from .config import WorkbenchSettings
from .errors import (LipschitzViolated, NoConvergence, NotDifferentiable, ResidualTooLarge,
                     SingularCoefficient, UsageError, WorkbenchError)
from .exprparse import parse_expr, parse_point
from .funcgrid import compose_variation, grid_suite, seip_norm_fixed_point
from .numdiff import (SmoothFn, bgn_difq_num, calculus_rule_suite, check_linearity,
                      dual_cross_check, seip_var, seip_var_k, smooth_test_set,
                      symbolic_oracle_suite)
from .reports import RunReport, VerificationReport, atomic_write_text, csv_text, json_text
from .riemann import Curve, integrate, riemann_suite
from .rings import Ring, ring_axiom_suite, ring_from_id
from .sharplab import PhiPack, SharpConfig, noninjectivity_demo, rk4_order_study
from .symcalc import (PolyMap, evaluate, exact_division_suite, formal_var, format_poly,
                      sym_difq1)
from .version import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

NUMERIC_ERRORS = (NoConvergence, NotDifferentiable, SingularCoefficient, ResidualTooLarge,
                  LipschitzViolated)
PHI_PRESETS: Dict[str, Callable[[], PhiPack]] = {
    "exp": PhiPack.exp_plus_identity,
    "square": PhiPack.square,
    "affine": PhiPack.affine,
}


@dataclass
class Outcome:
    """What a command produced: the run report, extra files and stdout lines."""

    report: RunReport
    files: Dict[str, str] = field(default_factory=dict)
    lines: List[str] = field(default_factory=list)


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value settings file")
    common.add_argument("--seed", type=int, default=0, help="run seed")
    common.add_argument("--out", help="output directory (default from settings)")
    common.add_argument("--log-level", help="logging level")
    common.add_argument("--t0", type=float, help="initial extrapolation step")
    common.add_argument("--ratio", type=float, help="step ratio")
    common.add_argument("--max-levels", type=int, help="extrapolation levels")
    common.add_argument("--tol", type=float, help="convergence tolerance")

    parser = _ArgumentParser(prog="difq", description="Difference quotient workbench")
    parser.add_argument("--version", action="version", version=f"difq {__version__}")
    verbs = parser.add_subparsers(dest="verb", required=True, parser_class=_ArgumentParser)

    difq = verbs.add_parser("difq", parents=[common], help="difference quotient f^[1](x, u, t)")
    difq.add_argument("--expr", required=True)
    difq.add_argument("--at", required=True, help="base point x, comma separated")
    difq.add_argument("--dir", required=True, help="direction u, comma separated")
    difq.add_argument("--t", default="0", help="one or more t values, comma separated")
    difq.add_argument("--ring", default="Q", help="Q, Fp:<p>, F64 (polynomials only)")

    var = verbs.add_parser("var", parents=[common], help="numeric variation δᵏf(x)[u₁..u_k]")
    var.add_argument("--expr", required=True)
    var.add_argument("--at", required=True)
    var.add_argument("--dir", required=True, action="append", help="repeat for higher orders")

    integ = verbs.add_parser("integrate", parents=[common], help="Riemann integral of a curve")
    integ.add_argument("--expr", required=True, help="integrand in x1")
    integ.add_argument("--a", type=float, default=0.0)
    integ.add_argument("--b", type=float, default=1.0)
    integ.add_argument("--tag", choices=["left", "midpoint", "right"], default="midpoint")

    verify = verbs.add_parser("verify", help="seeded verification suites")
    targets = verify.add_subparsers(dest="target", required=True, parser_class=_ArgumentParser)
    rings = targets.add_parser("rings", parents=[common])
    rings.add_argument("--ring", default="Q")
    rings.add_argument("--samples", type=int, default=200)
    symbolic = targets.add_parser("symbolic", parents=[common])
    symbolic.add_argument("--ring", default="Q")
    symbolic.add_argument("--count", type=int, default=200)
    axioms = targets.add_parser("axioms", parents=[common])
    axioms.add_argument("--ring", default="Q")
    axioms.add_argument("--trials", type=int, default=100)
    calculus = targets.add_parser("calculus", parents=[common])
    calculus.add_argument("--trials", type=int, default=5)
    riemann = targets.add_parser("riemann", parents=[common])
    riemann.add_argument("--count", type=int, default=20)
    grid = targets.add_parser("grid", parents=[common])
    grid.add_argument("--cells", type=int, default=1024)

    demo = verbs.add_parser("demo", help="worked demonstrations")
    demos = demo.add_subparsers(dest="target", required=True, parser_class=_ArgumentParser)
    sharp = demos.add_parser("sharp", parents=[common])
    sharp.add_argument("--phi", choices=sorted(PHI_PRESETS), default="exp")
    sharp.add_argument("--xi", type=float, default=0.0)
    sharp.add_argument("--eps", type=float, default=0.1)
    sharp.add_argument("--eta0", type=float, default=0.12)
    sharp.add_argument("--grid-n", type=int, default=2000)
    sharp.add_argument("--ode-steps", type=int, default=1000)
    fixpoint = demos.add_parser("fixpoint", parents=[common])
    fixpoint.add_argument("--cells", type=int, default=256)
    fixpoint.add_argument("--fp-tol", type=float, default=1e-13)
    compose = demos.add_parser("compose", parents=[common])
    compose.add_argument("--cells", type=int, default=1024)
    return parser


def _exact_point(text: str, ring: Ring) -> List[Any]:
    try:
        return [ring.normalize(Fraction(part.strip())) for part in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad coordinate list {text!r}") from exc


def _numeric(f: Union[PolyMap, SmoothFn]) -> SmoothFn:
    return SmoothFn.from_poly(f) if isinstance(f, PolyMap) else f


def _display(ring: Ring, value: Any) -> str:
    if isinstance(value, Fraction):
        return repr(float(value)) if value.denominator != 1 else str(value.numerator)
    return ring.format(value)


def _check_arity(f: Union[PolyMap, SmoothFn], *vectors: Sequence[Any]) -> None:
    for vector in vectors:
        if len(vector) != f.n:
            raise UsageError(f"expression has arity {f.n}, got a vector with {len(vector)} entries")


def cmd_difq(args: argparse.Namespace, settings: WorkbenchSettings) -> Outcome:
    f = parse_expr(args.expr)
    ts = args.t.split(",")
    report = RunReport(inputs={"expr": args.expr, "at": args.at, "dir": args.dir, "t": ts,
                               "ring": args.ring})
    lines = []
    ring = ring_from_id(args.ring)
    if isinstance(f, PolyMap) and ring.exact:
        f = PolyMap.from_terms(ring, f.n, [f.component_dict(i) for i in range(f.m)])
        x, u = _exact_point(args.at, ring), _exact_point(args.dir, ring)
        _check_arity(f, x, u)
        quotient = sym_difq1(f)
        report.inputs["f^[1]"] = format_poly(quotient)
        for t in ts:
            value = evaluate(quotient, x + u + _exact_point(t, ring))[0]
            report.results.append(ring.format(value.value))
            report.residuals.append(0.0)
            report.converged.append(True)
            report.iterations.append(0)
            lines.append(_display(ring, value.value))
    else:
        if args.ring not in ("Q", "F64"):
            raise UsageError(f"non-polynomial expressions are evaluated numerically, not over {args.ring}")
        sf = _numeric(f)
        x, u = parse_point(args.at), parse_point(args.dir)
        _check_arity(sf, x, u)
        cfg = settings.extrap_config()
        for text in ts:
            t = float(Fraction(text.strip()))
            value = bgn_difq_num(sf, x, u, t, cfg)
            report.results.append(value.tolist())
            report.residuals.append(None)
            report.converged.append(True)
            report.iterations.append(cfg.max_levels if t == 0 else 0)
            lines.append(", ".join(repr(float(v)) for v in value))
    return Outcome(report, lines=lines)


def cmd_var(args: argparse.Namespace, settings: WorkbenchSettings) -> Outcome:
    f = parse_expr(args.expr)
    sf = _numeric(f)
    cfg = settings.extrap_config()
    x = parse_point(args.at)
    dirs = [parse_point(d) for d in args.dir]
    _check_arity(sf, x, *dirs)
    verification = VerificationReport(title=f"variation of {sf.name}", seed=args.seed)
    report = RunReport(inputs={"expr": args.expr, "at": args.at, "dir": args.dir})
    if len(dirs) == 1:
        value, err = seip_var(sf, x, dirs[0], cfg)
        dual = dual_cross_check(sf, x, dirs[0], cfg)
        verification.check("dual_agreement").record(dual < 1e-9, dual, {"relative": dual})
        if isinstance(f, PolyMap):
            point = [Fraction(v) for v in x + dirs[0]]
            exact = float(evaluate(formal_var(f), point)[0].value)
            gap = abs(float(value[0]) - exact) / max(1.0, abs(exact))
            verification.check("symbolic_oracle").record(gap < 1e-7, gap, {"exact": exact})
        level_errors = [err]
    else:
        jet = seip_var_k(sf, x, dirs, cfg)
        value, err, level_errors = jet.value, jet.error, list(jet.level_errors)
    report.results.append(value.tolist())
    report.residuals.append(err)
    report.converged.append(True)
    report.iterations.append(len(level_errors))
    report.verification = verification
    return Outcome(report, lines=[", ".join(repr(float(v)) for v in value)])


def cmd_integrate(args: argparse.Namespace, settings: WorkbenchSettings) -> Outcome:
    sf = _numeric(parse_expr(args.expr))
    if sf.n != 1:
        raise UsageError("integrands are curves in x1")
    tol = args.tol if args.tol is not None else settings.integrate_tol
    curve = Curve(args.a, args.b, lambda s: sf(s[:, None]), True, sf.name)
    trace: List = []
    value, err = integrate(curve, tol=tol, tag=args.tag, max_cells=settings.max_cells, trace=trace)
    report = RunReport(inputs={"expr": args.expr, "a": args.a, "b": args.b, "tag": args.tag, "tol": tol},
                       results=[value.tolist()], residuals=[err], converged=[True],
                       iterations=[len(trace)])
    rows = [(cells, *np.atleast_1d(total).tolist(), diff) for cells, total, diff in trace]
    files = {"convergence.csv": csv_text(["cells", "sum", "difference"], rows)}
    return Outcome(report, files, [repr(float(value[0]))])


def cmd_verify(args: argparse.Namespace, settings: WorkbenchSettings) -> Outcome:
    cfg = settings.extrap_config()
    seed = args.seed
    inputs: Dict[str, Any] = {"target": args.target}
    if args.target == "rings":
        inputs.update(ring=args.ring, samples=args.samples)
        verification = ring_axiom_suite(args.ring, args.samples, seed)
    elif args.target == "symbolic":
        inputs.update(ring=args.ring, count=args.count)
        verification = VerificationReport(title=f"symbolic suites over {args.ring}", seed=seed)
        verification.merge(exact_division_suite(args.count, seed, args.ring))
        if ring_from_id(args.ring).ring_id == "Q":
            verification.merge(symbolic_oracle_suite(args.count, seed, cfg))
    elif args.target == "axioms":
        inputs.update(ring=args.ring, trials=args.trials)
        inst = FnClassInstance.polynomial_class(ring_from_id(args.ring).ring_id)
        verification = VerificationReport(title=f"axiom suites over {args.ring}", seed=seed)
        verification.merge(check_productive(inst, args.trials, seed))
        verification.merge(check_bgn_postulates(inst, args.trials, seed))
        verification.merge(uniqueness_suite(args.trials, seed, inst.ring_id))
        verification.merge(recursion_suite(args.trials, seed, inst.ring_id,
                                           cap=settings.monomial_cap))
    elif args.target == "calculus":
        inputs.update(trials=args.trials)
        fns = smooth_test_set()
        verification = calculus_rule_suite(fns, args.trials, seed, cfg)
        dual = verification.check("dual_agreement")
        for f, base in fns:
            u = np.ones(f.n) / np.sqrt(f.n)
            gap = dual_cross_check(f, base, u, cfg)
            dual.record(gap < 1e-9, gap, {"f": f.name, "x": base, "u": u})
        verification.merge(check_linearity(fns[0][0], fns[0][1], args.trials, seed, cfg))
    elif args.target == "riemann":
        inputs.update(count=args.count, stencil_cells=settings.stencil_cells)
        verification = riemann_suite(args.count, seed, cfg, cells=settings.stencil_cells)
    else:
        inputs.update(cells=args.cells)
        verification = grid_suite(seed, cfg, args.cells)
    report = RunReport(inputs=inputs, verification=verification,
                       results=[c.name for c in verification.checks],
                       residuals=[c.worst_residual for c in verification.checks],
                       converged=[c.passed for c in verification.checks],
                       iterations=[c.trials for c in verification.checks])
    return Outcome(report, lines=verification.summary_lines())


def cmd_demo(args: argparse.Namespace, settings: WorkbenchSettings) -> Outcome:
    cfg = settings.extrap_config()
    if args.target == "sharp":
        sharp = SharpConfig(phi=PHI_PRESETS[args.phi](), xi=args.xi, eps=args.eps, eta0=args.eta0,
                            grid_n=args.grid_n, ode_steps=args.ode_steps)
        demo = noninjectivity_demo(sharp)
        study = rk4_order_study(sharp.eta0, sharp)
        demo.report.check("rk4_order").record(abs(study.residual_order - 4.0) < 0.5,
                                              abs(study.residual_order - 4.0),
                                              {"steps": study.steps, "residuals": study.residuals,
                                               "order": study.residual_order})
        summary = {**demo.summary, "rk4_order": study.order, "rk4_residual_order": study.residual_order}
        report = RunReport(inputs={"phi": args.phi, "xi": args.xi, "eps": args.eps, "eta0": args.eta0,
                                   "grid_n": args.grid_n, "ode_steps": args.ode_steps},
                           results=[summary], residuals=[demo.summary["h_u1_gap"]],
                           converged=[demo.report.passed], iterations=[sharp.ode_steps],
                           verification=demo.report)
        files = {"u0.dat": demo.u0.to_dat(), "u1.dat": demo.u1.to_dat(),
                 "h_u1.dat": demo.h_u1.to_dat(),
                 "summary.json": json_text(summary)}
        return Outcome(report, files, demo.report.summary_lines())
    if args.target == "fixpoint":
        phi = SmoothFn.scalar(lambda s, t: s + 0.5 * np.sin(t), 2, "s+sin(t)/2")
        fixed = seip_norm_fixed_point(phi, 0.0, 1.0, args.cells, args.fp_tol, seed=args.seed)
        verification = VerificationReport(title="contraction fixed point", seed=args.seed)
        verification.check("residual").record(fixed.residual < 1e-10, fixed.residual)
        verification.check("contraction").record(fixed.contraction_ok, fixed.lipschitz)
        verification.check("iteration_bound").record(fixed.iterations <= fixed.iteration_bound + 1, None,
                                                     {"iterations": fixed.iterations,
                                                      "bound": fixed.iteration_bound})
        end_value = float(fixed.solution.values[-1])
        report = RunReport(inputs={"cells": args.cells, "tol": args.fp_tol},
                           results=[{"x(1)": end_value, "lipschitz": fixed.lipschitz,
                                     "first_change": fixed.first_change}],
                           residuals=[fixed.residual], converged=[True],
                           iterations=[fixed.iterations], verification=verification)
        return Outcome(report, {"fixed_point.dat": fixed.solution.to_dat()},
                       [repr(end_value)] + verification.summary_lines())
    numeric, exact = compose_variation(args.cells, cfg)
    error = (numeric - exact).sup()
    verification = VerificationReport(title="composition variation", seed=args.seed)
    verification.check("compose_variation").record(error < 1e-5, error)
    report = RunReport(inputs={"cells": args.cells}, results=[{"sup_error": error}],
                       residuals=[error], converged=[True], iterations=[cfg.max_levels],
                       verification=verification)
    files = {"compose_var.dat": numeric.to_dat(), "compose_exact.dat": exact.to_dat()}
    return Outcome(report, files, verification.summary_lines())


HANDLERS: Dict[str, Callable[[argparse.Namespace, WorkbenchSettings], Outcome]] = {
    "difq": cmd_difq,
    "var": cmd_var,
    "integrate": cmd_integrate,
    "verify": cmd_verify,
    "demo": cmd_demo,
}


def _write_outputs(out_dir: Path, outcome: Outcome, argv: Sequence[str]) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = atomic_write_text(out_dir / "report.json", outcome.report.to_json())
    meta = {"argv": list(argv), "timestamp": datetime.now(timezone.utc).isoformat(),
            "version": __version__}
    atomic_write_text(out_dir / "report.meta.json", json_text(meta))
    for name, text in outcome.files.items():
        atomic_write_text(out_dir / name, text)
    return report_path


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Execute one command.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        Exit code
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"✗ usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)

    overrides = {"t0": args.t0, "ratio": args.ratio, "max_levels": args.max_levels,
                 "tol_conv": args.tol, "output_dir": args.out, "log_level": args.log_level}
    if args.verb == "integrate":
        overrides["tol_conv"] = None
    try:
        settings = WorkbenchSettings.from_env(args.config, **overrides)
    except (UsageError, FileNotFoundError, ValidationError) as exc:
        print(f"✗ configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=settings.log_level,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    logger.debug("running %s with seed %d, output in %s", args.verb, args.seed, settings.output_dir)

    try:
        outcome = HANDLERS[args.verb](args, settings)
    except NUMERIC_ERRORS as exc:
        print(f"✗ {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (WorkbenchError, ValueError) as exc:
        print(f"✗ {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    outcome.report.command = argv
    outcome.report.seed = args.seed
    for line in outcome.lines:
        print(line)
    report_path = _write_outputs(Path(settings.output_dir), outcome, argv)
    verification = outcome.report.verification
    if verification is not None and not verification.passed:
        print(f"✗ verification failed, witnesses in {report_path}")
        return EXIT_FAILED
    print(f"✓ report written to {report_path}")
    return EXIT_OK


def main() -> None:
    sys.exit(run())
