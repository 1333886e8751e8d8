"""
Axioms Module

Instance checks of the class postulates behind difference-quotient
calculus, run on polynomial function classes over exact rings: productive
structure, composition, constants and identities, the partial inversion ι,
determination, uniqueness of the first difference quotient map and the
recursion rule.

The locality and vector-operation postulates hold for polynomial classes
by construction and are not fuzzed. ι is not polynomial; it is checked as
a built-in evaluator.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import product as cartesian
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegreeCapExceeded, NotInvertible, SizeLimit
from .reports import VerificationReport
from .rings import PrimeField, Ring, RingElem, inv, ring_from_id
from .seeds import rng
from .symcalc import (DEFAULT_MONOMIAL_CAP, PolyMap, compose, evaluate, format_poly,
                      pair, partial_eval, poly_equal, random_polymap, sym_difq1,
                      sym_difq1_by_substitution, sym_difq_k)

logger = logging.getLogger(__name__)

IOTA_NOTE = "ι is checked as a built-in evaluator on ring elements, not as a polynomial class member"
FERMAT_PRIME_LIMIT = 13
RECURSION_NOTE = ("f^[k+1] by binomial expansion against (f^[1])^[k] by composition at every level; "
                  "both flatten as base, direction, t, so the identifying bijection is the identity")


@dataclass(frozen=True)
class FnClassInstance:
    """
    A function class over 𝕂 on objects 𝕂ⁿ, n in objects.

    With full_polynomial the class holds every polynomial map between
    declared objects. Otherwise it is generated by the generators under
    the enabled closure operations, and with pairing enabled the
    coordinate projections are members too. Composition closure is
    decided one level deep over generators and identities.
    """

    ring_id: str
    objects: Tuple[int, ...]
    generators: Tuple[PolyMap, ...] = ()
    compose: bool = True
    pair: bool = True
    constant: bool = True
    identity: bool = True
    full_polynomial: bool = False

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(sorted(set(self.objects))))
        object.__setattr__(self, "generators", tuple(self.generators))
        ring = self.ring
        for g in self.generators:
            if g.ring != ring:
                raise ValueError(f"generator over {g.ring.ring_id} in a class over {ring.ring_id}")
            if g.n not in self.objects or g.m not in self.objects:
                raise ValueError(f"generator {format_poly(g)} maps 𝕂^{g.n} → 𝕂^{g.m}, "
                                 f"not between declared objects {self.objects}")

    @property
    def ring(self) -> Ring:
        return ring_from_id(self.ring_id)

    @classmethod
    def polynomial_class(cls, ring_id: str, max_arity: int = 3) -> "FnClassInstance":
        return cls(ring_id, tuple(range(1, max_arity + 1)), full_polynomial=True)

    def _base_members(self) -> List[PolyMap]:
        base = list(self.generators)
        if self.identity:
            base.extend(PolyMap.identity(self.ring, n) for n in self.objects)
        return base

    def _is_constant(self, f: PolyMap) -> bool:
        return all(sum(exps) == 0 for comp in f.components for exps, _ in comp)

    def _is_projection(self, f: PolyMap) -> bool:
        one = self.ring.one()
        for comp in f.components:
            if len(comp) != 1 or comp[0][1] != one or sorted(comp[0][0]) != [0] * (f.n - 1) + [1]:
                return False
        return True

    def contains(self, f: PolyMap) -> bool:
        """Membership of a polynomial map in the class."""
        if f.ring != self.ring or f.n not in self.objects or f.m not in self.objects:
            return False
        if self.full_polynomial:
            return True
        return self._generated(f, depth=2)

    def _generated(self, f: PolyMap, depth: int) -> bool:
        if any(g.n == f.n and g.m == f.m and poly_equal(g, f) for g in self.generators):
            return True
        if self.identity and f.n == f.m and poly_equal(f, PolyMap.identity(self.ring, f.n)):
            return True
        if self.constant and self._is_constant(f):
            return True
        if self.pair and self._is_projection(f):
            return True
        if depth == 0:
            return False
        if self.pair and f.m > 1:
            for split in range(1, f.m):
                if split in self.objects and (f.m - split) in self.objects:
                    head = PolyMap(f.n, split, f.ring, f.components[:split])
                    tail = PolyMap(f.n, f.m - split, f.ring, f.components[split:])
                    if self._generated(head, depth - 1) and self._generated(tail, depth - 1):
                        return True
        if self.compose:
            base = self._base_members()
            for inner in base:
                if inner.n != f.n:
                    continue
                for outer in base:
                    if outer.n == inner.m and outer.m == f.m and poly_equal(compose(outer, inner), f):
                        return True
        return False

    def sample_member(self, gen: np.random.Generator, n: Optional[int] = None,
                      m: Optional[int] = None) -> Optional[PolyMap]:
        """A seeded class member, optionally with fixed arities."""
        if self.full_polynomial:
            n = n if n is not None else int(gen.choice(self.objects))
            m = m if m is not None else int(gen.choice(self.objects))
            return random_polymap(self.ring, n, 3, int(gen.integers(1, 5)), gen, m)
        pool = [g for g in self._base_members()
                if (n is None or g.n == n) and (m is None or g.m == m)]
        if not pool:
            return None
        return pool[int(gen.integers(0, len(pool)))]


def _witness(**maps: PolyMap) -> dict:
    return {name: format_poly(f) for name, f in maps.items()}


def check_productive(inst: FnClassInstance, trials: int, seed: int) -> VerificationReport:
    """
    Productive-class structure.

    Checks:
        projections: pr₁, pr₂ out of every declared product object are members
        pairing: [f, g] is a member for random members f, g with one domain
        product_unique: pr₁∘[f, g] = f, pr₂∘[f, g] = g and [pr₁∘h, pr₂∘h] = h
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    gen = rng(seed, "axioms", "productive", inst.ring_id)
    report = VerificationReport(title=f"productive class over {inst.ring_id}", seed=seed)
    if not inst.generators and not inst.full_polynomial:
        report.notes.append("no generators: the postulates hold vacuously")
        return report

    ring = inst.ring
    for a, b in cartesian(inst.objects, repeat=2):
        if a + b not in inst.objects:
            continue
        first = PolyMap.projection(ring, a + b, range(a))
        second = PolyMap.projection(ring, a + b, range(a, a + b))
        check = report.check("projections")
        check.record(inst.contains(first), None, _witness(projection=first))
        check.record(inst.contains(second), None, _witness(projection=second))

    for _ in range(trials):
        f = inst.sample_member(gen)
        widths = [m for m in inst.objects if f.m + m in inst.objects]
        g = inst.sample_member(gen, n=f.n, m=int(gen.choice(widths))) if widths else None
        if g is None:
            continue
        paired = pair(f, g)
        report.check("pairing").record(inst.contains(paired), None, _witness(f=f, g=g))
        first = PolyMap.projection(ring, paired.m, range(f.m))
        second = PolyMap.projection(ring, paired.m, range(f.m, paired.m))
        mediated = pair(compose(first, paired), compose(second, paired))
        report.check("product_unique").record(
            poly_equal(mediated, paired) and poly_equal(compose(first, paired), f)
            and poly_equal(compose(second, paired), g), None, _witness(f=f, g=g))
    return report


def _nonzero_nodes(ring: Ring, count: int) -> List[Any]:
    if isinstance(ring, PrimeField) and count > ring.p - 1:
        raise DegreeCapExceeded(f"F_{ring.p} has only {ring.p - 1} nonzero nodes, {count} needed")
    return [ring.normalize(i) for i in range(1, count + 1)]


def interpolate(ring: Ring, nodes: Sequence[Any], values: Sequence[Any]) -> PolyMap:
    """
    Lagrange interpolation of a univariate polynomial through (node, value) pairs.

    Raises:
        NotInvertible: If two nodes coincide
    """
    t = PolyMap.variable(ring, 1, 0)
    result = PolyMap.zero(ring, 1)
    for i, (ti, vi) in enumerate(zip(nodes, values)):
        basis = PolyMap.constant(ring, 1, [vi])
        for j, tj in enumerate(nodes):
            if i == j:
                continue
            scale = inv(RingElem(ring, ring.sub(ti, tj)))
            basis = basis * (t - PolyMap.constant(ring, 1, [tj])).scale(scale)
        result = result + basis
    return result


def _univariate_agree(f: PolyMap, g: PolyMap, nodes: Iterable[Any]) -> bool:
    return all(evaluate(f, [t]) == evaluate(g, [t]) for t in nodes)


def check_bgn_postulates(inst: FnClassInstance, trials: int, seed: int) -> VerificationReport:
    """
    Composition, constants and identities, inversion and determination.

    Determination over Q: two members 𝕂 → 𝕂 of degree ≤ d agreeing at
    d + 1 nonzero points are equal as polynomials. Over F_p agreement on
    F_p∖{0} forces identity only below degree p − 1; pairs at or above that
    degree are counted as degree-capped, not failed.

    Raises:
        ValueError: For inexact rings
    """
    ring = inst.ring
    if not ring.exact:
        raise ValueError(f"postulate checks need an exact ring, got {ring.ring_id}")
    gen = rng(seed, "axioms", "postulates", inst.ring_id)
    report = VerificationReport(title=f"class postulates over {ring.ring_id}", seed=seed)
    report.notes.append(IOTA_NOTE)
    composition = report.check("composition")
    constants = report.check("constants_identity")
    inversion = report.check("inversion")
    determination = report.check("determination")
    capped = 0

    for trial in range(trials):
        f = inst.sample_member(gen)
        if f is not None:
            g = inst.sample_member(gen, n=f.m)
            if g is not None:
                composition.record(inst.contains(compose(g, f)), None, {"trial": trial, **_witness(f=f, g=g)})

        n = int(gen.choice(inst.objects))
        m = int(gen.choice(inst.objects))
        ident = PolyMap.identity(ring, n)
        const = PolyMap.constant(ring, n, [ring.random(gen) for _ in range(m)])
        constants.record(inst.contains(ident) and inst.contains(const), None,
                         {"trial": trial, **_witness(identity=ident, constant=const)})

        value = ring.random(gen)
        element = RingElem(ring, value)
        if ring.is_unit(value):
            inverse = inv(element)
            ok = inverse * element == RingElem(ring, ring.one()) and inv(inverse) == element
        else:
            try:
                inv(element)
                ok = False
            except NotInvertible:
                ok = True
        inversion.record(ok, None, {"trial": trial, "t": str(element)})

        if 1 not in inst.objects:
            continue
        degree = int(gen.integers(0, 6))
        f = random_polymap(ring, 1, degree, int(gen.integers(1, 5)), gen)
        if isinstance(ring, PrimeField) and ring.p <= FERMAT_PRIME_LIMIT and trial % 3 == 0:
            t = PolyMap.variable(ring, 1, 0)
            g = f + t ** (ring.p + 1) - t ** 2
        elif trial % 3 == 1:
            g = compose(f, PolyMap.identity(ring, 1))
        else:
            g = random_polymap(ring, 1, degree, int(gen.integers(1, 5)), gen)
        if not (inst.contains(f) and inst.contains(g)):
            continue
        d = max(f.degree(), g.degree(), 0)
        if isinstance(ring, PrimeField) and d >= ring.p - 1:
            everywhere = [ring.normalize(i) for i in range(1, ring.p)]
            if _univariate_agree(f, g, everywhere) and not poly_equal(f, g):
                capped += 1
            continue
        agree = _univariate_agree(f, g, _nonzero_nodes(ring, d + 1))
        ok = (not agree) or poly_equal(f, g)
        determination.record(ok, None, {"trial": trial, "agree": agree, **_witness(f=f, g=g)})
    logger.debug("postulates over %s: %d trials, %d degree-capped pairs", ring.ring_id, trials, capped)
    if capped:
        determination.note = f"{capped} agreeing pairs of degree >= p - 1 flagged as degree-capped"
    return report


def uniqueness_nodes(f: PolyMap) -> List[Any]:
    """
    Interpolation nodes for the quotient of f in t.

    deg f + 1 nodes over Q; all p − 1 nonzero elements over F_p.

    Raises:
        DegreeCapExceeded: If deg f ≥ p − 1 over F_p
    """
    degree = max(f.degree(), 0)
    if isinstance(f.ring, PrimeField):
        if degree >= f.ring.p - 1:
            raise DegreeCapExceeded(f"deg f = {degree} needs p - 1 > {degree}, "
                                    f"F_{f.ring.p} has {f.ring.p - 1} nonzero elements")
        return _nonzero_nodes(f.ring, f.ring.p - 1)
    return _nonzero_nodes(f.ring, degree + 1)


def prop9_uniqueness(f: PolyMap, seed: int = 0, samples: int = 3) -> VerificationReport:
    """
    f^[1] from symbolic expansion against interpolation in t.

    At seeded (x, u), t ↦ (f(x+tu) − f(x))·ι(t) is interpolated through
    the nodes of uniqueness_nodes(f) and compared with f^[1](x, u, ·) as
    polynomials. The node count depends on f alone.

    Raises:
        DegreeCapExceeded: If f lives over F_p with deg f ≥ p − 1
    """
    ring = f.ring
    if not ring.exact:
        raise ValueError(f"uniqueness checks need an exact ring, got {ring.ring_id}")
    gen = rng(seed, "axioms", "uniqueness", ring.ring_id)
    report = VerificationReport(title="uniqueness of the difference quotient map", seed=seed)
    nodes = uniqueness_nodes(f)
    expansion = sym_difq1(f)
    report.check("substitution_route").record(
        poly_equal(expansion, sym_difq1_by_substitution(f)), None, _witness(f=f))
    report.notes.append(f"interpolation through {len(nodes)} nodes")

    n = f.n
    check = report.check("interpolation_matches_expansion")
    for _ in range(samples):
        x = [ring.random(gen) for _ in range(n)]
        u = [ring.random(gen) for _ in range(n)]
        base = evaluate(f, x)
        quotients = []
        for tau in nodes:
            shifted = evaluate(f, [ring.add(xi, ring.mul(tau, ui)) for xi, ui in zip(x, u)])
            scale = inv(RingElem(ring, tau))
            quotients.append([(s - b) * scale for s, b in zip(shifted, base)])
        interpolated = pair(*(interpolate(ring, nodes, [q[i].value for q in quotients])
                              for i in range(f.m)))
        fixed = {i: v for i, v in enumerate(x + u)}
        symbolic = partial_eval(expansion, fixed)
        check.record(poly_equal(interpolated, symbolic), None,
                     {"f": format_poly(f), "x": [ring.format(v) for v in x],
                      "u": [ring.format(v) for v in u],
                      "interpolated": format_poly(interpolated, ["t"]),
                      "expansion": format_poly(symbolic, ["t"])})
    return report


def _nested_by_substitution(g: PolyMap, k: int, cap: int) -> PolyMap:
    for level in range(1, k + 1):
        g = sym_difq1_by_substitution(g)
        if g.monomial_count > cap:
            raise SizeLimit(f"level {level} by composition has {g.monomial_count} monomials (cap {cap})")
    return g


def prop10_recursion(f: PolyMap, k: int, cap: int = DEFAULT_MONOMIAL_CAP) -> VerificationReport:
    """
    f^[k+1] by binomial expansion against (f^[1])^[k] by composition.

    The two sides share no quotient code: the left nests sym_difq1, the
    right nests sym_difq1_by_substitution k + 1 times.

    Raises:
        SizeLimit: If a nested expansion exceeds cap monomials
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    report = VerificationReport(title=f"recursion rule at k={k}")
    report.notes.append(RECURSION_NOTE)
    lhs = sym_difq_k(f, k + 1, cap)
    rhs = _nested_by_substitution(sym_difq1_by_substitution(f), k, cap)
    report.check("recursion").record(poly_equal(lhs, rhs), None,
                                     {"f": format_poly(f), "k": k,
                                      "monomials": [lhs.monomial_count, rhs.monomial_count]})
    return report


def uniqueness_suite(count: int, seed: int, ring_id: str = "Q",
                     max_degree: int = 5, max_arity: int = 2) -> VerificationReport:
    """prop9_uniqueness over seeded random maps; F_p degrees are kept below p − 1."""
    ring = ring_from_id(ring_id)
    gen = rng(seed, "axioms", "uniqueness_suite", ring.ring_id)
    if isinstance(ring, PrimeField):
        max_degree = min(max_degree, ring.p - 2)
    report = VerificationReport(title=f"uniqueness over {ring.ring_id}", seed=seed)
    for trial in range(count):
        n = int(gen.integers(1, max_arity + 1))
        f = random_polymap(ring, n, max_degree, int(gen.integers(1, 6)), gen)
        report.merge_checks(prop9_uniqueness(f, seed=seed + trial, samples=1))
    return report


def recursion_suite(count: int, seed: int, ring_id: str = "Q", max_degree: int = 4,
                    max_arity: int = 2, max_k: int = 2,
                    cap: int = DEFAULT_MONOMIAL_CAP) -> VerificationReport:
    """prop10_recursion over seeded random maps and k ≤ max_k."""
    ring = ring_from_id(ring_id)
    gen = rng(seed, "axioms", "recursion_suite", ring.ring_id)
    report = VerificationReport(title=f"recursion over {ring.ring_id}", seed=seed)
    report.notes.append(RECURSION_NOTE)
    for _ in range(count):
        n = int(gen.integers(1, max_arity + 1))
        f = random_polymap(ring, n, max_degree, int(gen.integers(1, 4)), gen)
        k = int(gen.integers(1, max_k + 1))
        logger.debug("recursion rule: n=%d deg=%d k=%d", n, f.degree(), k)
        report.merge_checks(prop10_recursion(f, k, cap))
    return report
