"""
Symbolic Calculus Module

Exact multivariate polynomial maps over an exact ring, their difference
quotient maps f^[1](x, u, t) = t⁻¹(f(x + tu) − f(x)), nested quotients and
formal variations. These are the ground truth for the numeric engine.

Variable order of a difference quotient map is fixed: the base tuple
first, the direction tuple second, the scalar t last. Nesting applies the
same rule to the whole argument tuple, so a k-fold quotient of an n-ary
map has 2ᵏ(n+1) − 1 arguments and (f^[1])^[k] is literally f^[k+1]
(the reindexing between the two is the identity).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import comb
from itertools import product
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ArityMismatch, RingMismatch, SizeLimit
from .reports import VerificationReport
from .rings import Ring, RingElem, inv, ring_from_id
from .seeds import rng

logger = logging.getLogger(__name__)

DEFAULT_MONOMIAL_CAP = 10**6

Exps = Tuple[int, ...]
Component = Dict[Exps, Any]


def _grlex_key(exps: Exps) -> Tuple[int, Exps]:
    return (sum(exps), exps)


def _canonical(ring: Ring, component: Mapping[Exps, Any]) -> Tuple[Tuple[Exps, Any], ...]:
    terms = [(tuple(e), ring.normalize(c)) for e, c in component.items()]
    terms = [(e, c) for e, c in terms if not ring.is_zero(c)]
    terms.sort(key=lambda item: _grlex_key(item[0]), reverse=True)
    return tuple(terms)


def _accumulate(ring: Ring, target: Component, exps: Exps, coeff: Any) -> None:
    if exps in target:
        target[exps] = ring.add(target[exps], coeff)
    else:
        target[exps] = coeff


@dataclass(frozen=True)
class PolyMap:
    """
    Polynomial map 𝐊ⁿ → 𝐊ᵐ with sparse, canonically ordered components.

    Each component is a tuple of (exponent vector, coefficient payload)
    pairs sorted by graded lexicographic order, highest first, with no
    duplicate exponents and no zero coefficients.
    """

    n: int
    m: int
    ring: Ring
    components: Tuple[Tuple[Tuple[Exps, Any], ...], ...]

    def __post_init__(self):
        if not self.ring.exact:
            raise RingMismatch(f"polynomial maps need an exact ring, got {self.ring.ring_id}")
        if len(self.components) != self.m:
            raise ArityMismatch(f"expected {self.m} components, got {len(self.components)}")
        for component in self.components:
            for exps, _ in component:
                if len(exps) != self.n:
                    raise ArityMismatch(f"exponent vector {exps} does not have length {self.n}")

    # construction

    @classmethod
    def from_terms(cls, ring: Ring, n: int,
                   components: Sequence[Mapping[Exps, Any]]) -> "PolyMap":
        """
        Build a canonical polynomial map from per-component term dictionaries.

        Args:
            ring: Exact coefficient ring
            n: Number of input variables
            components: One {exponent vector: coefficient} mapping per output

        Returns:
            PolyMap in canonical form
        """
        return cls(n, len(components), ring, tuple(_canonical(ring, c) for c in components))

    @classmethod
    def zero(cls, ring: Ring, n: int, m: int = 1) -> "PolyMap":
        return cls(n, m, ring, tuple(() for _ in range(m)))

    @classmethod
    def constant(cls, ring: Ring, n: int, values: Sequence[Any]) -> "PolyMap":
        zero = (0,) * n
        return cls.from_terms(ring, n, [{zero: _payload(ring, v)} for v in values])

    @classmethod
    def variable(cls, ring: Ring, n: int, index: int) -> "PolyMap":
        if not 0 <= index < n:
            raise ArityMismatch(f"variable index {index} out of range for arity {n}")
        exps = tuple(1 if i == index else 0 for i in range(n))
        return cls.from_terms(ring, n, [{exps: ring.one()}])

    @classmethod
    def projection(cls, ring: Ring, n: int, indices: Sequence[int]) -> "PolyMap":
        comps = []
        for index in indices:
            comps.append(dict(cls.variable(ring, n, index).components[0]))
        return cls.from_terms(ring, n, comps)

    @classmethod
    def identity(cls, ring: Ring, n: int) -> "PolyMap":
        return cls.projection(ring, n, range(n))

    # inspection

    def component_dict(self, i: int) -> Component:
        return dict(self.components[i])

    def coefficient(self, i: int, exps: Exps) -> RingElem:
        return RingElem(self.ring, self.component_dict(i).get(tuple(exps), self.ring.zero()))

    @property
    def monomial_count(self) -> int:
        return sum(len(c) for c in self.components)

    def degree(self, var: Optional[int] = None) -> int:
        """Total degree, or the degree in one variable; -1 for the zero map."""
        best = -1
        for component in self.components:
            for exps, _ in component:
                best = max(best, sum(exps) if var is None else exps[var])
        return best

    def is_zero(self) -> bool:
        return all(len(c) == 0 for c in self.components)

    # arithmetic

    def _check(self, other: "PolyMap") -> None:
        if other.ring != self.ring:
            raise RingMismatch(f"{self.ring.ring_id} vs {other.ring.ring_id}")
        if other.n != self.n or other.m != self.m:
            raise ArityMismatch(f"arity ({self.n},{self.m}) vs ({other.n},{other.m})")

    def __add__(self, other: "PolyMap") -> "PolyMap":
        self._check(other)
        comps = []
        for a, b in zip(self.components, other.components):
            acc = dict(a)
            for exps, c in b:
                _accumulate(self.ring, acc, exps, c)
            comps.append(acc)
        return PolyMap.from_terms(self.ring, self.n, comps)

    def __neg__(self) -> "PolyMap":
        return self.scale(self.ring.neg(self.ring.one()))

    def __sub__(self, other: "PolyMap") -> "PolyMap":
        return self + (-other)

    def __mul__(self, other: "PolyMap") -> "PolyMap":
        """Componentwise product; a scalar (m = 1) map multiplies every component."""
        if other.ring != self.ring:
            raise RingMismatch(f"{self.ring.ring_id} vs {other.ring.ring_id}")
        if other.n != self.n:
            raise ArityMismatch(f"input arity {self.n} vs {other.n}")
        if self.m == other.m:
            pairs = zip(self.components, other.components)
        elif self.m == 1:
            pairs = ((self.components[0], c) for c in other.components)
        elif other.m == 1:
            pairs = ((c, other.components[0]) for c in self.components)
        else:
            raise ArityMismatch(f"cannot multiply {self.m} by {other.m} components")
        return PolyMap.from_terms(self.ring, self.n,
                                  [_mul_component(self.ring, a, b) for a, b in pairs])

    def scale(self, value: Any) -> "PolyMap":
        c = _payload(self.ring, value)
        comps = [{e: self.ring.mul(c, v) for e, v in comp} for comp in self.components]
        return PolyMap.from_terms(self.ring, self.n, comps)

    def __pow__(self, exponent: int) -> "PolyMap":
        if exponent < 0:
            raise ValueError("negative powers are not polynomial")
        result = PolyMap.constant(self.ring, self.n, [self.ring.one()] * self.m)
        for _ in range(exponent):
            result = result * self
        return result

    def __call__(self, point: Sequence[Any]) -> List[RingElem]:
        return evaluate(self, point)

    def __str__(self) -> str:
        return format_poly(self)


def _payload(ring: Ring, value: Any) -> Any:
    if isinstance(value, RingElem):
        if value.ring != ring:
            raise RingMismatch(f"{value.ring.ring_id} vs {ring.ring_id}")
        return value.value
    return ring.normalize(value)


def _mul_component(ring: Ring, a: Iterable[Tuple[Exps, Any]],
                   b: Iterable[Tuple[Exps, Any]]) -> Component:
    acc: Component = {}
    b = list(b)
    for ea, ca in a:
        for eb, cb in b:
            exps = tuple(x + y for x, y in zip(ea, eb))
            _accumulate(ring, acc, exps, ring.mul(ca, cb))
    return acc


def evaluate(f: PolyMap, point: Sequence[Any]) -> List[RingElem]:
    """
    Evaluate f by direct monomial evaluation.

    Args:
        f: Polynomial map
        point: n ring elements (RingElem or raw payloads of f's ring)

    Returns:
        List of m ring elements

    Raises:
        ArityMismatch: If the point has the wrong length
        RingMismatch: If an element belongs to another ring
    """
    if len(point) != f.n:
        raise ArityMismatch(f"point has {len(point)} entries, map expects {f.n}")
    ring = f.ring
    values = [_payload(ring, v) for v in point]
    out = []
    for component in f.components:
        acc = ring.zero()
        for exps, coeff in component:
            term = coeff
            for v, e in zip(values, exps):
                for _ in range(e):
                    term = ring.mul(term, v)
            acc = ring.add(acc, term)
        out.append(RingElem(ring, acc))
    return out


def lift(f: PolyMap, n_new: int, offset: int = 0) -> PolyMap:
    """Reinterpret f as a map of n_new variables, its own starting at offset."""
    if offset + f.n > n_new:
        raise ArityMismatch(f"cannot embed {f.n} variables at {offset} into {n_new}")
    pad_left, pad_right = (0,) * offset, (0,) * (n_new - offset - f.n)
    comps = [{pad_left + e + pad_right: c for e, c in comp} for comp in f.components]
    return PolyMap.from_terms(f.ring, n_new, comps)


def compose(f: PolyMap, gs: Union[PolyMap, Sequence[PolyMap]]) -> PolyMap:
    """
    Substitution f ∘ g.

    Args:
        f: Outer map 𝐊ⁿ → 𝐊ᵐ
        gs: Inner map with n components, or a sequence of n scalar maps
            sharing one input arity

    Returns:
        PolyMap from the inner input arity to m outputs
    """
    g = gs if isinstance(gs, PolyMap) else pair(*gs)
    if g.ring != f.ring:
        raise RingMismatch(f"{f.ring.ring_id} vs {g.ring.ring_id}")
    if g.m != f.n:
        raise ArityMismatch(f"inner map has {g.m} outputs, outer map expects {f.n}")
    ring = f.ring
    one = {(0,) * g.n: ring.one()}
    powers: Dict[Tuple[int, int], Component] = {}

    def power(i: int, e: int) -> Component:
        if e == 0:
            return one
        key = (i, e)
        if key not in powers:
            powers[key] = _mul_component(ring, power(i, e - 1).items(), g.components[i])
        return powers[key]

    comps = []
    for component in f.components:
        acc: Component = {}
        for exps, coeff in component:
            term: Component = {(0,) * g.n: coeff}
            for i, e in enumerate(exps):
                if e:
                    term = _mul_component(ring, term.items(), power(i, e).items())
            for te, tc in term.items():
                _accumulate(ring, acc, te, tc)
        comps.append(acc)
    return PolyMap.from_terms(ring, g.n, comps)


def partial_eval(f: PolyMap, values: Mapping[int, Any]) -> PolyMap:
    """
    Substitute constants for some variables and drop them from the arity.

    Args:
        f: Polynomial map
        values: {variable index: ring value}

    Returns:
        PolyMap over the remaining variables, in their original order
    """
    ring = f.ring
    fixed = {i: _payload(ring, v) for i, v in values.items()}
    for i in fixed:
        if not 0 <= i < f.n:
            raise ArityMismatch(f"variable index {i} out of range for arity {f.n}")
    keep = [i for i in range(f.n) if i not in fixed]
    comps = []
    for component in f.components:
        acc: Component = {}
        for exps, coeff in component:
            c = coeff
            for i, v in fixed.items():
                for _ in range(exps[i]):
                    c = ring.mul(c, v)
            _accumulate(ring, acc, tuple(exps[i] for i in keep), c)
        comps.append(acc)
    return PolyMap.from_terms(ring, len(keep), comps)


def pair(*fs: PolyMap) -> PolyMap:
    """Pairing [f, g, ...]: stack the components of maps with one domain."""
    if not fs:
        raise ArityMismatch("pairing needs at least one map")
    head = fs[0]
    comps: List[Tuple[Tuple[Exps, Any], ...]] = []
    for f in fs:
        if f.ring != head.ring:
            raise RingMismatch(f"{head.ring.ring_id} vs {f.ring.ring_id}")
        if f.n != head.n:
            raise ArityMismatch(f"input arity {head.n} vs {f.n}")
        comps.extend(f.components)
    return PolyMap(head.n, len(comps), head.ring, tuple(comps))


def derivative(f: PolyMap, var: int) -> PolyMap:
    """Formal partial derivative ∂f/∂x_var."""
    ring = f.ring
    comps = []
    for component in f.components:
        acc: Component = {}
        for exps, coeff in component:
            e = exps[var]
            if e:
                shifted = exps[:var] + (e - 1,) + exps[var + 1:]
                _accumulate(ring, acc, shifted, ring.mul(ring.from_int(e), coeff))
        comps.append(acc)
    return PolyMap.from_terms(ring, f.n, comps)


def _divide_by_t(ring: Ring, n_out: int, comps: Sequence[Component]) -> PolyMap:
    shifted = []
    for component in comps:
        acc: Component = {}
        for exps, coeff in component.items():
            if ring.is_zero(coeff):
                continue
            assert exps[-1] >= 1, f"monomial {exps} of f(x+tu) - f(x) has t-degree 0"
            acc[exps[:-1] + (exps[-1] - 1,)] = coeff
        shifted.append(acc)
    return PolyMap.from_terms(ring, n_out, shifted)


def _expansion_size(f: PolyMap) -> int:
    total = 0
    for component in f.components:
        for exps, _ in component:
            size = 1
            for e in exps:
                size *= e + 1
            total += size
    return total


def sym_difq1(f: PolyMap) -> PolyMap:
    """
    First difference quotient map by binomial expansion.

    Every monomial c·xᵉ expands as c·Π Σⱼ C(eᵢ, jᵢ) xᵢ^(eᵢ−jᵢ) uᵢ^jᵢ t^jᵢ;
    f(x) is subtracted and the remainder divided by t as an exponent shift.

    Args:
        f: Polynomial map of n variables

    Returns:
        PolyMap of 2n + 1 variables (x₁..xₙ, u₁..uₙ, t)
    """
    ring, n = f.ring, f.n
    comps: List[Component] = []
    for component in f.components:
        acc: Component = {}
        for exps, coeff in component:
            for js in product(*(range(e + 1) for e in exps)):
                c = coeff
                for e, j in zip(exps, js):
                    c = ring.mul(c, ring.from_int(comb(e, j)))
                key = tuple(e - j for e, j in zip(exps, js)) + tuple(js) + (sum(js),)
                _accumulate(ring, acc, key, c)
            # subtract f(x)
            _accumulate(ring, acc, tuple(exps) + (0,) * (n + 1), ring.neg(coeff))
        comps.append(acc)
    return _divide_by_t(ring, 2 * n + 1, comps)


def shift_map(ring: Ring, n: int) -> PolyMap:
    """The map (x, u, t) ↦ x + t·u with the fixed variable order."""
    width = 2 * n + 1
    t = PolyMap.variable(ring, width, 2 * n)
    comps = [PolyMap.variable(ring, width, i) + PolyMap.variable(ring, width, n + i) * t
             for i in range(n)]
    return pair(*comps)


def sym_difq1_by_substitution(f: PolyMap) -> PolyMap:
    """
    First difference quotient map through generic composition.

    Computes f ∘ (x + tu) − f with compose, then divides by t. Shares no
    code with the binomial route of sym_difq1.
    """
    n = f.n
    shifted = compose(f, shift_map(f.ring, n))
    difference = shifted - lift(f, 2 * n + 1)
    return _divide_by_t(f.ring, 2 * n + 1, [difference.component_dict(i) for i in range(f.m)])


def sym_difq_k(f: PolyMap, k: int, cap: int = DEFAULT_MONOMIAL_CAP) -> PolyMap:
    """
    k-fold nested difference quotient map f^[k].

    Args:
        f: Polynomial map of n variables
        k: Nesting depth (k = 0 returns f)
        cap: Maximum monomial count of any intermediate result

    Returns:
        PolyMap of 2ᵏ(n+1) − 1 variables

    Raises:
        SizeLimit: When an expansion would exceed cap monomials
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    g = f
    for level in range(1, k + 1):
        estimate = _expansion_size(g)
        if estimate > cap:
            raise SizeLimit(f"level {level} expansion needs up to {estimate} monomials (cap {cap})")
        g = sym_difq1(g)
        logger.debug("sym_difq_k level %d: arity %d, %d monomials", level, g.n, g.monomial_count)
        if g.monomial_count > cap:
            raise SizeLimit(f"level {level} has {g.monomial_count} monomials (cap {cap})")
    return g


def formal_var(f: PolyMap) -> PolyMap:
    """Formal variation δf(x, u): the difference quotient map at t = 0."""
    g = sym_difq1(f)
    return partial_eval(g, {g.n - 1: f.ring.zero()})


def poly_equal(f: PolyMap, g: PolyMap) -> bool:
    """
    Identity of polynomial maps (canonical monomial lists).

    Raises:
        RingMismatch: If the coefficient rings differ
        ArityMismatch: If the arities differ
    """
    if f.ring != g.ring:
        raise RingMismatch(f"{f.ring.ring_id} vs {g.ring.ring_id}")
    if f.n != g.n or f.m != g.m:
        raise ArityMismatch(f"arity ({f.n},{f.m}) vs ({g.n},{g.m})")
    return f.components == g.components


def difq_variable_names(n: int, k: int) -> List[str]:
    """
    Names for the arguments of f^[k].

    Level one uses x1..xn, u1..un, t; deeper levels append a copy of the
    previous names prefixed with d, then t<level>.
    """
    names = [f"x{i + 1}" for i in range(n)]
    for level in range(1, k + 1):
        if level == 1:
            names = names + [f"u{i + 1}" for i in range(n)] + ["t"]
        else:
            names = names + ["d" + name for name in names] + [f"t{level}"]
    return names


def format_poly(f: PolyMap, names: Optional[Sequence[str]] = None) -> str:
    """
    Textual form used in reports.

    Coefficients print as "num/den" or "r mod p", monomials as "x1^a*u2^b*t^c";
    components are separated by " ; ".
    """
    if names is None:
        names = [f"x{i + 1}" for i in range(f.n)]
    parts = []
    for component in f.components:
        if not component:
            parts.append("0")
            continue
        terms = []
        for exps, coeff in component:
            factors = [name if e == 1 else f"{name}^{e}"
                       for name, e in zip(names, exps) if e]
            coeff_text = f.ring.format(coeff)
            monomial = "*".join(factors)
            if not monomial:
                terms.append(coeff_text)
            elif coeff == f.ring.one():
                terms.append(monomial)
            else:
                terms.append(f"{coeff_text}*{monomial}")
        parts.append(" + ".join(terms))
    return " ; ".join(parts)


def to_expr_text(f: PolyMap) -> str:
    """Render a scalar map over Q in expression-parser syntax."""
    if f.ring.ring_id != "Q" or f.m != 1:
        raise ValueError("only scalar maps over Q have an expression form")
    if f.n > 9:
        raise ArityMismatch("expression syntax names at most 9 variables")
    terms = []
    for exps, coeff in f.components[0]:
        factors = [f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(exps) if e]
        coeff_text = (f"({coeff.numerator}/{coeff.denominator})" if coeff.denominator != 1
                      else f"({coeff.numerator})")
        terms.append("*".join([coeff_text] + factors))
    return " + ".join(terms) if terms else "0"


def random_polymap(ring: Ring, n: int, degree: int, terms: int,
                   gen: np.random.Generator, m: int = 1) -> PolyMap:
    """
    Seeded random polynomial map.

    Args:
        ring: Exact coefficient ring
        n: Number of variables
        degree: Maximum total degree
        terms: Number of monomials drawn per component (duplicates merge)
        gen: Random generator
        m: Number of components

    Returns:
        Canonical PolyMap
    """
    comps = []
    for _ in range(m):
        acc: Component = {}
        for _ in range(terms):
            d = int(gen.integers(0, degree + 1))
            exps = tuple(int(e) for e in gen.multinomial(d, [1.0 / n] * n))
            _accumulate(ring, acc, exps, ring.random(gen))
        comps.append(acc)
    return PolyMap.from_terms(ring, n, comps)


def _random_unit(ring: Ring, gen: np.random.Generator) -> Any:
    while True:
        value = ring.random(gen)
        if ring.is_unit(value):
            return value


def exact_division_suite(count: int, seed: int, ring_id: str = "Q",
                         max_degree: int = 6, max_arity: int = 3) -> VerificationReport:
    """
    Check t·f^[1] = f(x+tu) − f(x) and related identities on random maps.

    Checks:
        exact_division: polynomial identity through the substitution route
        directional_derivative: f^[1](x, u, 0) = Σ ∂ᵢf·uᵢ
        pointwise_quotient: f^[1](x, u, t) = (f(x+tu) − f(x))·ι(t) at a unit t

    Args:
        count: Number of random maps
        seed: Run seed
        ring_id: Exact ring identifier
        max_degree: Maximum total degree
        max_arity: Maximum number of variables

    Returns:
        VerificationReport
    """
    ring = ring_from_id(ring_id)
    gen = rng(seed, "symcalc", "exact_division", ring.ring_id)
    report = VerificationReport(title=f"exact division {ring.ring_id}", seed=seed)
    for trial in range(count):
        n = int(gen.integers(1, max_arity + 1))
        f = random_polymap(ring, n, max_degree, int(gen.integers(1, 9)), gen)
        g = sym_difq1(f)
        width = 2 * n + 1
        t = PolyMap.variable(ring, width, 2 * n)
        rhs = compose(f, shift_map(ring, n)) - lift(f, width)
        witness = {"trial": trial, "f": format_poly(f)}
        report.check("exact_division").record(poly_equal(t * g, rhs), None, witness)

        directional = PolyMap.zero(ring, 2 * n)
        for i in range(n):
            directional = directional + lift(derivative(f, i), 2 * n) * PolyMap.variable(ring, 2 * n, n + i)
        report.check("directional_derivative").record(
            poly_equal(formal_var(f), directional), None, witness)

        x = [ring.random(gen) for _ in range(n)]
        u = [ring.random(gen) for _ in range(n)]
        s = _random_unit(ring, gen)
        shifted = [ring.add(xi, ring.mul(s, ui)) for xi, ui in zip(x, u)]
        quotient = (evaluate(f, shifted)[0] - evaluate(f, x)[0]) * inv(RingElem(ring, s))
        value = evaluate(g, x + u + [s])[0]
        report.check("pointwise_quotient").record(
            value == quotient, None,
            {**witness, "x": [ring.format(v) for v in x], "u": [ring.format(v) for v in u],
             "t": ring.format(s), "lhs": str(value), "rhs": str(quotient)})
    return report
