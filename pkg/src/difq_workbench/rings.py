"""
Rings Module

Scalar arithmetic for every other module: exact rationals, prime fields,
binary floating point and dual numbers, each with a partial inversion.

Ring identifiers used in flags and reports: "Q", "Fp:<p>", "F64", "Dual".
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Sequence

import numpy as np

from .errors import NotInvertible, RingMismatch
from .reports import VerificationReport
from .seeds import rng

PRIME_BOUND = 1 << 31
FLOAT_REL_TOL = 1e-12


@dataclass(frozen=True)
class DualNumber:
    """
    Dual number a + bε with ε² = 0.

    The elementary methods let numpy ufuncs (np.exp, np.sin, ...) act on
    object arrays of dual numbers, so vectorized evaluators written for
    floats also run in forward mode.
    """

    a: float
    b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @staticmethod
    def lift(value: Any) -> "DualNumber":
        if isinstance(value, DualNumber):
            return value
        return DualNumber(float(value), 0.0)

    def __add__(self, other: Any) -> "DualNumber":
        other = DualNumber.lift(other)
        return DualNumber(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "DualNumber":
        other = DualNumber.lift(other)
        return DualNumber(self.a - other.a, self.b - other.b)

    def __rsub__(self, other: Any) -> "DualNumber":
        return DualNumber.lift(other) - self

    def __mul__(self, other: Any) -> "DualNumber":
        other = DualNumber.lift(other)
        return DualNumber(self.a * other.a, self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "DualNumber":
        return self * DualNumber.lift(other).reciprocal()

    def __rtruediv__(self, other: Any) -> "DualNumber":
        return DualNumber.lift(other) * self.reciprocal()

    def __neg__(self) -> "DualNumber":
        return DualNumber(-self.a, -self.b)

    def __pos__(self) -> "DualNumber":
        return self

    def __abs__(self) -> "DualNumber":
        return -self if self.a < 0 else self

    def __pow__(self, exponent: Any) -> "DualNumber":
        if isinstance(exponent, DualNumber):
            return (exponent * self.log()).exp()
        if isinstance(exponent, (int, np.integer)) and exponent >= 0:
            result = DualNumber(1.0, 0.0)
            for _ in range(int(exponent)):
                result = result * self
            return result
        exponent = float(exponent)
        return DualNumber(self.a ** exponent, exponent * self.a ** (exponent - 1.0) * self.b)

    def __rpow__(self, base: Any) -> "DualNumber":
        return DualNumber.lift(base) ** self

    def reciprocal(self) -> "DualNumber":
        if self.a == 0.0:
            raise NotInvertible("dual number with zero real part is not a unit")
        return DualNumber(1.0 / self.a, -self.b / (self.a * self.a))

    def exp(self) -> "DualNumber":
        value = math.exp(self.a)
        return DualNumber(value, value * self.b)

    def log(self) -> "DualNumber":
        return DualNumber(math.log(self.a) if self.a > 0 else float("nan"), self.b / self.a)

    def sin(self) -> "DualNumber":
        return DualNumber(math.sin(self.a), math.cos(self.a) * self.b)

    def cos(self) -> "DualNumber":
        return DualNumber(math.cos(self.a), -math.sin(self.a) * self.b)

    def sqrt(self) -> "DualNumber":
        root = math.sqrt(self.a)
        return DualNumber(root, self.b / (2.0 * root))

    def isfinite(self) -> bool:
        return math.isfinite(self.a) and math.isfinite(self.b)

    def __repr__(self) -> str:
        return f"{self.a!r}+{self.b!r}ε"


class Ring(ABC):
    """
    A commutative unital ring with partial inversion.

    Elements are plain payloads (Fraction, int residue, float, DualNumber);
    RingElem wraps a payload together with its ring.
    """

    ring_id: str = ""
    exact: bool = True

    @abstractmethod
    def normalize(self, value: Any) -> Any:
        """Coerce value into the canonical payload for this ring."""

    @abstractmethod
    def zero(self) -> Any: ...

    @abstractmethod
    def one(self) -> Any: ...

    def from_int(self, n: int) -> Any:
        return self.normalize(n)

    def add(self, a: Any, b: Any) -> Any:
        return a + b

    def sub(self, a: Any, b: Any) -> Any:
        return a - b

    def mul(self, a: Any, b: Any) -> Any:
        return a * b

    def neg(self, a: Any) -> Any:
        return -a

    @abstractmethod
    def inv(self, a: Any) -> Any:
        """Inverse of a unit; raises NotInvertible otherwise."""

    def is_unit(self, a: Any) -> bool:
        try:
            self.inv(a)
        except NotInvertible:
            return False
        return True

    def is_zero(self, a: Any) -> bool:
        return a == self.zero()

    def equal(self, a: Any, b: Any, scale: float = 1.0) -> bool:
        """Exact equality; inexact rings compare relative to scale."""
        return a == b

    def residual(self, a: Any, b: Any, scale: float = 1.0) -> float:
        """0 for equal payloads in exact rings, relative gap for floats."""
        return 0.0 if a == b else 1.0

    def magnitude(self, a: Any) -> float:
        return abs(float(a))

    def to_float(self, a: Any) -> float:
        return float(a)

    @abstractmethod
    def random(self, gen: np.random.Generator) -> Any:
        """Random payload for seeded property checks."""

    def format(self, a: Any) -> str:
        return str(a)

    def elem(self, value: Any) -> "RingElem":
        return RingElem(self, value)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Ring) and other.ring_id == self.ring_id

    def __hash__(self) -> int:
        return hash(self.ring_id)

    def __repr__(self) -> str:
        return f"Ring({self.ring_id})"


class RationalRing(Ring):
    ring_id = "Q"
    exact = True

    def normalize(self, value: Any) -> Fraction:
        return Fraction(value)

    def zero(self) -> Fraction:
        return Fraction(0)

    def one(self) -> Fraction:
        return Fraction(1)

    def inv(self, a: Fraction) -> Fraction:
        if a == 0:
            raise NotInvertible("0 is not a unit of Q")
        return 1 / a

    def random(self, gen: np.random.Generator) -> Fraction:
        return Fraction(int(gen.integers(-50, 51)), int(gen.integers(1, 21)))

    def format(self, a: Fraction) -> str:
        return f"{a.numerator}/{a.denominator}" if a.denominator != 1 else str(a.numerator)


class PrimeField(Ring):
    exact = True

    def __init__(self, p: int):
        if p >= PRIME_BOUND or not _is_prime(p):
            raise ValueError(f"modulus must be a prime below 2^31, got {p}")
        self.p = p
        self.ring_id = f"Fp:{p}"

    def normalize(self, value: Any) -> int:
        if isinstance(value, Fraction):
            return (value.numerator % self.p) * self.inv(value.denominator % self.p) % self.p
        return int(value) % self.p

    def zero(self) -> int:
        return 0

    def one(self) -> int:
        return 1

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise NotInvertible(f"0 is not a unit of F_{self.p}")
        return pow(a, -1, self.p)

    def random(self, gen: np.random.Generator) -> int:
        return int(gen.integers(0, self.p))

    def format(self, a: int) -> str:
        return f"{a} mod {self.p}"


class FloatRing(Ring):
    ring_id = "F64"
    exact = False

    def normalize(self, value: Any) -> float:
        return float(value)

    def zero(self) -> float:
        return 0.0

    def one(self) -> float:
        return 1.0

    def inv(self, a: float) -> float:
        if a == 0.0 or not math.isfinite(a):
            raise NotInvertible(f"{a!r} is not a unit of F64")
        return 1.0 / a

    def equal(self, a: float, b: float, scale: float = 1.0) -> bool:
        return self.residual(a, b, scale) <= FLOAT_REL_TOL

    def residual(self, a: float, b: float, scale: float = 1.0) -> float:
        return abs(a - b) / max(scale, abs(a), abs(b), 1e-300)

    def random(self, gen: np.random.Generator) -> float:
        return float(gen.uniform(-10.0, 10.0))

    def format(self, a: float) -> str:
        return repr(a)


class DualRing(Ring):
    ring_id = "Dual"
    exact = False

    def normalize(self, value: Any) -> DualNumber:
        if isinstance(value, tuple):
            return DualNumber(*value)
        return DualNumber.lift(value)

    def zero(self) -> DualNumber:
        return DualNumber(0.0, 0.0)

    def one(self) -> DualNumber:
        return DualNumber(1.0, 0.0)

    def inv(self, a: DualNumber) -> DualNumber:
        return a.reciprocal()

    def equal(self, a: DualNumber, b: DualNumber, scale: float = 1.0) -> bool:
        return self.residual(a, b, scale) <= FLOAT_REL_TOL

    def residual(self, a: DualNumber, b: DualNumber, scale: float = 1.0) -> float:
        gap = max(abs(a.a - b.a), abs(a.b - b.b))
        return gap / max(scale, self.magnitude(a), self.magnitude(b), 1e-300)

    def magnitude(self, a: DualNumber) -> float:
        return abs(a.a) + abs(a.b)

    def to_float(self, a: DualNumber) -> float:
        return a.a

    def random(self, gen: np.random.Generator) -> DualNumber:
        return DualNumber(float(gen.uniform(-10.0, 10.0)), float(gen.uniform(-10.0, 10.0)))

    def format(self, a: DualNumber) -> str:
        return repr(a)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


@lru_cache(maxsize=None)
def ring_from_id(ring_id: str) -> Ring:
    """
    Build a ring from its identifier.

    Args:
        ring_id: "Q", "Fp:<p>", "F64" or "Dual"

    Returns:
        The (cached) ring instance

    Raises:
        ValueError: For unknown identifiers or invalid moduli
    """
    text = ring_id.strip()
    if text == "Q":
        return RationalRing()
    if text == "F64":
        return FloatRing()
    if text == "Dual":
        return DualRing()
    if text.startswith("Fp:"):
        try:
            p = int(text[3:])
        except ValueError as exc:
            raise ValueError(f"bad prime field identifier: {ring_id!r}") from exc
        return PrimeField(p)
    raise ValueError(f"unknown ring identifier: {ring_id!r}")


@dataclass(frozen=True)
class RingElem:
    """Scalar in a commutative unital ring; payload normalized on construction."""

    ring: Ring
    value: Any

    def __post_init__(self):
        object.__setattr__(self, "value", self.ring.normalize(self.value))

    def _check(self, other: "RingElem") -> None:
        if not isinstance(other, RingElem):
            raise RingMismatch(f"expected RingElem, got {type(other).__name__}")
        if other.ring != self.ring:
            raise RingMismatch(f"{self.ring.ring_id} vs {other.ring.ring_id}")

    def __add__(self, other: "RingElem") -> "RingElem":
        self._check(other)
        return RingElem(self.ring, self.ring.add(self.value, other.value))

    def __sub__(self, other: "RingElem") -> "RingElem":
        self._check(other)
        return RingElem(self.ring, self.ring.sub(self.value, other.value))

    def __mul__(self, other: "RingElem") -> "RingElem":
        self._check(other)
        return RingElem(self.ring, self.ring.mul(self.value, other.value))

    def __neg__(self) -> "RingElem":
        return RingElem(self.ring, self.ring.neg(self.value))

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, RingElem) and other.ring == self.ring
                and other.value == self.value)

    def __hash__(self) -> int:
        return hash((self.ring.ring_id, self.value))

    def inv(self) -> "RingElem":
        return inv(self)

    def __str__(self) -> str:
        return self.ring.format(self.value)


def inv(t: RingElem) -> RingElem:
    """
    Partial inversion ι.

    Raises:
        NotInvertible: If t is not a unit of its ring
    """
    return RingElem(t.ring, t.ring.inv(t.value))


def dual_directional(evaluator: Callable[[np.ndarray], Any],
                     x: Sequence[float], u: Sequence[float]) -> np.ndarray:
    """
    Forward-mode directional derivative through dual numbers.

    Args:
        evaluator: Map written with numpy operations, applied to an object
            array of DualNumber
        x: Base point
        u: Direction

    Returns:
        Array of ε-parts of evaluator(x + εu)
    """
    point = np.array([DualNumber(a, b) for a, b in zip(x, u)], dtype=object)
    result = np.atleast_1d(np.asarray(evaluator(point), dtype=object))
    return np.array([DualNumber.lift(v).b for v in result], dtype=float)


def ring_axiom_suite(ring_id: str, sample_count: int, seed: int) -> VerificationReport:
    """
    Check the ring postulates and ι∘ι ⊆ id on seeded random samples.

    Exact rings compare exactly; F64 and Dual compare with relative
    tolerance 1e-12 against the magnitude of the terms involved.

    Args:
        ring_id: Ring identifier
        sample_count: Number of random triples (>= 1)
        seed: Run seed

    Returns:
        VerificationReport with one check per law
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    ring = ring_from_id(ring_id)
    gen = rng(seed, "rings", ring.ring_id)
    report = VerificationReport(title=f"ring axioms {ring.ring_id}", seed=seed)
    mag = ring.magnitude

    def law(name: str, lhs: Any, rhs: Any, scale: float, witness: dict) -> None:
        residual = ring.residual(lhs, rhs, scale)
        ok = ring.equal(lhs, rhs, scale)
        report.check(name).record(ok, residual, {**witness, "lhs": ring.format(lhs),
                                                 "rhs": ring.format(rhs)})

    for _ in range(sample_count):
        a, b, c = ring.random(gen), ring.random(gen), ring.random(gen)
        w = {"a": ring.format(a), "b": ring.format(b), "c": ring.format(c)}
        law("add_associative", ring.add(ring.add(a, b), c), ring.add(a, ring.add(b, c)),
            mag(a) + mag(b) + mag(c), w)
        law("mul_associative", ring.mul(ring.mul(a, b), c), ring.mul(a, ring.mul(b, c)),
            mag(a) * mag(b) * mag(c), w)
        law("add_commutative", ring.add(a, b), ring.add(b, a), mag(a) + mag(b), w)
        law("mul_commutative", ring.mul(a, b), ring.mul(b, a), mag(a) * mag(b), w)
        law("distributive", ring.mul(a, ring.add(b, c)),
            ring.add(ring.mul(a, b), ring.mul(a, c)), mag(a) * (mag(b) + mag(c)), w)
        law("unity", ring.mul(ring.one(), a), a, mag(a), w)
        law("additive_identity", ring.add(a, ring.zero()), a, mag(a), w)
        law("additive_inverse", ring.add(a, ring.neg(a)), ring.zero(), mag(a), w)
        if ring.is_unit(a):
            inverse = ring.inv(a)
            law("inverse_product", ring.mul(a, inverse), ring.one(), mag(a) * mag(inverse), w)
            law("inverse_involution", ring.inv(inverse), a, mag(a), w)
    return report
