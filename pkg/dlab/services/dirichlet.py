# dlab/services/dirichlet.py
# Dirichlet polynomial algebra and the Bohr lift to polynomials on the torus.

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, Iterable, Mapping, Tuple
import cmath
import logging

import numpy as np
from pydantic import TypeAdapter
from pydantic import ValidationError as PydanticValidationError

from dlab.core.exceptions import (
    ArithmeticOverflowError,
    DomainError,
    IncompletePointError,
    ValidationError,
)
from dlab.services.arith import INT64_MAX, MultiIndex, arithmetic_tables, bohr_integer, factorize

logger = logging.getLogger("dlab")

UNIT_MODULUS_TOL = 1e-12

_COEFFICIENTS_JSON = TypeAdapter(Dict[int, Tuple[float, float]])


@dataclass(frozen=True, eq=False)
class DirichletPolynomial:
    """
    Finite Dirichlet polynomial F(s) = sum a_n n^{-s}

    Coefficients are kept in ascending order of n with zeros dropped; the
    empty map is the zero polynomial.
    """
    coeffs: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        cleaned: Dict[int, complex] = {}
        for n, a in sorted(self.coeffs.items()):
            if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
                raise DomainError(f"Dirichlet index must be a positive integer, got {n!r}")
            a = complex(a)
            if a != 0:
                cleaned[int(n)] = a
        object.__setattr__(self, "coeffs", MappingProxyType(cleaned))

    @classmethod
    def constant(cls, c: complex) -> "DirichletPolynomial":
        return cls({1: c})

    @classmethod
    def from_arrays(cls, numbers: Iterable[int], values: Iterable[complex]) -> "DirichletPolynomial":
        return cls(dict(zip((int(n) for n in numbers), values)))

    @property
    def length(self) -> int:
        """Largest n with a nonzero coefficient, 0 for the zero polynomial"""
        return max(self.coeffs) if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def numbers(self) -> np.ndarray:
        return np.fromiter(self.coeffs.keys(), dtype=np.int64, count=len(self.coeffs))

    def values(self) -> np.ndarray:
        return np.fromiter(self.coeffs.values(), dtype=complex, count=len(self.coeffs))

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirichletPolynomial):
            return NotImplemented
        return dict(self.coeffs) == dict(other.coeffs)

    def __add__(self, other: "DirichletPolynomial") -> "DirichletPolynomial":
        total = dict(self.coeffs)
        for n, a in other.coeffs.items():
            total[n] = total.get(n, 0) + a
        return DirichletPolynomial(total)

    def __mul__(self, other: "DirichletPolynomial") -> "DirichletPolynomial":
        return convolve(self, other)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __repr__(self) -> str:
        return f"DirichletPolynomial({dict(self.coeffs)!r})"

    def to_json(self) -> str:
        """Serialize as {"n": [re, im]}"""
        payload = {n: (a.real, a.imag) for n, a in self.coeffs.items()}
        return _COEFFICIENTS_JSON.dump_json(payload).decode("utf-8")

    @classmethod
    def from_json(cls, text: str) -> "DirichletPolynomial":
        try:
            payload = _COEFFICIENTS_JSON.validate_json(text)
        except PydanticValidationError as e:
            raise ValidationError(f"Invalid Dirichlet polynomial JSON: {str(e)}")
        return cls({n: complex(re, im) for n, (re, im) in payload.items()})


@dataclass(frozen=True, eq=False)
class TorusPolynomial:
    """Polynomial sum c_nu z^nu on the infinite torus, indexed by MultiIndex"""
    terms: Mapping[MultiIndex, complex] = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {index: complex(c) for index, c in self.terms.items() if complex(c) != 0}
        object.__setattr__(self, "terms", MappingProxyType(cleaned))

    @property
    def primes(self) -> Tuple[int, ...]:
        return tuple(sorted({p for index in self.terms for p in index.primes}))

    def to_dirichlet(self) -> DirichletPolynomial:
        """Re-index each term by its integer"""
        return DirichletPolynomial({bohr_integer(index): c for index, c in self.terms.items()})

    def __eq__(self, other) -> bool:
        if not isinstance(other, TorusPolynomial):
            return NotImplemented
        return dict(self.terms) == dict(other.terms)

    def __mul__(self, other: "TorusPolynomial") -> "TorusPolynomial":
        product: Dict[MultiIndex, complex] = {}
        for nu, a in self.terms.items():
            for mu, b in other.terms.items():
                key = nu * mu
                product[key] = product.get(key, 0) + a * b
        return TorusPolynomial(product)

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class TorusPoint:
    """Finitely many coordinates z_p of a point on the infinite torus"""
    coords: Mapping[int, complex]

    def __post_init__(self):
        cleaned = {}
        for p, z in sorted(self.coords.items()):
            z = complex(z)
            if abs(abs(z) - 1.0) > UNIT_MODULUS_TOL:
                raise ValidationError(f"Coordinate for prime {p} is off the unit circle: |z| = {abs(z)}")
            cleaned[int(p)] = z
        object.__setattr__(self, "coords", MappingProxyType(cleaned))

    @classmethod
    def from_angles(cls, primes: Iterable[int], angles: Iterable[float]) -> "TorusPoint":
        return cls({p: cmath.exp(1j * theta) for p, theta in zip(primes, angles)})

    @classmethod
    def vertical(cls, t: float, primes: Iterable[int]) -> "TorusPoint":
        """The point z_p = p^{-it} reached along the vertical line"""
        return cls({p: cmath.exp(-1j * t * np.log(p)) for p in primes})


def evaluate(F: DirichletPolynomial, s: complex) -> complex:
    """F(s) = sum a_n n^{-s}"""
    if F.is_zero():
        return 0j
    terms = F.values() * np.exp(-complex(s) * np.log(F.numbers().astype(float)))
    return complex(np.sum(terms))


def convolve(F: DirichletPolynomial, G: DirichletPolynomial) -> DirichletPolynomial:
    """Dirichlet convolution, the coefficient sequence of F·G"""
    if F.length * G.length > INT64_MAX:
        raise ArithmeticOverflowError(
            f"Product length {F.length}·{G.length} exceeds the signed 64-bit range"
        )

    product: Dict[int, complex] = {}
    for j, a in F.coeffs.items():
        for k, b in G.coeffs.items():
            m = j * k
            product[m] = product.get(m, 0) + a * b
    return DirichletPolynomial(product)


def power(F: DirichletPolynomial, k: int) -> DirichletPolynomial:
    """F^k by repeated convolution"""
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise DomainError(f"Power must be a positive integer, got {k!r}")
    if F.length > 1 and F.length ** int(k) > INT64_MAX:
        raise ArithmeticOverflowError(
            f"Length {F.length}^{k} exceeds the signed 64-bit range"
        )

    result = F
    for _ in range(int(k) - 1):
        result = convolve(result, F)
    return result


def homogeneous_part(F: DirichletPolynomial, m: int) -> DirichletPolynomial:
    """Terms with exactly m prime factors counted with multiplicity"""
    if m < 0:
        raise DomainError(f"Degree must be nonnegative, got {m}")
    return DirichletPolynomial({
        n: a for n, a in F.coeffs.items() if factorize(n).index.degree == m
    })


def bohr_lift(F: DirichletPolynomial) -> TorusPolynomial:
    """Replace each n^{-s} by z^nu with nu the exponent vector of n"""
    return TorusPolynomial({factorize(n).index: a for n, a in F.coeffs.items()})


def evaluate_on_torus(f: TorusPolynomial, z: TorusPoint) -> complex:
    """sum c_nu prod z_p^{nu_p}"""
    missing = [p for p in f.primes if p not in z.coords]
    if missing:
        raise IncompletePointError(f"Torus point has no coordinate for primes {missing}")

    total = 0j
    for index, c in f.terms.items():
        term = c
        for p, e in index.entries:
            term *= z.coords[p] ** e
        total += term
    return total


def shift(F: DirichletPolynomial, sigma: float) -> DirichletPolynomial:
    """a_n -> a_n n^{-sigma}, moving the line Re s = sigma to Re s = 0"""
    return DirichletPolynomial({n: a * n ** (-sigma) for n, a in F.coeffs.items()})


def truncate(F: DirichletPolynomial, N: int) -> DirichletPolynomial:
    """Partial sum operator S_N: keep the coefficients with n <= N"""
    return DirichletPolynomial({n: a for n, a in F.coeffs.items() if n <= N})


def critical_polynomial(N: int) -> DirichletPolynomial:
    """sum_{n<=N} n^{-1/2-s}"""
    return divisor_weighted_polynomial(N, 0.0)


def divisor_weighted_polynomial(N: int, gamma_exp: float, sigma: float = 0.5) -> DirichletPolynomial:
    """sum_{n<=N} d(n)^gamma n^{-sigma-s}"""
    if N < 1:
        raise DomainError(f"Length must be at least 1, got {N}")
    n = np.arange(1, N + 1, dtype=float)
    weights = n ** (-sigma)
    if gamma_exp != 0:
        weights = weights * arithmetic_tables(N).divisors[1:].astype(float) ** gamma_exp
    return DirichletPolynomial.from_arrays(range(1, N + 1), weights.tolist())
