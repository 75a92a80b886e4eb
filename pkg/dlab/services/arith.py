# dlab/services/arith.py
# Multiplicative arithmetic: primes, factorization, arithmetic functions and
# the Bohr correspondence n <-> exponent vector over the primes.

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy import sparse

from dlab.core.exceptions import (
    ArithmeticOverflowError,
    CoverageError,
    DomainError,
    EmptyRangeError,
)

logger = logging.getLogger("dlab")

INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class MultiIndex:
    """
    Exponent vector of an integer over the primes

    ``entries`` holds (prime, exponent) pairs with strictly increasing primes
    and positive exponents; the empty tuple is the index of n = 1.
    """
    entries: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        previous = 1
        for prime, exponent in self.entries:
            if prime <= previous:
                raise DomainError(f"Primes must be strictly increasing: {self.entries}")
            if exponent <= 0:
                raise DomainError(f"Exponents must be positive: {self.entries}")
            previous = prime

    @property
    def primes(self) -> Tuple[int, ...]:
        return tuple(prime for prime, _ in self.entries)

    @property
    def exponents(self) -> Tuple[int, ...]:
        return tuple(exponent for _, exponent in self.entries)

    @property
    def degree(self) -> int:
        """Total degree, i.e. Omega of the integer"""
        return sum(self.exponents)

    def exponent(self, prime: int) -> int:
        for p, e in self.entries:
            if p == prime:
                return e
        return 0

    def ordinals(self) -> Tuple[Tuple[int, int], ...]:
        """(prime ordinal, exponent) pairs, 2 having ordinal 1"""
        return tuple((prime_ordinal(p), e) for p, e in self.entries)

    def __mul__(self, other: "MultiIndex") -> "MultiIndex":
        combined: Dict[int, int] = dict(self.entries)
        for prime, exponent in other.entries:
            combined[prime] = combined.get(prime, 0) + exponent
        return MultiIndex(tuple(sorted(combined.items())))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Factorization:
    n: int
    index: MultiIndex

    def __post_init__(self):
        if bohr_integer(self.index) != self.n:
            raise DomainError(f"Index {self.index.entries} does not factor {self.n}")


class MultiplicativeStats(NamedTuple):
    mu: int
    d: int
    big_omega: int
    small_omega: int


@dataclass(frozen=True)
class ArithmeticTables:
    """d(n), Omega(n) and mu(n) for n = 0..limit (entry 0 unused)"""
    limit: int
    divisors: np.ndarray
    big_omega: np.ndarray
    mobius: np.ndarray


def _check_integer(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError(f"Expected an integer, got {n!r}")
    return int(n)


@lru_cache(maxsize=32)
def _sieve(limit: int) -> np.ndarray:
    """Eratosthenes sieve; the returned array is read-only"""
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for i in range(2, isqrt(limit) + 1):
        if is_prime[i]:
            is_prime[i * i::i] = False
    primes = np.nonzero(is_prime)[0].astype(np.int64)
    primes.setflags(write=False)
    return primes


def _primes_up_to(limit: int) -> np.ndarray:
    # Sieve at the next power of two so nearby limits share one cache entry
    size = 64
    while size < limit:
        size *= 2
    primes = _sieve(size)
    return primes[:int(np.searchsorted(primes, limit, side="right"))]


def sieve_primes(limit: int) -> List[int]:
    """All primes <= limit in ascending order"""
    limit = _check_integer(limit)
    if limit < 2:
        raise EmptyRangeError(f"No primes below {limit}")
    return _primes_up_to(limit).tolist()


def prime_ordinal(p: int) -> int:
    """Position of the prime p in the ascending list of primes, from 1"""
    p = _check_integer(p)
    primes = _primes_up_to(p) if p >= 2 else np.empty(0, dtype=np.int64)
    if primes.size == 0 or int(primes[-1]) != p:
        raise DomainError(f"{p} is not a prime")
    return int(primes.size)


def factorize(n: int) -> Factorization:
    """Factor n by trial division with sieved primes up to sqrt(n)"""
    n = _check_integer(n)
    if n < 1:
        raise DomainError(f"Cannot factor {n}: expected n >= 1")
    if n > INT64_MAX:
        raise DomainError(f"{n} exceeds the signed 64-bit range")

    entries = []
    remaining = n
    for p in _primes_up_to(isqrt(n)).tolist():
        if p * p > remaining:
            break
        if remaining % p == 0:
            exponent = 0
            while remaining % p == 0:
                remaining //= p
                exponent += 1
            entries.append((p, exponent))
    if remaining > 1:
        entries.append((remaining, 1))

    return Factorization(n=n, index=MultiIndex(tuple(entries)))


def multiplicative_stats(n: int) -> MultiplicativeStats:
    """mu(n), d(n), Omega(n) and omega(n)"""
    index = factorize(n).index
    exponents = index.exponents

    mu = 0 if any(e >= 2 for e in exponents) else (-1) ** len(exponents)
    d = 1
    for e in exponents:
        d *= e + 1

    return MultiplicativeStats(mu=mu, d=d, big_omega=sum(exponents), small_omega=len(exponents))


def bohr_integer(index: MultiIndex) -> int:
    """The integer prod p^e of a multi-index"""
    n = 1
    for prime, exponent in index.entries:
        for _ in range(exponent):
            n *= prime
            if n > INT64_MAX:
                raise ArithmeticOverflowError(
                    f"Integer of index {index.entries} exceeds the signed 64-bit range"
                )
    return n


@lru_cache(maxsize=8)
def arithmetic_tables(limit: int) -> ArithmeticTables:
    """Sieve d(n), Omega(n) and mu(n) for n <= limit"""
    limit = _check_integer(limit)
    if limit < 1:
        raise EmptyRangeError(f"No integers in [1, {limit}]")

    divisors = np.zeros(limit + 1, dtype=np.int64)
    for k in range(1, limit + 1):
        divisors[k::k] += 1

    big_omega = np.zeros(limit + 1, dtype=np.int64)
    mobius = np.ones(limit + 1, dtype=np.int64)
    mobius[0] = 0
    primes = _primes_up_to(limit).tolist() if limit >= 2 else []
    for p in primes:
        power = p
        while power <= limit:
            big_omega[power::power] += 1
            power *= p
        mobius[p::p] *= -1
        mobius[p * p::p * p] = 0

    for table in (divisors, big_omega, mobius):
        table.setflags(write=False)
    return ArithmeticTables(limit=limit, divisors=divisors, big_omega=big_omega, mobius=mobius)


def factor_table(limit: int) -> List[MultiIndex]:
    """Multi-indices of 1..limit (list position n-1) via smallest prime factors"""
    limit = _check_integer(limit)
    if limit < 1:
        raise EmptyRangeError(f"No integers in [1, {limit}]")

    spf = np.zeros(limit + 1, dtype=np.int64)
    if limit >= 2:
        for p in _primes_up_to(isqrt(limit)).tolist():
            block = spf[p * p::p]
            block[block == 0] = p
        unset = np.nonzero(spf == 0)[0]
        spf[unset[unset >= 2]] = unset[unset >= 2]

    indices: List[MultiIndex] = [MultiIndex()]
    spf_list = spf.tolist()
    for n in range(2, limit + 1):
        p = spf_list[n]
        rest = indices[n // p - 1]
        if rest.entries and rest.entries[0][0] == p:
            entries = ((p, rest.entries[0][1] + 1),) + rest.entries[1:]
        else:
            entries = ((p, 1),) + rest.entries
        indices.append(MultiIndex(entries))
    return indices


def exponent_matrix(
    numbers: Sequence[int],
    primes: Optional[Sequence[int]] = None
) -> Tuple[List[int], sparse.csr_matrix]:
    """
    Sparse exponent matrix E with E[i, j] = exponent of primes[j] in numbers[i]

    Without ``primes`` the columns are the distinct primes dividing some
    number, ascending. With ``primes`` every dividing prime must be listed.
    """
    indices = [factorize(n).index for n in numbers]
    if primes is None:
        primes = sorted({p for index in indices for p in index.primes})
    primes = [int(p) for p in primes]
    column = {p: j for j, p in enumerate(primes)}

    rows, cols, data = [], [], []
    for i, index in enumerate(indices):
        for p, e in index.entries:
            if p not in column:
                raise CoverageError(f"Prime {p} of {numbers[i]} is not among the given primes")
            rows.append(i)
            cols.append(column[p])
            data.append(e)

    matrix = sparse.csr_matrix(
        (np.asarray(data, dtype=float), (rows, cols)),
        shape=(len(indices), len(primes))
    )
    return primes, matrix
