# dlab/services/randmult.py
# Random multiplicative functions (Steinhaus and Rademacher), moments of
# their partial sums, and the random Euler-product field with its maximum.

from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Callable, List, Mapping, NamedTuple, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.optimize import minimize_scalar

from dlab.core.exceptions import (
    BudgetError,
    CoverageError,
    DomainError,
    EmptyPolynomialError,
    ValidationError,
)
from dlab.services.arith import arithmetic_tables, exponent_matrix, factorize, sieve_primes
from dlab.services.dirichlet import UNIT_MODULUS_TOL
from dlab.services.norms import EVEN_NORM_EXPONENTS, EstimateWithError, root_estimate
from dlab.utils.parallel import block_ranges, map_ordered
from dlab.utils.seeding import STREAM_FIELD, STREAM_PRIMES, STREAM_TRIALS, derive_seed, philox_generator
from dlab.utils.stats import Moments, merge_all

logger = logging.getLogger("dlab")

# Trials per block; sums over n <= N are materialized per block
_TRIALS_PER_BLOCK = 256
_GRID_CHUNK = 1024
REFINE_XTOL = 1e-8


class MultiplicativeModel(str, Enum):
    STEINHAUS = "steinhaus"
    RADEMACHER = "rademacher"


@dataclass(frozen=True, eq=False)
class SteinhausAssignment:
    """
    Values chi(p) for every prime p <= prime_limit

    chi is extended completely multiplicatively. Steinhaus values lie on
    the unit circle, Rademacher values are exactly +1 or -1.
    """
    model: MultiplicativeModel
    values: Mapping[int, complex]
    seed: int
    prime_limit: int

    def __post_init__(self):
        model = _check_model(self.model)
        object.__setattr__(self, "model", model)
        missing = [p for p in sieve_primes(self.prime_limit) if p not in self.values]
        if missing:
            raise CoverageError(f"No value for primes {missing[:5]} below {self.prime_limit}")
        for p, v in self.values.items():
            if abs(abs(v) - 1.0) > UNIT_MODULUS_TOL:
                raise ValidationError(f"chi({p}) = {v} is off the unit circle")
            if model is MultiplicativeModel.RADEMACHER and v not in (1, -1):
                raise ValidationError(f"Rademacher chi({p}) = {v} is not +1 or -1")
        object.__setattr__(self, "values", MappingProxyType(dict(sorted(self.values.items()))))

    @classmethod
    def forced(
        cls,
        prime_limit: int,
        value: Callable[[int], complex] = lambda p: 1.0,
        model: MultiplicativeModel = MultiplicativeModel.STEINHAUS
    ) -> "SteinhausAssignment":
        """Deterministic assignment chi(p) = value(p)"""
        values = {p: complex(value(p)) for p in sieve_primes(prime_limit)}
        return cls(model=model, values=values, seed=0, prime_limit=prime_limit)


class HomogeneousMoment(NamedTuple):
    lp: EstimateWithError
    exact_l2: float


class FieldMax(NamedTuple):
    x_star: float
    m: float


@dataclass(frozen=True, eq=False)
class FieldSample:
    """
    One draw of X(x) = sum_p w_p cos(x log p - theta_p) on a grid in [0, 1]

    With the default weights w_p = p^{-1/2} this equals
    sum p^{-1/2} (cos(x log p) cos theta_p + sin(x log p) sin theta_p).
    """
    prime_limit: int
    grid: np.ndarray
    values: np.ndarray
    theta_seed: int
    primes: np.ndarray
    thetas: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if len(self.values) != len(self.grid):
            raise ValidationError("Field values and grid differ in length")

    def evaluate(self, x) -> np.ndarray:
        """X at the points x"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        logs = np.log(self.primes.astype(float))
        out = []
        for start in range(0, len(x), _GRID_CHUNK):
            chunk = x[start:start + _GRID_CHUNK]
            out.append(np.cos(np.outer(chunk, logs) - self.thetas[None, :]) @ self.weights)
        return np.concatenate(out) if out else np.empty(0)

    @classmethod
    def from_phases(
        cls,
        primes: Sequence[int],
        thetas: Sequence[float],
        gridpoints: int,
        weights: Optional[Sequence[float]] = None,
        theta_seed: int = 0,
        prime_limit: Optional[int] = None
    ) -> "FieldSample":
        """Field with given phases (and optionally weights) instead of a random draw"""
        if gridpoints < 2:
            raise DomainError(f"At least 2 grid points are needed, got {gridpoints}")
        primes_arr = np.asarray(primes, dtype=np.int64)
        if len(thetas) != len(primes_arr):
            raise ValidationError(f"{len(thetas)} phases given for {len(primes_arr)} primes")
        if prime_limit is None:
            prime_limit = int(primes_arr.max()) if primes_arr.size else 0
        thetas_arr = np.asarray(thetas, dtype=float)
        if weights is None:
            weights_arr = primes_arr.astype(float) ** -0.5
        else:
            weights_arr = np.asarray(weights, dtype=float)
        grid = np.linspace(0.0, 1.0, gridpoints)
        shell = cls(
            prime_limit=prime_limit,
            grid=grid,
            values=np.zeros(gridpoints),
            theta_seed=theta_seed,
            primes=primes_arr,
            thetas=thetas_arr,
            weights=weights_arr
        )
        object.__setattr__(shell, "values", shell.evaluate(grid))
        return shell


def _prime_uniforms(seed: int, count: int) -> np.ndarray:
    """Uniforms for the first ``count`` primes; the j-th depends only on (seed, j)"""
    return philox_generator(seed, STREAM_PRIMES).random(count)


def _check_model(model) -> MultiplicativeModel:
    try:
        return MultiplicativeModel(model)
    except ValueError:
        raise ValidationError(f"Unknown model {model!r}; expected steinhaus or rademacher")


def sample_assignment(model, prime_limit: int, seed: int) -> SteinhausAssignment:
    """Independent uniform angles (or signs) per prime, derived from (seed, prime)"""
    model = _check_model(model)
    primes = sieve_primes(prime_limit)
    uniforms = _prime_uniforms(seed, len(primes))

    if model is MultiplicativeModel.STEINHAUS:
        values = np.exp(2j * np.pi * uniforms)
    else:
        values = np.where(uniforms < 0.5, -1.0, 1.0).astype(complex)

    return SteinhausAssignment(
        model=model,
        values=dict(zip(primes, values.tolist())),
        seed=seed,
        prime_limit=prime_limit
    )


def chi_of_n(a: SteinhausAssignment, n: int) -> complex:
    """prod chi(p)^{e_p} over the factorization of n"""
    value = 1 + 0j
    for p, e in factorize(n).index.entries:
        if p > a.prime_limit:
            raise CoverageError(f"Prime {p} of {n} exceeds the assignment limit {a.prime_limit}")
        value *= a.values[p] ** e
    return value


def char_sum(a: SteinhausAssignment, N: int) -> complex:
    """sum_{n<=N} chi(n)"""
    if N < 1:
        raise DomainError(f"Sum length must be at least 1, got {N}")
    if N >= 2 and sieve_primes(N)[-1] > a.prime_limit:
        raise CoverageError(f"Primes up to {N} are needed, assignment stops at {a.prime_limit}")
    return sum((chi_of_n(a, n) for n in range(1, N + 1)), 0j)


def _support_layout(support: Sequence[int]):
    """Exponent matrix of the support over every prime up to the largest one dividing it"""
    largest = max((p for n in support for p in factorize(n).index.primes), default=1)
    primes = sieve_primes(largest) if largest >= 2 else []
    return exponent_matrix(support, primes)


def _support_sums(model: MultiplicativeModel, layout, count: int, start: int, stop: int, seed: int) -> np.ndarray:
    """
    sum_{n in support} chi_i(n) for trials i = start..stop-1

    Trial i uses the assignment of seed derive_seed(seed, STREAM_TRIALS, i),
    the same one sample_assignment would build.
    """
    primes, matrix = layout
    if not primes:
        return np.full(stop - start, float(count), dtype=complex)

    uniforms = np.stack(
        [_prime_uniforms(derive_seed(seed, STREAM_TRIALS, i), len(primes)) for i in range(start, stop)],
        axis=1
    )
    if model is MultiplicativeModel.STEINHAUS:
        return np.exp(2j * np.pi * (matrix @ uniforms)).sum(axis=0)

    negative = (uniforms < 0.5).astype(float)
    parity = np.rint(matrix @ negative).astype(np.int64) % 2
    return (1.0 - 2.0 * parity).sum(axis=0).astype(complex)


def _support_moments(model, support: Sequence[int], exponent: float, trials: int, seed: int) -> Moments:
    layout = _support_layout(support)
    parts = map_ordered(
        lambda b: Moments.from_values(
            np.abs(_support_sums(model, layout, len(support), b[1], b[2], seed)) ** exponent
        ),
        block_ranges(trials, _TRIALS_PER_BLOCK)
    )
    return merge_all(parts)


def moment_estimate(model, N: int, exponent: float, trials: int, seed: int) -> EstimateWithError:
    """Estimate of E|sum_{n<=N} chi(n)|^exponent over independent assignments"""
    model = _check_model(model)
    if N < 1:
        raise DomainError(f"Sum length must be at least 1, got {N}")
    if not exponent > 0:
        raise DomainError(f"Exponent must be positive, got {exponent}")
    if trials < 2:
        raise DomainError(f"At least 2 trials are needed, got {trials}")

    moments = _support_moments(model, list(range(1, N + 1)), exponent, trials, seed)
    return EstimateWithError(value=moments.mean, stderr=moments.stderr, samples=trials, seed=seed)


def exact_moment(N: int, q: int) -> int:
    """
    E|sum_{n<=N} chi(n)|^{2q} for Steinhaus chi

    q = 1 gives N; q = 2 counts quadruples ab = cd in [1, N]^4 as the sum of
    squared multiplicities of the products ab.
    """
    from dlab.core.config import get_settings

    if q not in (1, 2):
        raise DomainError(f"Exact moments are available for q in (1, 2), got {q}")
    if N < 1:
        raise DomainError(f"Sum length must be at least 1, got {N}")
    if q == 1:
        return int(N)

    limit = get_settings().exact_moment_max_n
    if N > limit:
        raise BudgetError(f"Quadruple count for N={N} exceeds the enumeration budget N <= {limit}")
    a = np.arange(1, N + 1, dtype=np.int64)
    _, multiplicity = np.unique(np.multiply.outer(a, a).ravel(), return_counts=True)
    return int(np.sum(multiplicity.astype(np.int64) ** 2))


def homogeneous_support(N: int, m: int) -> List[int]:
    """n <= N with exactly m prime factors counted with multiplicity"""
    if m < 0:
        raise DomainError(f"Degree must be nonnegative, got {m}")
    big_omega = arithmetic_tables(N).big_omega
    return (np.nonzero(big_omega[1:] == m)[0] + 1).tolist()


def homogeneous_moment_experiment(N: int, m: int, p: int, trials: int, seed: int) -> HomogeneousMoment:
    """
    L^p norm estimate and exact L^2 norm of sum_{Omega(n)=m, n<=N} n^{-s}

    The L^p norm is estimated as E|sum chi(n)|^p over Steinhaus assignments,
    which is the torus integral of the Bohr lift.
    """
    if p not in EVEN_NORM_EXPONENTS:
        raise DomainError(f"Homogeneous comparison supports p in {EVEN_NORM_EXPONENTS}, got {p}")
    if trials < 2:
        raise DomainError(f"At least 2 trials are needed, got {trials}")

    support = homogeneous_support(N, m)
    if not support:
        raise EmptyPolynomialError(f"No n <= {N} with Omega(n) = {m}")

    exact_l2 = math.sqrt(len(support))
    moments = _support_moments(MultiplicativeModel.STEINHAUS, support, float(p), trials, seed)
    lp = root_estimate(moments, float(p), trials, seed)
    logger.info(f"Homogeneous N={N} m={m}: L^{p} ~ {lp.value} +- {lp.stderr}, L^2 = {exact_l2}")
    return HomogeneousMoment(lp=lp, exact_l2=exact_l2)


def _field_thetas(theta_seed: int, count: int) -> np.ndarray:
    return 2.0 * np.pi * philox_generator(theta_seed, STREAM_FIELD).random(count)


def field_sample(prime_limit: int, gridpoints: int, theta_seed: int) -> FieldSample:
    """The truncated field X on a uniform grid of [0, 1] for one theta draw"""
    primes = sieve_primes(prime_limit)
    return FieldSample.from_phases(
        primes=primes,
        thetas=_field_thetas(theta_seed, len(primes)),
        gridpoints=gridpoints,
        theta_seed=theta_seed,
        prime_limit=prime_limit
    )


def field_draw_seed(seed: int, draw: int) -> int:
    """theta seed of draw number ``draw`` in a run seeded with ``seed``"""
    return derive_seed(seed, STREAM_TRIALS, draw)


def field_point_draws(prime_limit: int, x: float, draws: int, seed: int) -> np.ndarray:
    """X(x) at one point over independent theta draws"""
    if draws < 1:
        raise DomainError(f"At least 1 draw is needed, got {draws}")
    primes = np.asarray(sieve_primes(prime_limit), dtype=float)
    phases = x * np.log(primes)
    weights = primes ** -0.5

    def block(b: Tuple[int, int, int]) -> np.ndarray:
        thetas = np.stack([_field_thetas(field_draw_seed(seed, d), len(primes)) for d in range(b[1], b[2])])
        return np.cos(phases[None, :] - thetas) @ weights

    return np.concatenate(map_ordered(block, block_ranges(draws, _TRIALS_PER_BLOCK)))


def field_max(sample: FieldSample) -> FieldMax:
    """
    Grid maximum of the field, refined inside the bracketing cells

    Refinement is a bounded golden-section/parabolic search to 1e-8 in x;
    the grid value is kept when refinement does not improve on it.
    """
    if len(sample.grid) == 0:
        raise ValidationError("Field sample has an empty grid")

    i = int(np.argmax(sample.values))
    best = FieldMax(x_star=float(sample.grid[i]), m=float(sample.values[i]))
    lo = float(sample.grid[max(i - 1, 0)])
    hi = float(sample.grid[min(i + 1, len(sample.grid) - 1)])
    if lo < hi:
        result = minimize_scalar(
            lambda x: -float(sample.evaluate(x)[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": REFINE_XTOL}
        )
        if -result.fun > best.m:
            best = FieldMax(x_star=float(result.x), m=float(-result.fun))
    return best


def field_max_draws(prime_limit: int, gridpoints: int, draws: int, seed: int) -> List[FieldMax]:
    """field_max over independent draws, draw d seeded by field_draw_seed(seed, d)"""
    return map_ordered(
        lambda d: field_max(field_sample(prime_limit, gridpoints, field_draw_seed(seed, d))),
        range(draws)
    )


def field_max_overlay(prime_limit: int) -> float:
    """log log P - (3/4) log log log P; NaN where log log log P is undefined"""
    if prime_limit <= math.e ** math.e:
        return math.nan
    loglog = math.log(math.log(prime_limit))
    return loglog - 0.75 * math.log(loglog)
