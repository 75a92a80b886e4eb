# dlab/services/norms.py
# H^p norms of Dirichlet polynomials: exact for p = 2 and even p, Monte Carlo
# over the torus for general p, vertical-segment averages and the
# coefficient lower bound for 0 < p <= 2.

from typing import List, Tuple
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.integrate import trapezoid

from dlab.core.exceptions import DomainError
from dlab.services.arith import exponent_matrix, multiplicative_stats
from dlab.services.dirichlet import DirichletPolynomial, power
from dlab.utils.parallel import block_ranges, map_ordered
from dlab.utils.seeding import STREAM_TORUS, philox_generator
from dlab.utils.stats import Moments, merge_all

logger = logging.getLogger("dlab")

EVEN_NORM_EXPONENTS = (2, 4, 6, 8)

# Grid nodes evaluated per chunk in vertical_average
_GRID_CHUNK = 2048
# Support rows turned into phases at once in the torus sampler
_SUPPORT_CHUNK = 512


class EstimateWithError(BaseModel):
    """
    Monte Carlo estimate with its standard error

    For norms the stderr of the mean of |f|^p is carried to the p-th root by
    the delta method, so it is a first-order approximation.
    """
    model_config = ConfigDict(frozen=True)

    value: float = Field(ge=0)
    stderr: float = Field(ge=0)
    samples: int = Field(ge=1)
    seed: int = Field(ge=0)


def norm_h2(F: DirichletPolynomial) -> float:
    """(sum |a_n|^2)^{1/2}"""
    return math.sqrt(math.fsum(a.real * a.real + a.imag * a.imag for a in F.coeffs.values()))


def norm_h_even(F: DirichletPolynomial, p: int) -> float:
    """Exact H^p norm for even p through ||F||_{2k}^{2k} = ||F^k||_2^2"""
    if p not in EVEN_NORM_EXPONENTS:
        raise DomainError(f"Exact even norm supports p in {EVEN_NORM_EXPONENTS}, got {p}")
    if F.is_zero():
        return 0.0
    return norm_h2(power(F, p // 2)) ** (2.0 / p)


def _check_exponent(p: float) -> float:
    if not p > 0:
        raise DomainError(f"Exponent p must be positive, got {p}")
    return float(p)


def _check_samples(samples: int) -> int:
    if samples < 2:
        raise DomainError(f"At least 2 samples are needed, got {samples}")
    return int(samples)


def _torus_layout(F: DirichletPolynomial) -> Tuple[List[int], object, np.ndarray]:
    """
    Primes dividing the support of F, its exponent matrix and values

    Each prime draws its angles from its own stream keyed by the prime, so
    two polynomials sampled with one seed see the same angle for the same
    prime.
    """
    primes, matrix = exponent_matrix(list(F.coeffs.keys()))
    return primes, matrix, F.values()


def _torus_abs_powers(layout, p: float, start: int, stop: int, block: int, seed: int) -> np.ndarray:
    """|f(z)|^p for the samples start..stop of the stream at ``seed``"""
    primes, matrix, values = layout
    count = stop - start
    if not primes:
        # constant or zero polynomial
        return np.full(count, abs(complex(values.sum())) ** p)
    turns = np.stack([philox_generator(seed, STREAM_TORUS, block, q).random(count) for q in primes])
    f = np.zeros(count, dtype=complex)
    for lo in range(0, len(values), _SUPPORT_CHUNK):
        phases = matrix[lo:lo + _SUPPORT_CHUNK] @ turns
        f += values[lo:lo + _SUPPORT_CHUNK] @ np.exp(2j * np.pi * phases)
    return np.abs(f) ** p


def torus_samples(F: DirichletPolynomial, p: float, samples: int, seed: int) -> np.ndarray:
    """All |f(z)|^p draws in stream order"""
    from dlab.core.config import get_settings

    layout = _torus_layout(F)
    blocks = block_ranges(samples, get_settings().mc_block_size)
    parts = map_ordered(
        lambda b: _torus_abs_powers(layout, p, b[1], b[2], b[0], seed),
        blocks
    )
    return np.concatenate(parts)


def norm_hp_mc(F: DirichletPolynomial, p: float, samples: int, seed: int) -> EstimateWithError:
    """
    Monte Carlo estimate of ||F||_{H^p} over the torus

    Only the coordinates of primes dividing some n in the support are
    sampled; the others do not change |f|. For p < 1 the result is a
    quasi-norm.
    """
    from dlab.core.config import get_settings

    p = _check_exponent(p)
    samples = _check_samples(samples)

    if F.is_zero():
        return EstimateWithError(value=0.0, stderr=0.0, samples=samples, seed=seed)
    if F.length == 1:
        return EstimateWithError(value=abs(F.coeffs[1]), stderr=0.0, samples=samples, seed=seed)

    layout = _torus_layout(F)
    blocks = block_ranges(samples, get_settings().mc_block_size)
    parts = map_ordered(
        lambda b: Moments.from_values(_torus_abs_powers(layout, p, b[1], b[2], b[0], seed)),
        blocks
    )
    moments = merge_all(parts)
    return root_estimate(moments, p, samples, seed)


def root_estimate(moments: Moments, p: float, samples: int, seed: int) -> EstimateWithError:
    """p-th root of the mean of |f|^p, stderr by the delta method"""
    mean = max(moments.mean, 0.0)
    if mean == 0.0:
        return EstimateWithError(value=0.0, stderr=0.0, samples=samples, seed=seed)
    value = mean ** (1.0 / p)
    stderr = value / (p * mean) * moments.stderr
    return EstimateWithError(value=value, stderr=stderr, samples=samples, seed=seed)


def vertical_average(F: DirichletPolynomial, p: float, t_lo: float, t_hi: float, gridpoints: int) -> float:
    """
    ((1/(t_hi - t_lo)) int |F(it)|^p dt)^{1/p} by the trapezoid rule

    The line is Re s = 0; use dirichlet.shift to move to another line.
    """
    p = _check_exponent(p)
    if not t_lo < t_hi:
        raise DomainError(f"Empty segment [{t_lo}, {t_hi}]")
    if gridpoints < 2:
        raise DomainError(f"At least 2 grid points are needed, got {gridpoints}")
    if F.is_zero():
        return 0.0

    t = np.linspace(t_lo, t_hi, gridpoints)
    logs = np.log(F.numbers().astype(float))
    values = F.values()
    moduli: List[np.ndarray] = []
    for start in range(0, gridpoints, _GRID_CHUNK):
        chunk = t[start:start + _GRID_CHUNK]
        moduli.append(np.abs(np.exp(-1j * np.outer(chunk, logs)) @ values) ** p)

    integral = trapezoid(np.concatenate(moduli), t)
    return (integral / (t_hi - t_lo)) ** (1.0 / p)


def helson_lower_bound(F: DirichletPolynomial, p: float) -> float:
    """(sum |mu(n)| |a_n|^2 d(n)^{log p / log 2 - 1})^{1/2}, a lower bound for ||F||_p"""
    p = _check_exponent(p)
    if p > 2:
        raise DomainError(f"The coefficient bound holds for 0 < p <= 2, got {p}")

    exponent = math.log(p) / math.log(2) - 1
    terms = []
    for n, a in F.coeffs.items():
        stats = multiplicative_stats(n)
        if stats.mu != 0:
            terms.append(abs(a) ** 2 * stats.d ** exponent)
    return math.sqrt(math.fsum(terms))


def euler_lower_bound_shape(N: int, p: float) -> float:
    """(log N)^{p/4}, the growth shape of ||sum n^{-1/2-s}||_p from below"""
    if N < 2:
        raise DomainError(f"Shape needs N >= 2, got {N}")
    return math.log(N) ** (p / 4.0)

