# dlab/services/zeta.py
# Critical-line partial sums and their maxima, the Sidon constant at small N,
# the partial-sum operator and the multiplicative Hilbert matrix.

from dataclasses import dataclass
from itertools import product
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from dlab.core.exceptions import BudgetError, DomainError, ValidationError
from dlab.services.arith import arithmetic_tables, exponent_matrix, sieve_primes
from dlab.services.dirichlet import DirichletPolynomial, truncate
from dlab.services.norms import EstimateWithError, norm_h2, torus_samples
from dlab.utils.linalg import power_iteration
from dlab.utils.parallel import map_ordered
from dlab.utils.seeding import STREAM_SIDON, philox_generator

logger = logging.getLogger("dlab")

REFINE_XTOL = 1e-8
SIDON_MAX_N = 6

# t values evaluated per chunk in the grid search
_T_CHUNK = 1024
# Grid nodes polished by local ascent in the Sidon inner sup
_SIDON_POLISH_STARTS = 3


@dataclass(frozen=True)
class MaxSearchResult:
    t_star: float
    value: float
    grid_spacing: float
    refined: bool


@dataclass(frozen=True, eq=False)
class HilbertTruncation:
    """
    Top-left M x M block of the multiplicative Hilbert matrix

    Rows and columns are indexed by 2..M+1; entries[i, j] belongs to the
    integers (i + 2, j + 2).
    """
    size: int
    entries: np.ndarray


def _check_length(N: int) -> int:
    if N < 1:
        raise DomainError(f"Partial sum length must be at least 1, got {N}")
    return int(N)


def _partial_terms(N: int, gamma_exp: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """(ln n, d(n)^gamma n^{-1/2}) for n = 1..N"""
    n = np.arange(1, N + 1, dtype=float)
    weights = n ** -0.5
    if gamma_exp != 0:
        weights = weights * arithmetic_tables(N).divisors[1:].astype(float) ** gamma_exp
    return np.log(n), weights


def _partial_values(logs: np.ndarray, weights: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = []
    for start in range(0, len(t), _T_CHUNK):
        chunk = t[start:start + _T_CHUNK]
        out.append(np.exp(-1j * np.outer(chunk, logs)) @ weights)
    return np.concatenate(out) if out else np.empty(0, dtype=complex)


def zeta_partial(N: int, t: float) -> complex:
    """sum_{n<=N} n^{-1/2-it}"""
    logs, weights = _partial_terms(_check_length(N))
    return complex(np.sum(weights * np.exp(-1j * t * logs)))


def weighted_partial(N: int, gamma_exp: float, t: float) -> complex:
    """sum_{n<=N} d(n)^gamma n^{-1/2-it}"""
    logs, weights = _partial_terms(_check_length(N), gamma_exp)
    return complex(np.sum(weights * np.exp(-1j * t * logs)))


def _check_window(t_lo: float, t_hi: float, gridpoints: int) -> np.ndarray:
    if not t_lo < t_hi:
        raise DomainError(f"Empty search window [{t_lo}, {t_hi}]")
    if gridpoints < 2:
        raise DomainError(f"At least 2 grid points are needed, got {gridpoints}")
    return np.linspace(t_lo, t_hi, gridpoints)


def max_abs_partial(
    N: int,
    t_lo: float,
    t_hi: float,
    gridpoints: int,
    refine: bool,
    candidates: Optional[Sequence[float]] = None
) -> MaxSearchResult:
    """
    Grid maximum of |sum_{n<=N} n^{-1/2-it}| on [t_lo, t_hi]

    With ``refine`` the cell around the grid argmax, and around each of the
    ``candidates``, is searched by bounded golden-section to 1e-8 in t. A
    refined point replaces the grid point only when it is larger, so local
    maxima are accepted.
    """
    logs, weights = _partial_terms(_check_length(N))
    grid = _check_window(t_lo, t_hi, gridpoints)
    spacing = (t_hi - t_lo) / (gridpoints - 1)
    moduli = np.abs(_partial_values(logs, weights, grid))

    i = int(np.argmax(moduli))
    t_star, value = float(grid[i]), float(moduli[i])
    if not refine:
        return MaxSearchResult(t_star=t_star, value=value, grid_spacing=spacing, refined=False)

    def negative_modulus(t: float) -> float:
        return -abs(np.sum(weights * np.exp(-1j * t * logs)))

    centers = [t_star] + [float(c) for c in (candidates or []) if t_lo <= c <= t_hi]
    for center in centers:
        lo, hi = max(t_lo, center - spacing), min(t_hi, center + spacing)
        result = minimize_scalar(
            negative_modulus, bounds=(lo, hi), method="bounded", options={"xatol": REFINE_XTOL}
        )
        if -result.fun > value:
            t_star, value = float(result.x), float(-result.fun)

    logger.debug(f"max_abs_partial N={N}: t*={t_star} value={value} from {len(centers)} cells")
    return MaxSearchResult(t_star=t_star, value=value, grid_spacing=spacing, refined=True)


def resonant_t_candidates(
    N: int,
    numbers: Sequence[int],
    t_lo: float,
    t_hi: float,
    gridpoints: int
) -> List[float]:
    """
    Grid points with the largest resonator profile |sum_{n in set} n^{-it}|^2

    A search accelerator for max_abs_partial: returns the top
    ceil(gridpoints / 100) points, ties in grid order.
    """
    values = [int(n) for n in numbers]
    if not values:
        raise ValidationError("Resonator set is empty")
    if any(n < 1 or n > N for n in values):
        raise ValidationError(f"Resonator entries must lie in [1, {N}]: {values}")

    grid = _check_window(t_lo, t_hi, gridpoints)
    logs = np.log(np.asarray(values, dtype=float))
    score = np.abs(_partial_values(logs, np.ones(len(values)), grid)) ** 2
    top = math.ceil(gridpoints / 100)
    order = np.argsort(-score, kind="stable")[:top]
    return [float(grid[i]) for i in order]


class _SidonProblem:
    """
    sup over the Bohr torus of |sum a_n z^{nu(n)}| for n <= N

    The torus grid has grid_per_dim points per prime coordinate; the best
    grid nodes are polished by L-BFGS-B on the squared modulus. Rotating
    the torus and the global phase make the phases of a_1 and of a_p for
    prime p irrelevant, so only composite n carry a free phase.
    """

    def __init__(self, N: int, grid_per_dim: int):
        primes = sieve_primes(N)
        _, matrix = exponent_matrix(list(range(1, N + 1)), primes)
        self.size = N
        self.free = np.asarray(
            [n - 1 for n in range(4, N + 1) if n not in primes], dtype=np.int64
        )
        self.exponents = matrix.toarray()
        axis = 2.0 * np.pi * np.arange(grid_per_dim) / grid_per_dim
        self.nodes = np.asarray(list(product(axis, repeat=len(primes))), dtype=float)
        self.basis = np.exp(1j * (self.nodes @ self.exponents.T))

    @property
    def dimension(self) -> int:
        return self.size + len(self.free)

    def coefficients(self, params: np.ndarray) -> np.ndarray:
        phases = np.zeros(self.size)
        phases[self.free] = params[self.size:]
        return params[:self.size] * np.exp(1j * phases)

    def _objective(self, angles: np.ndarray, a: np.ndarray) -> Tuple[float, np.ndarray]:
        terms = a * np.exp(1j * (self.exponents @ angles))
        f = terms.sum()
        gradient = 2.0 * np.real(np.conj(f) * (1j * terms)) @ self.exponents
        return -float(abs(f) ** 2), -gradient

    def sup(self, a: np.ndarray) -> float:
        moduli = np.abs(self.basis @ a)
        best = float(moduli.max())
        for i in np.argsort(-moduli, kind="stable")[:_SIDON_POLISH_STARTS]:
            result = minimize(
                self._objective, self.nodes[i], args=(a,), jac=True, method="L-BFGS-B"
            )
            best = max(best, math.sqrt(max(-float(result.fun), 0.0)))
        return best

    def ratio(self, params: np.ndarray) -> float:
        a = self.coefficients(params)
        top = self.sup(a)
        return float(np.sum(np.abs(a))) / top if top > 0 else 0.0


def sidon_constant(N: int, grid_per_dim: int, coeff_restarts: int, seed: int) -> float:
    """
    Numerical Sidon constant S(N) = sup sum|a_n| / sup_t |sum a_n n^{it}|

    The sup over t is taken over the Bohr torus of dimension pi(N); the
    outer sup runs Nelder-Mead on moduli and free phases from random restarts,
    restart r drawing its start from the stream (seed, STREAM_SIDON, r).
    The best value found is a lower estimate of S(N).
    """
    N = _check_length(N)
    if N > SIDON_MAX_N:
        raise BudgetError(f"Sidon constant is computed for N <= {SIDON_MAX_N}, got {N}")
    if grid_per_dim < 1 or coeff_restarts < 1:
        raise DomainError("grid_per_dim and coeff_restarts must be positive")
    if N == 1:
        return 1.0

    problem = _SidonProblem(N, grid_per_dim)

    def restart(r: int) -> float:
        rng = philox_generator(seed, STREAM_SIDON, r)
        start = np.concatenate([rng.random(N) + 0.1, 2.0 * np.pi * rng.random(len(problem.free))])
        best = problem.ratio(start)
        # a second simplex from the first optimum escapes early collapse
        for _ in range(2):
            result = minimize(
                lambda x: -problem.ratio(x),
                start,
                method="Nelder-Mead",
                options={"maxiter": 400 * problem.dimension, "xatol": 1e-9, "fatol": 1e-12}
            )
            best = max(best, -float(result.fun))
            start = result.x
        return best

    values = map_ordered(restart, range(coeff_restarts))
    best = max(1.0, max(values))
    logger.info(f"Sidon N={N}: {best} over {coeff_restarts} restarts, grid {grid_per_dim}")
    return best


def partial_sum_ratio(F: DirichletPolynomial, N: int, p: float, samples: int, seed: int) -> EstimateWithError:
    """
    ||S_N F||_p / ||F||_p with S_N keeping the coefficients n <= N

    Both norms are sampled on the same torus draws. p = 2 takes the exact
    coefficient ratio.
    """
    if F.is_zero():
        raise ValidationError("Partial sum ratio of the zero polynomial")
    if not p > 0:
        raise DomainError(f"Exponent p must be positive, got {p}")
    if samples < 2:
        raise DomainError(f"At least 2 samples are needed, got {samples}")

    head = truncate(F, N)
    if F.length <= N:
        return EstimateWithError(value=1.0, stderr=0.0, samples=samples, seed=seed)
    if p == 2:
        return EstimateWithError(value=norm_h2(head) / norm_h2(F), stderr=0.0, samples=samples, seed=seed)
    if head.is_zero():
        return EstimateWithError(value=0.0, stderr=0.0, samples=samples, seed=seed)

    x = torus_samples(head, p, samples, seed)
    y = torus_samples(F, p, samples, seed)
    mx, my = float(np.mean(x)), float(np.mean(y))
    cov = np.cov(np.vstack([x, y]))
    ratio = mx / my
    variance = (cov[0, 0] / my ** 2 - 2.0 * mx * cov[0, 1] / my ** 3 + mx ** 2 * cov[1, 1] / my ** 4) / samples
    value = ratio ** (1.0 / p)
    stderr = value / (p * ratio) * math.sqrt(max(variance, 0.0)) if ratio > 0 else 0.0

    logger.info(f"Partial sum ratio N={N} p={p}: {value} +- {stderr}")
    return EstimateWithError(value=value, stderr=stderr, samples=samples, seed=seed)


def hilbert_truncation(M: int) -> HilbertTruncation:
    """Entries 1/(sqrt(mn) ln(mn)) for m, n = 2..M+1"""
    if M < 1:
        raise DomainError(f"Truncation size must be at least 1, got {M}")
    indices = np.arange(2, M + 2, dtype=np.int64)
    products = np.multiply.outer(indices, indices).astype(float)
    entries = 1.0 / (np.sqrt(products) * np.log(products))
    entries.setflags(write=False)
    return HilbertTruncation(size=M, entries=entries)


def hilbert_norm(trunc: HilbertTruncation) -> float:
    """Largest eigenvalue of the truncation by power iteration"""
    value, _, iterations = power_iteration(trunc.entries)
    logger.debug(f"Hilbert norm M={trunc.size}: {value} after {iterations} iterations")
    return value


def phi0_coefficients(N: int) -> DirichletPolynomial:
    """1 + sum_{2<=n<=N} n^{-1/2} / ln n"""
    N = _check_length(N)
    coeffs = {1: 1.0}
    coeffs.update({n: n ** -0.5 / math.log(n) for n in range(2, N + 1)})
    return DirichletPolynomial(coeffs)
