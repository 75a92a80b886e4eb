# dlab/services/gcdsums.py
# GCD sums: the Gram matrix gcd(n_k, n_l)^{2a} / (n_k n_l)^a, its normalized
# sum Gamma, its top eigenvalue Lambda and the search for extremal sets.

from dataclasses import dataclass
from itertools import chain, combinations, product
from math import comb
from typing import List, Sequence, Tuple
import logging
import math

import numpy as np

from dlab.core.exceptions import BudgetError, DomainError, ValidationError
from dlab.utils.linalg import power_iteration
from dlab.utils.parallel import map_ordered

logger = logging.getLogger("dlab")

STRATEGIES = ("exhaustive", "greedy", "smooth")

# 6 e^{2 gamma} / pi^2
GAL_CONSTANT = 6.0 * math.exp(2.0 * np.euler_gamma) / math.pi ** 2

# Smooth family: 2^a 3^b 5^c 7^d with a + b + c + d <= 8
SMOOTH_PRIMES = (2, 3, 5, 7)
SMOOTH_MAX_DEGREE = 8

REFERENCE_NOTE = (
    "alpha=1 overlay uses (log log N)^2; the normalized sum is stated as "
    "~ const * log log N while the unnormalized bound carries (log log N)^2"
)

_SUBSETS_PER_CHUNK = 1 << 15


@dataclass(frozen=True, eq=False)
class GcdGram:
    """Kernel matrix of a set of distinct integers n_1 < ... < n_N"""
    indices: Tuple[int, ...]
    alpha: float
    entries: np.ndarray


@dataclass(frozen=True)
class GcdExtremalResult:
    gamma: float
    lambda_: float
    perron_vector: Tuple[float, ...]
    indices: Tuple[int, ...]
    strategy: str = "given"


def _check_alpha(alpha: float) -> float:
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return float(alpha)


def _check_set(numbers: Sequence[int]) -> np.ndarray:
    values = [int(n) for n in numbers]
    if not values:
        raise ValidationError("GCD sums need a nonempty set")
    if any(n < 1 for n in values):
        raise ValidationError(f"Set entries must be positive integers: {values}")
    if len(set(values)) != len(values):
        raise ValidationError(f"Set entries must be distinct: {values}")
    return np.asarray(sorted(values), dtype=np.int64)


def _kernel(rows: np.ndarray, cols: np.ndarray, alpha: float) -> np.ndarray:
    """K[k, l] = ((g/n_k)(g/n_l))^alpha with g = gcd(n_k, n_l); symmetric by construction"""
    g = np.gcd.outer(rows, cols).astype(float)
    return ((g / rows[:, None]) * (g / cols[None, :])) ** alpha


def gcd_gram(numbers: Sequence[int], alpha: float) -> GcdGram:
    """Gram matrix of the GCD kernel, indices sorted ascending"""
    alpha = _check_alpha(alpha)
    values = _check_set(numbers)
    entries = _kernel(values, values, alpha)
    entries.setflags(write=False)
    return GcdGram(indices=tuple(values.tolist()), alpha=alpha, entries=entries)


def gamma_form(numbers: Sequence[int], alpha: float) -> float:
    """(1/N) sum_{k,l} gcd(n_k, n_l)^{2 alpha} / (n_k n_l)^alpha"""
    gram = gcd_gram(numbers, alpha)
    return float(gram.entries.sum()) / len(gram.indices)


def lambda_eig(numbers: Sequence[int], alpha: float, strategy: str = "given") -> GcdExtremalResult:
    """Largest eigenvalue of the Gram matrix with its nonnegative Perron vector"""
    gram = gcd_gram(numbers, alpha)
    value, vector, iterations = power_iteration(gram.entries)
    logger.debug(f"Lambda for {len(gram.indices)} integers after {iterations} iterations: {value}")

    return GcdExtremalResult(
        gamma=float(gram.entries.sum()) / len(gram.indices),
        lambda_=value,
        perron_vector=tuple(float(abs(v)) for v in vector),
        indices=gram.indices,
        strategy=strategy
    )


def smooth_family(limit: int) -> List[int]:
    """Integers 2^a 3^b 5^c 7^d <= limit with a + b + c + d <= 8"""
    family = set()
    for exponents in product(range(SMOOTH_MAX_DEGREE + 1), repeat=len(SMOOTH_PRIMES)):
        if sum(exponents) <= SMOOTH_MAX_DEGREE:
            n = math.prod(p ** e for p, e in zip(SMOOTH_PRIMES, exponents))
            if n <= limit:
                family.add(n)
    return sorted(family)


def _exhaustive(candidates: np.ndarray, N: int, alpha: float) -> Tuple[int, ...]:
    """
    Best N-subset of the candidates by full enumeration

    Subsets are scored in lexicographic order and only a strictly larger
    score replaces the incumbent, so ties go to the smallest index list.
    """
    kernel = _kernel(candidates, candidates, alpha)
    total = comb(len(candidates), N)
    flat = np.fromiter(
        chain.from_iterable(combinations(range(len(candidates)), N)),
        dtype=np.int64,
        count=total * N
    ).reshape(total, N)
    chunks = [flat[start:start + _SUBSETS_PER_CHUNK] for start in range(0, total, _SUBSETS_PER_CHUNK)]

    def score(chunk: np.ndarray) -> Tuple[float, int]:
        sums = kernel[chunk[:, :, None], chunk[:, None, :]].sum(axis=(1, 2))
        best = int(np.argmax(sums))
        return float(sums[best]), best

    best_score, best_subset = -math.inf, None
    for chunk, (chunk_score, position) in zip(chunks, map_ordered(score, chunks)):
        if chunk_score > best_score:
            best_score, best_subset = chunk_score, chunk[position]

    return tuple(int(candidates[i]) for i in best_subset)


def _greedy(candidates: np.ndarray, N: int, alpha: float) -> Tuple[int, ...]:
    """Grow the set by the candidate with the best resulting sum, smallest on ties"""
    chosen: List[int] = []
    available = np.ones(len(candidates), dtype=bool)
    cross = np.zeros(len(candidates))

    for _ in range(N):
        gains = np.where(available, 2.0 * cross + 1.0, -np.inf)
        pick = int(np.argmax(gains))
        chosen.append(pick)
        available[pick] = False
        cross += _kernel(candidates[pick:pick + 1], candidates, alpha)[0]

    return tuple(sorted(int(candidates[i]) for i in chosen))


def optimize_gamma(N: int, universe_limit: int, alpha: float, strategy: str) -> GcdExtremalResult:
    """
    Search for the N-subset of {1..universe_limit} with the largest GCD sum

    exhaustive: provably optimal over the universe, within the budget
    greedy: best marginal gain at each step
    smooth: exhaustive over 2^a 3^b 5^c 7^d (a+b+c+d <= 8) inside the universe,
        greedy over that family when enumeration exceeds the budget
    """
    from dlab.core.config import get_settings

    alpha = _check_alpha(alpha)
    if strategy not in STRATEGIES:
        raise ValidationError(f"Unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if N < 1:
        raise ValidationError(f"Set size must be positive, got {N}")
    if universe_limit < N:
        raise ValidationError(f"Universe 1..{universe_limit} has fewer than {N} integers")

    budget = get_settings().exhaustive_budget

    if strategy == "smooth":
        candidates = np.asarray(smooth_family(universe_limit), dtype=np.int64)
        if len(candidates) < N:
            raise ValidationError(
                f"Smooth family below {universe_limit} has {len(candidates)} members, fewer than {N}"
            )
    else:
        candidates = np.arange(1, universe_limit + 1, dtype=np.int64)

    subsets = comb(len(candidates), N)
    used = strategy
    if strategy == "exhaustive" and subsets > budget:
        raise BudgetError(
            f"Exhaustive search over C({universe_limit}, {N}) = {subsets} subsets exceeds budget {budget}"
        )

    if strategy == "greedy":
        best = _greedy(candidates, N, alpha)
    elif N == 1:
        best = (int(candidates[0]),)
    elif subsets <= budget:
        best = _exhaustive(candidates, N, alpha)
    else:
        logger.warning(
            f"Smooth family has C({len(candidates)}, {N}) = {subsets} subsets, over budget {budget}; "
            f"searching it greedily"
        )
        best = _greedy(candidates, N, alpha)
        used = "smooth-greedy"

    result = lambda_eig(best, alpha, strategy=used)
    logger.info(f"optimize_gamma N={N} alpha={alpha} {used}: gamma={result.gamma} set={best}")
    return result


def reference_asymptotics(alpha: float, N: int) -> float:
    """
    Asymptotic shape of Gamma_alpha(N) for plot overlays

    Constant 1 where only the order of growth is known and 6e^{2 gamma}/pi^2
    for alpha = 1.
    """
    alpha = _check_alpha(alpha)
    if N < 16:
        raise DomainError(f"Reference asymptotics need N >= 16, got {N}")
    if alpha > 1:
        raise DomainError(f"No reference regime for alpha > 1, got {alpha}")

    log_n = math.log(N)
    loglog_n = math.log(log_n)

    if alpha == 1:
        return GAL_CONSTANT * loglog_n ** 2
    if alpha > 0.5:
        return math.exp(log_n ** (1 - alpha) / loglog_n ** alpha)
    if alpha == 0.5:
        return math.exp(math.sqrt(log_n * math.log(loglog_n) / loglog_n))
    return math.exp((1 - 2 * alpha) * log_n + loglog_n)
