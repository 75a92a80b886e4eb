# dlab/utils/linalg.py

from typing import Optional, Tuple
import logging

import numpy as np

logger = logging.getLogger("dlab")


def power_iteration(
    matrix: np.ndarray,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    start: Optional[np.ndarray] = None
) -> Tuple[float, np.ndarray, int]:
    """
    Largest eigenvalue of a symmetric nonnegative matrix by power iteration

    Starts from the uniform vector unless ``start`` is given and stops when
    the Rayleigh quotient changes by at most ``tol`` relative.

    Returns:
        (eigenvalue, unit eigenvector, iterations)
    """
    from dlab.core.config import get_settings
    from dlab.core.exceptions import ConvergenceError

    settings = get_settings()
    tol = settings.power_iteration_tol if tol is None else tol
    max_iter = settings.power_iteration_max_iter if max_iter is None else max_iter

    matrix = np.asarray(matrix, dtype=float)
    size = matrix.shape[0]
    x = np.ones(size) if start is None else np.asarray(start, dtype=float).copy()
    x /= np.linalg.norm(x)

    ax = matrix @ x
    value = float(x @ ax)

    for iteration in range(1, max_iter + 1):
        norm = float(np.linalg.norm(ax))
        if norm == 0.0:
            return 0.0, x, iteration
        x = ax / norm
        ax = matrix @ x
        new_value = float(x @ ax)
        if abs(new_value - value) <= tol * abs(new_value):
            logger.debug(f"Power iteration converged after {iteration} steps (size {size})")
            return new_value, x, iteration
        value = new_value

    raise ConvergenceError(
        f"Power iteration did not reach tolerance {tol} in {max_iter} steps",
        last_iterate=x,
        last_value=value
    )
