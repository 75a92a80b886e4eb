# dlab/core/exceptions.py

from typing import Optional

import numpy as np


class DirichletLabException(Exception):
    """Base exception for dirichlet-lab"""
    exit_code = 1


class DomainError(DirichletLabException):
    """Argument outside the mathematical domain of an operation"""
    exit_code = 2


class EmptyRangeError(DomainError):
    """Requested range contains nothing to enumerate"""
    pass


class ArithmeticOverflowError(DirichletLabException):
    """Integer result leaves the signed 64-bit range"""
    exit_code = 2


class ValidationError(DirichletLabException):
    """Input failed validation"""
    exit_code = 2


class ConfigParseError(ValidationError):
    """Experiment config is not valid JSON"""
    pass


class IncompletePointError(ValidationError):
    """Torus point lacks a coordinate the polynomial needs"""
    pass


class CoverageError(ValidationError):
    """Prime lies beyond the range of a multiplicative assignment"""
    pass


class EmptyPolynomialError(ValidationError):
    """Polynomial with empty support where terms are required"""
    pass


class BudgetError(DirichletLabException):
    """Requested computation exceeds its enumeration budget"""
    exit_code = 3


class ConvergenceError(DirichletLabException):
    """Iteration stopped at its cap without meeting tolerance"""
    exit_code = 4

    def __init__(
        self,
        message: str,
        last_iterate: Optional[np.ndarray] = None,
        last_value: Optional[float] = None
    ):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.last_value = last_value


class OutputWriteError(DirichletLabException):
    """Experiment output could not be written"""
    exit_code = 5


class ConfigReadError(DirichletLabException):
    """Experiment config file could not be read"""
    exit_code = 5
