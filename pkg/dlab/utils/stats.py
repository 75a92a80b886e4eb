# dlab/utils/stats.py

from dataclasses import dataclass
from typing import Iterable
import math

import numpy as np


@dataclass(frozen=True)
class Moments:
    """Count, mean and sum of squared deviations of a sample"""
    count: int
    mean: float
    m2: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> "Moments":
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return cls(0, 0.0, 0.0)
        mean = float(np.mean(values))
        return cls(int(values.size), mean, float(np.sum((values - mean) ** 2)))

    def merge(self, other: "Moments") -> "Moments":
        """Chan's pairwise update"""
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        return Moments(count, mean, m2)

    @property
    def variance(self) -> float:
        """Unbiased sample variance"""
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 0 else 0.0


def merge_all(parts: Iterable[Moments]) -> Moments:
    """Merge block moments left to right"""
    total = Moments(0, 0.0, 0.0)
    for part in parts:
        total = total.merge(part)
    return total
