"""
Analysis boxes, counter-based sampling and deterministic direction sets.

Sample point i always comes from block i // block_size, and every block has its
own Philox generator keyed by (seed, block index). Estimates therefore do not
depend on how blocks are scheduled.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np

from src.errors import PhaseInputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoxDomain:
    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        intervals = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        if not intervals:
            raise PhaseInputError("box needs at least one interval")
        for lo, hi in intervals:
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise PhaseInputError(f"invalid box interval [{lo}, {hi}]")
        object.__setattr__(self, "intervals", intervals)

    @classmethod
    def unit(cls, dimension: int) -> "BoxDomain":
        """[-1, 1]^n"""
        return cls(((-1.0, 1.0),) * dimension)

    @classmethod
    def from_config(cls, intervals: Sequence[Sequence[float]], dimension: int) -> "BoxDomain":
        if len(intervals) == 1:
            return cls((tuple(intervals[0]),) * dimension)
        if len(intervals) != dimension:
            raise PhaseInputError(
                f"box has {len(intervals)} intervals but the phase has dimension {dimension}"
            )
        return cls(tuple(tuple(i) for i in intervals))

    @property
    def dimension(self) -> int:
        return len(self.intervals)

    @property
    def lows(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.intervals])

    @property
    def highs(self) -> np.ndarray:
        return np.array([hi for _, hi in self.intervals])

    @property
    def volume(self) -> float:
        return float(np.prod(self.highs - self.lows))

    def volume_off_axes(self, tube: float) -> float:
        """Volume of {x in box : |x_i| >= tube for every i}."""
        volume = 1.0
        for lo, hi in self.intervals:
            overlap = max(0.0, min(hi, tube) - max(lo, -tube))
            volume *= (hi - lo) - overlap
        return volume

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.all((points >= self.lows) & (points <= self.highs), axis=1)


class CounterSampler:
    """
    Uniform points in a box from a counter-based generator.

    Args:
        seed (int): user seed, the first key word of every block generator.
        block_size (int): points per block.
    """

    def __init__(self, seed: int, block_size: int = 65536):
        if seed < 0:
            raise PhaseInputError("seed must be nonnegative")
        self.seed = int(seed)
        self.block_size = int(block_size)

    def generator(self, block: int) -> np.random.Generator:
        key = np.array([self.seed, block], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def unit_block(self, block: int, size: int, dimension: int) -> np.ndarray:
        return self.generator(block).random((size, dimension))

    def blocks(self, box: BoxDomain, samples: int) -> Iterator[np.ndarray]:
        """Yield the sample points block by block, in block index order."""
        width = box.highs - box.lows
        remaining = samples
        block = 0
        while remaining > 0:
            size = min(self.block_size, remaining)
            yield box.lows + width * self.unit_block(block, size, box.dimension)
            remaining -= size
            block += 1

    def uniform(self, box: BoxDomain, samples: int) -> np.ndarray:
        return np.concatenate(list(self.blocks(box, samples)), axis=0)


def _kronecker_alpha(dimension: int) -> np.ndarray:
    """Irrational steps from the generalised golden ratio (root of x^(d+1) = x + 1)."""
    phi = 2.0
    for _ in range(64):
        phi = (1.0 + phi) ** (1.0 / (dimension + 1))
    return np.array([(1.0 / phi) ** (j + 1) for j in range(dimension)]) % 1.0


def direction_set(dimension: int, count: int) -> np.ndarray:
    """
    Deterministic low-discrepancy set of linear coefficients b with |b| <= 1.

    Starts with b = 0 and the signed unit axes, then fills with a Kronecker
    sequence mapped to [-1, 1]^n and rejected outside the unit ball.
    """
    if count < 1:
        raise PhaseInputError("direction count must be positive")
    directions = [np.zeros(dimension)]
    for i in range(dimension):
        for sign in (1.0, -1.0):
            axis = np.zeros(dimension)
            axis[i] = sign
            directions.append(axis)
    alpha = _kronecker_alpha(dimension)
    index = 1
    while len(directions) < count:
        candidate = 2.0 * ((0.5 + index * alpha) % 1.0) - 1.0
        index += 1
        if np.linalg.norm(candidate) <= 1.0:
            directions.append(candidate)
    return np.array(directions[:count])
