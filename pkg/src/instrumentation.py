"""
Bookkeeping for the weighted-gradient-flow decomposition of an oscillatory
integral: the regions U_i where one flow component dominates, the measure of
the small-derivative part D1 of each region, and the dyadic box count.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pandera import check_output

from src.config import config
from src.errors import DomainError, FitError, PhaseInputError
from src.polynomial import Polynomial, evaluate_many, gradient, weighted_derivatives
from src.quadrature import DecayFit, fit_decay
from src.sampling import BoxDomain, CounterSampler
from src.schemas import d1_schema

logger = logging.getLogger(__name__)

CRITICAL = "critical"


def distinct_flow_components(f: Polynomial) -> List[int]:
    """0-based indices i whose x_i df/dx_i differs from every earlier component."""
    kept: List[int] = []
    components = weighted_derivatives(f)
    for i, w in enumerate(components):
        if all(w != components[j] for j in kept):
            kept.append(i)
    return kept


def region_index(f: Polynomial, x: Sequence[float]) -> Union[int, str]:
    """
    The region U_i containing x: argmax_i |x_i df/dx_i(x)| over the distinct
    flow components, ties going to the smallest index.

    Returns:
        1-based index, or CRITICAL when every component vanishes at x.
    Raises:
        DomainError: x lies on a coordinate hyperplane.
    """
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != f.dimension:
        raise PhaseInputError(f"point has {x.shape[1]} coordinates, phase has dimension {f.dimension}")
    if np.any(x == 0):
        raise DomainError("regions are only defined off the coordinate hyperplanes")
    labels = region_index_many(f, x)
    return CRITICAL if labels[0] == 0 else int(labels[0])


def region_index_many(f: Polynomial, points: np.ndarray) -> np.ndarray:
    """Vectorised region_index; 0 marks critical points."""
    kept = distinct_flow_components(f)
    components = weighted_derivatives(f)
    values = np.stack([np.abs(evaluate_many(components[i], points)) for i in kept], axis=1)
    best = np.argmax(values, axis=1)
    labels = np.array(kept)[best] + 1
    labels[values.max(axis=1) == 0] = 0
    return labels


@dataclass
class D1BoundReport:
    exponent: float
    C: Optional[float] = None
    bound: Optional[float] = None
    holds: Optional[bool] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class D1Measure:
    lam: float
    epsilon: float
    threshold: float
    regions: Dict[int, Tuple[float, float]] = field(default_factory=dict)
    total: float = 0.0
    total_stderr: float = 0.0
    report: Optional[D1BoundReport] = None

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "epsilon": self.epsilon,
            "threshold": self.threshold,
            "regions": {str(i): {"measure": m, "stderr": s} for i, (m, s) in self.regions.items()},
            "total": self.total,
            "total_stderr": self.total_stderr,
            "report": self.report.to_dict() if self.report else None,
        }


class D1Sampler:
    """
    Samples the box once and keeps, per point, its region and the ratio
    |df/dx_i + b_i| / prod_{j != i} |x_j| for its region i.
    """

    def __init__(self, f: Polynomial, box: BoxDomain, samples: int, seed: int,
                 linear: Optional[Sequence[float]] = None):
        n = f.dimension
        if box.dimension != n:
            raise PhaseInputError(f"box has dimension {box.dimension}, phase has dimension {n}")
        b = np.zeros(n) if linear is None else np.asarray(linear, dtype=float)
        if b.shape != (n,) or np.linalg.norm(b) > 1.0 + 1e-12:
            raise PhaseInputError("linear coefficients must be a vector with |b| <= 1")
        self.f = f
        self.box = box
        self.samples = samples
        self.seed = seed
        self.linear = b

        tube = config.sampling.axis_tube
        sampler = CounterSampler(seed, config.sampling.block_size)
        partials = gradient(f)
        labels, ratios = [], []
        kept = 0
        for points in sampler.blocks(box, samples):
            points = points[np.all(np.abs(points) >= tube, axis=1)]
            kept += points.shape[0]
            region = region_index_many(f, points)
            ratio = np.full(points.shape[0], np.inf)
            magnitude = np.abs(points)
            for i in np.unique(region[region > 0]):
                rows = region == i
                derivative = np.abs(evaluate_many(partials[i - 1], points[rows]) + b[i - 1])
                others = np.prod(np.delete(magnitude[rows], i - 1, axis=1), axis=1)
                ratio[rows] = derivative / others
            labels.append(region)
            ratios.append(ratio)
        self.kept = kept
        self.volume = box.volume_off_axes(tube)
        self.labels = np.concatenate(labels)
        self.ratios = np.concatenate(ratios)
        self.sorted = {
            int(i): np.sort(self.ratios[self.labels == i]) for i in np.unique(self.labels[self.labels > 0])
        }

    def measure(self, lam: float, epsilon: float) -> D1Measure:
        if lam < 2:
            raise PhaseInputError("D1 measures need lambda >= 2")
        if not epsilon > 0:
            raise PhaseInputError("epsilon must be positive")
        threshold = lam ** (-1.0 / (epsilon + 1.0))
        regions = {}
        total_count = 0
        for i, ratios in self.sorted.items():
            count = int(np.searchsorted(ratios, threshold, side="right"))
            total_count += count
            p = count / self.kept
            regions[i] = (self.volume * p, self.volume * math.sqrt(p * (1 - p) / self.kept))
        p = total_count / self.kept
        return D1Measure(
            lam=float(lam),
            epsilon=float(epsilon),
            threshold=threshold,
            regions=regions,
            total=self.volume * p,
            total_stderr=self.volume * math.sqrt(p * (1 - p) / self.kept),
            report=D1BoundReport(exponent=epsilon / (epsilon + 1.0)),
        )


def measure_D1(
    f: Polynomial,
    lam: float,
    epsilon: float,
    box: BoxDomain,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    linear: Optional[Sequence[float]] = None,
    C: Optional[float] = None,
) -> D1Measure:
    """
    Estimate m({x in U_i : |df/dx_i(x) + b_i| <= lam^(-1/(eps+1)) prod_{j != i} |x_j|})
    for every region U_i.

    Args:
        epsilon (float): flow-ratio growth exponent from a sublevel fit.
        linear: optional b with |b| <= 1 (perturbed phase f + b . x); 0 by default.
        C (float): when given, the report compares the total with C lam^(-eps/(eps+1)).
    """
    samples = int(samples or config.sampling.samples)
    seed = config.sampling.seed if seed is None else int(seed)
    result = D1Sampler(f, box, samples, seed, linear).measure(lam, epsilon)
    if C is not None:
        bound = C * lam ** (-result.report.exponent)
        result.report.C = C
        result.report.bound = bound
        result.report.holds = result.total <= bound + 3 * result.total_stderr
    return result


@dataclass
class D1Ladder:
    measures: List[D1Measure]
    target: float
    C: float
    pure: Optional[DecayFit] = None
    log_augmented: Optional[DecayFit] = None

    @property
    def slope(self) -> Optional[float]:
        model = self.log_augmented or self.pure
        return model.delta if model else None

    @check_output(d1_schema)
    def to_frame(self) -> pd.DataFrame:
        rows = [
            (m.lam, i, measure, stderr)
            for m in self.measures
            for i, (measure, stderr) in sorted(m.regions.items())
        ]
        return pd.DataFrame(
            {
                "lambda": pd.Series([r[0] for r in rows], dtype=float),
                "region": pd.Series([r[1] for r in rows], dtype="int64"),
                "measure": pd.Series([r[2] for r in rows], dtype=float),
                "stderr": pd.Series([r[3] for r in rows], dtype=float),
            }
        )

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "C": self.C,
            "slope": self.slope,
            "pure_power": self.pure.to_dict() if self.pure else None,
            "log_augmented": self.log_augmented.to_dict() if self.log_augmented else None,
            "measures": [m.to_dict() for m in self.measures],
        }


def measure_D1_ladder(
    f: Polynomial,
    lambdas: Sequence[float],
    epsilon: float,
    box: BoxDomain,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    linear: Optional[Sequence[float]] = None,
) -> D1Ladder:
    """
    D1 measures over a lambda ladder from one shared sample set, with the
    smallest C making C lam^(-eps/(eps+1)) dominate every total and both decay
    fits of the totals.
    """
    samples = int(samples or config.sampling.samples)
    seed = config.sampling.seed if seed is None else int(seed)
    sampler = D1Sampler(f, box, samples, seed, linear)
    measures = [sampler.measure(lam, epsilon) for lam in lambdas]
    target = epsilon / (epsilon + 1.0)
    C = max(m.total * m.lam**target for m in measures)
    for m in measures:
        m.report.C = C
        m.report.bound = C * m.lam ** (-target)
        m.report.holds = m.total <= m.report.bound * (1 + 1e-12)

    ladder = D1Ladder(measures, target, C)
    points = [(m.lam, m.total) for m in measures if m.total > 0]
    for kind in ("pure-power", "log-augmented"):
        try:
            model = fit_decay(points, kind)
        except FitError as error:
            logger.warning("D1 %s fit skipped: %s", kind, error)
            continue
        if kind == "pure-power":
            ladder.pure = model
        else:
            ladder.log_augmented = model
    logger.info("D1 ladder: slope %s, target %.3f", ladder.slope, target)
    return ladder


def dyadic_count(box: BoxDomain, lam: float) -> int:
    """
    Number of multi-indices k >= 0 with 2^-k_j >= 1/lam whose dyadic shells
    2^(-k_j-1) < |x_j| <= 2^-k_j all meet the box.
    """
    if lam < 2:
        raise PhaseInputError("dyadic count needs lambda >= 2")
    # frexp gives floor(log2 lam) exactly, also at powers of two
    levels = math.frexp(lam)[1] - 1
    total = 1
    for lo, hi in box.intervals:
        outer = max(abs(lo), abs(hi))
        inner = 0.0 if lo <= 0 <= hi else min(abs(lo), abs(hi))
        total *= sum(1 for k in range(levels + 1) if 2.0 ** (-k - 1) < outer and 2.0 ** (-k) >= inner)
    return total
