"""
Monte Carlo sublevel-set measures, power-law fits and the min-integral bound.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Literal, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pandera import check_output

from src.config import config
from src.errors import FitError, PhaseInputError, SamplingError
from src.polynomial import Polynomial, evaluate_many, flow_ratio_many
from src.sampling import BoxDomain, CounterSampler
from src.schemas import sublevel_schema

logger = logging.getLogger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]
FitKind = Literal["pure-power", "log-augmented"]
LemmaCase = Literal["delta<1", "delta=1", "delta>1", "bounded-below"]

MIN_FIT_POINTS = 5
LEMMA_BAND = 0.05


class PolynomialEvaluator:
    """Vectorised evaluator of |f| or of the flow ratio of f."""

    def __init__(self, f: Polynomial, kind: Literal["abs", "flow"]):
        self.f = f
        self.kind = kind

    @property
    def needs_axis_tube(self) -> bool:
        return self.kind == "flow"

    def __call__(self, points: np.ndarray) -> np.ndarray:
        if self.kind == "flow":
            return flow_ratio_many(self.f, points)
        return np.abs(evaluate_many(self.f, points))


def abs_evaluator(f: Polynomial) -> PolynomialEvaluator:
    return PolynomialEvaluator(f, "abs")


def flow_evaluator(f: Polynomial) -> PolynomialEvaluator:
    return PolynomialEvaluator(f, "flow")


@dataclass
class FitModel:
    """
    pure-power:    m = C s^epsilon
    log-augmented: m = C s^epsilon (1 + ln(1/s))^p, p >= 0
    """

    kind: FitKind
    epsilon: float
    C: float
    log_power: float = 0.0
    residual: float = 0.0
    points: int = 0
    window: Tuple[float, float] = (0.0, 0.0)

    def predict(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        value = self.C * s ** self.epsilon
        if self.kind == "log-augmented":
            value = value * (1.0 + np.log(1.0 / s)) ** self.log_power
        return value

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "epsilon": self.epsilon,
            "C": self.C,
            "log_power": self.log_power,
            "residual": self.residual,
            "points": self.points,
            "window": list(self.window),
        }


def _weighted_lstsq(design: np.ndarray, target: np.ndarray, weights: Optional[np.ndarray]):
    if weights is None:
        weights = np.ones_like(target)
    root = np.sqrt(weights)
    scaled = design * root[:, None]
    if np.linalg.matrix_rank(scaled) < design.shape[1]:
        raise FitError("degenerate design matrix")
    coefficients, *_ = np.linalg.lstsq(scaled, target * root, rcond=None)
    residuals = target - design @ coefficients
    rms = float(np.sqrt(np.sum(weights * residuals**2) / np.sum(weights)))
    return coefficients, rms


def fit_power_law(points, kind: FitKind = "pure-power", weights: Optional[Sequence[float]] = None) -> FitModel:
    """
    Least squares on (ln s, ln m); the log-augmented model adds the regressor
    ln(1 + ln(1/s)) and falls back to p = 0 when the free fit makes p negative.

    Args:
        points: (s, measure) pairs; pairs with measure <= 0 are ignored.
        kind: "pure-power" or "log-augmented".
        weights: optional per-point weights for ln m.
    Raises:
        FitError: fewer than 5 usable points or a degenerate design.
    """
    data = np.asarray(points, dtype=float).reshape(-1, 2)
    w = np.ones(len(data)) if weights is None else np.asarray(weights, dtype=float)
    mask = (data[:, 0] > 0) & (data[:, 1] > 0) & np.isfinite(data).all(axis=1) & (w > 0)
    if kind == "log-augmented":
        # the log factor must stay positive and away from its singularity at s = e
        mask &= 1.0 + np.log(1.0 / np.where(data[:, 0] > 0, data[:, 0], 1.0)) > 0.1
    s, m, w = data[mask, 0], data[mask, 1], w[mask]
    if s.size < MIN_FIT_POINTS:
        raise FitError(f"need at least {MIN_FIT_POINTS} points with positive measure, got {s.size}")
    target = np.log(m)
    weights_used = None if weights is None else w
    window = (float(s.min()), float(s.max()))

    pure_design = np.column_stack([np.ones_like(s), np.log(s)])
    if kind == "log-augmented":
        design = np.column_stack([pure_design, np.log(1.0 + np.log(1.0 / s))])
        coefficients, rms = _weighted_lstsq(design, target, weights_used)
        if coefficients[2] >= 0:
            return FitModel(
                kind, float(coefficients[1]), float(np.exp(coefficients[0])),
                float(coefficients[2]), rms, int(s.size), window,
            )
        logger.debug("log-augmented fit gave p=%.3g < 0, refitting with p=0", coefficients[2])
    coefficients, rms = _weighted_lstsq(pure_design, target, weights_used)
    return FitModel(kind, float(coefficients[1]), float(np.exp(coefficients[0])), 0.0, rms, int(s.size), window)


def fixed_s_grid(s_min: float = None, s_max: float = None, count: int = None) -> np.ndarray:
    settings = config.sampling
    return np.geomspace(s_min or settings.s_min, s_max or settings.s_max, count or settings.s_count)


def adaptive_s_grid(values: np.ndarray, count: int = None, p_min: float = None, p_max: float = 0.05) -> np.ndarray:
    """
    Geometric grid between two quantiles of the sampled evaluator values, so
    every threshold keeps a usable number of points below it.
    """
    count = count or config.sampling.s_count
    finite = np.sort(values[np.isfinite(values) & (values > 0)])
    if finite.size == 0:
        return fixed_s_grid(count=count)
    p_min = p_min if p_min is not None else max(200.0 / finite.size, 1e-5)
    lo = finite[min(int(p_min * finite.size), finite.size - 1)]
    hi = finite[min(int(p_max * finite.size), finite.size - 1)]
    if not hi > lo:
        return fixed_s_grid(count=count)
    return np.geomspace(lo, hi, count)


@dataclass
class SublevelEstimate:
    s_grid: np.ndarray
    measures: np.ndarray
    stderr: np.ndarray
    counts: np.ndarray
    samples: int
    seed: int
    volume: float
    excluded_measure: float = 0.0
    infimum: float = 0.0
    bounded_below: bool = False
    domain_errors: int = 0
    pure: Optional[FitModel] = None
    log_augmented: Optional[FitModel] = None

    @property
    def epsilon_hat(self) -> float:
        """Canonical growth exponent: the log-augmented fit; +inf when bounded below."""
        if self.bounded_below:
            return math.inf
        model = self.log_augmented or self.pure
        if model is None:
            raise FitError("no sublevel fit available")
        return model.epsilon

    @property
    def C_hat(self) -> Optional[float]:
        model = self.log_augmented or self.pure
        return model.C if model else None

    @property
    def log_power_hat(self) -> Optional[float]:
        return self.log_augmented.log_power if self.log_augmented else None

    @property
    def residual(self) -> Optional[float]:
        model = self.log_augmented or self.pure
        return model.residual if model else None

    @check_output(sublevel_schema)
    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "s": self.s_grid.astype(float),
                "measure": self.measures.astype(float),
                "stderr": self.stderr.astype(float),
            }
        )

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "volume": self.volume,
            "excluded_measure": self.excluded_measure,
            "infimum": self.infimum,
            "bounded_below": self.bounded_below,
            "domain_errors": self.domain_errors,
            "epsilon_hat": None if self.bounded_below or not (self.pure or self.log_augmented) else self.epsilon_hat,
            "pure_power": self.pure.to_dict() if self.pure else None,
            "log_augmented": self.log_augmented.to_dict() if self.log_augmented else None,
        }


def _sample_values(g: Evaluator, box: BoxDomain, samples: int, seed: int, block_size: int, tube: float):
    sampler = CounterSampler(seed, block_size)
    chunks = []
    kept = 0
    for points in sampler.blocks(box, samples):
        if tube > 0:
            points = points[np.all(np.abs(points) >= tube, axis=1)]
        kept += points.shape[0]
        chunks.append(np.asarray(g(points), dtype=float))
    return np.concatenate(chunks) if chunks else np.empty(0), kept


def estimate_sublevel(
    g: Evaluator,
    box: BoxDomain,
    s_grid: Optional[Sequence[float]] = None,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    axis_tube: Optional[float] = None,
    weighted: bool = True,
    settings=None,
) -> SublevelEstimate:
    """
    Estimate m({x in box : g(x) < s}) on a grid of thresholds from one shared
    sample set, then fit both growth models.

    Args:
        g: vectorised evaluator; NaN or inf marks a domain error.
        box (BoxDomain): sampling domain.
        s_grid: increasing positive thresholds; None picks the configured grid mode.
        samples (int): at least 10^4 points.
        seed (int): sampler seed.
        axis_tube (float): exclude |x_i| < tube (defaults to the configured tube
            for flow-ratio evaluators, 0 otherwise) and reweight the volume.
        weighted (bool): weight fits by the sample counts below each threshold.
        settings: sampling section overriding `config.sampling`.
    Raises:
        SamplingError: when the domain-error rate exceeds the configured limit.
    """
    settings = settings or config.sampling
    samples = int(samples or settings.samples)
    seed = settings.seed if seed is None else int(seed)
    if samples < 10_000:
        raise PhaseInputError("sublevel estimates need at least 10^4 samples")
    if axis_tube is None:
        axis_tube = settings.axis_tube if getattr(g, "needs_axis_tube", False) else 0.0

    values, kept = _sample_values(g, box, samples, seed, settings.block_size, axis_tube)
    if kept == 0:
        raise SamplingError("every sample point fell inside the excluded axis tube")
    bad = ~np.isfinite(values)
    domain_errors = int(bad.sum())
    if domain_errors / kept > settings.max_domain_error_rate:
        raise SamplingError(
            f"evaluator undefined at {domain_errors} of {kept} sample points "
            f"(limit {settings.max_domain_error_rate:.2%})"
        )
    values = np.sort(values[~bad])

    if s_grid is None:
        if settings.grid_mode == "adaptive":
            s_grid = adaptive_s_grid(values, settings.s_count)
        else:
            s_grid = fixed_s_grid(settings.s_min, settings.s_max, settings.s_count)
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size == 0 or np.any(s_grid <= 0) or np.any(np.diff(s_grid) <= 0):
        raise PhaseInputError("s-grid must be positive and strictly increasing")

    volume = box.volume_off_axes(axis_tube) if axis_tube > 0 else box.volume
    counts = np.searchsorted(values, s_grid, side="left")
    p = counts / kept
    measures = volume * p
    stderr = volume * np.sqrt(p * (1.0 - p) / kept)
    infimum = float(values[0]) if values.size else math.inf
    bounded_below = bool(np.all(counts == 0) or infimum > settings.bounded_below_threshold)

    estimate = SublevelEstimate(
        s_grid=s_grid,
        measures=measures,
        stderr=stderr,
        counts=counts,
        samples=samples,
        seed=seed,
        volume=volume,
        excluded_measure=box.volume - volume,
        infimum=infimum,
        bounded_below=bounded_below,
        domain_errors=domain_errors,
    )
    if bounded_below:
        logger.info("sublevel: bounded below, sample infimum %.4g", infimum)
        return estimate

    window = slice(1, s_grid.size - 1)
    points = np.column_stack([s_grid[window], measures[window]])
    weights = counts[window] / np.maximum(1.0 - p[window], 1e-12) if weighted else None
    for kind in ("pure-power", "log-augmented"):
        try:
            model = fit_power_law(points, kind, weights)
        except FitError as error:
            logger.warning("sublevel %s fit skipped: %s", kind, error)
            continue
        if kind == "pure-power":
            estimate.pure = model
        else:
            estimate.log_augmented = model
    if estimate.log_augmented is not None:
        logger.info(
            "sublevel: eps=%.4f p=%.3f (pure eps=%.4f)",
            estimate.log_augmented.epsilon,
            estimate.log_augmented.log_power,
            estimate.pure.epsilon if estimate.pure else float("nan"),
        )
    return estimate


# ------------------------------------------------------- min-integral bound


def lemma_case(delta: float, band: float = LEMMA_BAND) -> LemmaCase:
    if delta < 1.0 - band:
        return "delta<1"
    if delta > 1.0 + band:
        return "delta>1"
    return "delta=1"


def lemma_constant(delta: float, C: float, volume: float) -> float:
    """
    An admissible D for the min-integral bound, from the layer-cake formula

        int min(1, |M g|^-1) = int_0^1 m({|g| < 1/(|M| u)}) du.
    """
    case = lemma_case(delta)
    if case == "delta<1":
        return 1.0 / (1.0 - delta)
    if case == "delta=1":
        return 1.0 + max(0.0, math.log(volume / C))
    return delta / (delta - 1.0) * (volume / C) ** (1.0 - 1.0 / delta)


def lemma_bound(case: LemmaCase, C: float, delta: float, D: float, M: float, volume: float,
                infimum: float = 0.0) -> float:
    M = abs(M)
    if case == "bounded-below":
        return volume * min(1.0, 1.0 / (M * infimum))
    if case == "delta<1":
        return C * D * M ** (-delta)
    if case == "delta=1":
        return C * D * (1.0 + max(0.0, math.log(M))) / M + volume / M
    return C * (M ** (-delta) + D / M) + volume / M


@dataclass
class LemmaBoundReport:
    case: LemmaCase
    C: float
    delta: float
    D: float
    bound: float
    holds: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class MinIntegralEstimate:
    value: float
    stderr: float
    M: float
    samples: int
    seed: int
    report: LemmaBoundReport = field(default=None)


def _min_integrand(values: np.ndarray, M: float) -> np.ndarray:
    scaled = np.abs(M * values)
    with np.errstate(divide="ignore"):
        return np.where(scaled > 1.0, 1.0 / np.where(scaled > 1.0, scaled, 1.0), 1.0)


def _min_integral(g: Evaluator, box: BoxDomain, M: float, samples: int, seed: int) -> Tuple[float, float, np.ndarray]:
    values, kept = _sample_values(g, box, samples, seed, config.sampling.block_size, 0.0)
    integrand = _min_integrand(values, M)
    value = box.volume * float(np.mean(integrand))
    stderr = box.volume * float(np.std(integrand, ddof=1)) / math.sqrt(kept)
    return value, stderr, values


def min_integral_check(
    g: Evaluator,
    box: BoxDomain,
    M: float,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
    fit: Optional[Tuple[float, float]] = None,
    D: Optional[float] = None,
) -> MinIntegralEstimate:
    """
    Monte Carlo estimate of int_box min(1, |M g(x)|^-1) dx compared against the
    applicable case of the sublevel min-integral bound.

    Args:
        g: evaluator of g (its absolute value is used).
        M (float): nonzero scale.
        fit: (C, delta) with m({|g| < t}) <= C t^delta; fitted from a
            sublevel estimate of |g| when omitted.
        D (float): lemma constant; `lemma_constant` when omitted.
    """
    if M == 0:
        raise PhaseInputError("M must be nonzero")
    samples = int(samples or config.sampling.samples)
    seed = config.sampling.seed if seed is None else int(seed)
    value, stderr, values = _min_integral(g, box, M, samples, seed)

    if fit is None:
        estimate = estimate_sublevel(
            lambda points: np.abs(g(points)), box, s_grid=fixed_s_grid(), samples=samples, seed=seed
        )
        if estimate.bounded_below or estimate.pure is None:
            infimum = float(np.min(np.abs(values)))
            bound = lemma_bound("bounded-below", 0.0, math.inf, 0.0, M, box.volume, infimum)
            report = LemmaBoundReport("bounded-below", 0.0, math.inf, 0.0, bound, value <= bound + 3 * stderr)
            return MinIntegralEstimate(value, stderr, M, samples, seed, report)
        fit = (estimate.pure.C, estimate.pure.epsilon)

    C, delta = fit
    case = lemma_case(delta)
    D = lemma_constant(delta, C, box.volume) if D is None else D
    bound = lemma_bound(case, C, delta, D, M, box.volume)
    report = LemmaBoundReport(case, C, delta, D, bound, value <= bound + 3 * stderr)
    logger.debug("min integral M=%g: %.5g +- %.2g, bound %.5g (%s)", M, value, stderr, bound, case)
    return MinIntegralEstimate(value, stderr, M, samples, seed, report)


def calibrate_lemma_constant(
    g: Evaluator, box: BoxDomain, Ms: Sequence[float], C: float, delta: float,
    samples: Optional[int] = None, seed: Optional[int] = None,
) -> float:
    """Smallest D for which the bound with (C, delta) covers every M in Ms."""
    samples = int(samples or config.sampling.samples)
    seed = config.sampling.seed if seed is None else int(seed)
    case = lemma_case(delta)
    needed: List[float] = []
    for M in Ms:
        value, _, _ = _min_integral(g, box, M, samples, seed)
        M = abs(M)
        if case == "delta<1":
            needed.append(value / (C * M ** (-delta)))
        elif case == "delta=1":
            needed.append((value - box.volume / M) / (C * (1.0 + max(0.0, math.log(M))) / M))
        else:
            needed.append((value - box.volume / M - C * M ** (-delta)) / (C / M))
    return max(0.0, max(needed))
