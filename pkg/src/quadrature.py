"""
Oscillatory integrals I(lambda), surface-measure transforms and decay ladders.

Integrals are computed with the composite trapezoid rule on a tensor grid
covering the cutoff's support. Both cutoff families vanish on the boundary of
their support, so the rule reduces to a plain sum over interior nodes. The step
is chosen from an oscillation-resolution rule and then halved until two
successive levels agree.
"""

import json
import logging
import math
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pandera import check_output
from tqdm import tqdm

from src.config import config
from src.errors import FitError, PhaseInputError
from src.polynomial import Polynomial, evaluate_grid, gradient
from src.sampling import BoxDomain, direction_set
from src.schemas import ladder_schema

logger = logging.getLogger(__name__)

CutoffFamily = Literal["smooth-bump", "cosine-tensor"]
DirectionPolicy = Literal["oscillatory-only", "worst-direction"]
DecayKind = Literal["pure-power", "log-augmented"]

MAX_DIMENSION = 3
RATE_GRID = 33
MIN_DECAY_SAMPLES = 6
MIN_DECADES = 1.5
OFFSET_DELTAS = np.linspace(0.0, 3.0, 3001)
OFFSET_MARGIN = 1.0


def _broadcast_axes(axes: Sequence[np.ndarray]) -> List[np.ndarray]:
    n = len(axes)
    views = []
    for i, axis in enumerate(axes):
        shape = [1] * n
        shape[i] = len(axis)
        views.append(np.asarray(axis, dtype=float).reshape(shape))
    return views


@dataclass(frozen=True)
class CutoffSpec:
    """
    Cutoff phi centred at the origin.

    smooth-bump:   amplitude * exp(-1 / (1 - |x/rho|^2)) inside the ellipsoid, 0 outside
    cosine-tensor: amplitude * prod_i cos^2(pi x_i / (2 rho_i)) on the box |x_i| <= rho_i
    """

    family: CutoffFamily
    radii: Tuple[float, ...]
    amplitude: float = 1.0

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if not radii or any(not r > 0 for r in radii):
            raise PhaseInputError("cutoff radii must be positive")
        if self.family not in ("smooth-bump", "cosine-tensor"):
            raise PhaseInputError(f"unknown cutoff family {self.family!r}")
        object.__setattr__(self, "radii", radii)

    @classmethod
    def from_config(cls, box: BoxDomain, settings=None) -> "CutoffSpec":
        """Radius per axis is `settings.radius` times the distance from 0 to the nearer box edge."""
        settings = settings or config.cutoff
        radii = []
        for lo, hi in box.intervals:
            if not lo < 0 < hi:
                raise PhaseInputError("the analysis box must contain the origin in its interior")
            radii.append(settings.radius * min(-lo, hi))
        spec = cls(settings.family, tuple(radii), settings.amplitude)
        spec.check_inside(box)
        return spec

    @property
    def dimension(self) -> int:
        return len(self.radii)

    def check_inside(self, box: BoxDomain) -> None:
        if box.dimension != self.dimension:
            raise PhaseInputError(f"cutoff has dimension {self.dimension}, box has {box.dimension}")
        for r, (lo, hi) in zip(self.radii, box.intervals):
            if not (lo < -r and r < hi):
                raise PhaseInputError(f"cutoff radius {r} is not strictly inside [{lo}, {hi}]")

    def shrink(self, factor: float) -> "CutoffSpec":
        return CutoffSpec(self.family, tuple(r * factor for r in self.radii), self.amplitude)

    def values(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """phi on the tensor grid spanned by `axes`."""
        views = _broadcast_axes(axes)
        if self.family == "smooth-bump":
            r2 = sum((v / r) ** 2 for v, r in zip(views, self.radii))
            inside = r2 < 1.0
            safe = np.where(inside, 1.0 - r2, 1.0)
            return self.amplitude * np.where(inside, np.exp(-1.0 / safe), 0.0)
        result = np.asarray(self.amplitude, dtype=float)
        for v, r in zip(views, self.radii):
            result = result * np.where(np.abs(v) <= r, np.cos(np.pi * v / (2.0 * r)) ** 2, 0.0)
        return result

    def integral_estimate(self) -> float:
        """int phi, for the lambda = 0 identity."""
        return eval_osc_integral_raw(Polynomial.zero(self.dimension), self, 0.0, np.zeros(self.dimension))[0].real

    def __add__(self, other: "CutoffSpec") -> "CutoffSum":
        return CutoffSum((self, other))


@dataclass(frozen=True)
class CutoffSum:
    """Pointwise sum of cutoffs; its support is the union of theirs."""

    parts: Tuple[CutoffSpec, ...]

    @property
    def radii(self) -> Tuple[float, ...]:
        return tuple(max(r) for r in zip(*(p.radii for p in self.parts)))

    @property
    def dimension(self) -> int:
        return self.parts[0].dimension

    def values(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        return sum(part.values(axes) for part in self.parts)

    def __add__(self, other: CutoffSpec) -> "CutoffSum":
        return CutoffSum(self.parts + (other,))


Cutoff = Union[CutoffSpec, CutoffSum]


@dataclass(frozen=True)
class DecayProbe:
    """
    Phase lam * (f(x) + b . x) with |b| <= 1.

    Larger linear parts reduce to this case by dividing through by the
    largest frequency, so they are rejected here.
    """

    lam: float
    b: Tuple[float, ...]

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        if not math.isfinite(self.lam):
            raise PhaseInputError("lambda must be finite")
        if math.sqrt(sum(v * v for v in b)) > 1.0 + 1e-12:
            raise PhaseInputError("linear coefficients must satisfy |b| <= 1")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "b", b)

    @classmethod
    def oscillatory(cls, lam: float, dimension: int) -> "DecayProbe":
        return cls(lam, (0.0,) * dimension)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "b": list(self.b)}


@dataclass
class DecaySample:
    """`probe` is None for surface transforms whose linear part exceeds lambda_{n+1}."""

    probe: Optional[DecayProbe]
    value: complex
    error: float
    nodes: int
    converged: bool

    @property
    def magnitude(self) -> float:
        return abs(self.value)


@dataclass
class DecayFit:
    """|value| ~ C lam^-delta |ln lam - log_offset|^p over the fitted window."""

    kind: DecayKind
    delta: float
    C: float
    log_power: Optional[float] = None
    residual: float = 0.0
    window: Tuple[float, float] = (0.0, 0.0)
    points: int = 0
    log_offset: Optional[complex] = None

    def predict(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        value = self.C * lam ** (-self.delta)
        if self.log_power:
            value = value * np.abs(np.log(lam) - (self.log_offset or 0.0)) ** self.log_power
        return value

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "delta": self.delta,
            "C": self.C,
            "log_power": self.log_power,
            "residual": self.residual,
            "window": list(self.window),
            "points": self.points,
            "log_offset": None if self.log_offset is None else [self.log_offset.real, self.log_offset.imag],
        }


# ----------------------------------------------------------------- integrator


def _phase_rate(f: Polynomial, radii: Sequence[float], scale: float, linear: np.ndarray) -> float:
    """max |scale grad f + linear| over the support box, plus |scale|."""
    axes = [np.linspace(-r, r, RATE_GRID) for r in radii]
    views = _broadcast_axes(axes)
    squared = 0.0
    for i, g in enumerate(gradient(f)):
        component = scale * evaluate_grid(g, axes) + linear[i] + 0.0 * views[i]
        squared = squared + component**2
    return float(np.sqrt(np.max(squared))) + abs(scale)


def trapezoid_rule(f: Polynomial, phi: Cutoff, panels: Sequence[int], scale: float,
                   linear: Sequence[float], chunk_nodes: Optional[int] = None) -> complex:
    """Composite trapezoid value of int exp(i (scale f + linear . x)) phi with `panels` intervals per axis."""
    chunk_nodes = chunk_nodes or config.quadrature.chunk_nodes
    linear = np.asarray(linear, dtype=float)
    radii = phi.radii
    axes = [np.linspace(-r, r, m + 1)[1:-1] for r, m in zip(radii, panels)]
    cell = math.prod(2.0 * r / m for r, m in zip(radii, panels))
    rest = math.prod(len(axis) for axis in axes[1:])
    rows = max(1, chunk_nodes // max(rest, 1))
    real_parts, imag_parts = [], []
    for start in range(0, len(axes[0]), rows):
        chunk_axes = [axes[0][start:start + rows]] + axes[1:]
        phase = scale * evaluate_grid(f, chunk_axes) if not f.is_zero() else 0.0
        for c, view in zip(linear, _broadcast_axes(chunk_axes)):
            if c:
                phase = phase + c * view
        weights = phi.values(chunk_axes)
        real_parts.append(float(np.sum(weights * np.cos(phase))))
        imag_parts.append(float(np.sum(weights * np.sin(phase))))
    return complex(math.fsum(real_parts), math.fsum(imag_parts)) * cell


def eval_osc_integral_raw(f: Polynomial, phi: Cutoff, scale: float, linear: Sequence[float],
                          tol: Optional[float] = None, settings=None) -> Tuple[complex, float, int, bool]:
    """
    int exp(i (scale f(x) + linear . x)) phi(x) dx.

    Returns:
        (value, error, nodes, converged): error is the last halving difference,
        nodes the node count of the last level evaluated.
    """
    settings = settings or config.quadrature
    tol = settings.tol if tol is None else tol
    n = f.dimension
    if n > MAX_DIMENSION:
        raise PhaseInputError(f"quadrature supports n <= {MAX_DIMENSION}, got n = {n}")
    if phi.dimension != n:
        raise PhaseInputError(f"cutoff has dimension {phi.dimension}, phase has dimension {n}")
    linear = np.asarray(linear, dtype=float)
    if linear.shape != (n,):
        raise PhaseInputError(f"expected {n} linear coefficients, got {linear.shape}")

    rate = _phase_rate(f, phi.radii, scale, linear)
    required = [max(settings.min_panels, math.ceil(2.0 * r * rate / settings.theta)) for r in phi.radii]
    panels = [max(2, math.ceil(m / 2)) for m in required]
    floor = 1.0 / abs(scale) if scale else 0.0

    previous, error, evaluated = None, math.inf, 1
    while True:
        nodes = math.prod(m - 1 for m in panels)
        if nodes > settings.max_nodes:
            logger.warning(
                "quadrature budget exhausted at lambda=%g (%d nodes needed)", scale, nodes
            )
            return previous if previous is not None else 0j, error, evaluated, False
        value = trapezoid_rule(f, phi, panels, scale, linear, settings.chunk_nodes)
        if previous is not None:
            error = abs(value - previous)
            logger.debug("lambda=%g panels=%s diff=%.3g", scale, panels, error)
            if all(m >= r for m, r in zip(panels, required)) and error < tol * (abs(value) + floor):
                return value, error, nodes, True
        previous, evaluated = value, nodes
        panels = [2 * m for m in panels]


def eval_osc_integral(f: Polynomial, phi: Cutoff, probe: DecayProbe, tol: Optional[float] = None,
                      settings=None) -> DecaySample:
    """
    I = int exp(i lam (f(x) + b . x)) phi(x) dx by tensor trapezoid with
    Richardson halving.

    Args:
        f (Polynomial): phase, n <= 3.
        phi: cutoff.
        probe (DecayProbe): lambda and linear coefficients b.
        tol (float): relative agreement between the last two levels.
        settings: quadrature section overriding `config.quadrature`.
    Returns:
        DecaySample: converged is False when the node budget ran out first.
    """
    if len(probe.b) != f.dimension:
        raise PhaseInputError(f"probe has {len(probe.b)} linear coefficients, phase has dimension {f.dimension}")
    linear = probe.lam * np.asarray(probe.b)
    value, error, nodes, converged = eval_osc_integral_raw(f, phi, probe.lam, linear, tol, settings)
    return DecaySample(probe, value, error, nodes, converged)


def eval_surface_transform(f: Polynomial, phi: Cutoff, lambdas: Sequence[float],
                           tol: Optional[float] = None) -> DecaySample:
    """
    int exp(-i lambda_{n+1} f(x) - i (lambda_1 x_1 + ... + lambda_n x_n)) phi(x) dx,
    with the graph measure density taken as 1.

    Args:
        lambdas: (lambda_1, ..., lambda_n, lambda_{n+1}).
    """
    lambdas = [float(v) for v in lambdas]
    if len(lambdas) != f.dimension + 1:
        raise PhaseInputError(f"expected {f.dimension + 1} frequencies, got {len(lambdas)}")
    *linear, lam = lambdas
    value, error, nodes, converged = eval_osc_integral_raw(f, phi, -lam, -np.asarray(linear), tol)
    norm = math.hypot(*linear) if linear else 0.0
    probe = DecayProbe(lam, tuple(v / lam for v in linear)) if lam and norm <= abs(lam) else None
    return DecaySample(probe, value, error, nodes, converged)


# ---------------------------------------------------------------- ladders


def geometric_ladder(lambda_min: float = None, lambda_max: float = None, count: int = None) -> np.ndarray:
    settings = config.ladder
    lambda_min = lambda_min or settings.lambda_min
    lambda_max = lambda_max or settings.lambda_max
    count = count or settings.count
    if lambda_min < 2:
        raise PhaseInputError("lambda ladder must start at lambda >= 2")
    return np.geomspace(lambda_min, lambda_max, count)


def check_fit_window(lambdas: Sequence[float]) -> None:
    """Raises PhaseInputError when a ladder is too short or too narrow for `fit_decay` even if every sample converges."""
    lambdas = _check_ladder(lambdas)
    decades = math.log10(lambdas.max() / lambdas.min())
    if lambdas.size < MIN_DECAY_SAMPLES or decades < MIN_DECADES:
        raise PhaseInputError(
            f"lambda ladder has {lambdas.size} points over {decades:.2f} decades, decay fits need "
            f"{MIN_DECAY_SAMPLES} points over {MIN_DECADES} decades"
        )


def _check_ladder(lambdas: Sequence[float]) -> np.ndarray:
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or lambdas.size == 0:
        raise PhaseInputError("lambda ladder must be a nonempty list")
    if np.any(lambdas < 2):
        raise PhaseInputError("every ladder lambda must satisfy lambda >= 2")
    if lambdas.size > 2:
        ratios = lambdas[1:] / lambdas[:-1]
        if not np.allclose(ratios, ratios[0], rtol=1e-6):
            raise PhaseInputError("lambda ladder must be geometric")
    return lambdas


def decay_ladder(
    f: Polynomial,
    phi: Cutoff,
    lambdas: Sequence[float],
    policy: DirectionPolicy = "oscillatory-only",
    directions: Optional[int] = None,
    tol: Optional[float] = None,
    settings=None,
) -> List[DecaySample]:
    """
    One sample per lambda. "worst-direction" evaluates every b of a fixed
    direction set and keeps the largest |value|; the kept sample's probe
    carries the maximising direction and it is unconverged if any direction was.
    """
    lambdas = _check_ladder(lambdas)
    n = f.dimension
    if policy == "oscillatory-only":
        bs = np.zeros((1, n))
    elif policy == "worst-direction":
        bs = direction_set(n, directions or config.ladder.directions)
    else:
        raise PhaseInputError(f"unknown direction policy {policy!r}")

    samples = []
    progress = tqdm(total=lambdas.size * len(bs), desc=policy, disable=not config.general.progress, leave=False)
    for lam in lambdas:
        best, all_converged, most_nodes = None, True, 0
        for b in bs:
            sample = eval_osc_integral(f, phi, DecayProbe(lam, tuple(b)), tol, settings)
            all_converged &= sample.converged
            most_nodes = max(most_nodes, sample.nodes)
            if best is None or sample.magnitude > best.magnitude:
                best = sample
            progress.update(1)
        best.converged = all_converged
        best.nodes = most_nodes
        samples.append(best)
        logger.debug("lambda=%g |value|=%.4g b=%s", lam, best.magnitude, best.probe.b)
    progress.close()
    unconverged = sum(not s.converged for s in samples)
    if unconverged:
        logger.warning("%d of %d ladder samples unconverged", unconverged, len(samples))
    return samples


def _ladder_points(samples) -> Tuple[np.ndarray, np.ndarray, bool]:
    """(lam, complex value, shared_linear_part): shared_linear_part is False when the linear part b varies along the ladder."""
    lams, values, directions = [], [], set()
    for sample in samples:
        if isinstance(sample, DecaySample):
            if sample.converged:
                lams.append(sample.probe.lam)
                values.append(sample.value)
                directions.add(sample.probe.b)
        else:
            lam, value = sample
            lams.append(float(lam))
            values.append(complex(value))
    return np.asarray(lams, dtype=float), np.asarray(values, dtype=complex), len(directions) <= 1


def _log_offset(lam: np.ndarray, values: np.ndarray) -> Optional[complex]:
    """
    beta in value ~ lam^-delta (c0 + c1 ln lam) = c1 lam^-delta (ln lam - beta),
    from a complex least squares at each delta of OFFSET_DELTAS keeping the
    smallest relative residual.

    Returns None when the log term is negligible over the window (|beta| beyond
    ln lam_max) or ln lam comes within OFFSET_MARGIN of beta.
    """
    log_lam = np.log(lam)
    columns = np.column_stack([np.ones_like(log_lam), log_lam]).astype(complex)
    best_residual, best = math.inf, None
    for delta in OFFSET_DELTAS:
        scaled = values * lam**delta
        weights = 1.0 / np.abs(scaled)
        design = columns * weights[:, None]
        target = scaled * weights
        coefficients, *_ = np.linalg.lstsq(design, target, rcond=None)
        residual = float(np.linalg.norm(design @ coefficients - target))
        if residual < best_residual:
            best_residual, best = residual, coefficients
    c0, c1 = best
    if abs(c1) == 0:
        return None
    beta = complex(-c0 / c1)
    if abs(beta) > log_lam.max() or np.min(np.abs(log_lam - beta)) < OFFSET_MARGIN:
        return None
    return beta


def fit_decay(samples, kind: DecayKind = "pure-power") -> DecayFit:
    """
    Least squares of ln|value| on -delta ln(lam) (+ p ln|ln lam - beta|) + const.

    Close to its zero the log factor ln lam - beta of the asymptotic expansion
    is far from a power of ln lam, so the log-augmented fit first locates beta
    from the complex values (`_log_offset`) and uses beta = 0, that is
    p ln ln lam, when the log term is negligible or the linear part varies along
    the ladder.

    Args:
        samples: DecaySample list (unconverged samples are ignored) or (lam, value) pairs.
        kind: "pure-power" or "log-augmented"; a negative fitted p is refitted as p = 0.
    Raises:
        FitError: fewer than 6 usable samples, a window narrower than 1.5
            decades, or zero magnitudes.
    """
    lam, values, shared_linear_part = _ladder_points(samples)
    if lam.size < MIN_DECAY_SAMPLES:
        raise FitError(f"need at least {MIN_DECAY_SAMPLES} converged samples, got {lam.size}")
    magnitude = np.abs(values)
    if np.any(magnitude <= 0) or not np.all(np.isfinite(magnitude)):
        raise FitError("decay fit needs finite nonzero magnitudes")
    if np.any(lam <= 1):
        raise FitError("decay fit needs lambda > 1")
    decades = math.log10(lam.max() / lam.min())
    if decades < MIN_DECADES:
        raise FitError(f"lambda window spans {decades:.2f} decades, need {MIN_DECADES}")
    window = (float(lam.min()), float(lam.max()))
    target = np.log(magnitude)
    columns = [np.ones_like(lam), -np.log(lam)]
    if kind == "log-augmented":
        offset = _log_offset(lam, values) if shared_linear_part else None
        log_factor = np.abs(np.log(lam) - (offset or 0.0))
        design = np.column_stack(columns + [np.log(log_factor)])
        if np.linalg.matrix_rank(design) < 3:
            raise FitError("degenerate lambda window")
        coefficients, *_ = np.linalg.lstsq(design, target, rcond=None)
        if coefficients[2] >= 0:
            residual = float(np.sqrt(np.mean((target - design @ coefficients) ** 2)))
            logger.debug("log-augmented decay fit: offset %s, p=%.3g", offset, coefficients[2])
            return DecayFit(kind, float(coefficients[1]), float(np.exp(coefficients[0])),
                            float(coefficients[2]), residual, window, int(lam.size), offset)
        logger.debug("decay fit gave log power %.3g < 0, refitting with p=0", coefficients[2])
    design = np.column_stack(columns)
    if np.linalg.matrix_rank(design) < 2:
        raise FitError("degenerate lambda window")
    coefficients, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.sqrt(np.mean((target - design @ coefficients) ** 2)))
    return DecayFit(kind, float(coefficients[1]), float(np.exp(coefficients[0])),
                    0.0 if kind == "log-augmented" else None, residual, window, int(lam.size))


@check_output(ladder_schema)
def ladder_frame(samples: Sequence[DecaySample]) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "lambda": pd.Series([s.probe.lam for s in samples], dtype=float),
            "b": pd.Series([json.dumps(list(s.probe.b)) for s in samples], dtype=str),
            "re": pd.Series([s.value.real for s in samples], dtype=float),
            "im": pd.Series([s.value.imag for s in samples], dtype=float),
            "abs": pd.Series([s.magnitude for s in samples], dtype=float),
            "err": pd.Series([s.error for s in samples], dtype=float),
            "converged": pd.Series([s.converged for s in samples], dtype=bool),
            "nodes": pd.Series([s.nodes for s in samples], dtype="int64"),
        }
    )


def unconverged_fraction(samples: Sequence[DecaySample]) -> float:
    if not samples:
        return 0.0
    return sum(not s.converged for s in samples) / len(samples)
