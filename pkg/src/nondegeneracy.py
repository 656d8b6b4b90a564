"""
Numerical certification that a Newton polyhedron is nondegenerate.

For every compact face F the face polynomial f_F is quasi-homogeneous under the
face's witness normal, so the zero set of grad f_F on (R - {0})^n is a union of
weighted scaling orbits and each orbit meets the shell max_i |x_i| = 1. The
shell is searched orthant by orthant on a grid, the best candidates are zoomed
in on, and a Gauss-Newton step polishes any near-zero.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from typing import List, Literal, Optional, Tuple

import numpy as np
from tqdm import tqdm

from src.config import config
from src.errors import PhaseInputError
from src.newton import CompactFace, build_newton, compact_faces, face_polynomial
from src.polynomial import Polynomial, evaluate_many, gradient

logger = logging.getLogger(__name__)

Verdict = Literal["nondegenerate", "degenerate", "inconclusive"]

MAX_BLOCK_POINTS = 1 << 20
CANDIDATES = 8
POLISH_STEPS = 25


@dataclass
class FaceRecord:
    face: CompactFace
    min_ratio: float
    min_point: Tuple[float, ...]
    gradient_norm: float
    witness: Optional[Tuple[float, ...]] = None

    @property
    def degenerate(self) -> bool:
        return self.witness is not None

    def to_dict(self) -> dict:
        return {
            "face": self.face.to_dict(),
            "min_ratio": self.min_ratio,
            "min_point": list(self.min_point),
            "gradient_norm": self.gradient_norm,
            "witness": list(self.witness) if self.witness is not None else None,
        }


@dataclass
class NondegeneracyReport:
    verdict: Verdict
    faces: List[FaceRecord] = field(default_factory=list)
    resolution: int = 0
    threshold: float = 0.0
    margin: float = 0.0

    @property
    def witness(self) -> Optional[Tuple[float, ...]]:
        for record in self.faces:
            if record.witness is not None:
                return record.witness
        return None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "resolution": self.resolution,
            "threshold": self.threshold,
            "margin": self.margin,
            "faces": [record.to_dict() for record in self.faces],
        }


class FaceGradient:
    """
    Scale-normalised gradient of a face polynomial:

        ratio(x) = |grad f_F(x)| / sum_i sum_alpha |d_i (c_alpha x^alpha)|
    """

    def __init__(self, face_poly: Polynomial):
        self.poly = face_poly
        self.grad = gradient(face_poly)
        self.abs_grad = [
            Polynomial(g.dimension, {alpha: abs(c) for alpha, c in g.terms.items()}) for g in self.grad
        ]
        self.hessian = [gradient(g) for g in self.grad]

    def gradient_values(self, points: np.ndarray) -> np.ndarray:
        return np.stack([evaluate_many(g, points) for g in self.grad], axis=1)

    def norm(self, points: np.ndarray) -> np.ndarray:
        return np.sqrt(np.sum(self.gradient_values(points) ** 2, axis=1))

    def ratio(self, points: np.ndarray) -> np.ndarray:
        numerator = self.norm(points)
        magnitude = np.abs(points)
        denominator = np.zeros(points.shape[0])
        for g in self.abs_grad:
            denominator = denominator + evaluate_many(g, magnitude)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = numerator / denominator
        ratio[denominator == 0] = 0.0
        return ratio

    def hessian_at(self, point: np.ndarray) -> np.ndarray:
        row = point.reshape(1, -1)
        return np.array([[evaluate_many(h, row)[0] for h in line] for line in self.hessian])


def _shell_blocks(n: int, resolution: int):
    """Yield (signs, side, points) for every orthant and every face of the unit cube shell."""
    if n == 1:
        for sign in (1.0, -1.0):
            yield (sign,), 0, np.array([[sign]])
        return
    per_axis = min(resolution, max(2, int(MAX_BLOCK_POINTS ** (1.0 / (n - 1)))))
    grid = np.linspace(1.0 / per_axis, 1.0, per_axis)
    mesh = np.meshgrid(*([grid] * (n - 1)), indexing="ij")
    free = np.stack([m.ravel() for m in mesh], axis=1)
    for signs in product((1.0, -1.0), repeat=n):
        for side in range(n):
            points = np.empty((free.shape[0], n))
            points[:, side] = 1.0
            others = [j for j in range(n) if j != side]
            points[:, others] = free
            yield signs, side, points * np.array(signs)


def _refine(evaluator: FaceGradient, point: np.ndarray, side: int, spacing: float, rounds: int):
    """Zoom in on a candidate, keeping |x_side| = 1 and the orthant fixed."""
    n = point.size
    best = point.copy()
    best_ratio = float(evaluator.ratio(best.reshape(1, -1))[0])
    others = [j for j in range(n) if j != side]
    if not others:
        return best, best_ratio
    offsets = np.linspace(-2.0, 2.0, 9)
    for _ in range(rounds):
        mesh = np.meshgrid(*([offsets * spacing] * len(others)), indexing="ij")
        steps = np.stack([m.ravel() for m in mesh], axis=1)
        trial = np.repeat(best.reshape(1, -1), steps.shape[0], axis=0)
        for column, j in enumerate(others):
            sign = np.sign(best[j])
            trial[:, j] = sign * np.clip(np.abs(best[j]) + steps[:, column], spacing * 1e-3, 1.0)
        ratios = evaluator.ratio(trial)
        index = int(np.argmin(ratios))
        if ratios[index] < best_ratio:
            best, best_ratio = trial[index], float(ratios[index])
        spacing /= 4.0
    return best, best_ratio


def _polish(evaluator: FaceGradient, point: np.ndarray, axis_margin: float):
    """Gauss-Newton on grad f_F = 0 with least-squares steps through the singular Hessian."""
    current = point.copy()
    current_norm = float(evaluator.norm(current.reshape(1, -1))[0])
    for _ in range(POLISH_STEPS):
        if current_norm == 0.0:
            break
        grad = evaluator.gradient_values(current.reshape(1, -1))[0]
        step, *_ = np.linalg.lstsq(evaluator.hessian_at(current), -grad, rcond=None)
        trial = current + step
        if np.min(np.abs(trial)) <= axis_margin:
            break
        trial_norm = float(evaluator.norm(trial.reshape(1, -1))[0])
        if not trial_norm < current_norm:
            break
        current, current_norm = trial, trial_norm
    return current, current_norm


def _check_face(face: CompactFace, f: Polynomial, resolution: int, threshold: float,
                margin: float, rounds: int, axis_margin: float) -> FaceRecord:
    evaluator = FaceGradient(face_polynomial(f, face))
    n = f.dimension
    candidates = []
    for signs, side, points in _shell_blocks(n, resolution):
        ratios = evaluator.ratio(points)
        take = min(CANDIDATES, ratios.size)
        for index in np.argpartition(ratios, take - 1)[:take]:
            candidates.append((float(ratios[index]), side, points[index]))
    candidates.sort(key=lambda item: (item[0], item[1], tuple(item[2])))
    spacing = 1.0 / resolution

    best_ratio, best_point = np.inf, None
    witness = None
    for ratio, side, point in candidates[:CANDIDATES]:
        point, ratio = _refine(evaluator, point, side, spacing, rounds)
        if ratio < margin:
            polished, _ = _polish(evaluator, point, axis_margin)
            polished_ratio = float(evaluator.ratio(polished.reshape(1, -1))[0])
            if polished_ratio < ratio:
                point, ratio = polished, polished_ratio
        if ratio < best_ratio:
            best_ratio, best_point = ratio, point
        if witness is None and ratio < threshold and np.min(np.abs(point)) > axis_margin:
            witness = point
    gradient_norm = float(evaluator.norm(best_point.reshape(1, -1))[0])
    if witness is not None:
        best_point = witness
        best_ratio = float(evaluator.ratio(witness.reshape(1, -1))[0])
        gradient_norm = float(evaluator.norm(witness.reshape(1, -1))[0])
    return FaceRecord(
        face=face,
        min_ratio=best_ratio,
        min_point=tuple(float(v) for v in best_point),
        gradient_norm=gradient_norm,
        witness=tuple(float(v) for v in witness) if witness is not None else None,
    )


def check_nondegenerate(
    f: Polynomial,
    resolution: Optional[int] = None,
    threshold: Optional[float] = None,
    margin: Optional[float] = None,
    rounds: Optional[int] = None,
) -> NondegeneracyReport:
    """
    Search every compact face of N(f) for zeros of grad f_F off the axes.

    Args:
        f (Polynomial): nonzero phase.
        resolution (int): grid points per shell axis (default from config).
        threshold (float): ratio below which a refined point counts as a zero.
        margin (float): minimum ratio over all faces needed to certify.
    Returns:
        NondegeneracyReport: degenerate with a witness, nondegenerate, or inconclusive.
    """
    if f.is_zero():
        raise PhaseInputError("nondegeneracy check needs a nonzero phase")
    settings = config.nondegeneracy
    resolution = resolution or settings.resolution
    threshold = threshold if threshold is not None else settings.threshold
    margin = margin if margin is not None else settings.margin
    rounds = rounds if rounds is not None else settings.rounds

    faces = compact_faces(build_newton(f))
    records = []
    iterator = tqdm(faces, desc="faces", disable=not config.general.progress, leave=False)
    for face in iterator:
        record = _check_face(face, f, resolution, threshold, margin, rounds, settings.axis_margin)
        logger.debug("face %s: min ratio %.3g", face.tight_support, record.min_ratio)
        records.append(record)

    if any(record.degenerate for record in records):
        verdict = "degenerate"
    elif min(record.min_ratio for record in records) > margin:
        verdict = "nondegenerate"
    else:
        verdict = "inconclusive"
    logger.info("nondegeneracy: %s over %d compact faces", verdict, len(records))
    return NondegeneracyReport(verdict, records, resolution, threshold, margin)
