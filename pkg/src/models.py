"""
Analysis report models and the stage-by-stage pipeline that fills them.
"""

import logging
import math
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from src.config import AnalysisConfig
from src.errors import ConvergenceError, EXIT_INCONSISTENT, EXIT_OK, FitError, PhaseInputError
from src.newton import build_newton, compact_faces, doubling_check, newton_distance
from src.nondegeneracy import check_nondegenerate
from src.polynomial import Polynomial, format_polynomial, load_phase
from src.quadrature import (
    CutoffSpec,
    check_fit_window,
    decay_ladder,
    fit_decay,
    geometric_ladder,
    ladder_frame,
    unconverged_fraction,
)
from src.quasihomogeneous import epsilon0, euler_check, solve_weights
from src.sampling import BoxDomain
from src.sublevel import SublevelEstimate, abs_evaluator, estimate_sublevel, flow_evaluator

logger = logging.getLogger(__name__)

Severity = Literal["ok", "warning", "violation"]


def json_safe(value: Any) -> Any:
    """Rationals to "p/q" strings, non-finite floats to None, numpy scalars to Python."""
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.ndarray):
        return json_safe(value.tolist())
    return value


class Prediction(BaseModel):
    exponent: Optional[float] = None
    log_power: Optional[float] = None
    source: str
    metadata: Dict[str, Any] = Field(default_factory=dict)


class ConsistencyFlag(BaseModel):
    name: str
    severity: Severity
    predicted: Optional[float] = None
    empirical: Optional[float] = None
    tolerance: float
    message: str


class AnalysisReport(BaseModel):
    """
    Everything one `analyze` run produced. Blocks of disabled stages are None.
    """

    version: str
    phase: str
    dimension: int
    stages: List[str]
    settings: Dict[str, Any]
    newton: Optional[Dict[str, Any]] = None
    nondegeneracy: Optional[Dict[str, Any]] = None
    quasi_homogeneous: Optional[Dict[str, Any]] = None
    sublevel: Optional[Dict[str, Any]] = None
    decay: Optional[Dict[str, Any]] = None
    predictions: Dict[str, Prediction] = Field(default_factory=dict)
    empirical: Dict[str, Optional[Dict[str, Any]]] = Field(default_factory=dict)
    consistency: List[ConsistencyFlag] = Field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if any(flag.severity == "violation" for flag in self.consistency):
            return EXIT_INCONSISTENT
        return EXIT_OK


def guard_phase(f: Polynomial) -> None:
    """Standing assumptions: f nonzero, f(0) = 0 and grad f(0) = 0."""
    if f.is_zero():
        raise PhaseInputError("phase must be a nonzero polynomial")
    if any(sum(alpha) == 0 for alpha in f.terms):
        raise PhaseInputError("phase violates f(0) = 0 (constant term present)")
    if any(sum(alpha) == 1 for alpha in f.terms):
        raise PhaseInputError("phase violates ∇f(0) = 0 (linear term present)")


def decay_exponent(epsilon: float) -> float:
    """epsilon / (epsilon + 1), with the bounded-below case epsilon = inf giving 1."""
    return 1.0 if math.isinf(epsilon) else epsilon / (epsilon + 1.0)


def theorem_2_2(d: Fraction, k: int, n: int, m: Optional[float]) -> Optional[Prediction]:
    """Case tag for the surface-measure bound given the maximal zero order m of the face polynomials."""
    if m is None:
        return None
    if m > max(float(d), 2.0):
        return Prediction(exponent=1.0 / m, log_power=0, source="theorem-2.2", metadata={"case": "c"})
    if d < 2:
        return Prediction(exponent=0.5, log_power=0, source="theorem-2.2", metadata={"case": "a"})
    refined = n - k - 1 if d.denominator != 1 else None
    return Prediction(
        exponent=1.0 / float(d),
        log_power=n - k,
        source="theorem-2.2",
        metadata={"case": "b", "refined_log_power": refined},
    )


def _flag(name: str, predicted: float, empirical: float, tolerance: float,
          undershoot: Severity = "violation", overshoot: Optional[float] = None) -> ConsistencyFlag:
    if empirical < predicted - tolerance:
        severity, message = undershoot, f"empirical {empirical:.4f} below predicted {predicted:.4f} - {tolerance}"
    elif overshoot is not None and empirical > overshoot + tolerance:
        severity, message = "warning", f"empirical {empirical:.4f} above sharp exponent {overshoot:.4f} + {tolerance}"
    else:
        severity, message = "ok", "consistent"
    return ConsistencyFlag(
        name=name,
        severity=severity,
        predicted=json_safe(predicted),
        empirical=json_safe(empirical),
        tolerance=tolerance,
        message=message,
    )


class PhaseAnalysis:
    """
    Runs the enabled stages for one phase and assembles an AnalysisReport.

    Stages only read each other's results when building predictions and
    consistency flags, so any subset of stages yields a complete report.
    """

    def __init__(self, settings: AnalysisConfig):
        self.settings = settings
        self.f = load_phase(settings.phase)
        guard_phase(self.f)
        self.n = self.f.dimension
        self.box = BoxDomain.from_config(settings.domain.box, self.n)
        self.newton = None
        self.nondegeneracy = None
        self.weights = None
        self.epsilon0 = None
        self.sublevel_f: Optional[SublevelEstimate] = None
        self.sublevel_flow: Optional[SublevelEstimate] = None
        self.fits: Dict[str, Optional[Any]] = {}
        self.blocks: Dict[str, Dict[str, Any]] = {}

    # -------------------------------------------------------------- stages

    def run_geometry(self) -> Dict[str, Any]:
        nd = build_newton(self.f)
        d = newton_distance(nd)
        faces = compact_faces(nd)
        nondegeneracy = check_nondegenerate(
            self.f,
            resolution=self.settings.nondegeneracy.resolution,
            threshold=self.settings.nondegeneracy.threshold,
            margin=self.settings.nondegeneracy.margin,
            rounds=self.settings.nondegeneracy.rounds,
        )
        self.newton, self.nondegeneracy = nd, nondegeneracy
        block = nd.to_dict()
        block["compact_faces"] = [face.to_dict() for face in faces]
        block["doubling"] = doubling_check(self.f).to_dict()
        logger.info("newton: d=%s k=%d, %s", d, nd.diagonal_face_dim, nondegeneracy.verdict)
        self.blocks["newton"] = block
        self.blocks["nondegeneracy"] = {
            "verdict": nondegeneracy.verdict,
            "witness": list(nondegeneracy.witness) if nondegeneracy.witness else None,
            "faces": [
                {"tight_support": [list(p) for p in r.face.tight_support], "min_ratio": r.min_ratio}
                for r in nondegeneracy.faces
            ],
        }
        return block

    def run_quasihomogeneous(self) -> Dict[str, Any]:
        weights = solve_weights(self.f)
        self.weights = weights
        block: Dict[str, Any] = {"weights": weights.to_dict(), "euler": None, "epsilon0": None}
        if weights.status != "infeasible":
            block["euler"] = euler_check(self.f, weights)
            result = epsilon0(self.f, weights, self.settings.sampling)
            self.epsilon0 = result
            block["epsilon0"] = result.to_dict()
            other = weights.alternative()
            if other is not None:
                second = epsilon0(self.f, other, self.settings.sampling)
                tolerance = self.settings.tolerances.epsilon0_agreement
                block["alternative"] = {
                    "weights": other.to_dict(),
                    "epsilon0": second.value,
                    "agrees": abs(second.value - result.value) <= tolerance,
                }
            if result.value < 1:
                block["sharpness_interval"] = [result.value / (result.value + 1.0), result.value]
        logger.info("quasi-homogeneous: %s", weights.status)
        self.blocks["quasi_homogeneous"] = block
        return block

    def run_sublevel(self) -> Dict[str, Any]:
        sampling = self.settings.sampling
        self.sublevel_f = estimate_sublevel(
            abs_evaluator(self.f), self.box, samples=sampling.samples, seed=sampling.seed, settings=sampling
        )
        self.sublevel_flow = estimate_sublevel(
            flow_evaluator(self.f), self.box, samples=sampling.samples, seed=sampling.seed, settings=sampling
        )
        block = {}
        for name, estimate in (("f", self.sublevel_f), ("flow", self.sublevel_flow)):
            entry = estimate.to_dict()
            entry["curve"] = estimate.to_frame().to_dict(orient="list")
            block[name] = entry
        self.blocks["sublevel"] = block
        return block

    def _ladders(self, phi: CutoffSpec, lambdas) -> Dict[str, list]:
        ladder = self.settings.ladder
        return {
            "I": decay_ladder(self.f, phi, lambdas, "oscillatory-only", settings=self.settings.quadrature),
            "muhat": decay_ladder(
                self.f, phi, lambdas, "worst-direction", ladder.directions, settings=self.settings.quadrature
            ),
        }

    def run_decay(self) -> Dict[str, Any]:
        ladder = self.settings.ladder
        lambdas = geometric_ladder(ladder.lambda_min, ladder.lambda_max, ladder.count)
        check_fit_window(lambdas)
        phi = CutoffSpec.from_config(self.box, self.settings.cutoff)
        limit = self.settings.tolerances.max_unconverged_fraction
        ladders = self._ladders(phi, lambdas)
        worst = max(unconverged_fraction(samples) for samples in ladders.values())
        if worst > limit and self.settings.cutoff.shrink_retry:
            phi = phi.shrink(self.settings.cutoff.shrink_factor)
            logger.warning("%.0f%% of ladder samples unconverged, retrying with radii %s", 100 * worst, phi.radii)
            ladders = self._ladders(phi, lambdas)
            worst = max(unconverged_fraction(samples) for samples in ladders.values())
        if worst > limit:
            raise ConvergenceError(
                f"{100 * worst:.0f}% of ladder samples unconverged (limit {100 * limit:.0f}%)"
            )

        block: Dict[str, Any] = {
            "cutoff": {"family": phi.family, "radii": list(phi.radii), "amplitude": phi.amplitude},
            "lambdas": lambdas.tolist(),
        }
        for name, samples in ladders.items():
            fits = {}
            for kind in ("pure-power", "log-augmented"):
                try:
                    fits[kind] = fit_decay(samples, kind)
                except FitError as error:
                    logger.warning("%s %s decay fit skipped: %s", name, kind, error)
                    fits[kind] = None
            self.fits[name] = fits
            worst_sample = max(samples, key=lambda s: s.magnitude)
            block[name] = {
                "unconverged_fraction": unconverged_fraction(samples),
                "fits": {kind: fit.to_dict() if fit else None for kind, fit in fits.items()},
                "argmax_direction": list(worst_sample.probe.b),
                "ladder": ladder_frame(samples).to_dict(orient="list"),
            }
        self.blocks["decay"] = block
        return block

    # ----------------------------------------------------- predictions

    def _decay_fit(self, name: str):
        fits = self.fits.get(name) or {}
        return fits.get("log-augmented") or fits.get("pure-power")

    def predictions(self) -> Dict[str, Prediction]:
        predictions: Dict[str, Prediction] = {}
        if self.sublevel_flow is not None:
            try:
                eps = self.sublevel_flow.epsilon_hat
            except FitError:
                eps = None
            if eps is not None:
                rate = decay_exponent(eps)
                predictions["theorem-1.1-I"] = Prediction(
                    exponent=rate, source="theorem-1.1", metadata={"epsilon_flow": json_safe(eps)}
                )
                predictions["theorem-1.1-muhat"] = Prediction(
                    exponent=min(rate, 0.5), source="theorem-1.1", metadata={"epsilon_flow": json_safe(eps)}
                )
        if self.newton is not None:
            d, k = self.newton.distance, self.newton.diagonal_face_dim
            if self.nondegeneracy.verdict == "nondegenerate":
                predictions["varchenko"] = Prediction(
                    exponent=1.0 / float(d),
                    log_power=self.n - 1 - k,
                    source="theorem-2.1",
                    metadata={"d": str(d), "k": k, "sharp": bool(d > 1)},
                )
                if d > 1:
                    predictions["newton-flow"] = Prediction(
                        exponent=min(0.5, 1.0 / float(d)),
                        source="nondegenerate-flow",
                        metadata={"epsilon_flow_bound": str(1 / (d - 1))},
                    )
            tag = theorem_2_2(d, k, self.n, self.settings.zero_order)
            if tag is not None:
                predictions["theorem-2.2"] = tag
        if self.epsilon0 is not None and self.epsilon0.value < 1:
            e0 = self.epsilon0.value
            predictions["quasi-homogeneous-sharpness"] = Prediction(
                exponent=e0 / (e0 + 1.0), source="quasi-homogeneous", metadata={"upper": e0}
            )
        return predictions

    def consistency(self, predictions: Dict[str, Prediction]) -> List[ConsistencyFlag]:
        tolerances = self.settings.tolerances
        flags: List[ConsistencyFlag] = []
        fit_I, fit_mu = self._decay_fit("I"), self._decay_fit("muhat")
        if fit_I is not None and "theorem-1.1-I" in predictions:
            flags.append(_flag("theorem-1.1-I", predictions["theorem-1.1-I"].exponent, fit_I.delta,
                               tolerances.theorem_1_1))
        if fit_mu is not None and "theorem-1.1-muhat" in predictions:
            flags.append(_flag("theorem-1.1-muhat", predictions["theorem-1.1-muhat"].exponent, fit_mu.delta,
                               tolerances.theorem_1_1))
        if fit_I is not None and "varchenko" in predictions:
            varchenko = predictions["varchenko"]
            sharp = varchenko.exponent if varchenko.metadata["sharp"] else None
            flags.append(_flag("varchenko", varchenko.exponent, fit_I.delta, tolerances.varchenko, overshoot=sharp))
            if fit_I.log_power is not None:
                flags.append(_flag("varchenko-log-power", varchenko.log_power, fit_I.log_power,
                                   tolerances.varchenko_log_power, undershoot="warning", overshoot=varchenko.log_power))
        if fit_mu is not None and "theorem-2.2" in predictions:
            flags.append(_flag("theorem-2.2", predictions["theorem-2.2"].exponent, fit_mu.delta,
                               tolerances.theorem_1_1, undershoot="warning"))
        if "newton-flow" in predictions and "theorem-1.1-I" in predictions:
            flags.append(_flag("newton-flow", 1.0 / float(self.newton.distance),
                               predictions["theorem-1.1-I"].exponent, tolerances.theorem_1_1, undershoot="warning"))
        if self.sublevel_flow is not None and self.sublevel_f is not None:
            try:
                lhs = decay_exponent(self.sublevel_flow.epsilon_hat)
                rhs = self.sublevel_f.epsilon_hat
            except FitError:
                lhs = rhs = None
            if lhs is not None:
                # lhs <= rhs + tol, written as rhs >= lhs - tol
                flags.append(_flag("corollary-1.1.1", lhs, rhs, tolerances.corollary_1_1_1))
        for flag in flags:
            if flag.severity != "ok":
                logger.warning("%s: %s (%s)", flag.name, flag.severity, flag.message)
        return flags

    def empirical(self) -> Dict[str, Optional[Dict[str, Any]]]:
        fit_I, fit_mu = self._decay_fit("I"), self._decay_fit("muhat")
        result = {
            "I-decay": fit_I.to_dict() if fit_I else None,
            "muhat-decay": fit_mu.to_dict() if fit_mu else None,
        }
        for name, estimate in (("epsilon-f", self.sublevel_f), ("epsilon-flow", self.sublevel_flow)):
            if estimate is not None:
                result[name] = {
                    "bounded_below": estimate.bounded_below,
                    "pure_power": estimate.pure.epsilon if estimate.pure else None,
                    "log_augmented": estimate.log_augmented.epsilon if estimate.log_augmented else None,
                    "log_power": estimate.log_power_hat,
                }
        return result

    # -------------------------------------------------------------- run

    def run(self) -> AnalysisReport:
        stages = {
            "geom": self.run_geometry,
            "qh": self.run_quasihomogeneous,
            "sublevel": self.run_sublevel,
            "decay": self.run_decay,
        }
        for stage in self.settings.stages:
            logger.info("stage %s", stage)
            stages[stage]()
        predictions = self.predictions()
        flags = self.consistency(predictions)
        blocks = json_safe(self.blocks)
        return AnalysisReport(
            version=self.settings.general.version,
            phase=format_polynomial(self.f),
            dimension=self.n,
            stages=list(self.settings.stages),
            settings=json_safe(self.settings.model_dump(exclude={"phase", "general"})),
            newton=blocks.get("newton"),
            nondegeneracy=blocks.get("nondegeneracy"),
            quasi_homogeneous=blocks.get("quasi_homogeneous"),
            sublevel=blocks.get("sublevel"),
            decay=blocks.get("decay"),
            predictions={k: Prediction(**json_safe(v.model_dump())) for k, v in predictions.items()},
            empirical=json_safe(self.empirical()),
            consistency=flags,
        )


def analyze(settings: AnalysisConfig) -> AnalysisReport:
    """
    Run every enabled stage on settings.phase.

    Raises:
        PhaseInputError: constant or linear terms, a zero phase, a bad box or a
            lambda ladder too narrow for decay fits.
        PolynomialSyntaxError: unparsable phase text.
        ConvergenceError: too many unconverged quadrature samples after the retry.
    """
    return PhaseAnalysis(settings).run()
