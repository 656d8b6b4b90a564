"""
Command-line front end: `analyze` runs the whole pipeline, `newton`,
`sublevel`, `decay` and `lemma31` expose single stages.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional

from pydantic import ValidationError

from src.config import ALL_STAGES, AnalysisConfig, Configuration, config, load_configuration
from src.errors import EXIT_INPUT, EXIT_OK, PhaseError
from src.instrumentation import measure_D1_ladder
from src.models import analyze, guard_phase, json_safe
from src.newton import build_newton, compact_faces, doubling_check, newton_distance
from src.nondegeneracy import check_nondegenerate
from src.polynomial import load_phase
from src.quadrature import CutoffSpec, decay_ladder, fit_decay, geometric_ladder, ladder_frame
from src.report import emit
from src.sampling import BoxDomain
from src.sublevel import abs_evaluator, estimate_sublevel, flow_evaluator, min_integral_check

logger = logging.getLogger(__name__)


def _json_print(payload: Any) -> None:
    print(json.dumps(json_safe(payload), indent=2, sort_keys=True))


def _interval(value: str) -> List[float]:
    parts = value.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("box intervals are written lo,hi")
    return [float(parts[0]), float(parts[1])]


def _count(value: str) -> int:
    return int(float(value))


def _stages(value: str) -> List[str]:
    stages = [s.strip() for s in value.split(",") if s.strip()]
    unknown = [s for s in stages if s not in ALL_STAGES]
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown stages {unknown}; choose from {ALL_STAGES}")
    return stages


def _add_common(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--phase", type=str, required=True, help="polynomial text, JSON, or @file.json")
    cmd.add_argument("--box", type=_interval, action="append", default=None, help="lo,hi (repeat per axis)")
    cmd.add_argument("--samples", type=_count, default=None)
    cmd.add_argument("--seed", type=int, default=None)
    cmd.add_argument("--config", type=Path, default=None, help="alternative config.json")
    cmd.add_argument("-v", "--verbose", action="store_true")
    cmd.add_argument("--quiet", action="store_true")


def _add_ladder(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--lambda-min", type=float, default=None)
    cmd.add_argument("--lambda-max", type=float, default=None)
    cmd.add_argument("--ladder", type=int, default=None, help="number of lambda values")
    cmd.add_argument("--directions", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phase-decay", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    analyze_cmd = sub.add_parser("analyze", help="Run the full analysis pipeline")
    _add_common(analyze_cmd)
    _add_ladder(analyze_cmd)
    analyze_cmd.add_argument("--zero-order", type=float, default=None,
                             help="maximal zero order m of the face polynomials")
    analyze_cmd.add_argument("--stages", type=_stages, default=None, help="comma list of geom,qh,sublevel,decay")
    analyze_cmd.add_argument("--out", type=Path, required=True, help="JSON report path")
    analyze_cmd.add_argument("--csv-dir", type=Path, default=None)
    analyze_cmd.add_argument("--feather-dir", type=Path, default=None)
    analyze_cmd.add_argument("--markdown", type=Path, default=None)

    newton_cmd = sub.add_parser("newton", help="Newton polyhedron, distance, faces and nondegeneracy")
    _add_common(newton_cmd)

    sublevel_cmd = sub.add_parser("sublevel", help="Sublevel-set growth of |f| or of the flow ratio")
    _add_common(sublevel_cmd)
    sublevel_cmd.add_argument("--evaluator", choices=["abs", "flow"], default="abs")
    sublevel_cmd.add_argument("--csv", type=Path, default=None)

    decay_cmd = sub.add_parser("decay", help="Decay ladder of I or of the surface-measure transform")
    _add_common(decay_cmd)
    _add_ladder(decay_cmd)
    decay_cmd.add_argument("--policy", choices=["oscillatory-only", "worst-direction"], default="oscillatory-only")
    decay_cmd.add_argument("--csv", type=Path, default=None)

    lemma_cmd = sub.add_parser("lemma31", help="Min-integral bound and D1 measures")
    _add_common(lemma_cmd)
    lemma_cmd.add_argument("--M", type=float, action="append", default=None, help="scale (repeatable)")
    lemma_cmd.add_argument("--epsilon", type=float, default=None,
                           help="flow-ratio exponent; also measures the D1 ladder of the phase")
    return parser


def settings_from_args(args: argparse.Namespace) -> AnalysisConfig:
    """Defaults from config.json (or --config) with the command-line overrides applied."""
    base: Configuration = load_configuration(args.config) if args.config else config
    data = base.model_dump()
    if args.box:
        data["domain"]["box"] = args.box
    if args.samples is not None:
        data["sampling"]["samples"] = args.samples
    if args.seed is not None:
        data["sampling"]["seed"] = args.seed
    for flag, key in (("lambda_min", "lambda_min"), ("lambda_max", "lambda_max"),
                      ("ladder", "count"), ("directions", "directions")):
        value = getattr(args, flag, None)
        if value is not None:
            data["ladder"][key] = value
    if getattr(args, "stages", None):
        data["stages"] = args.stages
    if args.verbose:
        data["general"]["log_level"] = "DEBUG"
    elif args.quiet:
        data["general"]["log_level"] = "ERROR"
    return AnalysisConfig(phase=args.phase, zero_order=getattr(args, "zero_order", None), **data)


def _run_analyze(args, settings: AnalysisConfig) -> int:
    report = analyze(settings)
    emit(report, "json", args.out)
    if args.markdown:
        emit(report, "markdown", args.markdown)
    if args.csv_dir:
        emit(report, "csv-bundle", args.csv_dir)
    if args.feather_dir:
        emit(report, "feather-bundle", args.feather_dir)
    return report.exit_code


def _run_newton(args, settings: AnalysisConfig) -> int:
    f = load_phase(settings.phase)
    guard_phase(f)
    nd = build_newton(f)
    newton_distance(nd)
    verdict = check_nondegenerate(
        f,
        resolution=settings.nondegeneracy.resolution,
        threshold=settings.nondegeneracy.threshold,
        margin=settings.nondegeneracy.margin,
        rounds=settings.nondegeneracy.rounds,
    )
    payload = nd.to_dict()
    payload["compact_faces"] = [face.to_dict() for face in compact_faces(nd)]
    payload["doubling"] = doubling_check(f).to_dict()
    payload["nondegeneracy"] = {"verdict": verdict.verdict, "witness": verdict.witness}
    _json_print(payload)
    return EXIT_OK


def _run_sublevel(args, settings: AnalysisConfig) -> int:
    f = load_phase(settings.phase)
    box = BoxDomain.from_config(settings.domain.box, f.dimension)
    evaluator = flow_evaluator(f) if args.evaluator == "flow" else abs_evaluator(f)
    estimate = estimate_sublevel(
        evaluator, box, samples=settings.sampling.samples, seed=settings.sampling.seed, settings=settings.sampling
    )
    if args.csv:
        estimate.to_frame().to_csv(args.csv, index=False)
    _json_print(estimate.to_dict())
    return EXIT_OK


def _run_decay(args, settings: AnalysisConfig) -> int:
    f = load_phase(settings.phase)
    guard_phase(f)
    box = BoxDomain.from_config(settings.domain.box, f.dimension)
    phi = CutoffSpec.from_config(box, settings.cutoff)
    ladder = settings.ladder
    lambdas = geometric_ladder(ladder.lambda_min, ladder.lambda_max, ladder.count)
    samples = decay_ladder(f, phi, lambdas, args.policy, ladder.directions, settings=settings.quadrature)
    frame = ladder_frame(samples)
    if args.csv:
        frame.to_csv(args.csv, index=False)
    fits = {}
    for kind in ("pure-power", "log-augmented"):
        try:
            fits[kind] = fit_decay(samples, kind).to_dict()
        except PhaseError as error:
            logger.warning("%s fit skipped: %s", kind, error)
            fits[kind] = None
    _json_print({"policy": args.policy, "fits": fits, "ladder": frame.to_dict(orient="list")})
    return EXIT_OK


def _run_lemma31(args, settings: AnalysisConfig) -> int:
    f = load_phase(settings.phase)
    box = BoxDomain.from_config(settings.domain.box, f.dimension)
    sampling = settings.sampling
    evaluator = abs_evaluator(f)
    results = []
    for M in args.M or [10.0, 100.0, 1000.0, 10000.0]:
        estimate = min_integral_check(evaluator, box, M, samples=sampling.samples, seed=sampling.seed)
        results.append({
            "M": M,
            "estimate": estimate.value,
            "stderr": estimate.stderr,
            "report": estimate.report.to_dict(),
        })
    payload = {"min_integral": results}
    if args.epsilon is not None:
        lambdas = geometric_ladder(1e2, 1e6, 9)
        d1 = measure_D1_ladder(f, lambdas, args.epsilon, box, samples=sampling.samples, seed=sampling.seed)
        payload["D1"] = d1.to_dict()
    _json_print(payload)
    return EXIT_OK


COMMANDS = {
    "analyze": _run_analyze,
    "newton": _run_newton,
    "sublevel": _run_sublevel,
    "decay": _run_decay,
    "lemma31": _run_lemma31,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = settings_from_args(args)
    except ValidationError as error:
        logging.basicConfig(level=logging.ERROR)
        logger.error("invalid configuration: %s", error)
        return EXIT_INPUT
    logging.basicConfig(
        level=getattr(logging, settings.general.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args, settings)
    except PhaseError as error:
        logger.error("%s", error)
        return error.exit_code


if __name__ == "__main__":
    sys.exit(main())
