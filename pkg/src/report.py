"""
Writers for analysis reports: canonical JSON, a markdown summary and
CSV or feather bundles of every curve and ladder.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Union

import pandas as pd

from src.errors import PhaseInputError, ReportIOError
from src.models import AnalysisReport
from src.schemas import ladder_schema, sublevel_schema

logger = logging.getLogger(__name__)

ReportFormat = Literal["json", "markdown", "csv-bundle", "feather-bundle"]

BUNDLE_TABLES = {
    "sublevel_f": ("sublevel", "f"),
    "sublevel_flow": ("sublevel", "flow"),
    "decay_I": ("decay", "I"),
    "decay_muhat": ("decay", "muhat"),
}

PREDICTION_ROWS = [
    ("Theorem 1.1 (I)", "theorem-1.1-I", "I-decay"),
    ("Theorem 1.1 (mu-hat)", "theorem-1.1-muhat", "muhat-decay"),
    ("Varchenko", "varchenko", "I-decay"),
    ("Theorem 2.2", "theorem-2.2", "muhat-decay"),
]


def to_json(report: AnalysisReport) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def read_json(path: Union[str, Path]) -> AnalysisReport:
    try:
        with open(path, "r") as file:
            return AnalysisReport.model_validate(json.load(file))
    except OSError as error:
        raise ReportIOError(f"cannot read report {path}: {error}") from error


def _number(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def to_markdown(report: AnalysisReport) -> str:
    """Summary with one predicted-vs-empirical row per theorem."""
    lines = [f"# Decay analysis of `{report.phase}`", ""]
    if report.newton:
        verdict = (report.nondegeneracy or {}).get("verdict", "-")
        lines += [
            f"- Newton distance d(f) = {report.newton['d']}, diagonal face dimension k = {report.newton['k']}",
            f"- Newton polyhedron: {verdict}",
        ]
    if report.quasi_homogeneous:
        weights = report.quasi_homogeneous["weights"]
        e0 = report.quasi_homogeneous.get("epsilon0")
        lines.append(f"- weights: {weights['status']} {weights['weights'] or ''}".rstrip())
        if e0:
            lines.append(f"- epsilon_0 = {_number(e0['value'])} (binding: {', '.join(e0['binding'])})")
    lines += [
        "",
        "| theorem | predicted exponent | log power | empirical exponent | empirical log power | flag |",
        "|---|---|---|---|---|---|",
    ]
    flags = {flag.name: flag.severity for flag in report.consistency}
    for title, key, fit_name in PREDICTION_ROWS:
        prediction = report.predictions.get(key)
        fit = report.empirical.get(fit_name)
        lines.append(
            "| {} | {} | {} | {} | {} | {} |".format(
                title,
                _number(prediction.exponent) if prediction else "-",
                _number(prediction.log_power) if prediction else "-",
                _number(fit["delta"]) if fit else "-",
                _number(fit.get("log_power")) if fit else "-",
                flags.get(key, "-"),
            )
        )
    corollary = next((flag for flag in report.consistency if flag.name == "corollary-1.1.1"), None)
    if corollary:
        lines += [
            "",
            f"Corollary 1.1.1: eps1/(eps1+1) = {_number(corollary.predicted)} vs eps2 = "
            f"{_number(corollary.empirical)} ({corollary.severity})",
        ]
    return "\n".join(lines) + "\n"


def bundle_tables(report: AnalysisReport) -> Dict[str, pd.DataFrame]:
    """Every curve and ladder in the report, validated against its schema."""
    tables = {}
    for name, (section, key) in BUNDLE_TABLES.items():
        block = getattr(report, section)
        if not block or key not in block:
            continue
        if section == "sublevel":
            tables[name] = sublevel_schema.validate(pd.DataFrame(block[key]["curve"]))
        else:
            ladder = pd.DataFrame(block[key]["ladder"])
            ladder["err"] = ladder["err"].fillna(float("inf"))
            tables[name] = ladder_schema.validate(ladder)
    return tables


def emit(report: AnalysisReport, format: ReportFormat, path: Union[str, Path]) -> List[Path]:
    """
    Write the report.

    Args:
        report (AnalysisReport): completed report.
        format: "json" and "markdown" write one file at `path`; the bundle
            formats write one table per curve into the directory `path`.
    Returns:
        list of written paths.
    Raises:
        ReportIOError: any file system failure, naming the path.
    """
    path = Path(path)
    written: List[Path] = []
    try:
        if format == "json":
            path.write_text(to_json(report))
            written.append(path)
        elif format == "markdown":
            path.write_text(to_markdown(report))
            written.append(path)
        elif format in ("csv-bundle", "feather-bundle"):
            path.mkdir(parents=True, exist_ok=True)
            for name, frame in bundle_tables(report).items():
                if format == "csv-bundle":
                    target = path / f"{name}.csv"
                    frame.to_csv(target, index=False)
                else:
                    target = path / f"{name}.feather"
                    frame.reset_index(drop=True).to_feather(target)
                written.append(target)
        else:
            raise PhaseInputError(f"unknown report format {format!r}")
    except OSError as error:
        raise ReportIOError(f"cannot write {path}: {error}") from error
    logger.info("wrote %s", ", ".join(str(p) for p in written))
    return written
