import json
from pathlib import Path
from typing import Annotated, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

CONFIG_PATH = Path(__file__).parent.parent / "config.json"

Stage = Literal["geom", "qh", "sublevel", "decay"]
ALL_STAGES: List[str] = ["geom", "qh", "sublevel", "decay"]


class GeneralValidator(BaseModel):
    """
    General configuration validator.
    """

    version: str
    output_dir: str = "./reports"
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    progress: bool = True


class DomainValidator(BaseModel):
    """
    Analysis box. A single [lo, hi] pair is broadcast to every dimension.
    """

    box: Annotated[List[List[float]], Field(min_length=1)] = [[-1.0, 1.0]]

    @field_validator("box")
    @classmethod
    def _check_intervals(cls, box):
        for interval in box:
            if len(interval) != 2:
                raise ValueError("each box entry must be a [lo, hi] pair")
            lo, hi = interval
            if not lo < hi:
                raise ValueError(f"box interval [{lo}, {hi}] must satisfy lo < hi")
        return box

    def intervals(self, dimension: int) -> List[tuple]:
        if len(self.box) == 1:
            return [tuple(self.box[0])] * dimension
        if len(self.box) != dimension:
            raise ValueError(
                f"box has {len(self.box)} intervals but the phase has dimension {dimension}"
            )
        return [tuple(interval) for interval in self.box]


class CutoffValidator(BaseModel):
    family: Literal["smooth-bump", "cosine-tensor"] = "smooth-bump"
    radius: Annotated[float, Field(gt=0, lt=1)] = 0.5
    amplitude: Annotated[float, Field(gt=0)] = 1.0
    shrink_retry: bool = True
    shrink_factor: Annotated[float, Field(gt=0, lt=1)] = 0.5


class LadderValidator(BaseModel):
    lambda_min: Annotated[float, Field(ge=2)] = 16.0
    lambda_max: Annotated[float, Field(ge=2)] = 4096.0
    count: Annotated[int, Field(ge=2, le=200)] = 12
    directions: Annotated[int, Field(gt=0, le=1024)] = 32

    @model_validator(mode="after")
    def _check_order(self):
        if self.lambda_max < self.lambda_min:
            raise ValueError("lambda_max must not be smaller than lambda_min")
        return self


class QuadratureValidator(BaseModel):
    tol: Annotated[float, Field(gt=0, lt=1)] = 1e-3
    theta: Annotated[float, Field(gt=0, le=1)] = 0.5
    min_panels: Annotated[int, Field(ge=4)] = 16
    max_nodes: Annotated[int, Field(gt=0)] = 1_000_000_000
    chunk_nodes: Annotated[int, Field(gt=0)] = 4_000_000


class SamplingValidator(BaseModel):
    samples: Annotated[int, Field(ge=10_000)] = 2_000_000
    seed: Annotated[int, Field(ge=0)] = 42
    block_size: Annotated[int, Field(gt=0)] = 65536
    grid_mode: Literal["fixed", "adaptive"] = "adaptive"
    s_min: Annotated[float, Field(gt=0)] = 1e-5
    s_max: Annotated[float, Field(gt=0)] = 0.1
    s_count: Annotated[int, Field(ge=7)] = 24
    axis_tube: Annotated[float, Field(ge=0)] = 1e-12
    bounded_below_threshold: Annotated[float, Field(gt=0)] = 0.1
    max_domain_error_rate: Annotated[float, Field(ge=0, lt=1)] = 0.001


class NondegeneracyValidator(BaseModel):
    resolution: Annotated[int, Field(ge=8, le=4096)] = 512
    threshold: Annotated[float, Field(gt=0)] = 1e-9
    margin: Annotated[float, Field(gt=0)] = 1e-3
    rounds: Annotated[int, Field(ge=0, le=10)] = 3
    axis_margin: Annotated[float, Field(gt=0)] = 1e-6


class ToleranceValidator(BaseModel):
    theorem_1_1: Annotated[float, Field(ge=0)] = 0.07
    corollary_1_1_1: Annotated[float, Field(ge=0)] = 0.05
    varchenko: Annotated[float, Field(ge=0)] = 0.07
    varchenko_log_power: Annotated[float, Field(ge=0)] = 0.5
    epsilon0_agreement: Annotated[float, Field(ge=0)] = 0.05
    max_unconverged_fraction: Annotated[float, Field(ge=0, le=1)] = 0.1


class Configuration(BaseModel):
    """
    Main configuration class holding every analysis default.
    """

    general: GeneralValidator
    domain: DomainValidator = DomainValidator()
    cutoff: CutoffValidator = CutoffValidator()
    ladder: LadderValidator = LadderValidator()
    quadrature: QuadratureValidator = QuadratureValidator()
    sampling: SamplingValidator = SamplingValidator()
    nondegeneracy: NondegeneracyValidator = NondegeneracyValidator()
    tolerances: ToleranceValidator = ToleranceValidator()
    stages: List[Stage] = list(ALL_STAGES)


class AnalysisConfig(Configuration):
    """
    One analysis run: the configuration defaults plus the phase to analyze.

    `phase` is polynomial text or the JSON polynomial form; `zero_order` is the
    optional user-supplied maximal zero order of the face polynomials.
    """

    phase: str
    zero_order: Optional[Annotated[float, Field(gt=0)]] = None

    @classmethod
    def from_configuration(cls, configuration: Configuration, phase: str, **overrides):
        data = configuration.model_dump()
        data.update(phase=phase, **overrides)
        return cls(**data)


def load_configuration(path: Path = CONFIG_PATH) -> Configuration:
    with open(path, "r") as file:
        return Configuration(**json.load(file))


# Load the JSON data from the file into a dictionary
with open(CONFIG_PATH, "r") as file:
    config_dict = json.load(file)

# Parse the dictionary into a Configuration object
config = Configuration(**config_dict)
