import json

import pytest
from pydantic import ValidationError

from src.config import (
    CONFIG_PATH,
    AnalysisConfig,
    Configuration,
    CutoffValidator,
    DomainValidator,
    GeneralValidator,
    LadderValidator,
    NondegeneracyValidator,
    SamplingValidator,
    load_configuration,
)


class TestGeneralValidator:
    """Test cases for the GeneralValidator class."""

    def test_valid_general_config(self, sample_config_data):
        """Test creating a valid GeneralValidator instance."""
        general = GeneralValidator(**sample_config_data["general"])

        assert general.version == "1.0.0"
        assert general.log_level == "INFO"
        assert general.progress is False

    def test_missing_required_field(self):
        """Test that the version is required."""
        with pytest.raises(ValidationError):
            GeneralValidator(output_dir="./reports")

    def test_extra_fields_ignored(self):
        """Test that extra fields are dropped by the model."""
        general = GeneralValidator(version="1.0.0", extra_field="should_be_ignored")

        assert general.version == "1.0.0"
        assert not hasattr(general, "extra_field")

    def test_invalid_log_level(self):
        """Test that only the standard level names are accepted."""
        with pytest.raises(ValidationError):
            GeneralValidator(version="1.0.0", log_level="LOUD")


class TestDomainValidator:
    """Test cases for the analysis box."""

    def test_broadcast(self):
        """Test that one interval applies to every axis."""
        assert DomainValidator(box=[[-1, 1]]).intervals(3) == [(-1, 1)] * 3

    def test_per_axis(self):
        """Test explicit per-axis intervals."""
        domain = DomainValidator(box=[[-1, 1], [0.5, 2]])

        assert domain.intervals(2) == [(-1, 1), (0.5, 2)]
        with pytest.raises(ValueError):
            domain.intervals(3)

    @pytest.mark.parametrize("box", [[[1, 1]], [[2, -1]], [[0, 1, 2]], []])
    def test_invalid_box(self, box):
        """Test empty, reversed and malformed intervals."""
        with pytest.raises(ValidationError):
            DomainValidator(box=box)


class TestSectionValidators:
    """Test cases for the numeric ranges of the remaining sections."""

    def test_defaults(self):
        """Test the documented defaults."""
        assert CutoffValidator().radius == 0.5
        assert LadderValidator().count == 12
        assert SamplingValidator().samples == 2_000_000
        assert NondegeneracyValidator().resolution == 512

    @pytest.mark.parametrize("radius", [0.0, 1.0, -0.5])
    def test_cutoff_radius_range(self, radius):
        """Test that the cutoff radius lies strictly inside (0, 1)."""
        with pytest.raises(ValidationError):
            CutoffValidator(radius=radius)

    def test_ladder_bounds(self):
        """Test lambda >= 2, the count range and the ordering of the ends."""
        with pytest.raises(ValidationError):
            LadderValidator(lambda_min=1.0)
        with pytest.raises(ValidationError):
            LadderValidator(count=1)
        with pytest.raises(ValidationError):
            LadderValidator(lambda_min=100.0, lambda_max=50.0)

    def test_sampling_bounds(self):
        """Test the minimal sample count and s-grid length."""
        with pytest.raises(ValidationError):
            SamplingValidator(samples=100)
        with pytest.raises(ValidationError):
            SamplingValidator(s_count=3)
        with pytest.raises(ValidationError):
            SamplingValidator(grid_mode="random")

    def test_resolution_range(self):
        """Test the nondegeneracy grid resolution limits."""
        with pytest.raises(ValidationError):
            NondegeneracyValidator(resolution=4)
        with pytest.raises(ValidationError):
            NondegeneracyValidator(resolution=10_000)


class TestConfiguration:
    """Test cases for the main Configuration class."""

    def test_valid_configuration(self, test_configuration):
        """Test creating a valid Configuration instance."""
        assert test_configuration.ladder.lambda_max == 512.0
        assert test_configuration.sampling.samples == 200_000
        assert test_configuration.stages == ["geom", "qh", "sublevel", "decay"]

    def test_sections_default(self):
        """Test that only the general section is required."""
        configuration = Configuration(general={"version": "2.0"})

        assert configuration.cutoff.family == "smooth-bump"
        assert configuration.domain.box == [[-1.0, 1.0]]

    def test_unknown_stage(self, sample_config_data):
        """Test that stage names are validated."""
        sample_config_data["stages"] = ["geom", "plot"]

        with pytest.raises(ValidationError):
            Configuration(**sample_config_data)

    def test_load_configuration(self, temp_config_file):
        """Test loading a configuration from a JSON file."""
        configuration = load_configuration(temp_config_file)

        assert configuration.nondegeneracy.resolution == 128

    def test_load_missing_file(self, tmp_path):
        """Test that a missing file surfaces as an OSError."""
        with pytest.raises(OSError):
            load_configuration(tmp_path / "missing.json")

    def test_shipped_config_files_agree(self):
        """Test that config.json and config_default.json hold the same settings."""
        with open(CONFIG_PATH) as current, open(CONFIG_PATH.with_name("config_default.json")) as default:
            assert Configuration(**json.load(current)) == Configuration(**json.load(default))


class TestAnalysisConfig:
    """Test cases for per-run analysis settings."""

    def test_from_configuration(self, test_configuration):
        """Test that the run inherits the defaults and applies overrides."""
        settings = AnalysisConfig.from_configuration(test_configuration, "x1^2 + x2^2", zero_order=4)

        assert settings.phase == "x1^2 + x2^2"
        assert settings.zero_order == 4
        assert settings.ladder == test_configuration.ladder

    def test_zero_order_positive(self, sample_config_data):
        """Test that the zero order must be positive."""
        with pytest.raises(ValidationError):
            AnalysisConfig(phase="x1^2", zero_order=0, **sample_config_data)

    def test_builder_overrides(self, make_analysis_config):
        """Test the fixture's section merge."""
        settings = make_analysis_config("x1^2", ladder={"count": 4}, stages=["geom"])

        assert settings.ladder.count == 4
        assert settings.ladder.lambda_min == 16.0
        assert settings.stages == ["geom"]
