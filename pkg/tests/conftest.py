"""
Pytest configuration and fixtures for the test suite.
"""
import json
import tempfile
from pathlib import Path

import pytest

from src.config import AnalysisConfig, Configuration
from src.polynomial import parse_polynomial
from src.quadrature import CutoffSpec
from src.sampling import BoxDomain
from tests.fixtures.sample_data import (
    SAMPLE_CONFIG_DATA,
    create_sample_config_data,
)


@pytest.fixture
def sample_config_data():
    """Fixture providing sample configuration data."""
    return create_sample_config_data()


@pytest.fixture
def test_configuration(sample_config_data):
    """Fixture providing a validated small-scale Configuration."""
    return Configuration(**sample_config_data)


@pytest.fixture
def make_analysis_config(sample_config_data):
    """Fixture building an AnalysisConfig for a phase with optional section overrides."""

    def build(phase: str, **overrides) -> AnalysisConfig:
        data = create_sample_config_data()
        for key, value in overrides.items():
            if isinstance(value, dict) and key in data:
                data[key].update(value)
            else:
                data[key] = value
        return AnalysisConfig(phase=phase, **data)

    return build


@pytest.fixture
def unit_square():
    """Fixture providing the box [-1, 1]^2."""
    return BoxDomain.unit(2)


@pytest.fixture
def bump_1d():
    """Fixture providing the default smooth bump on [-1, 1]."""
    return CutoffSpec("smooth-bump", (0.5,))


@pytest.fixture
def bump_2d():
    """Fixture providing the default smooth bump on [-1, 1]^2."""
    return CutoffSpec("smooth-bump", (0.5, 0.5))


@pytest.fixture
def circle_phase():
    """Fixture providing x1^2 + x2^2."""
    return parse_polynomial("x1^2 + x2^2")


@pytest.fixture
def temp_config_file():
    """Fixture providing a temporary config file."""
    with tempfile.NamedTemporaryFile(mode="w", suffix=".json", delete=False) as tmp_file:
        json.dump(SAMPLE_CONFIG_DATA, tmp_file, indent=2)
        tmp_file.flush()
        yield tmp_file.name

    # Cleanup
    Path(tmp_file.name).unlink(missing_ok=True)


@pytest.fixture
def temp_phase_file():
    """Fixture providing a JSON phase file for the @file syntax."""
    with tempfile.NamedTemporaryFile(mode="w", suffix=".json", delete=False) as tmp_file:
        json.dump({"n": 2, "terms": [{"coeff": "1", "alpha": [2, 0]}, {"coeff": "1", "alpha": [0, 4]}]}, tmp_file)
        tmp_file.flush()
        yield tmp_file.name

    Path(tmp_file.name).unlink(missing_ok=True)


@pytest.fixture(scope="session")
def disable_warnings():
    """Fixture to disable specific warnings during testing."""
    import warnings
    warnings.filterwarnings("ignore", category=FutureWarning, module="pandera")
    warnings.filterwarnings("ignore", category=RuntimeWarning, module="numpy")


# Auto-use the disable_warnings fixture
@pytest.fixture(autouse=True)
def _disable_warnings(disable_warnings):
    """Auto-apply warning suppression to all tests."""
    pass
