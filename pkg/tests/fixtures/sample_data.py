"""
Sample phases, synthetic curves and configuration data for testing.
"""

import copy
from fractions import Fraction
from typing import Any, Dict, List, Tuple

import numpy as np

# phase text -> (d(f), k)
NAMED_DISTANCES = {
    "x1^2 + x2^2": (Fraction(1), 1),
    "x1^2 + x2^4": (Fraction(4, 3), 1),
    "x1^2*x2^2": (Fraction(2), 0),
}

DOUBLING_BATTERY = [
    "x1^2 + x2^2",
    "x1^2*x2",
    "x1^2*x2^2",
    "x1^2 + x2^4",
    "x1^3 + x2^3",
    "x1^2 + x2^2 + x3^2",
    "x1^4 + x1*x2^2",
    "x1^2*x2^3 + x1^5 + x2^4",
    "x1^3 - 3*x1*x2^2",
    "x1^2 + x2^2*x3^2",
]

NONDEGENERATE_BATTERY = ["x1^2 + x2^2", "x1^2 + x2^4", "x1^3 + x2^3"]

DECAY_BATTERY = ["x1^2 + x2^2", "x1^2*x2^2", "x1^3 + x2^3", "x1^2 + x2^4"]


def create_sample_config_data() -> Dict[str, Any]:
    """
    Configuration with sample counts and ladders small enough for unit tests.

    Returns:
        dict in the config.json layout
    """
    return copy.deepcopy(SAMPLE_CONFIG_DATA)


def create_power_curve(C: float = 3.0, epsilon: float = 0.5, log_power: float = 0.0,
                       s_min: float = 1e-4, s_max: float = 1e-1, count: int = 24) -> List[Tuple[float, float]]:
    """
    Exact (s, C s^eps (1 + ln 1/s)^p) points on a geometric grid.

    Args:
        C: constant
        epsilon: growth exponent
        log_power: power of the log factor
    """
    s = np.geomspace(s_min, s_max, count)
    m = C * s**epsilon * (1.0 + np.log(1.0 / s)) ** log_power
    return list(zip(s.tolist(), m.tolist()))


def create_decay_curve(C: float = 1.0, delta: float = 0.75, log_power: float = 0.0,
                       lambda_min: float = 16.0, lambda_max: float = 4096.0,
                       count: int = 12) -> List[Tuple[float, float]]:
    """Exact (lambda, C lambda^-delta (ln lambda)^p) ladder points."""
    lam = np.geomspace(lambda_min, lambda_max, count)
    value = C * lam ** (-delta) * np.log(lam) ** log_power
    return list(zip(lam.tolist(), value.tolist()))


SAMPLE_CONFIG_DATA = {
    "general": {"version": "1.0.0", "output_dir": "./reports", "log_level": "INFO", "progress": False},
    "domain": {"box": [[-1.0, 1.0]]},
    "cutoff": {
        "family": "smooth-bump",
        "radius": 0.5,
        "amplitude": 1.0,
        "shrink_retry": True,
        "shrink_factor": 0.5,
    },
    "ladder": {"lambda_min": 16.0, "lambda_max": 512.0, "count": 7, "directions": 5},
    "quadrature": {"tol": 1e-3, "theta": 0.5, "min_panels": 16, "max_nodes": 50_000_000, "chunk_nodes": 1_000_000},
    "sampling": {
        "samples": 200_000,
        "seed": 42,
        "block_size": 65536,
        "grid_mode": "adaptive",
        "s_min": 1e-5,
        "s_max": 0.1,
        "s_count": 24,
        "axis_tube": 1e-12,
        "bounded_below_threshold": 0.1,
        "max_domain_error_rate": 0.001,
    },
    "nondegeneracy": {"resolution": 128, "threshold": 1e-9, "margin": 1e-3, "rounds": 3, "axis_margin": 1e-6},
    "tolerances": {
        "theorem_1_1": 0.07,
        "corollary_1_1_1": 0.05,
        "varchenko": 0.07,
        "varchenko_log_power": 0.5,
        "epsilon0_agreement": 0.05,
        "max_unconverged_fraction": 0.1,
    },
    "stages": ["geom", "qh", "sublevel", "decay"],
}
