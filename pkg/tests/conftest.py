from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "simcal", derandomize=True, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("simcal")

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURE_PATH = REPO_ROOT / "data" / "reference_pairs.jsonl"


@pytest.fixture(scope="session")
def fixture_pairs():
    from simcal.metrics import read_pairs

    return read_pairs(FIXTURE_PATH)


@pytest.fixture(scope="session")
def fixture_arrays(fixture_pairs):
    from simcal.metrics import split_scores

    return split_scores(fixture_pairs)


def random_pairs(rng, n, m_lo=-0.6, m_hi=0.95, noise=0.15):
    """Random scored-pair array with a monotone-ish trend."""
    h = rng.uniform(0.0, 1.0, n)
    m = np.clip(0.2 + 0.6 * h + rng.normal(0.0, noise, n), m_lo, m_hi)
    return np.column_stack([m, h])


def interior_pairs(rng, n):
    """Random pairs whose linear/polynomial fits stay inside [0, 1] on the
    training points, so output clamping is inactive and the exact
    projection identities (zero training bias, rank preservation) apply."""
    h = rng.uniform(0.25, 0.75, n)
    m = np.clip(0.1 + 0.7 * h + rng.normal(0.0, 0.08, n), -0.5, 0.9)
    return np.column_stack([m, h])


def random_isotonic_model(rng, n_points=None):
    """Isotonic model fitted to random monotone-trend data."""
    from simcal.calibrators import fit_isotonic

    n = int(n_points if n_points is not None else rng.integers(5, 60))
    return fit_isotonic(random_pairs(rng, max(n, 2)))
