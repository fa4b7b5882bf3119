import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.stats import special_ortho_group

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_rotation(k, seed):
    if k == 2:
        a = np.random.default_rng(seed).uniform(0, 2 * np.pi)
        return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
    return special_ortho_group.rvs(k, random_state=seed)


def det1_spectrum(k, seed):
    """Strictly descending positive spectrum with product one."""
    g = np.random.default_rng(seed)
    lam = np.sort(g.uniform(0.2, 5.0, k))[::-1]
    lam = lam + np.arange(k, 0, -1) * 1e-3
    return lam / np.exp(np.mean(np.log(lam)))
