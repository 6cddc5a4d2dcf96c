import numpy as np
import pytest

from netpublic import BenefitSpec, GameParams, k_tilde

FAMILIES = (BenefitSpec.log(), BenefitSpec.sqrt(), BenefitSpec.power(0.3))


def random_types(rng, n: int) -> np.ndarray:
    return np.array(sorted([0.0] + list(rng.uniform(size=n - 2)) + [1.0]))


def random_scenario(rng, n: int, k_span=(0.02, 1.2)) -> GameParams:
    """Random game with k drawn relative to the empty-network threshold."""
    types = random_types(rng, n)
    spec = FAMILIES[int(rng.integers(len(FAMILIES)))]
    c = float(rng.uniform(0.5, 2.0))
    probe = GameParams(types, c, 1.0, spec)
    k = float(rng.uniform(*k_span)) * k_tilde(probe)
    return GameParams(types, c, k, spec)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
