import numpy as np
import pytest
from hypothesis import settings

from pluripot.complexad import CPoint

settings.register_profile("suite", derandomize=True, max_examples=25, deadline=None)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240331)


def interior_points(dim, count, radius=0.8, seed=0, min_norm=0.0):
    """Seeded uniform points in the ball of the given radius."""
    gen = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        v = gen.uniform(-1.0, 1.0, size=2 * dim)
        r2 = float(v @ v)
        if r2 > 1.0 or radius * radius * r2 < min_norm * min_norm:
            continue
        out.append(CPoint(tuple(radius * (v[:dim] + 1j * v[dim:]))))
    return out
