import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)


def random_exact_rank(rng, m, n, rank, scale=1.0, complex_=False):
    """Random m x n matrix of exact rank ``rank`` with O(1) singular values."""
    def block(r, c):
        a = rng.standard_normal((r, c))
        if complex_:
            a = a + 1j * rng.standard_normal((r, c))
        return a

    a = block(m, rank) @ block(rank, n)
    return scale * a / max(np.linalg.norm(a, 2), 1e-300)
