import numpy as np
import pytest

from framesum import FiniteFrame, NotAFrameError, exact_bounds


def random_hermitian(rng, dim):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (z + z.conj().T) / 2.0


def random_frame(rng, count, dim):
    """A random spanning frame (resamples the rare rank-deficient draw)."""
    while True:
        vectors = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
        frame = FiniteFrame(vectors)
        try:
            exact_bounds(frame)
        except NotAFrameError:
            continue
        return frame


@pytest.fixture
def rng():
    return np.random.default_rng(0)
