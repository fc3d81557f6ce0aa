import numpy as np
import pytest

from openresponse import opcore
from openresponse.lindblad import LindbladGenerator


def random_generator(d, rng, n_jumps=2, h_scale=1.0):
    """Generic (ergodic with probability one) Lindblad generator."""
    H = opcore.random_hermitian(d, rng, h_scale)
    jumps = tuple((rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(d)
                  for _ in range(n_jumps))
    return LindbladGenerator(H, jumps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
