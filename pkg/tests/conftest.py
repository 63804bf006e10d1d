import numpy as np
import pytest

from alphaneg.linalg import herm_part


def random_hermitian(rng, d, scale=1.0):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * herm_part(g)


def random_pd(rng, d, trace=None):
    g = rng.standard_normal((d, d + 2)) + 1j * rng.standard_normal((d, d + 2))
    m = g @ g.conj().T + 1e-3 * np.eye(d)
    if trace is not None:
        m *= trace / np.trace(m).real
    return m


def random_psd(rng, d, rank):
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    return g @ g.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(20240211)
