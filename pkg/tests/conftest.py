import numpy as np
import pytest

EPS_GRID = (0.01, 0.04, 0.1, 1.0 / 3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20170412)


def random_unitary(rng, dim):
    """Haar-ish unitary from the QR decomposition of a Gaussian matrix."""
    mat = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(mat)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng, dim):
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


def random_density(rng, dim, rank=None):
    rank = dim if rank is None else rank
    mat = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = mat @ mat.conj().T
    return rho / np.trace(rho).real
