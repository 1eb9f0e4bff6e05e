import zlib

import numpy as np
import pytest

from zgvscan import QuadraticPencil


def rng_for(name, salt=0):
    return np.random.default_rng(zlib.crc32(name.encode()) + salt)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_pencil(rng, n, structured=False):
    """A well-posed random pencil.  With structured=True it mimics the
    waveguide structure (L0 sym, L1 skew, L2 and M SPD)."""
    if structured:
        a = rng.standard_normal((n, n))
        l0 = 0.5 * (a + a.T)
        b = rng.standard_normal((n, n))
        l1 = 0.5 * (b - b.T)
        c = rng.standard_normal((n, n))
        l2 = c @ c.T + n * np.eye(n)
        d = rng.standard_normal((n, n))
        m = d @ d.T + n * np.eye(n)
    else:
        l0 = rng.standard_normal((n, n))
        l1 = rng.standard_normal((n, n))
        l2 = rng.standard_normal((n, n))
        d = rng.standard_normal((n, n))
        m = d @ d.T + n * np.eye(n)
    return QuadraticPencil(l0=l0, l1=l1, l2=l2, m=m)


@pytest.fixture
def rng(request):
    return rng_for(request.node.name)
