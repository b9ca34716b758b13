import numpy as np
import pytest
import scipy.linalg as sla

import morsecert as mc
from morsecert._linalg import rng_orthogonal


def random_traceless_sym(rng, n, scale=1.0):
    s = rng.standard_normal((n, n))
    s = 0.5 * (s + s.T)
    s -= np.eye(n) * np.trace(s) / n
    return scale * s / max(np.linalg.norm(s), 1e-12)


def random_point(rng, n, scale=1.0):
    return mc.Point(sla.expm(random_traceless_sym(rng, n, scale)))


def random_sl(rng, n, scale=1.0):
    a = rng.standard_normal((n, n))
    a -= np.eye(n) * np.trace(a) / n
    return mc.GroupElement(sla.expm(scale * a / max(np.linalg.norm(a), 1e-12)))


def random_rotation(rng, n):
    q = rng_orthogonal(rng, n)
    if np.linalg.det(q) < 0:
        q[:, [0, 1]] = q[:, [1, 0]]
    return q


def conjugated_transvection(rng, log_spectrum):
    """exp(diag h) moved by a random rotation; a transvection with axis
    through the identity."""
    h = np.asarray(log_spectrum, dtype=float)
    q = random_rotation(rng, h.size)
    return mc.GroupElement(q @ np.diag(np.exp(h)) @ q.T), q


@pytest.fixture(scope="session")
def face3():
    return mc.FaceType(3, (1, 2))


@pytest.fixture(scope="session")
def face2():
    return mc.FaceType(2, (1,))


@pytest.fixture(scope="session")
def schottky_pair(face3):
    """The documented proximal pair: a strong diagonal transvection and a
    well-separated rotated copy.  Certifies at powers (2, 2)."""
    alpha = mc.GroupElement(np.diag([np.exp(2.0), np.exp(0.5), np.exp(-2.5)]))
    rng = np.random.default_rng(35)
    w = random_rotation(rng, 3)
    beta = mc.GroupElement(w @ alpha.mat @ w.T)
    return alpha, beta


@pytest.fixture(scope="session")
def certified_generators(schottky_pair):
    """The certified powers (2, 2) of the documented pair."""
    alpha, beta = schottky_pair
    a2 = np.linalg.matrix_power(alpha.mat, 2)
    b2 = np.linalg.matrix_power(beta.mat, 2)
    return (
        mc.GroupElement(a2 / np.linalg.det(a2) ** (1 / 3)),
        mc.GroupElement(b2 / np.linalg.det(b2) ** (1 / 3)),
    )


@pytest.fixture(scope="session")
def schottky_params(face3):
    return mc.StraightnessParams(mc.ThetaSet(face3, 0.25), 0.2, 1.0, 1)
