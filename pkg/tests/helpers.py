"""Shared generators for the test suite."""
import numpy as np

from cpeps.gaussian_core import GaussianParams


def random_spd(rng, D, shift=0.5):
    B = rng.normal(size=(D, D))
    return B @ B.T + shift * np.eye(D)


def random_sym(rng, D, scale=0.2):
    B = rng.normal(size=(D, D))
    return scale * (B + B.T)


def random_params(rng, D=None):
    """Admissible parameter set: Re(A + Z u) is positive definite for all u >= 0."""
    if D is None:
        D = int(rng.integers(1, 5))
    A = random_spd(rng, D) + 1j * random_sym(rng, D)
    Z = random_spd(rng, D) + 1j * random_sym(rng, D)
    z = rng.normal(size=D) + 1j * rng.normal(size=D)
    a = rng.normal(size=D) + 1j * rng.normal(size=D)
    return GaussianParams(D, Z, A, z, a, float(rng.uniform(0.5, 2.0)))
