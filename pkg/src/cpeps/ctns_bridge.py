"""Gaussian sector of the CTNS <-> cPEPS correspondence.

A continuous tensor network state with Gaussian data has, per mode, a
virtual potential and a linear source functional

    V[v] = 1/2 v^T (V + u kin + u^2 V2) v,     f[v] = (f + u f_grad) . v

with ``u = k^2`` (gradient terms pick up ``u``).  Resolving the Fock vacuum
in the field basis gives the physical kernel
``scale (1/2 phi^2) + 1/2 f^2 - sqrt(2 scale) f phi + V``; completing the
square maps that onto a Gaussian cPEPS parameter set:

    c = scale, a = sqrt(2 scale) f, z = sqrt(2 scale) f_grad,
    A = V + f f^T, Z = kin + f f_grad^T + f_grad f^T.

The ``u^2`` part ``V2 + f_grad f_grad^T`` has no cPEPS counterpart and must
vanish.  ``scale`` defaults to 1, the unit-Gaussian Fock vacuum; other values
absorb a rescaling of ``phi``.  All quantities are per dimensionless mode.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NonGaussianInput, NonPositiveC, ShapeMismatch
from .gaussian_core import GaussianParams

ROUNDTRIP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CTNSGaussianData:
    """Gaussian CTNS data for ``D`` virtual fields.

    ``V`` and ``kin`` are the ultra-local and gradient quadratic potentials,
    ``f`` and ``f_grad`` the corresponding source coefficients.  ``V2`` is the
    second-gradient potential; ``None`` means the value that makes the data
    Gaussian-representable, ``-f_grad f_grad^T``.
    """

    V: np.ndarray
    f: np.ndarray
    kin: np.ndarray
    f_grad: Optional[np.ndarray] = None
    V2: Optional[np.ndarray] = None
    scale: float = 1.0

    def __post_init__(self):
        V = np.array(self.V, dtype=complex)
        f = np.array(self.f, dtype=complex)
        if f.ndim != 1:
            raise NonGaussianInput("source functional must be linear (a coefficient vector)")
        if V.ndim != 2:
            raise NonGaussianInput("potential must be quadratic (a coefficient matrix)")
        D = f.size
        kin = np.array(self.kin, dtype=complex)
        f_grad = np.zeros(D, dtype=complex) if self.f_grad is None else np.array(self.f_grad, dtype=complex)
        V2 = -np.outer(f_grad, f_grad) if self.V2 is None else np.array(self.V2, dtype=complex)
        for name, mat in (("V", V), ("kin", kin), ("V2", V2)):
            if mat.shape != (D, D):
                raise ShapeMismatch(f"{name} must be {D}x{D}, got {mat.shape}")
            if np.max(np.abs(mat - mat.T)) > 1e-12 * max(1.0, np.max(np.abs(mat))):
                raise NonGaussianInput(f"{name} must be symmetric")
        if f_grad.shape != (D,):
            raise ShapeMismatch("f_grad must match f")
        for name, val in (("V", V), ("f", f), ("kin", kin), ("f_grad", f_grad), ("V2", V2)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def D(self):
        return self.f.size


def ctns_to_cpeps_kernel(data: CTNSGaussianData) -> GaussianParams:
    """Cast Gaussian CTNS data as a cPEPS parameter set.

    Raises ``NonGaussianInput`` when the ``u^2`` virtual term survives.
    """
    f, fg = data.f, data.f_grad
    residual = data.V2 + np.outer(fg, fg)
    if np.max(np.abs(residual)) > 1e-12 * max(1.0, np.max(np.abs(data.V2))):
        raise NonGaussianInput("second-gradient potential is not cancelled by the source")
    if not data.scale > 0:
        raise NonPositiveC("the physical mass term must be positive")
    g = np.sqrt(2.0 * data.scale)
    A = data.V + np.outer(f, f)
    Z = data.kin + np.outer(f, fg) + np.outer(fg, f)
    return GaussianParams(data.D, Z, A, g * fg, g * f, data.scale)


def cpeps_to_ctns(P: GaussianParams) -> CTNSGaussianData:
    """Inverse of ``ctns_to_cpeps_kernel``; needs ``c > 0``."""
    if not P.c > 0:
        raise NonPositiveC(f"c must be positive, got {P.c}")
    g = np.sqrt(2.0 * P.c)
    f = P.a / g
    fg = P.z / g
    V = P.A - np.outer(f, f)
    kin = P.Z - np.outer(f, fg) - np.outer(fg, f)
    return CTNSGaussianData(V, f, kin, fg, -np.outer(fg, fg), P.c)


def data_max_abs_diff(x: CTNSGaussianData, y: CTNSGaussianData) -> float:
    """Largest entrywise difference over all fields."""
    return float(max(
        np.max(np.abs(x.V - y.V)), np.max(np.abs(x.f - y.f)), np.max(np.abs(x.kin - y.kin)),
        np.max(np.abs(x.f_grad - y.f_grad)), np.max(np.abs(x.V2 - y.V2)), abs(x.scale - y.scale),
    ))


def params_max_abs_diff(P: GaussianParams, Q: GaussianParams) -> float:
    return float(max(
        np.max(np.abs(P.Z - Q.Z)), np.max(np.abs(P.A - Q.A)), np.max(np.abs(P.z - Q.z)),
        np.max(np.abs(P.a - Q.a)), abs(P.c - Q.c),
    ))


def roundtrip_error(P: GaussianParams) -> float:
    """``max |P - ctns_to_cpeps_kernel(cpeps_to_ctns(P))|`` entrywise."""
    return params_max_abs_diff(P, ctns_to_cpeps_kernel(cpeps_to_ctns(P)))
