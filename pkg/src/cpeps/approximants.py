"""Reference dispersions: the free vacuum, its continued fraction, Padé forms."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import binom

from . import kernels
from .errors import DomainError, PadeDegenerate
from .gaussian_core import RationalDispersion, rational_eval

SUP_GRID = 4096


@dataclass(frozen=True)
class FreeDispersion:
    """``omega_f(u) = sqrt(m^2 + u)`` of a free scalar of mass ``m``."""

    m: float

    def __post_init__(self):
        if not self.m >= 0:
            raise DomainError("mass must be non-negative")

    def __call__(self, u):
        return omega_free(self.m, u)


def omega_free(m, u):
    """``sqrt(m^2 + u)``; accepts scalars or arrays."""
    if np.any(np.asarray(m) < 0) or np.any(np.asarray(u) < 0):
        raise DomainError("omega_free needs m >= 0 and u >= 0")
    out = np.sqrt(np.asarray(m, dtype=float) ** 2 + np.asarray(u, dtype=float))
    return float(out) if out.ndim == 0 else out


def cf_truncate(m, depth, u):
    """Depth-``depth`` truncation of ``m + u/(2m + u/(2m + ...))``.

    The innermost denominator is ``2m``; evaluated by backward recursion.
    """
    if not m > 0:
        raise DomainError("mass must be positive")
    depth = int(depth)
    if depth < 1:
        raise DomainError("depth must be >= 1")
    if np.any(np.asarray(u) < 0):
        raise DomainError("u = k^2 must be non-negative")
    out = kernels.cf_truncate_array(float(m), depth, np.asarray(u, dtype=float))
    return float(out) if np.ndim(u) == 0 else out


def sqrt_taylor(m, u0, n):
    """First ``n`` Taylor coefficients of ``sqrt(m^2 + u)`` in ``(u - u0)``."""
    s2 = m * m + u0
    j = np.arange(n)
    return np.sqrt(s2) * binom(0.5, j) / s2 ** j


def _pade_from_taylor(c, D):
    """Solve the [D/D] Padé system; returns (p, q) ascending with q0 = 1, or None."""
    if D == 0:
        return c[:1].copy(), np.ones(1)
    # sum_{j=0..D} q_j c_{i-j} = 0 for i = D+1..2D
    H = np.array([[c[i - j] if i - j >= 0 else 0.0 for j in range(1, D + 1)]
                  for i in range(D + 1, 2 * D + 1)])
    rhs = -c[D + 1:2 * D + 1]
    if np.linalg.cond(H) > 1e13:
        return None
    q = np.concatenate(([1.0], np.linalg.solve(H, rhs)))
    p = np.array([sum(q[j] * c[i - j] for j in range(i + 1)) for i in range(D + 1)])
    return p, q


def _shift_poly(coef, u0):
    """Coefficients in ``u`` of ``sum_i coef_i (u - u0)^i``."""
    out = np.zeros(len(coef))
    for i, ci in enumerate(coef):
        out[: i + 1] += ci * binom(i, np.arange(i + 1)) * (-u0) ** (i - np.arange(i + 1))
    return out


def pade_sqrt(m, u0, D) -> RationalDispersion:
    """[D/D] Padé approximant of ``sqrt(m^2 + u)`` about the base point ``u0``.

    Built from the ``2D + 1`` Taylor coefficients at ``u0``, re-expanded in
    powers of ``u`` and normalised to ``q0 = 1``.  A singular Hankel system
    lowers the order (with a ``PadeDegenerate`` warning) until it is solvable.
    """
    if not m > 0:
        raise DomainError("mass must be positive")
    if u0 < 0:
        raise DomainError("base point must be >= 0")
    D = int(D)
    if D < 0:
        raise DomainError("order must be >= 0")
    c = sqrt_taylor(m, u0, 2 * D + 1)
    order = D
    sol = _pade_from_taylor(c, order)
    while sol is None:
        order -= 1
        warnings.warn(f"Hankel system singular; reducing Padé order to {order}", PadeDegenerate)
        sol = _pade_from_taylor(c, order)
    p, q = sol
    num = _shift_poly(p, u0)
    den = _shift_poly(q, u0)
    R = RationalDispersion(num, den, base_point=u0)
    return RationalDispersion(R.num, R.den, base_point=u0, physical=True)


def sup_error(R, m, Lambda):
    """Max of ``|omega(k^2) - omega_f(k^2)|`` on a 4096-point grid of ``k in [0, Lambda]``.

    A dense-grid stand-in for the true supremum; errors are smooth in ``k``.
    """
    if not Lambda > 0:
        raise DomainError("cutoff must be positive")
    k = np.linspace(0.0, Lambda, SUP_GRID)
    u = k * k
    w = rational_eval(R, u) if isinstance(R, RationalDispersion) else np.asarray(R(u))
    return float(np.max(np.abs(w - omega_free(m, u))))
