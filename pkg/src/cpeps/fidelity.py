"""Fidelity between a Gaussian cPEPS and the free vacuum.

Both states factorise into harmonic-oscillator ground states per momentum
mode, so the log fidelity is a sum (or, in the thermodynamic limit, an
integral) of single-mode log overlaps.  With a sharp radial cutoff ``Lambda``
and ``N = V Lambda^d`` sites the per-site value is

    log F_site = 1/2 int_{|k|<=Lambda} d^dk/(2 pi)^d log(2 sqrt(w r)/(w + r)) / Lambda^d

Rescaling ``k = Lambda kbar`` and ``omega = Lambda omega_tilde`` splits the
per-site value into a cutoff-independent (universal) integral against the
massless dispersion ``kbar`` and a remainder that vanishes as
``Lambda -> infinity``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import kernels
from .approximants import omega_free
from .errors import DomainError, NonPhysical, QuadratureFailure
from .gaussian_core import GaussianParams, RationalDispersion, check_physical, params_to_rational

DENSITY_TOL = 1e-10
UNIVERSAL_TOL = 1e-9
MAX_EVAL = 1_000_000
CSV_HEADER = "d,Lambda,m,D,log_density,per_site,universal,remainder,quad_err"

Dispersion = Union[RationalDispersion, GaussianParams, Callable]


@dataclass(frozen=True)
class RescaledDispersion:
    """Dimensionless dispersion ``omega(Lambda kbar) / Lambda`` in ``kbar^2``."""

    tilde_num: np.ndarray
    tilde_den: np.ndarray
    Lambda_used: float = 1.0

    def __call__(self, kbar):
        kbar = np.asarray(kbar, dtype=float)
        return kernels.rational_eval_real(self.tilde_num, self.tilde_den, kbar * kbar)


@dataclass(frozen=True)
class FidelityReport:
    d: int
    Lambda: float
    m: float
    D: int
    log_density: float
    per_site: float
    universal: float
    remainder: float
    quadrature_error_estimate: float

    def csv_row(self):
        vals = (self.d, self.Lambda, self.m, self.D, self.log_density, self.per_site,
                self.universal, self.remainder, self.quadrature_error_estimate)
        return ",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in vals)


def mode_log_overlap(w1, w2):
    """``1/2 log(2 sqrt(w1 w2) / (w1 + w2))`` -- log overlap of two oscillator ground states.

    Non-positive, zero only for ``w1 == w2``, and a function of ``w1 / w2``
    alone.
    """
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    if np.any(w1 <= 0) or np.any(w2 <= 0):
        raise DomainError("mode frequencies must be strictly positive")
    # sqrt taken per factor: no overflow, and the expression is exactly symmetric
    out = 0.5 * np.log(2.0 * np.sqrt(w1) * np.sqrt(w2) / (w1 + w2))
    out = np.minimum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def radial_prefactor(d):
    """``S_{d-1} / (2 pi)^d`` with ``S_{d-1} = 2 pi^(d/2) / Gamma(d/2)``."""
    if d not in (1, 2, 3):
        raise DomainError("spatial dimension must be 1, 2 or 3")
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2) / (2.0 * math.pi) ** d


def _as_rational(R):
    if isinstance(R, GaussianParams):
        return params_to_rational(R)
    return R


def _dispersion_call(R):
    """Vectorised real ``omega(u)`` for any accepted dispersion type."""
    if isinstance(R, RationalDispersion):
        num, den = R.real_coeffs()
        return lambda u: kernels.rational_eval_real(num, den, u)
    return lambda u: np.asarray(R(u), dtype=float)


def _radial_integral(R, mu, d, upper, tol):
    """``int_0^upper k^(d-1) * mode log overlap(omega(k^2), sqrt(mu^2+k^2)) dk``."""
    if isinstance(R, RationalDispersion):
        num, den = R.real_coeffs()
        value, err, n_eval, ok = kernels.radial_log_overlap(num, den, mu, d, upper, tol, MAX_EVAL)
    else:
        omega = _dispersion_call(R)

        def integrand(t):
            k = upper * t * t
            u = k * k
            w = omega(u)
            r = np.sqrt(mu * mu + u)
            with np.errstate(divide="ignore", invalid="ignore"):
                val = 0.5 * np.log(2.0 * np.sqrt(np.abs(w) * r) / np.abs(w + r))
            val = np.where(k > 0.0, val, 0.0)
            return 2.0 * upper * t * k ** (d - 1) * val

        value, err, n_eval, ok = kernels.adaptive_gl(integrand, 0.0, 1.0, tol, MAX_EVAL)
    if not ok or not np.isfinite(value):
        raise QuadratureFailure(f"tolerance {tol:g} not reached in {n_eval} evaluations")
    return value, err


def _require_positive(R, u_max):
    if isinstance(R, RationalDispersion):
        check_physical(R, u_max)
        return
    u = np.linspace(0.0, u_max, 4096)[1:]
    w = np.asarray(R(u), dtype=float)
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise NonPhysical("dispersion is not positive on the domain")


def _density(R, m, d, Lambda, tol):
    if not Lambda > 0:
        raise DomainError("cutoff must be positive")
    R = _as_rational(R)
    _require_positive(R, Lambda * Lambda)
    pref = radial_prefactor(d)
    value, err = _radial_integral(R, m, d, Lambda, tol / pref)
    return pref * value, pref * err


def log_fidelity_density(R: Dispersion, m, d, Lambda, tol=DENSITY_TOL):
    """Log fidelity per unit volume, ``log F / V`` (units mass^d).

    Radial reduction with the surface factor ``2 pi^(d/2) / Gamma(d/2)`` and
    adaptive Gauss-Legendre quadrature after ``k = Lambda t^2``.  ``R`` may be
    a ``RationalDispersion``, a ``GaussianParams`` or any vectorised callable
    ``omega(u)`` with ``u = k^2``.
    """
    return _density(R, m, d, Lambda, tol)[0]


def per_site_log_fidelity(R: Dispersion, m, d, Lambda, tol=DENSITY_TOL):
    """``log F / N`` with ``N = V Lambda^d`` sites."""
    return log_fidelity_density(R, m, d, Lambda, tol) / Lambda ** d


def lattice_momenta(Lambda, N_per_dim, d):
    """Squared norms of the grid ``k_i = Lambda (2 n / N - 1)`` inside ``|k| <= Lambda``.

    The grid has ``N`` points per axis with spacing ``2 Lambda / N``, runs over
    ``[-Lambda, Lambda)`` and contains ``k = 0``.  Modes outside the sphere are
    dropped (sharp radial cutoff).
    """
    N = int(N_per_dim)
    if N < 1:
        raise DomainError("N must be positive")
    axis = Lambda * (2.0 * np.arange(N) / N - 1.0)
    u = np.zeros([N] * d)
    for i in range(d):
        shape = [1] * d
        shape[i] = N
        u = u + (axis ** 2).reshape(shape)
    u = u.reshape(-1)
    return u[u <= Lambda * Lambda * (1.0 + 1e-14)]


def finite_lattice_log_fidelity(R: Dispersion, m, d, Lambda, N_per_dim):
    """Exact ``log F`` as a finite sum of mode log overlaps on the momentum grid.

    See ``lattice_momenta`` for the grid.  The grid corresponds to a periodic
    box of side ``pi N / Lambda``, so ``log F / (pi N)^d`` converges to the
    continuum per-site value (see ``finite_lattice_per_site``).
    """
    if d not in (1, 2, 3):
        raise DomainError("spatial dimension must be 1, 2 or 3")
    R = _as_rational(R)
    u = lattice_momenta(Lambda, N_per_dim, d)
    w = _dispersion_call(R)(u)
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise NonPhysical("dispersion is not positive on the lattice momenta")
    return kernels.log_overlap_sum(w, omega_free(m, u))


def finite_lattice_per_site(R: Dispersion, m, d, Lambda, N_per_dim):
    """``finite_lattice_log_fidelity / (pi N)^d``; tends to the continuum per-site value."""
    total = finite_lattice_log_fidelity(R, m, d, Lambda, N_per_dim)
    return total / (math.pi * N_per_dim) ** d


def rescale_to_unit_cutoff(R: RationalDispersion, Lambda) -> RescaledDispersion:
    """``p~_a = Lambda^(2a-1) p_a``, ``q~_a = Lambda^(2a) q_a``."""
    if not Lambda > 0:
        raise DomainError("cutoff must be positive")
    num, den = R.real_coeffs()
    a_n = np.arange(num.size)
    a_d = np.arange(den.size)
    return RescaledDispersion(num * float(Lambda) ** (2 * a_n - 1),
                              den * float(Lambda) ** (2 * a_d), float(Lambda))


def unit_cutoff_family(tilde_num, tilde_den, Lambda) -> RationalDispersion:
    """Dimensionful dispersion whose rescaled coefficients are fixed at ``Lambda``."""
    tilde_num = np.asarray(tilde_num, dtype=float)
    tilde_den = np.asarray(tilde_den, dtype=float)
    num = tilde_num * float(Lambda) ** (1 - 2 * np.arange(tilde_num.size))
    den = tilde_den * float(Lambda) ** (-2 * np.arange(tilde_den.size))
    return RationalDispersion(num, den, physical=True)


def universal_per_site(Rt, d, tol=UNIVERSAL_TOL):
    """Cutoff-independent part of the per-site log fidelity.

    ``1/2 int_{|kbar|<=1} d^d kbar/(2 pi)^d log(2 sqrt(w kbar)/(w + kbar))`` with
    ``w = omega_tilde(kbar)``.  The logarithmic endpoint at ``kbar = 0`` is
    smoothed by ``kbar = t^2``.  ``Rt`` is a ``RescaledDispersion`` or a
    vectorised callable of ``kbar``.
    """
    pref = radial_prefactor(d)
    kb = np.linspace(0.0, 1.0, 4097)[1:]
    w = np.asarray(Rt(kb), dtype=float)
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise DomainError("rescaled dispersion must be positive on (0, 1]")
    if isinstance(Rt, RescaledDispersion):
        R = RationalDispersion(Rt.tilde_num, Rt.tilde_den)
    else:
        R = lambda u: Rt(np.sqrt(u))  # noqa: E731
    value, _ = _radial_integral(R, 0.0, d, 1.0, tol / pref)
    return pref * value


def universal_with_error(Rt, d, tol=UNIVERSAL_TOL):
    pref = radial_prefactor(d)
    if isinstance(Rt, RescaledDispersion):
        R = RationalDispersion(Rt.tilde_num, Rt.tilde_den)
    else:
        R = lambda u: Rt(np.sqrt(u))  # noqa: E731
    value, err = _radial_integral(R, 0.0, d, 1.0, tol / pref)
    return pref * value, pref * err


def irrelevant_remainder(R: RationalDispersion, m, d, Lambda, universal_coeffs=None):
    """``per_site(Lambda) - universal`` for the cutoff-independent coefficients.

    The split of the rescaled coefficients into a cutoff-independent part and
    an irrelevant part is fixed by the limit ``Lambda -> infinity``; by
    default the rescaled coefficients of ``R`` at this ``Lambda`` are taken as
    that limit (exact for the families built with ``unit_cutoff_family``).
    Pass ``universal_coeffs`` (a ``RescaledDispersion``) to override.
    """
    R = _as_rational(R)
    Rt = universal_coeffs if universal_coeffs is not None else rescale_to_unit_cutoff(R, Lambda)
    return per_site_log_fidelity(R, m, d, Lambda) - universal_per_site(Rt, d)


def fidelity_report(R: Dispersion, m, d, Lambda, universal_coeffs=None, D=None) -> FidelityReport:
    """All fidelity quantities for one ``(omega_D, m, d, Lambda)`` configuration.

    ``D`` is recorded in the report; it defaults to the rational degree of ``R``
    (``-1`` for a callable).
    """
    R = _as_rational(R)
    density, err_d = _density(R, m, d, Lambda, DENSITY_TOL)
    per_site = density / Lambda ** d
    if universal_coeffs is None and isinstance(R, RationalDispersion):
        universal_coeffs = rescale_to_unit_cutoff(R, Lambda)
    if universal_coeffs is None:
        # callable without coefficients: rescale the callable itself
        universal_coeffs = lambda kb: np.asarray(R((Lambda * kb) ** 2)) / Lambda  # noqa: E731
    if m == 0:
        universal, err_u = per_site, 0.0
    else:
        universal, err_u = universal_with_error(universal_coeffs, d)
    if D is None:
        D = R.degree if isinstance(R, RationalDispersion) else -1
    return FidelityReport(d, float(Lambda), float(m), D, density, per_site, universal,
                          per_site - universal, err_d / Lambda ** d + err_u)
