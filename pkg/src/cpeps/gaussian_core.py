"""Gaussian cPEPS parameter sets and the dispersion they induce.

A Gaussian cPEPS with bond dimension ``D`` is fixed by

    P = {Z (DxD), A (DxD), z (D), a (D), c}

and integrating out the virtual fields mode by mode gives

    omega_D(u) = c + 1/2 (a + z u)^T (A + Z u)^{-1} (a + z u),   u = k^2.

Two independent routes to ``omega_D`` live here: a linear solve of the
virtual block (``eval_dispersion_schur``) and a determinant-only
reconstruction of the rational function in ``u`` (``params_to_rational``).
Chain (tridiagonal) parameter sets can additionally be eliminated one field at
a time (``eliminate_chain``), which is how the continued-fraction ansatz of
``derive_cf_params`` is checked.

Sign convention: the ``+1/2`` in front of the quadratic form is kept as the
normative definition.  A literal Gaussian integration of ``exp(A_functional)``
would give ``-1/2`` with the opposite sign of the coupling term; with the
``+`` convention the chain couplings that realise the continued fraction come
out purely imaginary (``Z[a, a+1] = 1j``) while ``omega_D`` stays real.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import (
    DegenerateDenominator,
    DomainError,
    InterpolationError,
    NonPhysical,
    PoleError,
    ShapeMismatch,
    SingularSystem,
    TopologyError,
)

SYMMETRY_TOL = 1e-12
COND_LIMIT = 1e12
PHYSICAL_IMAG_TOL = 1e-9


def _as_complex_matrix(x, D, name):
    arr = np.array(x, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.shape != (D, D):
        raise ShapeMismatch(f"{name} must be {D}x{D}, got {arr.shape}")
    return arr


def _as_complex_vector(x, D, name):
    arr = np.array(x, dtype=complex).reshape(-1)
    if arr.shape != (D,):
        raise ShapeMismatch(f"{name} must have length {D}, got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class GaussianParams:
    """Parameter set of a Gaussian cPEPS at bond dimension ``D``.

    Units (with the virtual fields carrying the physical field's mass
    dimension): ``Z, z`` are 1/mass, ``A, a, c`` are mass.  ``m`` is optional
    metadata recording the target mass a parameter set was built for.
    """

    D: int
    Z: np.ndarray
    A: np.ndarray
    z: np.ndarray
    a: np.ndarray
    c: float
    m: Optional[float] = None

    def __post_init__(self):
        D = int(self.D)
        if D < 1:
            raise DomainError("bond dimension D must be >= 1")
        object.__setattr__(self, "D", D)
        Z = _as_complex_matrix(self.Z, D, "Z")
        A = _as_complex_matrix(self.A, D, "A")
        for name, mat in (("Z", Z), ("A", A)):
            scale = max(1.0, float(np.max(np.abs(mat))))
            if np.max(np.abs(mat - mat.T)) > SYMMETRY_TOL * scale:
                raise DomainError(f"{name} must be symmetric")
            mat.setflags(write=False)
        z = _as_complex_vector(self.z, D, "z")
        a = _as_complex_vector(self.a, D, "a")
        z.setflags(write=False)
        a.setflags(write=False)
        c = complex(self.c)
        if abs(c.imag) > 0:
            raise DomainError("c must be real")
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "c", float(c.real))

    def block(self, u):
        """Virtual block ``A + Z u``."""
        return self.A + self.Z * u

    def source(self, u):
        """Physical-virtual coupling ``a + z u``."""
        return self.a + self.z * u

    def is_admissible(self, u_max, n=64):
        """``Re(A + Z u)`` positive definite on a ``n``-point grid of ``(0, u_max]``."""
        for u in np.linspace(u_max / n, u_max, n):
            herm = self.block(u).real
            if np.linalg.eigvalsh(0.5 * (herm + herm.T))[0] <= 0.0:
                return False
        return True

    def is_chain(self, tol=1e-14):
        """True when both ``A`` and ``Z`` are tridiagonal."""
        if self.D <= 2:
            return True
        mask = np.abs(np.subtract.outer(np.arange(self.D), np.arange(self.D))) > 1
        return bool(np.all(np.abs(self.A[mask]) <= tol) and np.all(np.abs(self.Z[mask]) <= tol))


@dataclass(frozen=True, eq=False)
class RationalDispersion:
    """``omega(u) = (p0 + p1 u + ...) / (1 + q1 u + ...)`` in ``u = k^2``.

    The denominator is normalised on construction so that ``q0 == 1`` exactly.
    The numerator may carry one more coefficient than the denominator: a
    gradient coupling ``z != 0`` makes ``omega`` grow linearly in ``u``.
    """

    num: np.ndarray
    den: np.ndarray
    base_point: float = 0.0
    physical: bool = False

    def __post_init__(self):
        num = np.atleast_1d(np.array(self.num, dtype=complex))
        den = np.atleast_1d(np.array(self.den, dtype=complex))
        if num.ndim != 1 or den.ndim != 1 or num.size == 0 or den.size == 0:
            raise ShapeMismatch("coefficient arrays must be non-empty vectors")
        if den[0] == 0:
            raise DegenerateDenominator("q0 vanishes; cannot normalise to 1")
        if den[0] != 1:
            num = num / den[0]
            den = den / den[0]
            den[0] = 1.0
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "base_point", float(self.base_point))
        if self.base_point < 0:
            raise DomainError("base point must be >= 0")

    @property
    def degree(self):
        return max(self.num.size, self.den.size) - 1

    def __call__(self, u):
        return rational_eval(self, u)

    def real_coeffs(self):
        """Real parts of (num, den); raises if imaginary parts are not negligible."""
        for arr in (self.num, self.den):
            scale = max(1e-300, float(np.max(np.abs(arr))))
            if np.max(np.abs(arr.imag)) > PHYSICAL_IMAG_TOL * scale:
                raise NonPhysical("coefficients carry non-negligible imaginary parts")
        return self.num.real.copy(), self.den.real.copy()

    def as_physical(self, u_max, n=4096):
        """Return a copy flagged ``physical`` after checking ``[0, u_max]``."""
        check_physical(self, u_max, n)
        return RationalDispersion(self.num, self.den, self.base_point, True)


@dataclass(frozen=True)
class EliminationTrace:
    """Effective diagonal after each scalar Schur step, last field first."""

    steps: tuple
    final_omega: complex


@dataclass(frozen=True)
class PolynomialPair:
    """Parent-Hamiltonian polynomials with ``b(u) / a(u) = omega(u)^2``."""

    a_poly: np.ndarray
    b_poly: np.ndarray


# --------------------------------------------------------------------------
# dispersion by linear solve


def _check_u(u):
    u = float(u)
    if not np.isfinite(u) or u < 0:
        raise DomainError(f"u = k^2 must be a finite non-negative number, got {u}")
    return u


def eval_dispersion_schur(P: GaussianParams, u: float) -> complex:
    """``c + 1/2 w^T M^{-1} w`` with ``M = A + Z u``, ``w = a + z u``.

    The block is Jacobi-equilibrated before the solve; the condition
    estimate of the equilibrated block decides numerical singularity.  At a
    point where ``w = 0`` and ``M`` is singular (``u = 0`` for chain
    ansaetze) the continuity value ``c`` is returned.
    """
    u = _check_u(u)
    M = P.block(u)
    w = P.source(u)
    diag = np.abs(np.diag(M))
    s = np.where(diag > 0, 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0)), 1.0)
    Ms = M * np.outer(s, s)
    ws = w * s
    cond = np.linalg.cond(Ms)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        if np.all(w == 0):
            return complex(P.c)
        raise SingularSystem(f"virtual block singular at u={u} (cond ~ {cond:.3g})")
    x = np.linalg.solve(Ms, ws)
    return complex(P.c + 0.5 * ws @ x)


def dispersion_many(P: GaussianParams, u) -> np.ndarray:
    """Vectorised ``omega_D`` on an array of ``u`` (batched solve or chain kernel)."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise DomainError("u = k^2 must be non-negative")
    if P.is_chain():
        return _chain_many(P, u)
    M = P.A[None, :, :] + P.Z[None, :, :] * u.reshape(-1, 1, 1)
    w = P.a[None, :] + P.z[None, :] * u.reshape(-1, 1)
    zero_src = np.all(w == 0, axis=1)
    out = np.full(u.size, complex(P.c))
    live = ~zero_src
    if np.any(live):
        try:
            x = np.linalg.solve(M[live], w[live][..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from exc
        out[live] = P.c + 0.5 * np.einsum("ij,ij->i", w[live], x)
    return out.reshape(u.shape)


def _chain_many(P, u):
    D = P.D
    idx = np.arange(D - 1)
    out = kernels.chain_omega(
        np.diag(P.A), np.diag(P.Z), P.A[idx, idx + 1], P.Z[idx, idx + 1],
        P.a, P.z, P.c, u,
    )
    bad = ~np.isfinite(out)
    if np.any(bad):
        # pivots vanish only where the source also vanishes (k = 0 continuity)
        src_zero = np.array([np.all(P.source(x) == 0) for x in u.reshape(-1)[bad.reshape(-1)]])
        if not np.all(src_zero):
            raise SingularSystem("vanishing pivot in chain elimination")
        out = np.where(bad, complex(P.c), out)
    return out


# --------------------------------------------------------------------------
# chain elimination


def eliminate_chain(P: GaussianParams, u: float) -> EliminationTrace:
    """Integrate out the virtual fields of a chain ansatz one at a time.

    Fields are removed from ``alpha = D`` down to ``alpha = 1``.  Removing
    field ``alpha`` with effective diagonal ``G`` shifts the neighbouring
    diagonal by ``-M[alpha-1, alpha]^2 / G`` and the neighbouring source by
    ``-M[alpha-1, alpha] w_alpha / G``, and adds ``w_alpha^2 / (2 G)`` to the
    physical coefficient.
    """
    u = _check_u(u)
    if u == 0:
        raise DomainError("chain elimination needs u > 0")
    if not P.is_chain():
        raise TopologyError("A + Z u is not tridiagonal")
    M = P.block(u)
    w = P.source(u).copy()
    diag = np.diag(M).copy()
    scale = max(1.0, float(np.max(np.abs(M))))
    acc = complex(P.c)
    steps = []
    for alpha in range(P.D - 1, -1, -1):
        g = diag[alpha]
        if abs(g) <= 1e-14 * scale:
            raise SingularSystem(f"vanishing effective diagonal at alpha={alpha + 1}")
        steps.append((alpha + 1, complex(g)))
        acc += 0.5 * w[alpha] ** 2 / g
        if alpha > 0:
            b = M[alpha - 1, alpha]
            diag[alpha - 1] -= b * b / g
            w[alpha - 1] -= b * w[alpha] / g
    return EliminationTrace(tuple(steps), acc)


def derive_cf_params(m: float, D: int) -> GaussianParams:
    """Chain parameters whose dispersion is the depth-``D`` continued fraction.

    ``omega_D(u) = m + u/(2m + u/(2m + ... + u/(2m)))`` identically in ``u``.
    The block ``A + Z u`` is tridiagonal with diagonal ``2m u`` on odd and
    ``2m`` on even (1-based) indices, ``a = 0``, ``z = sqrt(2) e_1``, ``c = m``.

    The off-diagonal follows from the chain recursion
    ``G_alpha = M_alpha,alpha - M_alpha,alpha+1^2 / G_alpha+1``: requiring
    ``G_odd = u T`` and ``G_even = T`` for the continued-fraction tails ``T``
    forces ``M_alpha,alpha+1^2 = -u^2``, i.e. ``Z_alpha,alpha+1 = i``.
    Both parities of ``D`` are supported.
    """
    if not m > 0:
        raise DomainError("mass must be positive")
    D = int(D)
    if D < 1:
        raise DomainError("depth must be >= 1")
    A = np.zeros((D, D), dtype=complex)
    Z = np.zeros((D, D), dtype=complex)
    for i in range(D):
        if i % 2 == 0:  # 1-based odd
            Z[i, i] = 2.0 * m
        else:
            A[i, i] = 2.0 * m
    for i in range(D - 1):
        Z[i, i + 1] = Z[i + 1, i] = 1j
    z = np.zeros(D)
    z[0] = np.sqrt(2.0)
    return GaussianParams(D, Z, A, z, np.zeros(D), m, m=m)


# --------------------------------------------------------------------------
# rational reconstruction


def _trim_high(p, tol):
    p = np.asarray(p)
    scale = np.max(np.abs(p)) if p.size else 0.0
    n = p.size
    while n > 1 and abs(p[n - 1]) <= tol * scale:
        n -= 1
    return p[:n]


def poly_gcd(p, q, tol=1e-10):
    """Monic numerical GCD of two ascending-order coefficient arrays.

    Euclid's algorithm with remainders truncated at ``tol`` relative to the
    dividend.  Returns ``[1]`` for coprime inputs.
    """
    a = _trim_high(np.asarray(p, dtype=complex), tol)
    b = _trim_high(np.asarray(q, dtype=complex), tol)
    if a.size < b.size:
        a, b = b, a
    a = a / np.max(np.abs(a))
    if not np.any(b):
        return a / a[-1]
    b = b / np.max(np.abs(b))
    while b.size > 1:
        _, r = np.polydiv(a[::-1], b[::-1])
        r = r[::-1]
        if r.size == 0 or np.max(np.abs(r)) <= tol * max(1.0, np.max(np.abs(a))):
            return b / b[-1]
        r = _trim_high(r, tol)
        a, b = b, r / np.max(np.abs(r))
    return np.ones(1, dtype=complex)


def _divide_exact(p, g, tol):
    quo, rem = np.polydiv(np.asarray(p)[::-1], np.asarray(g)[::-1])
    scale = max(1e-300, float(np.max(np.abs(p))))
    if rem.size and np.max(np.abs(rem)) > 1e3 * tol * scale:
        raise InterpolationError("common factor does not divide exactly")
    return quo[::-1]


def _poly_eval(c, u):
    acc = np.zeros_like(np.asarray(u, dtype=complex))
    for coef in c[::-1]:
        acc = acc * u + coef
    return acc


def cancel_common_factors(num, den, tol=1e-10):
    """Remove common polynomial factors of ``num / den`` (ascending coefficients).

    Common roots at ``u = 0`` are stripped first by counting negligible
    low-order coefficients (they are typically multiple and would defeat a
    root-based or Euclidean test); remaining common factors are removed with
    ``poly_gcd``.
    """
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=complex)
    sn = np.max(np.abs(num)) if np.any(num) else 1.0
    sd = np.max(np.abs(den))
    k = 0
    while (k < num.size - 1 and k < den.size - 1
           and abs(num[k]) <= tol * sn and abs(den[k]) <= tol * sd):
        k += 1
    num, den = num[k:], den[k:]
    if not np.any(num):
        return np.zeros(1, dtype=complex), np.ones(1, dtype=complex)
    g = poly_gcd(num, den, tol)
    if g.size > 1:
        num = _divide_exact(num, g, tol)
        den = _divide_exact(den, g, tol)
    return _trim_high(num, 1e-13), _trim_high(den, 1e-13)


def _natural_scale(P):
    za = np.linalg.norm(P.Z)
    aa = np.linalg.norm(P.A)
    if za > 0 and aa > 0:
        return float(aa / za)
    return 1.0


def _determinant_samples(P, u):
    D = P.D
    det = np.empty(u.size, dtype=complex)
    quad = np.empty(u.size, dtype=complex)
    border = np.zeros((D + 1, D + 1), dtype=complex)
    for j, uj in enumerate(u):
        M = P.block(uj)
        w = P.source(uj)
        det[j] = np.linalg.det(M)
        border[:D, :D] = M
        border[:D, D] = w
        border[D, :D] = w
        border[D, D] = 0.0
        # bordered determinant: det([[M, w], [w^T, 0]]) = -w^T adj(M) w
        quad[j] = -np.linalg.det(border)
    return det, quad


def params_to_rational(P: GaussianParams) -> RationalDispersion:
    """Exact rational form of ``omega_D`` from determinants only.

    ``det(A + Z u)`` (degree ``D``) and ``w^T adj(A + Z u) w`` (degree
    ``D + 1``, obtained as minus a bordered determinant) are sampled at
    ``2D + 2`` Chebyshev points of ``u in [-s, s]`` (``s`` a natural scale of
    ``P``), fitted by least squares in the Chebyshev basis and converted to
    monomial coefficients.  Common factors are then cancelled and the
    denominator normalised to ``q0 = 1``.  No linear solve is involved, so
    this route is independent of ``eval_dispersion_schur``.
    """
    D = P.D
    scale = _natural_scale(P)
    for n_pts in (2 * D + 2, 4 * D + 4):
        s = np.cos(np.pi * (np.arange(n_pts) + 0.5) / n_pts)
        det, quad = _determinant_samples(P, scale * s)
        num_s = P.c * det + 0.5 * quad
        cheb_den = np.polynomial.chebyshev.chebfit(s, det, D)
        cheb_num = np.polynomial.chebyshev.chebfit(s, num_s, D + 1)
        resid = max(
            np.max(np.abs(np.polynomial.chebyshev.chebval(s, cheb_den) - det))
            / max(1e-300, np.max(np.abs(det))),
            np.max(np.abs(np.polynomial.chebyshev.chebval(s, cheb_num) - num_s))
            / max(1e-300, np.max(np.abs(num_s))),
        )
        if resid < 1e-8:
            break
    else:
        raise InterpolationError(f"polynomial fit residual {resid:.3g}")
    den_s = np.polynomial.chebyshev.cheb2poly(cheb_den)
    num_s = np.polynomial.chebyshev.cheb2poly(cheb_num)
    if np.max(np.abs(den_s)) == 0 or np.max(np.abs(det)) <= 1e-300:
        raise DegenerateDenominator("det(A + Z u) vanishes identically")
    num_s, den_s = cancel_common_factors(num_s, den_s)
    if abs(den_s[0]) <= 1e-12 * np.max(np.abs(den_s)):
        raise DegenerateDenominator("omega_D has a pole at u = 0")
    powers_n = scale ** -np.arange(num_s.size, dtype=float)
    powers_d = scale ** -np.arange(den_s.size, dtype=float)
    return RationalDispersion(num_s * powers_n, den_s * powers_d)


# --------------------------------------------------------------------------
# rational evaluation and the parent-Hamiltonian split


def rational_eval(R: RationalDispersion, u):
    """Horner evaluation of ``num(u) / den(u)`` (scalar or array)."""
    scalar = np.ndim(u) == 0
    uu = np.asarray(u, dtype=float)
    if np.any(uu < 0):
        raise DomainError("u = k^2 must be non-negative")
    p = _poly_eval(R.num, uu)
    q = _poly_eval(R.den, uu)
    if np.any(np.abs(q) < 1e-14 * np.max(np.abs(R.den))):
        raise PoleError("rational dispersion evaluated at a pole")
    out = p / q
    return complex(out) if scalar else out


def check_physical(R: RationalDispersion, u_max, n=4096):
    """Raise ``NonPhysical`` unless ``R`` is real and positive on ``[0, u_max]``."""
    u = np.linspace(0.0, float(u_max), n)
    try:
        w = rational_eval(R, u)
    except PoleError as exc:
        raise NonPhysical(str(exc)) from exc
    if np.any(np.abs(w.imag) >= PHYSICAL_IMAG_TOL * np.abs(w.real)) or np.any(w.real <= 0):
        raise NonPhysical("dispersion is not real and positive on the domain")


def parent_hamiltonian_split(R: RationalDispersion) -> PolynomialPair:
    """Polynomials ``a, b`` of minimal degree with ``b / a = omega^2``.

    Common factors of ``num`` and ``den`` are cancelled first (GCD with
    coefficient tolerance 1e-10); then ``a = den^2`` and ``b = num^2`` with
    the denominator scaled monic.
    """
    if not R.physical:
        raise NonPhysical("parent Hamiltonian split needs a dispersion flagged physical")
    num, den = R.real_coeffs()
    num, den = cancel_common_factors(num, den, 1e-10)
    num, den = num.real, den.real
    lead = den[-1]
    num, den = num / lead, den / lead
    return PolynomialPair(np.convolve(den, den), np.convolve(num, num))
