"""Lattice field-PEPS in momentum space and its symmetry checks.

On a periodic hypercubic lattice of spacing ``epsilon`` the link states pair
the virtual field ``eta_i`` at ``x`` with ``chi_i`` at ``x - epsilon e_i``.
In momentum space that pairing is a phase, and after eliminating the
virtual fields the only trace of the lattice is the replacement

    k^2  ->  lambda(k) = sum_i (2 - 2 cos(k_i epsilon)) / epsilon^2

in the continuum dispersion.  The dimensionless bare couplings approach the
continuum ones through ``renormalize_couplings``.

Symmetry checks act on a ``QuadraticKernel``: the quadratic form of a single
fiducial site over the variables ``[chi_1, eta_1, ..., chi_d, eta_d, phi]``
(each virtual entry a block of ``D`` fields).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, NonUnitaryRep, ShapeMismatch
from .gaussian_core import GaussianParams, dispersion_many, eval_dispersion_schur

CHECK_TOL = 1e-12
CONVERGENCE_HEADER = "epsilon,k,omega_lat,omega_cont,abs_err"


def field_dimension(d):
    """Mass dimension ``(d - 1) / 2`` of a scalar field in ``d`` spatial dimensions."""
    return (d - 1) / 2


def _exponents(d, dim_chi):
    phi = field_dimension(d)
    return {
        "Z": 2 - d + 2 * dim_chi,
        "A": 2 * dim_chi - d,
        "a": dim_chi + phi - d,
        "z": 2 + dim_chi + phi - d,
        "c": 2 * phi - d,
    }


def renormalize_couplings(bare: GaussianParams, epsilon, d, dim_chi=None) -> GaussianParams:
    """Continuum parameters from dimensionless bare lattice couplings.

    ``Z = eps^(2-d+2[chi]) Z0``, ``A = eps^(2[chi]-d) A0``,
    ``a = eps^([chi]+[phi]-d) a0``, ``z = eps^(2+[chi]+[phi]-d) z0`` and
    ``c = eps^(2[phi]-d) c0`` with ``[phi] = (d-1)/2``.  ``dim_chi`` defaults to
    ``[phi]``.  A shift of ``dim_chi`` rescales the virtual block by
    ``eps^(2 delta)`` and the source by ``eps^delta``, which leaves the
    dispersion unchanged.

    A cubic bare coupling would scale as ``1/4 eps^(2-d+3[chi])``; it has no
    Gaussian counterpart and is not represented here.
    """
    if not epsilon > 0:
        raise DomainError("lattice spacing must be positive")
    if d not in (1, 2, 3):
        raise DomainError("spatial dimension must be 1, 2 or 3")
    if dim_chi is None:
        dim_chi = field_dimension(d)
    e = _exponents(d, dim_chi)
    eps = float(epsilon)
    return GaussianParams(
        bare.D,
        eps ** e["Z"] * bare.Z,
        eps ** e["A"] * bare.A,
        eps ** e["z"] * bare.z,
        eps ** e["a"] * bare.a,
        eps ** e["c"] * bare.c,
        m=bare.m,
    )


def bare_from_continuum(P: GaussianParams, epsilon, d, dim_chi=None) -> GaussianParams:
    """Inverse of ``renormalize_couplings``."""
    if not epsilon > 0:
        raise DomainError("lattice spacing must be positive")
    if dim_chi is None:
        dim_chi = field_dimension(d)
    e = _exponents(d, dim_chi)
    eps = float(epsilon)
    return GaussianParams(
        P.D,
        eps ** -e["Z"] * P.Z,
        eps ** -e["A"] * P.A,
        eps ** -e["z"] * P.z,
        eps ** -e["a"] * P.a,
        eps ** -e["c"] * P.c,
        m=P.m,
    )


@dataclass(frozen=True, eq=False)
class LatticeModel:
    """Periodic lattice of ``N_per_dim^d`` sites and spacing ``epsilon``.

    ``bare`` holds the dimensionless couplings; the linear size is
    ``N_per_dim * epsilon``.
    """

    d: int
    epsilon: float
    N_per_dim: int
    bare: GaussianParams
    dim_chi: Optional[float] = None

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise DomainError("spatial dimension must be 1, 2 or 3")
        if not self.epsilon > 0:
            raise DomainError("lattice spacing must be positive")
        N = int(self.N_per_dim)
        if N < 2 or N % 2:
            raise DomainError("N_per_dim must be an even integer >= 2")
        object.__setattr__(self, "N_per_dim", N)
        if self.dim_chi is None:
            object.__setattr__(self, "dim_chi", field_dimension(self.d))

    @property
    def periodic(self):
        return True

    @property
    def length(self):
        return self.N_per_dim * self.epsilon

    @classmethod
    def from_continuum(cls, P, d, epsilon, N_per_dim, dim_chi=None):
        """Model whose bare couplings renormalize back to ``P``."""
        return cls(d, epsilon, N_per_dim, bare_from_continuum(P, epsilon, d, dim_chi), dim_chi)

    def continuum_params(self):
        return renormalize_couplings(self.bare, self.epsilon, self.d, self.dim_chi)


def momentum_grid(model: LatticeModel):
    """Axis momenta ``2 pi n / (N eps)`` for ``n = -N/2 .. N/2 - 1``."""
    N = model.N_per_dim
    return 2.0 * math.pi * np.arange(-N // 2, N // 2) / (N * model.epsilon)


def lattice_symbol(k, epsilon):
    """``sum_i (2 - 2 cos(k_i eps)) / eps^2``; last axis of ``k`` runs over directions.

    Written as ``4 sin^2(k_i eps / 2) / eps^2`` to avoid cancellation at small ``k``.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    s = np.sin(0.5 * k * epsilon)
    return np.sum(4.0 * s * s, axis=-1) / (epsilon * epsilon)


def _check_on_grid(model, k):
    n = np.asarray(k, dtype=float) * model.N_per_dim * model.epsilon / (2.0 * math.pi)
    if np.any(np.abs(n - np.round(n)) > 1e-9) or np.any(n < -model.N_per_dim // 2) \
            or np.any(n > model.N_per_dim // 2):
        raise DomainError("momentum is not on the model grid")


def lattice_dispersion(model: LatticeModel, k) -> float:
    """``omega_lat(k)``: the continuum elimination evaluated at ``u = lambda(k)``.

    ``k`` is a length-``d`` vector (a scalar is accepted for ``d = 1``) of grid
    momenta; ``k_i = pi / eps`` (the zone edge) is accepted as well.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.shape != (model.d,):
        raise ShapeMismatch(f"momentum must have {model.d} components")
    _check_on_grid(model, k)
    P = model.continuum_params()
    return eval_dispersion_schur(P, float(lattice_symbol(k, model.epsilon))).real


def lattice_dispersion_many(model: LatticeModel, k):
    """Vectorised ``omega_lat`` over an ``(n, d)`` array of grid momenta."""
    k = np.asarray(k, dtype=float).reshape(-1, model.d)
    _check_on_grid(model, k)
    return dispersion_many(model.continuum_params(), lattice_symbol(k, model.epsilon)).real


def lattice_log_fidelity(model: LatticeModel, m, Lambda=None):
    """Sum of mode log overlaps of ``omega_lat`` against the lattice free vacuum.

    The free reference ``sqrt(m^2 + k^2)`` is evaluated at the continuum ``k``;
    modes with ``|k| > Lambda`` are dropped when ``Lambda`` is given.  At
    fixed ``N eps`` the sum tends to the same sum taken with the continuum
    dispersion as ``eps -> 0``.
    """
    axis = momentum_grid(model)
    grids = np.meshgrid(*([axis] * model.d), indexing="ij")
    k = np.stack([g.reshape(-1) for g in grids], axis=-1)
    u = np.sum(k * k, axis=-1)
    if Lambda is not None:
        keep = u <= Lambda * Lambda
        k, u = k[keep], u[keep]
    w = lattice_dispersion_many(model, k)
    r = np.sqrt(m * m + u)
    return float(np.sum(0.5 * np.log(2.0 * np.sqrt(w * r) / (w + r))))


def convergence_rows(P: GaussianParams, d, epsilons: Sequence[float], k, length, dim_chi=None):
    """Rows ``(epsilon, |k|, omega_lat, omega_cont, abs_err)`` at fixed linear size.

    ``N`` is chosen as ``length / epsilon`` (must be an even integer) so that
    ``k`` stays on every grid.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.size == 1 and d > 1:
        k = np.concatenate([k, np.zeros(d - 1)])
    w_cont = eval_dispersion_schur(P, float(k @ k)).real
    rows = []
    for eps in epsilons:
        N = int(round(length / eps))
        if abs(N * eps - length) > 1e-9 * length:
            raise DomainError(f"length {length} is not a multiple of epsilon {eps}")
        model = LatticeModel.from_continuum(P, d, eps, N, dim_chi)
        w_lat = lattice_dispersion(model, k)
        rows.append((float(eps), float(np.linalg.norm(k)), w_lat, w_cont, abs(w_lat - w_cont)))
    return rows


def richardson_ratios(errors):
    """Successive error ratios ``e_j / e_{j+1}``; about 4 for ``O(eps^2)`` convergence."""
    e = np.asarray(errors, dtype=float)
    return e[:-1] / e[1:]


# --------------------------------------------------------------------------
# fiducial kernels and symmetry checks


@dataclass(frozen=True, eq=False)
class QuadraticKernel:
    """Fiducial quadratic form over ``[chi_1, eta_1, ..., chi_d, eta_d, phi]``.

    ``H`` is the coefficient matrix of the bilinear part; for complex fields it
    pairs conjugate with unconjugate variables (``x^dagger H x``).  ``S``
    holds optional anomalous pairings ``x^T S x`` (``phi phi`` and the like),
    which carry charge under a phase rotation.  Each virtual entry is a block
    of ``D`` fields; the physical block has size ``r``.
    """

    d: int
    D: int
    H: np.ndarray
    S: Optional[np.ndarray] = None
    r: int = 1

    def __post_init__(self):
        n = 2 * self.d * self.D + self.r
        H = np.array(self.H, dtype=complex)
        if H.shape != (n, n):
            raise ShapeMismatch(f"kernel must be {n}x{n}, got {H.shape}")
        S = np.zeros((n, n), dtype=complex) if self.S is None else np.array(self.S, dtype=complex)
        if S.shape != (n, n):
            raise ShapeMismatch(f"pairing matrix must be {n}x{n}, got {S.shape}")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "S", S)

    @property
    def size(self):
        return self.H.shape[0]

    def virtual_slice(self, direction, leg):
        """Index slice of ``chi_direction`` (``leg=0``) or ``eta_direction`` (``leg=1``)."""
        start = (2 * direction + leg) * self.D
        return slice(start, start + self.D)

    @property
    def physical_slice(self):
        return slice(2 * self.d * self.D, self.size)

    def is_symmetric(self, tol=CHECK_TOL):
        return bool(np.max(np.abs(self.H - self.H.T)) <= tol * max(1.0, np.max(np.abs(self.H))))


def isotropic_kernel(P: GaussianParams, d) -> QuadraticKernel:
    """Embed a parameter set into a direction-blind fiducial kernel.

    With ``y_i = chi_i - eta_i`` (the link difference that becomes a
    derivative) the form is

        sum_i [ 1/2 chi_i^T A chi_i + 1/2 eta_i^T A eta_i + y_i^T Z y_i ]
        + phi z . sum_i y_i + phi a . sum_i (chi_i + eta_i) + c phi^2

    stored as a symmetric matrix.  Every term except the ``a`` coupling maps
    to itself under the pi/2 rotations; ``phi a . (chi_i + eta_i)`` flips
    sign on one direction, so kernels with ``a != 0`` are not rotation
    invariant.
    """
    D = P.D
    n = 2 * d * D + 1
    H = np.zeros((n, n), dtype=complex)
    k = QuadraticKernel(d, D, np.zeros((n, n)))
    p = n - 1
    for i in range(d):
        ci, ei = k.virtual_slice(i, 0), k.virtual_slice(i, 1)
        H[ci, ci] += 0.5 * P.A + P.Z
        H[ei, ei] += 0.5 * P.A + P.Z
        H[ci, ei] -= P.Z
        H[ei, ci] -= P.Z
        for sl, sign in ((ci, 1.0), (ei, -1.0)):
            H[sl, p] += 0.5 * (sign * P.z + P.a)
            H[p, sl] += 0.5 * (sign * P.z + P.a)
    H[p, p] = P.c
    return QuadraticKernel(d, D, H)


def rotation_map(d, D, i, j):
    """Linear map of the pi/2 rotation in the ``(i, j)`` plane on kernel variables.

    ``chi_i -> chi_j``, ``chi_j -> -eta_i``, ``eta_i -> eta_j``,
    ``eta_j -> -chi_i``; other directions and ``phi`` are untouched.  The
    returned ``R`` satisfies ``x_new = R x`` and ``R^4 = 1``.
    """
    if not (0 <= i < d and 0 <= j < d and i != j):
        raise DomainError("rotation needs two distinct directions")
    n = 2 * d * D + 1
    R = np.eye(n)
    I = np.eye(D)

    def sl(direction, leg):
        start = (2 * direction + leg) * D
        return slice(start, start + D)

    for tgt, src, sign in (
        (sl(i, 0), sl(j, 0), 1.0),
        (sl(j, 0), sl(i, 1), -1.0),
        (sl(i, 1), sl(j, 1), 1.0),
        (sl(j, 1), sl(i, 0), -1.0),
    ):
        R[tgt, :] = 0.0
        R[tgt, src] = sign * I
    return R


def rotate_kernel(kernel: QuadraticKernel, R) -> QuadraticKernel:
    """Kernel of the form ``x -> Q(R x)``."""
    return QuadraticKernel(kernel.d, kernel.D, R.T @ kernel.H @ R, R.T @ kernel.S @ R, kernel.r)


def _close(X, Y, tol):
    return bool(np.max(np.abs(X - Y), initial=0.0) <= tol * max(1.0, np.max(np.abs(Y), initial=0.0)))


def rotation_invariance_check(kernel: QuadraticKernel, d) -> bool:
    """True iff the kernel is invariant under every pi/2 rotation generator.

    Generators are the rotations in the planes ``(i, i+1)``; for ``d = 3`` the
    ``(0, 2)`` plane is checked as well.  Entries are compared within 1e-12.
    """
    if d not in (2, 3):
        raise DomainError("rotation check needs d = 2 or 3")
    if kernel.d != d or kernel.r != 1:
        raise ShapeMismatch("kernel layout does not match d")
    planes = [(0, 1)] if d == 2 else [(0, 1), (1, 2), (0, 2)]
    for i, j in planes:
        R = rotation_map(d, kernel.D, i, j)
        rot = rotate_kernel(kernel, R)
        if not (_close(rot.H, kernel.H, CHECK_TOL) and _close(rot.S, kernel.S, CHECK_TOL)):
            return False
    return True


@dataclass(frozen=True, eq=False)
class GroupRepresentation:
    """Sampled group elements as ``(physical, virtual)`` unitary matrix pairs.

    The virtual matrix either acts on the whole virtual block or on a single
    leg, in which case it is repeated on all ``2d`` legs.
    """

    elements: tuple

    def __post_init__(self):
        els = tuple((np.atleast_2d(np.asarray(p, dtype=complex)),
                     np.atleast_2d(np.asarray(v, dtype=complex))) for p, v in self.elements)
        object.__setattr__(self, "elements", els)

    def check_unitary(self, tol=CHECK_TOL):
        for p, v in self.elements:
            for U in (p, v):
                if U.shape[0] != U.shape[1] or not _close(U.conj().T @ U, np.eye(U.shape[0]), tol):
                    raise NonUnitaryRep("representation matrix is not unitary")


def u1_representation(charge_phys=1, charge_virt=1, D=1, r=1,
                      thetas=(math.pi / 7, 1.0, 2.5)) -> GroupRepresentation:
    """U(1) phases ``exp(i q theta)`` at the sampled angles and their inverses."""
    els = []
    for t in thetas:
        for s in (t, -t):
            els.append((np.exp(1j * charge_phys * s) * np.eye(r),
                        np.exp(1j * charge_virt * s) * np.eye(D)))
    return GroupRepresentation(tuple(els))


def o2_representation(thetas=(math.pi / 7, 1.0, 2.5), reflect=True) -> GroupRepresentation:
    """Doublet of O(2) on a two-component physical field and two virtual fields per leg."""
    def rot(t):
        return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])

    mats = [rot(t) for t in thetas] + [rot(-t) for t in thetas]
    if reflect:
        mats.append(np.diag([1.0, -1.0]))
    return GroupRepresentation(tuple((M, M) for M in mats))


def _full_matrix(kernel, phys, virt):
    nv = 2 * kernel.d * kernel.D
    if phys.shape != (kernel.r, kernel.r):
        raise ShapeMismatch("physical representation does not match the kernel")
    if virt.shape == (nv, nv):
        V = virt
    elif virt.shape == (kernel.D, kernel.D):
        V = np.kron(np.eye(2 * kernel.d), virt)
    else:
        raise ShapeMismatch("virtual representation does not match the kernel")
    U = np.zeros((kernel.size, kernel.size), dtype=complex)
    U[:nv, :nv] = V
    U[nv:, nv:] = phys
    return U


def global_symmetry_check(kernel: QuadraticKernel, rep: GroupRepresentation) -> bool:
    """True iff ``U^dagger H U = H`` and ``U^T S U = S`` for every sampled ``g``.

    ``U = diag(D^J(g) on the virtual block, D^j(g) on the physical block)``;
    entries are compared within 1e-12.
    """
    rep.check_unitary()
    for phys, virt in rep.elements:
        U = _full_matrix(kernel, phys, virt)
        if not _close(U.conj().T @ kernel.H @ U, kernel.H, CHECK_TOL):
            return False
        if not _close(U.T @ kernel.S @ U, kernel.S, CHECK_TOL):
            return False
    return True
