"""Variational maximisation of the universal per-site log fidelity.

The variables are the dimensionless coefficients of
``omega_tilde(kbar) = (p0 + p1 kbar^2 + ...) / (1 + q1 kbar^2 + ...)`` at fixed
degree ``D`` (``2D + 1`` free numbers, ``q0 = 1`` fixed).  The search is a
Nelder-Mead simplex on the negated objective plus a quadratic penalty that
keeps ``omega_tilde`` and its denominator positive on ``(0, 1]``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .approximants import pade_sqrt
from .errors import DomainError, InfeasibleStart, ObjectiveFailure, QuadratureFailure
from .fidelity import RescaledDispersion, rescale_to_unit_cutoff, universal_per_site
from .gaussian_core import derive_cf_params, params_to_rational

CHECK_GRID = np.arange(1, 257) / 256.0
PENALTY = 1e3
REFERENCE_LAMBDA = 10.0
REFERENCE_MASS = 1.0
RESULT_HEADER = ("d,D,best_value,init_value,iterations,converged,seed,restarts,"
                 "boundary_margin,tilde_num,tilde_den")
TRACE_HEADER = "restart,iteration,value,best_value"


@dataclass(frozen=True)
class OptimizationProblem:
    """Maximise the universal term in ``d`` dimensions at degree ``D``."""

    d: int
    D: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise DomainError("spatial dimension must be 1, 2 or 3")
        if int(self.D) < 0:
            raise DomainError("D must be >= 0")

    @property
    def n_vars(self):
        return 2 * self.D + 1

    def pack(self, num, den):
        num = np.asarray(num, dtype=float)
        den = np.asarray(den, dtype=float)
        if num.size != self.D + 1 or den.size != self.D + 1:
            raise DomainError(f"coefficient arrays must have length {self.D + 1}")
        return np.concatenate([num / den[0], den[1:] / den[0]])

    def unpack(self, x):
        x = np.asarray(x, dtype=float)
        return x[: self.D + 1].copy(), np.concatenate([[1.0], x[self.D + 1:]])


@dataclass
class OptimizationResult:
    best_coeffs: tuple
    best_value: float
    iterations: int
    converged: bool
    seed: int
    init_value: float = float("nan")
    restarts: int = 1
    boundary_margin: float = float("nan")
    trace: list = field(default_factory=list, repr=False)

    def csv_row(self, problem: OptimizationProblem):
        num, den = self.best_coeffs
        return ",".join([
            str(problem.d), str(problem.D), f"{self.best_value:.17g}", f"{self.init_value:.17g}",
            str(self.iterations), str(self.converged).lower(), str(self.seed), str(self.restarts),
            f"{self.boundary_margin:.17g}",
            " ".join(f"{v:.17g}" for v in num), " ".join(f"{v:.17g}" for v in den),
        ])

    def trace_rows(self):
        return [f"{r},{i},{v:.17g},{b:.17g}" for r, i, v, b in self.trace]


def _grid_values(num, den):
    u = CHECK_GRID * CHECK_GRID
    p = np.polynomial.polynomial.polyval(u, num)
    q = np.polynomial.polynomial.polyval(u, den)
    return p, q


def constraint_violation(num, den):
    """``int (max(0, -omega))^2 + int (max(0, -den))^2`` on the 256-point check grid."""
    p, q = _grid_values(num, den)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = p / q
    w = np.where(np.isfinite(w), w, -1.0)
    return float(np.mean(np.maximum(0.0, -w) ** 2) + np.mean(np.maximum(0.0, -q) ** 2))


def boundary_margin(num, den):
    """Smallest value of ``omega_tilde`` on the check grid (distance to the constraint)."""
    p, q = _grid_values(num, den)
    return float(np.min(p / q))


def is_admissible(coeffs, d=None) -> bool:
    """True iff the denominator and ``omega_tilde`` are positive on the check grid.

    ``coeffs`` is a ``(num, den)`` pair or a ``RescaledDispersion``; ``d`` is
    accepted for symmetry with the objective and does not enter.
    """
    if isinstance(coeffs, RescaledDispersion):
        num, den = coeffs.tilde_num, coeffs.tilde_den
    else:
        num, den = coeffs
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    if num.size == 0 or den.size == 0:
        return False
    p, q = _grid_values(num, den)
    if np.any(q <= 0) or not np.all(np.isfinite(q)):
        return False
    w = p / q
    return bool(np.all(np.isfinite(w)) and np.all(w > 0))


def universal_value(problem: OptimizationProblem, num, den):
    """Universal per-site value of the rescaled dispersion ``num / den``."""
    return universal_per_site(RescaledDispersion(np.asarray(num, float), np.asarray(den, float)),
                              problem.d)


def penalised_objective(problem: OptimizationProblem, x):
    """Negated universal term plus ``1e3 * violation``; ``inf`` where undefined."""
    num, den = problem.unpack(x)
    viol = constraint_violation(num, den)
    if viol > 0 or not is_admissible((num, den)):
        # infeasible: the penalty alone steers back (quadrature near poles is unreliable)
        return PENALTY * max(viol, 1e-300) + 1.0, False
    try:
        value = universal_value(problem, num, den)
    except QuadratureFailure:
        return math.inf, False
    if not math.isfinite(value):
        return math.inf, False
    return -value, True


def initial_coefficients(problem: OptimizationProblem, init):
    """Start coefficients for ``init`` in ``{'pade', 'cf'}`` or a ``(num, den)`` pair.

    ``pade`` is the [D/D] Padé approximant of ``sqrt(1 + k^2)`` about
    ``k^2 = Lambda^2 / 4`` and ``cf`` the depth-``2D`` continued fraction, both
    rescaled at the reference cutoff ``Lambda = 10`` (mass units).
    """
    if isinstance(init, str):
        if init == "pade":
            R = pade_sqrt(REFERENCE_MASS, REFERENCE_LAMBDA ** 2 / 4.0, problem.D)
        elif init == "cf":
            if problem.D == 0:
                Rt = RescaledDispersion(np.array([REFERENCE_MASS / REFERENCE_LAMBDA]), np.ones(1),
                                        REFERENCE_LAMBDA)
                return Rt.tilde_num, Rt.tilde_den
            R = params_to_rational(derive_cf_params(REFERENCE_MASS, 2 * problem.D))
        else:
            raise DomainError(f"unknown init {init!r}")
        Rt = rescale_to_unit_cutoff(R, REFERENCE_LAMBDA)
        num, den = Rt.tilde_num, Rt.tilde_den
    elif isinstance(init, RescaledDispersion):
        num, den = init.tilde_num, init.tilde_den
    else:
        num, den = init
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    # pad to the problem degree (the CF route may return fewer coefficients)
    num = np.concatenate([num, np.zeros(problem.D + 1 - num.size)]) if num.size <= problem.D + 1 else num
    den = np.concatenate([den, np.zeros(problem.D + 1 - den.size)]) if den.size <= problem.D + 1 else den
    if num.size != problem.D + 1 or den.size != problem.D + 1:
        raise DomainError("initial coefficients do not match D")
    return num, den / den[0]


def _initial_simplex(x0, rng):
    n = x0.size
    steps = np.where(x0 != 0, 0.05 * np.abs(x0), 0.00025)
    if rng is not None:
        steps = steps * rng.uniform(0.5, 1.5, size=n) * rng.choice([-1.0, 1.0], size=n)
    simplex = np.repeat(x0[None, :], n + 1, axis=0)
    for i in range(n):
        simplex[i + 1, i] += steps[i]
    return simplex


def _nelder_mead(problem, x0, rng, max_iter, tol, restart):
    """One simplex run.  Returns ``(best_x, best_value, iterations, converged, trace)``."""
    simplex = _initial_simplex(x0, rng)
    n = x0.size
    evals = [penalised_objective(problem, x) for x in simplex]
    fvals = np.array([e[0] for e in evals])
    best_x, best_f = x0.copy(), penalised_objective(problem, x0)[0]
    for x, (f, ok) in zip(simplex, evals):
        if ok and f < best_f:
            best_x, best_f = x.copy(), f
    trace = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        diam = float(np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)))
        if diam < tol:
            converged = True
            it -= 1
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr, okr = penalised_objective(problem, xr)
        candidates = [(xr, fr, okr)]
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe, oke = penalised_objective(problem, xe)
            candidates.append((xe, fe, oke))
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc, okc = penalised_objective(problem, xc)
            candidates.append((xc, fc, okc))
            if fc < min(fr, fvals[-1]):
                simplex[-1], fvals[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    fi, oki = penalised_objective(problem, simplex[i])
                    fvals[i] = fi
                    candidates.append((simplex[i].copy(), fi, oki))
        for x, f, ok in candidates:
            if ok and f < best_f:
                best_x, best_f = np.array(x, copy=True), f
        trace.append((restart, it, -float(np.min(fvals)), -best_f))
    return best_x, best_f, it, converged, trace


def optimize_universal_per_site(problem: OptimizationProblem, init, max_iter=2000, tol=1e-8,
                                restarts=1, seed=0, threads=1) -> OptimizationResult:
    """Maximise ``universal_per_site`` over the rescaled coefficients.

    ``init`` is ``'pade'``, ``'cf'``, a ``RescaledDispersion`` or a
    ``(num, den)`` pair and must be admissible.  Run 0 starts from the plain
    axis simplex; every further restart jitters the simplex with a generator
    spawned from ``seed``, so the result for ``restarts = R`` is a prefix of
    the result for ``R + 1`` and never worse.  Restarts can run on ``threads``
    workers; the merge picks the highest value with the lowest restart index
    as tie-break, so the outcome does not depend on ``threads``.

    The best point is tracked over every feasible evaluation, so
    ``best_value`` is at least the value at ``init``.  ``converged`` reports
    whether the simplex diameter fell below ``tol`` in the winning run.
    """
    num0, den0 = initial_coefficients(problem, init)
    if not is_admissible((num0, den0)):
        raise InfeasibleStart("initial coefficients violate positivity on (0, 1]")
    x0 = problem.pack(num0, den0)
    try:
        init_value = universal_value(problem, num0, den0)
    except QuadratureFailure as exc:
        raise ObjectiveFailure(str(exc)) from exc
    restarts = max(1, int(restarts))
    children = np.random.SeedSequence(int(seed)).spawn(restarts)

    def run(r):
        rng = None if r == 0 else np.random.default_rng(children[r])
        return _nelder_mead(problem, x0, rng, int(max_iter), float(tol), r)

    if threads and threads > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as pool:
            runs = list(pool.map(run, range(restarts)))
    else:
        runs = [run(r) for r in range(restarts)]

    best_r = 0
    for r, res in enumerate(runs):
        if res[1] < runs[best_r][1]:
            best_r = r
    best_x, best_f, iterations, converged, _ = runs[best_r]
    num, den = problem.unpack(best_x)
    trace = [row for res in runs for row in res[4]]
    return OptimizationResult(
        best_coeffs=(num, den),
        best_value=-best_f,
        iterations=iterations,
        converged=converged,
        seed=int(seed),
        init_value=init_value,
        restarts=restarts,
        boundary_margin=boundary_margin(num, den),
        trace=trace,
    )
