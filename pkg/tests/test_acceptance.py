"""End-to-end acceptance checks; each prints one PASS/FAIL line."""
import math

import numpy as np
import pytest

from cpeps.approximants import cf_truncate, omega_free, pade_sqrt
from cpeps.ctns_bridge import (
    CTNSGaussianData,
    cpeps_to_ctns,
    ctns_to_cpeps_kernel,
    data_max_abs_diff,
    roundtrip_error,
)
from cpeps.fidelity import (
    RescaledDispersion,
    finite_lattice_log_fidelity,
    per_site_log_fidelity,
    unit_cutoff_family,
    universal_per_site,
)
from cpeps.gaussian_core import (
    RationalDispersion,
    derive_cf_params,
    eval_dispersion_schur,
    params_to_rational,
    parent_hamiltonian_split,
    rational_eval,
)
from cpeps.lattice_symmetry import (
    QuadraticKernel,
    convergence_rows,
    global_symmetry_check,
    isotropic_kernel,
    richardson_ratios,
    rotation_invariance_check,
    u1_representation,
)
from cpeps.optimizer import (
    OptimizationProblem,
    initial_coefficients,
    optimize_universal_per_site,
    universal_value,
)
from helpers import random_params

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n:2d}: {detail}")
        assert ok, detail
    return emit


def hand_cf(m, depth, u):
    # independent backward recursion of m + u/(2m + u/(2m + ...))
    tail = 0.0
    for _ in range(depth - 1):
        tail = u / (2 * m + tail)
    return m + u / (2 * m + tail) if depth else m


def test_criterion_01_cf_convergence(report):
    expected = [1.5, 1.4, 1.416667, 1.413793, 1.414286, 1.414201]
    vals = [cf_truncate(1.0, n, 1.0) for n in range(1, 7)]
    errs = [v - math.sqrt(2) for v in vals]
    ok = all(abs(v - e) < 1e-6 and abs(v - hand_cf(1.0, n, 1.0)) < 1e-6
             for n, (v, e) in enumerate(zip(vals, expected), start=1))
    ok = ok and abs(errs[-1]) < 1e-4
    ok = ok and all(a * b < 0 for a, b in zip(errs, errs[1:]))
    report(1, ok, f"convergents {np.round(vals, 6).tolist()}, depth-6 error {abs(errs[-1]):.2e}")


def test_criterion_02_pade_equals_even_cf(report):
    worst = 0.0
    for D in range(1, 5):
        R = pade_sqrt(1.0, 0.0, D)
        S = params_to_rational(derive_cf_params(1.0, 2 * D))
        pn, pd = R.num / R.den[0], R.den / R.den[0]
        sn, sd = S.num / S.den[0], S.den / S.den[0]
        if pn.size != sn.size or pd.size != sd.size:
            worst = math.inf
            break
        worst = max(worst, np.max(np.abs(pn - sn)), np.max(np.abs(pd - sd)))
    report(2, worst < 1e-10, f"max coefficient difference {worst:.2e}")


def test_criterion_03_cross_route(report):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(200):
        P = random_params(rng)
        R = params_to_rational(P)
        for u in rng.uniform(0.0, 10.0, 10):
            s = eval_dispersion_schur(P, u)
            worst = max(worst, abs(rational_eval(R, u) - s) / abs(s))
    report(3, worst < 1e-9, f"worst relative disagreement {worst:.2e}")


def test_criterion_04_null_case(report):
    vals = [abs(per_site_log_fidelity(lambda u: omega_free(1.0, u), 1.0, d, 10.0)) for d in (1, 2, 3)]
    report(4, max(vals) < 1e-10, f"max |per_site| over d=1,2,3: {max(vals):.2e}")


def test_criterion_05_monotone_improvement(report):
    vals = [per_site_log_fidelity(params_to_rational(derive_cf_params(1.0, D)), 1.0, 1, 10.0)
            for D in range(1, 6)]
    ok = all(b > a for a, b in zip(vals, vals[1:])) and vals[-1] < 0
    report(5, ok, "per_site " + ", ".join(f"{v:.4e}" for v in vals))


def test_criterion_06_universal_stability(report):
    tn, td = np.array([0.1, 7.5]), np.array([1.0, 25.0])
    d = 3
    u = universal_per_site(RescaledDispersion(tn, td), d)
    diffs = [abs(per_site_log_fidelity(unit_cutoff_family(tn, td, L), 1.0, d, L) - u)
             for L in (10.0, 20.0, 40.0)]
    ratios = [a / b for a, b in zip(diffs, diffs[1:])]
    ok = all(3.2 <= q <= 4.8 for q in ratios)
    report(6, ok, f"d={d}, reduction per doubling {ratios[0]:.3f}, {ratios[1]:.3f}")


def test_criterion_07_anderson_linearity(report):
    R = params_to_rational(derive_cf_params(1.0, 2))
    t1 = finite_lattice_log_fidelity(R, 1.0, 1, 10.0, 128)
    t2 = finite_lattice_log_fidelity(R, 1.0, 1, 10.0, 256)
    ratio = t2 / t1
    report(7, abs(ratio - 2.0) < 1e-3, f"total(2N)/total(N) = {ratio:.6f}")


def test_criterion_08_lattice_continuum_limit(report):
    L = 6.4
    rows = convergence_rows(derive_cf_params(1.0, 2), 1, [0.2, 0.1, 0.05], 2 * math.pi / L, L)
    ratios = richardson_ratios([r[4] for r in rows])
    ok = all(3.3 <= q <= 4.7 for q in ratios)
    report(8, ok, "Richardson ratios " + ", ".join(f"{q:.4f}" for q in ratios))


def test_criterion_09_symmetry_checks(report):
    P = derive_cf_params(1.0, 2)
    iso = all(rotation_invariance_check(isotropic_kernel(P, d), d) for d in (2, 3))
    K = isotropic_kernel(P, 2)
    H = K.H.copy()
    for leg in (0, 1):
        sl = K.virtual_slice(0, leg)
        H[sl, sl] *= 1.1
    broken = not rotation_invariance_check(QuadraticKernel(2, K.D, H), 2)
    rng = np.random.default_rng(1)
    B = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    Hc = B.conj().T @ B
    S = np.zeros((5, 5), dtype=complex)
    conserving = global_symmetry_check(QuadraticKernel(2, 1, Hc, S), u1_representation())
    S[-1, -1] = 0.3
    violating = not global_symmetry_check(QuadraticKernel(2, 1, Hc, S), u1_representation())
    ok = iso and broken and conserving and violating
    report(9, ok, f"isotropic {iso}, perturbed rejected {broken}, "
                  f"U(1) kept {conserving}, charge-2 rejected {violating}")


def test_criterion_10_ctns_roundtrip(report):
    rng = np.random.default_rng(10)
    rt, disp = 0.0, 0.0
    for _ in range(50):
        D = int(rng.integers(1, 5))
        V = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
        kin = rng.normal(size=(D, D))
        data = CTNSGaussianData(V + V.T, rng.normal(size=D) + 1j * rng.normal(size=D), kin + kin.T,
                                rng.normal(size=D), None, rng.uniform(0.5, 2.0))
        rt = max(rt, data_max_abs_diff(data, cpeps_to_ctns(ctns_to_cpeps_kernel(data))))
        P = random_params(rng)
        rt = max(rt, roundtrip_error(P))
        Q = ctns_to_cpeps_kernel(cpeps_to_ctns(P))
        for u in rng.uniform(0.0, 10.0, 10):
            s = eval_dispersion_schur(P, u)
            disp = max(disp, abs(eval_dispersion_schur(Q, u) - s) / abs(s))
    report(10, rt < 1e-12 and disp < 1e-10,
           f"round-trip error {rt:.2e}, dispersion error {disp:.2e}")


def test_criterion_11_optimizer_sanity(report):
    P = OptimizationProblem(1, 1)
    res = optimize_universal_per_site(P, "pade")
    baselines = {init: universal_value(P, *initial_coefficients(P, init)) for init in ("pade", "cf")}
    num, den = res.best_coeffs
    again = universal_per_site(RescaledDispersion(np.asarray(num), np.asarray(den)), 1)
    ok = all(res.best_value >= v for v in baselines.values()) and abs(again - res.best_value) < 1e-9
    report(11, ok, f"best {res.best_value:.8f}, pade {baselines['pade']:.8f}, "
                   f"cf {baselines['cf']:.8f}, recomputed diff {abs(again - res.best_value):.1e}")


def test_criterion_12_parent_hamiltonian(report):
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(20):
        deg = int(rng.integers(0, 4))
        # negative real roots keep both polynomials positive on u >= 0
        num = np.polynomial.polynomial.polyfromroots(-rng.uniform(0.1, 10.0, deg)) * rng.uniform(0.5, 2)
        den = np.polynomial.polynomial.polyfromroots(-rng.uniform(0.1, 10.0, deg))
        R = RationalDispersion(num, den, physical=True)
        pp = parent_hamiltonian_split(R)
        for u in rng.uniform(0.0, 20.0, 50):
            w = rational_eval(R, u).real
            a = np.polynomial.polynomial.polyval(u, pp.a_poly)
            b = np.polynomial.polynomial.polyval(u, pp.b_poly)
            worst = max(worst, abs(w * w * a - b) / abs(b))
    report(12, worst < 1e-9, f"worst relative residual {worst:.2e}")
