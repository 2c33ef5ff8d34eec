import numpy as np
import pytest

from cpeps.approximants import pade_sqrt
from cpeps.errors import DomainError, InfeasibleStart
from cpeps.fidelity import RescaledDispersion, rescale_to_unit_cutoff, universal_per_site
from cpeps.optimizer import (
    OptimizationProblem,
    constraint_violation,
    initial_coefficients,
    is_admissible,
    optimize_universal_per_site,
    universal_value,
)


def test_admissibility_examples():
    assert is_admissible(([0.0, 1.0], [1.0, 0.5]), 1)
    assert not is_admissible(([-1.0, 3.0], [1.0]), 1)
    for D in range(0, 5):
        Rt = rescale_to_unit_cutoff(pade_sqrt(1.0, 0.0, D), 10.0)
        assert is_admissible(Rt, 1)


def test_violation_measure():
    assert constraint_violation([0.1, 1.0], [1.0, 1.0]) == 0.0
    assert constraint_violation([-1.0], [1.0]) == pytest.approx(1.0)


def test_init_values():
    P = OptimizationProblem(1, 1)
    num, den = initial_coefficients(P, "cf")
    np.testing.assert_allclose(num, [0.1, 7.5], rtol=1e-12)
    np.testing.assert_allclose(den, [1.0, 25.0], rtol=1e-12)
    with pytest.raises(DomainError):
        initial_coefficients(P, "nope")


def test_infeasible_start():
    with pytest.raises(InfeasibleStart):
        optimize_universal_per_site(OptimizationProblem(1, 1), ([-1.0, 1.0], [1.0, 0.0]))


@pytest.mark.parametrize("init", ["cf", "pade"])
def test_never_worse_than_start(init):
    P = OptimizationProblem(1, 1)
    res = optimize_universal_per_site(P, init)
    assert res.best_value >= res.init_value
    assert res.converged
    assert is_admissible(res.best_coeffs)
    trace_best = [row[3] for row in res.trace]
    assert all(res.best_value >= v for v in trace_best)
    assert all(b >= a for a, b in zip(trace_best, trace_best[1:]))


def test_beats_both_baselines_and_recomputes():
    P = OptimizationProblem(1, 1)
    res = optimize_universal_per_site(P, "pade")
    for init in ("pade", "cf"):
        num, den = initial_coefficients(P, init)
        assert res.best_value >= universal_value(P, num, den)
    num, den = res.best_coeffs
    again = universal_per_site(RescaledDispersion(np.array(num), np.array(den)), 1)
    assert abs(again - res.best_value) < 1e-9


def test_constant_dispersion_against_scan():
    # one-parameter problem: compare with a dense scan of p0
    P = OptimizationProblem(1, 0)
    res = optimize_universal_per_site(P, "cf")
    grid = np.linspace(0.05, 1.5, 300)
    scan = [universal_value(P, [p], [1.0]) for p in grid]
    assert res.best_value >= max(scan) - 1e-9
    assert abs(res.best_coeffs[0][0] - grid[int(np.argmax(scan))]) < 0.01
    values = [universal_value(P, [p], [1.0]) for p in (1.0, 0.1, 0.01)]
    assert res.best_value >= max(values)


def test_determinism_and_restart_monotonicity():
    P = OptimizationProblem(1, 1)
    a = optimize_universal_per_site(P, "cf", restarts=3, seed=11)
    b = optimize_universal_per_site(P, "cf", restarts=3, seed=11, threads=3)
    assert a.best_value == b.best_value
    np.testing.assert_array_equal(a.best_coeffs[0], b.best_coeffs[0])
    assert a.trace == b.trace
    vals = [optimize_universal_per_site(P, "cf", restarts=r, seed=11, max_iter=40).best_value
            for r in (1, 2, 3, 4)]
    assert all(y >= x for x, y in zip(vals, vals[1:]))


def test_three_dimensions():
    P = OptimizationProblem(3, 1)
    res = optimize_universal_per_site(P, "pade")
    assert res.best_value >= res.init_value
    assert res.best_value <= 0
