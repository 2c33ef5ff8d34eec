"""The compiled and pure-Python kernels must agree."""
import numpy as np
import pytest

from cpeps import _kernels_py, kernels
from cpeps.gaussian_core import derive_cf_params

BACKENDS = kernels.backends()
needs_compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")


def test_backend_flag():
    assert kernels.BACKEND in ("compiled", "python")


@needs_compiled
def test_rational_and_cf_agree():
    c = BACKENDS["compiled"]
    u = np.linspace(0, 50, 101)
    num, den = np.array([1.0, 0.75, 0.1]), np.array([1.0, 0.25, 0.02])
    np.testing.assert_allclose(c.rational_eval_real(num, den, u),
                               _kernels_py.rational_eval_real(num, den, u), rtol=1e-15)
    np.testing.assert_allclose(c.cf_truncate_array(1.3, 7, u),
                               _kernels_py.cf_truncate_array(1.3, 7, u), rtol=1e-15)


@needs_compiled
def test_chain_agree():
    c = BACKENDS["compiled"]
    P = derive_cf_params(1.0, 6)
    idx = np.arange(5)
    args = (np.diag(P.A), np.diag(P.Z), P.A[idx, idx + 1], P.Z[idx, idx + 1], P.a, P.z, P.c)
    u = np.linspace(0, 10, 41)
    a = c.chain_omega(*args, u)
    b = _kernels_py.chain_omega(*args, u)
    np.testing.assert_allclose(a[1:], b[1:], rtol=1e-14)
    assert np.isnan(a[0]) and np.isnan(b[0])


@needs_compiled
def test_quadrature_agree():
    c = BACKENDS["compiled"]
    num, den = np.array([1.0, 0.75]), np.array([1.0, 0.25])
    for d in (1, 2, 3):
        r1 = c.radial_log_overlap(num, den, 1.0, d, 10.0, kernels.GL_NODES, kernels.GL_WEIGHTS, 1e-10, 10**6)
        r2 = _kernels_py.radial_log_overlap(num, den, 1.0, d, 10.0, kernels.GL_NODES, kernels.GL_WEIGHTS,
                                            1e-10, 10**6)
        assert r1[2] == r2[2] and r1[3] and r2[3]
        assert r1[0] == pytest.approx(r2[0], rel=1e-13)


@needs_compiled
def test_overlap_sum_agree():
    c = BACKENDS["compiled"]
    rng = np.random.default_rng(0)
    w1, w2 = rng.uniform(0.1, 5, 1000), rng.uniform(0.1, 5, 1000)
    assert c.log_overlap_sum(w1, w2) == pytest.approx(_kernels_py.log_overlap_sum(w1, w2), rel=1e-13)


def test_quadrature_budget_flag():
    num, den = np.array([1.0]), np.array([1.0])
    val, err, n, ok = _kernels_py.radial_log_overlap(num, den, 1.0, 1, 1.0, kernels.GL_NODES,
                                                      kernels.GL_WEIGHTS, 1e-30, 500)
    assert not ok
