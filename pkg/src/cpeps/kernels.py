"""Backend selection for the hot numerical kernels.

The compiled extension ``cpeps._kernels`` is used when it imports; otherwise
the numpy implementation in ``cpeps._kernels_py`` is used.  Setting the
environment variable ``CPEPS_PURE_PYTHON=1`` forces the fallback.
"""
import os

import numpy as np

from . import _kernels_py

if os.environ.get("CPEPS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

GL_ORDER = 10
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)

rational_eval_real = _impl.rational_eval_real
cf_truncate_array = _impl.cf_truncate_array
chain_omega = _impl.chain_omega
log_overlap_sum = _impl.log_overlap_sum


def radial_log_overlap(num, den, mu, d, upper, tol, max_eval=1_000_000):
    """Dispatch to the selected backend with the module's Gauss-Legendre rule."""
    return _impl.radial_log_overlap(num, den, float(mu), int(d), float(upper),
                                    GL_NODES, GL_WEIGHTS, float(tol), int(max_eval))


def adaptive_gl(f, a, b, tol, max_eval=1_000_000):
    """Adaptive Gauss-Legendre quadrature of an arbitrary vectorised callable."""
    return _kernels_py.adaptive_gl(f, a, b, GL_NODES, GL_WEIGHTS, tol, max_eval)


def backends():
    """Return ``{name: module}`` for every importable backend."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels
        found["compiled"] = _kernels
    except ImportError:
        pass
    return found
