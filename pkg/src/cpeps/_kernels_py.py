"""Pure-Python (numpy) implementation of the hot numerical kernels.

Every function here has a twin with the same signature in the compiled
``_kernels`` extension.  The two must implement the same arithmetic in the
same order so that results agree to rounding.
"""
import numpy as np


def rational_eval_real(num, den, u):
    """Horner evaluation of ``num(u) / den(u)`` for real coefficients."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    u = np.asarray(u, dtype=float)
    p = np.zeros_like(u)
    for c in num[::-1]:
        p = p * u + c
    q = np.zeros_like(u)
    for c in den[::-1]:
        q = q * u + c
    return p / q


def cf_truncate_array(m, depth, u):
    """Backward recursion of ``m + u/(2m + u/(2m + ...))`` with `depth` levels."""
    u = np.asarray(u, dtype=float)
    t = np.full_like(u, 2.0 * m)
    for _ in range(depth - 1):
        t = 2.0 * m + u / t
    return m + u / t


def chain_omega(diag_a, diag_z, off_a, off_z, a, z, c, u):
    """Tridiagonal elimination of ``c + 1/2 w^T M^{-1} w`` for many momenta.

    ``M = A + Z u`` is given by its diagonal and first off-diagonal,
    ``w = a + z u``.  Virtual indices are eliminated from the last to the
    first.  Returns a complex array, ``nan`` where a pivot vanished.
    """
    diag_a = np.asarray(diag_a, dtype=complex)
    diag_z = np.asarray(diag_z, dtype=complex)
    off_a = np.asarray(off_a, dtype=complex)
    off_z = np.asarray(off_z, dtype=complex)
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    u = np.asarray(u, dtype=float)
    n = diag_a.shape[0]
    out = np.empty(u.shape, dtype=complex)
    for j, uj in enumerate(u.flat):
        g = diag_a[n - 1] + diag_z[n - 1] * uj
        w = a[n - 1] + z[n - 1] * uj
        acc = complex(c)
        ok = True
        for alpha in range(n - 1, -1, -1):
            if g == 0:
                ok = False
                break
            acc += 0.5 * w * w / g
            if alpha == 0:
                break
            b = off_a[alpha - 1] + off_z[alpha - 1] * uj
            w_prev = a[alpha - 1] + z[alpha - 1] * uj
            g_prev = diag_a[alpha - 1] + diag_z[alpha - 1] * uj
            g, w = g_prev - b * b / g, w_prev - b * w / g
        out.flat[j] = acc if ok else complex(np.nan, np.nan)
    return out


def log_overlap_sum(w1, w2):
    """Sum over modes of ``1/2 log(2 sqrt(w1 w2) / (w1 + w2))``."""
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    total = 0.0
    for x, y in zip(w1.flat, w2.flat):
        total += 0.5 * np.log(2.0 * np.sqrt(x * y) / (x + y))
    return float(total)


def adaptive_gl(f, a, b, nodes, weights, tol, max_eval):
    """Adaptive Gauss-Legendre quadrature of a vectorised callable.

    Each interval is compared against the sum over its two halves; an
    interval is accepted when the difference is below ``tol`` times its share
    of ``[a, b]``.  Intervals are processed depth-first, left to right, so the
    reduction order is fixed.

    Returns ``(value, error_estimate, n_evaluations, ok)``.
    """
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    npts = nodes.shape[0]
    total_len = b - a

    def rule(lo, hi):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        return half * float(np.dot(weights, f(mid + half * nodes)))

    whole = rule(a, b)
    n_eval = npts
    stack = [(a, b, whole)]
    value = 0.0
    err = 0.0
    while stack:
        lo, hi, est = stack.pop()
        mid = 0.5 * (lo + hi)
        left = rule(lo, mid)
        right = rule(mid, hi)
        n_eval += 2 * npts
        diff = abs(left + right - est)
        if diff <= tol * (hi - lo) / total_len or (hi - lo) < 1e-13 * total_len:
            value += left + right
            err += diff
            continue
        if n_eval > max_eval:
            return value, err, n_eval, False
        stack.append((mid, hi, right))
        stack.append((lo, mid, left))
    return value, err, n_eval, True


def radial_log_overlap(num, den, mu, d, upper, nodes, weights, tol, max_eval):
    """Radial integral of the mode log-overlap against ``sqrt(mu^2 + k^2)``.

    Computes ``int_0^upper k^(d-1) * 1/2 log(2 sqrt(|w| r) / |w + r|) dk`` with
    ``w = num(k^2)/den(k^2)`` and ``r = sqrt(mu^2 + k^2)``, after the
    substitution ``k = upper t^2`` that smooths the logarithmic endpoint.
    """
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)

    def integrand(t):
        k = upper * t * t
        u = k * k
        w = rational_eval_real(num, den, u)
        r = np.sqrt(mu * mu + u)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 0.5 * np.log(2.0 * np.sqrt(np.abs(w) * r) / np.abs(w + r))
        val = np.where(k > 0.0, val, 0.0)
        return 2.0 * upper * t * k ** (d - 1) * val

    return adaptive_gl(integrand, 0.0, 1.0, nodes, weights, tol, max_eval)
