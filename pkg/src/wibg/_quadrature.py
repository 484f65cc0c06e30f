"""Adaptive composite Gauss-Legendre quadrature on a half-line segment.

One fixed high-order rule per panel; a panel's error is estimated by
comparing the whole-panel value against the sum over its two halves, and the
half-panel sum is what enters the result. Panels exceeding their share of the
error budget are bisected. Integrands are evaluated in batches (one call per
refinement round) so vectorised NumPy integrands stay fast.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

from wibg.errors import QuadratureError

_GL_X, _GL_W = leggauss(32)


def _gl_batch(f, a, b):
    """Gauss-Legendre values for a batch of panels [a_i, b_i]."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return half * (vals @ _GL_W)


def integrate_adaptive(f, breakpoints, rel_tol=1e-12, abs_tol=0.0,
                       max_panels=512, max_rounds=40):
    """Integrate f over [breakpoints[0], breakpoints[-1]].

    Parameters
    ----------
    f : callable
        Vectorised integrand; never evaluated at the interval endpoints.
    breakpoints : array_like
        Strictly increasing seed panel edges; integrand kinks (e.g. a sharp
        momentum cutoff) must appear here.

    Returns
    -------
    (value, err_estimate)
    """
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    if pts.size < 2:
        return 0.0, 0.0
    a = pts[:-1].copy()
    b = pts[1:].copy()

    def refine(a, b):
        m = 0.5 * (a + b)
        whole = _gl_batch(f, a, b)
        left = _gl_batch(f, a, m)
        right = _gl_batch(f, m, b)
        vals = left + right
        errs = np.abs(whole - vals)
        return vals, errs

    vals, errs = refine(a, b)
    for _ in range(max_rounds):
        total = vals.sum()
        # np.abs(vals).sum() sets the double-precision roundoff floor: the
        # whole-vs-halves estimate cannot drop below it even for a converged
        # panel, so it must not trigger further splitting.
        floor = 4e-16 * np.abs(vals).sum()
        target = max(abs_tol, rel_tol * abs(total), floor)
        if errs.sum() <= target or len(a) >= max_panels:
            break
        budget = max(target, 1e-320) / (2.0 * len(a))
        split = errs > budget
        if not split.any():
            split = errs == errs.max()
        m = 0.5 * (a[split] + b[split])
        new_a = np.concatenate([a[~split], a[split], m])
        new_b = np.concatenate([b[~split], m, b[split]])
        keep_vals = vals[~split]
        keep_errs = errs[~split]
        sub_vals, sub_errs = refine(np.concatenate([a[split], m]),
                                    np.concatenate([m, b[split]]))
        a, b = new_a, new_b
        vals = np.concatenate([keep_vals, sub_vals])
        errs = np.concatenate([keep_errs, sub_errs])

    total = vals.sum()
    achieved = errs.sum()
    target = max(abs_tol, rel_tol * abs(total), 4e-16 * np.abs(vals).sum())
    if achieved > 1e3 * max(target, 1e-320):
        raise QuadratureError(
            f"adaptive quadrature stalled: error {achieved:.3e} vs target {target:.3e}",
            achieved=achieved, target=target)
    return total, achieved
