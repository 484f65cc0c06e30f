"""Legendre-Fenchel conjugation between the pressure and free energies.

The conjugate of the pressure in its chemical-potential slot,

    f0B(beta, y, x) = sup_{alpha<=0} { alpha (y + x) - p0B(beta, alpha, x) },

is the free-energy density of the depletion variable y at fixed condensate x.
The supremum is taken literally over alpha <= 0: once y exceeds the alpha = 0
depletion y_top(x) the maximiser sticks to the boundary and f0B is constant
(= -p0B(beta, 0, x)) in y. At y = 0 the supremum is approached as
alpha -> -infinity and equals 0. In between, the maximiser is the unique
root of  depletion(beta, alpha, x) = y.

The superstable free energy adds the mean-field term:

    fSB = f0B + (lambda0 / 2) (y + x)^2.

Grid consumers (rate-function tables, Laplace weight grids) use a parametric
tabulation: sweeping alpha maps out (y(alpha), f0B(alpha)) in one vectorised
pass, interpolated monotonically in y. Pointwise calls always use the exact
root-finding path, so the two routes cross-check each other.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq, minimize_scalar

from wibg.bog_pressure import (_breakpoints, _depletion_raw, _p0b_raw,
                               _spectrum_arrays, log1mexp, _EXP_CLIP)
from wibg.errors import BracketError, NumericError
from wibg.potential import PotentialModel
from wibg.variational import inner_inf_alpha

_GL_X, _GL_W = leggauss(32)


@dataclass(frozen=True)
class FreeEnergyPoint:
    """Conjugate pair at (y, x): f0B and the superstable fSB."""

    y: float
    x: float
    f0B: float
    fSB: float


@lru_cache(maxsize=200_000)
def _f0b_raw(beta, y, x, model):
    if y == 0.0:
        # alpha(y+x) - p0B -> 0^- as alpha -> -inf; the supremum is 0
        return 0.0
    y_top = _depletion_raw(beta, 0.0, x, model)
    if y >= y_top:
        return -_p0b_raw(beta, 0.0, x, model)

    def resid(a):
        return _depletion_raw(beta, a, x, model) - y

    lo = -1.0
    for _ in range(80):
        if resid(lo) <= 0.0:
            break
        lo *= 2.0
    else:
        raise BracketError(f"no conjugate maximiser bracket at y={y}, x={x}")
    a = brentq(resid, lo, 0.0, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    return a * (y + x) - _p0b_raw(beta, a, x, model)


def f0B(beta, y, x, model: PotentialModel) -> float:
    """Conjugate free-energy density at depletion y, condensate x."""
    if y < 0 or x < 0:
        raise ValueError("densities must be nonnegative")
    return _f0b_raw(beta, y, x, model)


def fSB(beta, y, x, model: PotentialModel) -> float:
    """f0B plus the mean-field term (lambda0/2)(y+x)^2."""
    return _f0b_raw(beta, y, x, model) + 0.5 * model.lambda0 * (y + x) ** 2


def free_energy_point(beta, y, x, model: PotentialModel) -> FreeEnergyPoint:
    v = f0B(beta, y, x, model)
    return FreeEnergyPoint(y=y, x=x, f0B=v,
                           fSB=v + 0.5 * model.lambda0 * (y + x) ** 2)


# ---------------------------------------------------------------------------
# saddle of Psi(y, alpha) = alpha(y+x) - f0B + (mu - alpha)^2 / (2 lambda0)

@dataclass(frozen=True)
class PsiSaddle:
    """Stationary point and both iterated optimisations of Psi."""

    y_tilde: float
    alpha_tilde: float
    inf_sup: float     # inf_alpha sup_y Psi (pressure route)
    sup_inf: float     # sup_y inf_alpha Psi (free-energy route)
    residual: float    # | y + x + (alpha - mu)/lambda0 |


def saddle_psi(beta, mu, x, model: PotentialModel) -> PsiSaddle:
    """Unique stationary pair of Psi and the minimax check.

    inf over alpha of sup over y reproduces the inner pressure problem; the
    exchanged order evaluates  sup_y { m(y) - f0B }  where m is the
    alpha-clamped quadratic infimum. Strict concavity/convexity makes both
    orders agree at the stationary point.
    """
    lam0 = model.lambda0
    inner = inner_inf_alpha(beta, mu, x, model)
    inf_sup = inner.value

    y_top = _depletion_raw(beta, 0.0, x, model)

    def m(y):
        s = y + x
        if mu - lam0 * s <= 0.0:
            return mu * s - 0.5 * lam0 * s * s
        return mu * mu / (2.0 * lam0)

    def neg_obj(y):
        return -(m(y) - _f0b_raw(beta, y, x, model))

    y_hi = max(2.0 * (mu - inner.alpha_star) / lam0, 2.0 * y_top, 1e-6)
    r = minimize_scalar(neg_obj, bounds=(0.0, y_hi), method="bounded",
                        options={"xatol": 1e-13})
    sup_inf = -r.fun
    # endpoint y = 0 can beat the interior for very negative mu
    if -neg_obj(0.0) > sup_inf:
        sup_inf = -neg_obj(0.0)

    return PsiSaddle(y_tilde=inner.y_star, alpha_tilde=inner.alpha_star,
                     inf_sup=inf_sup, sup_inf=sup_inf, residual=inner.residual)


# ---------------------------------------------------------------------------
# vectorised parametric tabulation for grid fills

class _ColumnRule:
    """Fixed composite Gauss-Legendre rule shared by a whole alpha sweep."""

    def __init__(self, beta, x, model, alpha_deep):
        pts = list(_breakpoints(beta, 0.0, x, model))
        k_deep = np.sqrt((45.0 + beta * abs(alpha_deep)) / beta + abs(alpha_deep)) + 1.0
        hi = pts[-1]
        while hi < k_deep:
            hi *= 1.5
            pts.append(hi)
        edges = np.unique(np.asarray(pts))
        # split every seed panel in two for margin over the adaptive route
        mids = 0.5 * (edges[:-1] + edges[1:])
        edges = np.unique(np.concatenate([edges, mids]))
        a, b = edges[:-1], edges[1:]
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        self.k = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        self.w = (half[:, None] * _GL_W[None, :]).ravel()
        self.beta = beta
        self.x = x
        self.model = model
        lam = np.asarray(model.lambda_k(self.k))
        self.k2w = self.k * self.k * self.w
        self.lam = lam
        self.xl = x * lam

    def depletion_and_pressure(self, alphas):
        """(y(alpha), p0B(alpha)) for an array of alphas in one pass."""
        kk = self.k * self.k
        eps_a = kk[None, :] - np.asarray(alphas)[:, None]
        xl = self.xl[None, :]
        f = eps_a + xl
        e = np.sqrt(eps_a * (eps_a + 2.0 * xl))
        w = np.minimum(self.beta * e, _EXP_CLIP)
        occupation = f / (e * np.expm1(w)) + xl * xl / (2.0 * e * (f + e))
        y = occupation @ self.k2w / (2.0 * np.pi ** 2)
        thermal = log1mexp(self.beta * e) @ self.k2w
        p = -thermal / (2.0 * np.pi ** 2 * self.beta)
        if self.x > 0.0:
            quantum = (xl * xl / (f + e)) @ self.k2w
            p += quantum / (4.0 * np.pi ** 2)
        p += np.asarray(alphas) * self.x
        return y, p


@lru_cache(maxsize=4096)
def _f0b_column(beta, x, model, y_floor, n_mesh=280):
    """PCHIP data for y -> f0B(beta, y, x) down to y_floor.

    Returns (interpolator, y_min, y_top, f_top). Accuracy is verified
    against the exact conjugate at three control points.
    """
    y_top = _depletion_raw(beta, 0.0, x, model)
    f_top = -_p0b_raw(beta, 0.0, x, model)

    # find how deep alpha must go to cover y_floor
    a_deep = -1.0
    for _ in range(200):
        if _depletion_raw(beta, a_deep, x, model) <= max(y_floor, 1e-300):
            break
        a_deep *= 1.6
    rule = _ColumnRule(beta, x, model, a_deep)
    alphas = -np.geomspace(1e-7, -a_deep, n_mesh)[::-1]
    ys, ps = rule.depletion_and_pressure(alphas)
    fs = alphas * (ys + x) - ps

    order = np.argsort(ys)
    ys, fs = ys[order], fs[order]
    keep = np.concatenate([[True], np.diff(ys) > 1e-300])
    ys, fs = ys[keep], fs[keep]
    ys = np.append(ys, y_top)
    fs = np.append(fs, f_top)
    interp = PchipInterpolator(ys, fs, extrapolate=False)

    for y_chk in (ys[2], ys[len(ys) // 2], ys[-3]):
        exact = _f0b_raw(beta, float(y_chk), x, model)
        approx = float(interp(y_chk))
        scale = max(1.0, abs(exact))
        if abs(exact - approx) > 1e-7 * scale:
            raise NumericError(
                f"f0B column tabulation off by {abs(exact - approx):.2e} at "
                f"x={x}, y={y_chk}")
    return interp, float(ys[0]), y_top, f_top


def f0b_on_grid(beta, x, y_grid, model: PotentialModel):
    """f0B(beta, y, x) for a whole ascending y array (grid fill path)."""
    y_grid = np.asarray(y_grid, dtype=float)
    positive = y_grid[y_grid > 0]
    y_floor = float(positive.min()) * 0.5 if positive.size else 1e-12
    interp, y_min, y_top, f_top = _f0b_column(beta, float(x), model, y_floor)
    out = np.empty_like(y_grid)
    out[y_grid == 0.0] = 0.0
    inside = (y_grid > 0.0) & (y_grid < y_top)
    clipped = np.clip(y_grid[inside], y_min, y_top)
    out[inside] = interp(clipped)
    out[y_grid >= y_top] = f_top
    # below the tabulated range fall back to the exact conjugate
    below = (y_grid > 0.0) & (y_grid < y_min)
    for i in np.nonzero(below)[0]:
        out[i] = _f0b_raw(beta, float(y_grid[i]), float(x), model)
    return out


def fsb_grid(beta, x_grid, y_grid, model: PotentialModel):
    """fSB on the tensor grid x_grid x y_grid, shape (len(x), len(y))."""
    x_grid = np.asarray(x_grid, dtype=float)
    y_grid = np.asarray(y_grid, dtype=float)
    out = np.empty((x_grid.size, y_grid.size))
    for i, x in enumerate(x_grid):
        s = y_grid + x
        out[i] = f0b_on_grid(beta, x, y_grid, model) + 0.5 * model.lambda0 * s * s
    return out
