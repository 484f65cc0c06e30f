"""Large-deviation rate functions for the condensate and depletion densities.

Two rate functions, both with speed beta*V (the speed is metadata: the
functions themselves are volume-free):

    K_mu(x, y) = p(beta, mu) + f0B(beta, y, x) + (lambda0/2)(y+x)^2 - mu(y+x)

for the joint condensate/depletion law at fixed mu, and the contraction

    D_rho(x) = p(beta, mu_rho) - inf_alpha { p0B(beta, alpha, x)
                                             + (mu_rho - alpha)^2/(2 lambda0) }

for the condensate alone at fixed density. Zero sets coincide with the
maximiser set of the pressure problem: one point generically, the two
coexisting branches exactly at mu_c.

The superstability bound provides constants (M, B) making the Laplace
exponent fall off at least linearly beyond [0, M]^2; everything downstream
uses M as a hard grid cap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from wibg.bog_pressure import perfect_gas_pressure
from wibg.errors import NumericError
from wibg.legendre import _f0b_raw, fsb_grid
from wibg.potential import PotentialModel
from wibg.variational import (PhaseTransition, _gain_slope, inner_inf_alpha,
                              mu_of_rho, pressure_sb)


@lru_cache(maxsize=2048)
def _pressure_cached(beta, mu, model):
    return pressure_sb(beta, mu, model)


@lru_cache(maxsize=8192)
def _mu_of_rho_cached(beta, rho, model, transition):
    return mu_of_rho(beta, rho, model, transition)


def rate_K(beta, mu, x, y, model: PotentialModel, pressure=None) -> float:
    """Joint rate function K_mu(x, y); nonnegative, zero on the maximiser set."""
    if x < 0 or y < 0:
        raise ValueError("densities must be nonnegative")
    if pressure is None:
        pressure = _pressure_cached(beta, mu, model).pressure
    s = x + y
    return (pressure + _f0b_raw(beta, y, x, model)
            + 0.5 * model.lambda0 * s * s - mu * s)


def rate_D(beta, rho, x, model: PotentialModel,
           transition: Optional[PhaseTransition] = None) -> float:
    """Condensate rate function D_rho(x) at fixed total density rho.

    The first term (the value at the maximiser) equals the pressure at
    mu_rho, so D_rho = p(beta, mu_rho) - inner_value(x).
    """
    if x < 0:
        raise ValueError("condensate density must be nonnegative")
    mu_rho = _mu_of_rho_cached(beta, rho, model, transition)
    p = _pressure_cached(beta, mu_rho, model).pressure
    return p - inner_inf_alpha(beta, mu_rho, x, model).value


def min_K_over_y(beta, mu, x, model: PotentialModel, pressure=None,
                 y_hi=None) -> float:
    """min over y >= 0 of K_mu(x, y) (contraction onto the condensate)."""
    if pressure is None:
        pressure = _pressure_cached(beta, mu, model).pressure
    if y_hi is None:
        y_hi = superstability_bound(beta, mu, model)[0]

    def obj(y):
        return rate_K(beta, mu, x, y, model, pressure=pressure)

    r = minimize_scalar(obj, bounds=(0.0, y_hi), method="bounded",
                        options={"xatol": 1e-13})
    return min(r.fun, obj(0.0))


@lru_cache(maxsize=512)
def superstability_bound(beta, mu, model: PotentialModel, B=1.0):
    """Constants (M, B) with mu*s - f0B - (lambda0/2) s^2 <= -B*s for x,y >= M.

    An analytic first guess bounds -f0B by the ideal alpha = 0 pressure plus
    the linear pairing-gain slope; the bound is then verified on a log grid
    over [M, 10M]^2 and M enlarged until it holds.
    """
    lam0 = model.lambda0
    s_lin = _gain_slope(model)
    p_th = perfect_gas_pressure(beta, 0.0)
    c = mu + s_lin + B
    s_star = (c + np.sqrt(c * c + 2.0 * lam0 * p_th)) / lam0
    M = max(s_star / 2.0, 1e-3) * 1.05

    for _ in range(10):
        grid = np.geomspace(M, 10.0 * M, 10)
        ok = True
        for x in grid:
            f_vals = np.array([_f0b_raw(beta, float(y), float(x), model)
                               for y in grid])
            s = grid + x
            expo = mu * s - f_vals - 0.5 * lam0 * s * s
            if np.any(expo > -B * s):
                ok = False
                break
        if ok:
            return float(M), float(B)
        M *= 1.4
    raise NumericError(
        f"superstability bound failed to verify up to M={M:g} (bad potential "
        "or broken free energy)")


# ---------------------------------------------------------------------------
# tabulated grids with refined minimiser sets

@dataclass(frozen=True)
class RateGrid:
    """Rate-function samples on a rectangular grid.

    minimizers holds grid-refined rate-zero locations: (x, y, rate) triples
    for K grids, (x, rate) pairs for D grids. The large-deviation speed is
    beta*V; the values themselves are volume-independent.
    """

    kind: str                  # "K" or "D"
    beta: float
    parameter: float           # mu for K, rho for D
    x: np.ndarray
    y: Optional[np.ndarray]
    values: np.ndarray
    minimizers: tuple
    speed: str = "beta*V"

    def clamped(self, floor=1e-12):
        """Presentation copy with values below floor clamped to zero."""
        v = self.values.copy()
        v[np.abs(v) < floor] = 0.0
        return v


def _polish_zero_K(beta, mu, model, pressure, x0, y0, x_cap, y_cap):
    """Push a candidate minimiser of K to rate <= 1e-8 with a local search."""
    def obj(t):
        x, y = t
        if x < 0 or y < 0 or x > x_cap or y > y_cap:
            return 1e9
        return rate_K(beta, mu, x, y, model, pressure=pressure)

    r = minimize(obj, np.array([x0, y0]), method="Nelder-Mead",
                 options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 400})
    x, y = max(r.x[0], 0.0), max(r.x[1], 0.0)
    return x, y, obj((x, y))


def rate_grid_K(beta, mu, model: PotentialModel, nx=256, ny=256,
                x_max=None, y_max=None, zero_tol=1e-8) -> RateGrid:
    """Tabulate K_mu on [0, x_max] x [0, y_max] and refine its zero set.

    Cells whose tabulated value falls below 1e-6 are recomputed with the
    exact conjugate so the nonnegativity floor is meaningful; candidate
    minimisers are polished by a local search down to zero_tol.
    """
    if x_max is None or y_max is None:
        M, _ = superstability_bound(beta, mu, model)
        x_max = x_max or M
        y_max = y_max or M
    res = _pressure_cached(beta, mu, model)
    p = res.pressure
    xs = np.linspace(0.0, x_max, nx)
    ys = np.linspace(0.0, y_max, ny)
    s = xs[:, None] + ys[None, :]
    values = p + fsb_grid(beta, xs, ys, model) - mu * s

    # exact recomputation where the tabulation matters most
    ii, jj = np.nonzero(values < 1e-6)
    for i, j in zip(ii, jj):
        values[i, j] = rate_K(beta, mu, float(xs[i]), float(ys[j]), model,
                              pressure=p)

    minimizers = []
    for sol in res.maximizers:
        x0, y0 = sol.x_star, sol.y_star
        x_ref, y_ref, r = _polish_zero_K(beta, mu, model, p, x0, y0, x_max, y_max)
        if r <= zero_tol:
            minimizers.append((x_ref, y_ref, r))
    if not minimizers:
        raise NumericError("no rate-zero found at its own maximiser set")
    return RateGrid(kind="K", beta=beta, parameter=mu, x=xs, y=ys,
                    values=values, minimizers=tuple(minimizers))


def rate_grid_D(beta, rho, model: PotentialModel, nx=256, x_max=None,
                transition: Optional[PhaseTransition] = None,
                zero_tol=1e-8) -> RateGrid:
    """Tabulate D_rho on [0, x_max] and refine its zero set."""
    mu_rho = _mu_of_rho_cached(beta, rho, model, transition)
    if x_max is None:
        M, _ = superstability_bound(beta, mu_rho, model)
        x_max = M
    res = _pressure_cached(beta, mu_rho, model)
    p = res.pressure
    xs = np.linspace(0.0, x_max, nx)
    values = np.array([p - inner_inf_alpha(beta, mu_rho, float(x), model).value
                       for x in xs])

    minimizers = []
    for sol in res.maximizers:
        def obj(x):
            return p - inner_inf_alpha(beta, mu_rho, max(float(x), 0.0), model).value
        if sol.x_star == 0.0:
            x_ref, r = 0.0, obj(0.0)
        else:
            lo = max(0.0, sol.x_star * 0.8)
            hi = min(x_max, sol.x_star * 1.25)
            m = minimize_scalar(obj, bounds=(lo, hi), method="bounded",
                                options={"xatol": 1e-13})
            x_ref, r = float(m.x), float(m.fun)
        if r <= zero_tol:
            minimizers.append((x_ref, r))
    if not minimizers:
        raise NumericError("no rate-zero found at its own maximiser set")
    return RateGrid(kind="D", beta=beta, parameter=rho, x=xs, y=None,
                    values=values, minimizers=tuple(minimizers))
