"""Nested variational problems for the superstable pressure.

The grand-canonical pressure is

    p(beta, mu) = sup_{x>=0} inf_{alpha<=0} { p0B(beta, alpha, x)
                                              + (mu - alpha)^2 / (2 lambda0) },

the inner objective being strictly convex in alpha and the outer profile
generically bimodal near the first-order transition: the normal branch sits
at the boundary x = 0 (the thermal term always makes x = 0 a local maximum),
while a condensed branch at x > 0 can appear and eventually dominate.

Stationarity of the inner problem is the density relation

    x + y(beta, alpha, x) = (mu - alpha) / lambda0,   i.e.  mu = alpha + lambda0 rho,

so the particle density of a branch is rho = (mu - alpha*) / lambda0. When
mu exceeds lambda0 times the ideal-gas critical density the inner minimiser
can hit the alpha = 0 boundary (saturated mean-field gas); such branches are
flagged and excluded from transition data.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from wibg.bog_pressure import _depletion_raw, _p0b_raw, _p0b_dx_raw
from wibg.errors import BracketError, NumericError, ScanRangeExhausted
from wibg.potential import PotentialModel

NORMAL = "normal"
CONDENSED = "condensed"


@dataclass(frozen=True)
class InnerSolution:
    """Minimiser of the inner alpha-problem at fixed (beta, mu, x)."""

    alpha_star: float
    value: float
    y_star: float
    residual: float       # | x + y + (alpha - mu)/lambda0 |
    saturated: bool       # minimiser pinned at the alpha = 0 boundary


@dataclass(frozen=True)
class SaddleSolution:
    """One branch of the outer supremum."""

    beta: float
    mu: float
    alpha_star: float
    x_star: float
    y_star: float
    rho: float            # (mu - alpha*) / lambda0; equals x*+y* off the boundary
    pressure: float
    branch: str
    saturated: bool
    residual: float


@dataclass(frozen=True)
class PressureSB:
    pressure: float
    maximizers: tuple     # SaddleSolution(s); two entries exactly at mu_c

    @property
    def unique(self) -> SaddleSolution:
        if len(self.maximizers) != 1:
            raise ValueError(
                "degenerate maximiser set (at the transition?); pick a branch "
                "explicitly from .maximizers")
        return self.maximizers[0]


@dataclass(frozen=True)
class PhaseTransition:
    """First-order transition data at fixed beta."""

    beta: float
    mu_c: float
    rho_minus: float
    rho_plus: float
    x_plus: float
    y_plus: float
    pressure: float

    def __post_init__(self):
        if not self.rho_plus > self.rho_minus:
            raise NumericError(
                f"degenerate transition: rho+ = {self.rho_plus} <= rho- = "
                f"{self.rho_minus}")

    @property
    def rho_mid(self):
        return 0.5 * (self.rho_minus + self.rho_plus)


def inner_inf_alpha(beta, mu, x, model: PotentialModel) -> InnerSolution:
    """Minimise p0B(beta, alpha, x) + (mu - alpha)^2/(2 lambda0) over alpha <= 0.

    The stationarity residual x + y + (alpha - mu)/lambda0 is strictly
    increasing in alpha, so the minimiser is the unique root (or the alpha = 0
    boundary when the residual is still negative there).
    """
    lam0 = model.lambda0

    def resid(a):
        return x + _depletion_raw(beta, a, x, model) - (mu - a) / lam0

    r0 = resid(0.0)
    if r0 <= 0.0:
        val = _p0b_raw(beta, 0.0, x, model) + mu * mu / (2.0 * lam0)
        y = _depletion_raw(beta, 0.0, x, model)
        return InnerSolution(0.0, val, y, abs(r0), True)

    lo = min(mu - lam0 * x, -1.0)
    for _ in range(80):
        if resid(lo) <= 0.0:
            break
        lo *= 2.0
    else:
        raise BracketError(f"no lower bracket for alpha* at beta={beta}, mu={mu}, x={x}")
    a = brentq(resid, lo, 0.0, xtol=1e-15, rtol=8.9e-16, maxiter=200)
    y = _depletion_raw(beta, a, x, model)
    val = _p0b_raw(beta, a, x, model) + (mu - a) ** 2 / (2.0 * lam0)
    return InnerSolution(a, val, y, abs(x + y + (a - mu) / lam0), False)


def _profile(beta, mu, model):
    """Outer objective F(x) = inner value, as a plain callable."""
    def F(x):
        return inner_inf_alpha(beta, mu, x, model).value
    return F


def _dF_dx(beta, mu, x, model):
    """Envelope derivative of the outer objective (valid on both interior and
    boundary inner minimisers since alpha* is held fixed to first order)."""
    sol = inner_inf_alpha(beta, mu, x, model)
    return _p0b_dx_raw(beta, sol.alpha_star, x, model)


def _gain_slope(model):
    """Large-x slope bound of the pairing gain, (1/4 pi^2) int k^2 lambda dk."""
    val = model.k2_lambda_integral()
    if val is None:
        # slowly-decaying family: use a generous truncated value
        from wibg._quadrature import integrate_adaptive
        val, _ = integrate_adaptive(
            lambda k: k * k * np.asarray(model.lambda_k(k)),
            np.geomspace(1e-6, 1e4 * model.shape, 40), rel_tol=1e-8)
    return val / (4.0 * np.pi ** 2)


def _make_saddle(beta, mu, model, inner, x):
    rho = (mu - inner.alpha_star) / model.lambda0
    return SaddleSolution(
        beta=beta, mu=mu, alpha_star=inner.alpha_star, x_star=x,
        y_star=inner.y_star, rho=rho, pressure=inner.value,
        branch=NORMAL if x == 0.0 else CONDENSED,
        saturated=inner.saturated, residual=inner.residual)


def _refine_condensed(beta, mu, model, x_lo, x_hi):
    """Polish a condensed local maximum inside (x_lo, x_hi)."""
    F = _profile(beta, mu, model)
    r = minimize_scalar(lambda x: -F(x), bounds=(x_lo, x_hi), method="bounded",
                        options={"xatol": 1e-13})
    x_star = r.x
    # polish with the envelope derivative when it brackets a sign change
    try:
        d_lo, d_hi = _dF_dx(beta, mu, x_lo, model), _dF_dx(beta, mu, x_hi, model)
        if d_lo > 0.0 > d_hi:
            x_star = brentq(lambda x: _dF_dx(beta, mu, x, model), x_lo, x_hi,
                            xtol=1e-16, rtol=8.9e-16, maxiter=200)
    except (ValueError, NumericError):
        pass
    inner = inner_inf_alpha(beta, mu, x_star, model)
    return _make_saddle(beta, mu, model, inner, x_star)


def _branches(beta, mu, model, n_scan=72):
    """Normal-branch saddle plus every condensed local maximum of F(x).

    Returns (normal, [condensed...]) with the condensed list sorted by value,
    refined to the stationary point. The scan cap self-expands if a maximum
    presses against it.
    """
    lam0 = model.lambda0
    normal = _make_saddle(beta, mu, model, inner_inf_alpha(beta, mu, 0.0, model), 0.0)
    x_cap = 4.0 * max(normal.rho, 1e-4) + (max(mu, 0.0) + 1.0 + 4.0 * _gain_slope(model)) / lam0

    F = _profile(beta, mu, model)
    for _ in range(4):
        xs = np.concatenate([[0.0], np.geomspace(1e-7 * x_cap, x_cap, n_scan)])
        vals = np.array([F(x) for x in xs])
        if np.argmax(vals) < len(xs) - 2:
            break
        x_cap *= 4.0
    else:
        raise NumericError(
            f"outer maximiser keeps escaping the scan cap at beta={beta}, mu={mu}; "
            "superstability looks violated")

    condensed = []
    for i in range(1, len(xs) - 1):
        if vals[i] >= vals[i - 1] and vals[i] >= vals[i + 1]:
            condensed.append(_refine_condensed(beta, mu, model, xs[i - 1], xs[i + 1]))
    # deduplicate refined maxima that collapsed to the same point
    condensed.sort(key=lambda s: s.x_star)
    deduped = []
    for s in condensed:
        if deduped and abs(s.x_star - deduped[-1].x_star) <= 1e-8 * (1.0 + s.x_star):
            if s.pressure > deduped[-1].pressure:
                deduped[-1] = s
        else:
            deduped.append(s)
    deduped.sort(key=lambda s: -s.pressure)
    return normal, deduped


def pressure_sb(beta, mu, model: PotentialModel, tie_tol=1e-10) -> PressureSB:
    """Grand-canonical pressure and its maximiser set.

    The maximiser set has one element generically; exactly at the transition
    the normal and condensed branches tie within tie_tol and both are
    returned (callers pick a branch explicitly).
    """
    normal, condensed = _branches(beta, mu, model)
    candidates = [normal] + condensed
    best = max(c.pressure for c in candidates)
    maxim = tuple(c for c in candidates if best - c.pressure <= tie_tol)
    return PressureSB(pressure=best, maximizers=maxim)


def find_transition(beta, model: PotentialModel, mu_lo=-10.0, mu_hi=10.0,
                    n_mu=41, dp_tol=1e-10, mu_tol=1e-12) -> Optional[PhaseTransition]:
    """Locate the first-order transition by scanning mu and bisecting.

    Returns None when no condensed local maximum exists anywhere on the
    scanned range (no transition at this beta for this potential). If a
    condensed branch exists but never dominates (or already dominates at
    mu_lo) the scan range was too small: ScanRangeExhausted is raised, which
    is a different situation than absence.
    """

    def delta(mu):
        """Condensed-minus-normal pressure difference; None if no condensed
        local maximum exists at this mu."""
        normal, condensed = _branches(beta, mu, model)
        if not condensed:
            return None, normal, None
        best = condensed[0]
        return best.pressure - normal.pressure, normal, best

    mus = np.linspace(mu_lo, mu_hi, n_mu)
    deltas = []
    for mu in mus:
        d, _, _ = delta(mu)
        deltas.append(d)

    exists = [d is not None for d in deltas]
    if not any(exists):
        return None

    wins = [d is not None and d > 0.0 for d in deltas]
    if wins[0]:
        raise ScanRangeExhausted(
            f"condensed branch already dominates at mu_lo={mu_lo}; extend the "
            "scan range downward")
    if not any(wins):
        raise ScanRangeExhausted(
            f"condensed branch exists on [{mu_lo}, {mu_hi}] but never dominates; "
            "extend the scan range upward")

    i_hi = wins.index(True)
    lo, hi = mus[i_hi - 1], mus[i_hi]

    # bisect the predicate "condensed exists and wins" down to mu_tol, then
    # polish with brentq on the (smooth, increasing) pressure difference.
    while hi - lo > max(mu_tol, 1e-14 * abs(hi)):
        mid = 0.5 * (lo + hi)
        d, _, _ = delta(mid)
        if d is not None and d > 0.0:
            hi = mid
        else:
            lo = mid
    d_lo, _, _ = delta(lo)
    if d_lo is not None:
        mu_c = brentq(lambda m: delta(m)[0], lo, hi, xtol=mu_tol, rtol=8.9e-16,
                      maxiter=200)
    else:
        mu_c = hi

    d, normal, best = delta(mu_c)
    if abs(d) > dp_tol:
        raise NumericError(
            f"branch pressures differ by {abs(d):.3e} > {dp_tol} after bisection")
    if normal.saturated or best.saturated:
        raise NumericError(
            "a coexisting branch sits at the saturated alpha = 0 boundary; "
            "the transition data would not satisfy the density relation "
            "(choose a stronger coupling or lower temperature)")
    return PhaseTransition(
        beta=beta, mu_c=mu_c,
        rho_minus=normal.rho, rho_plus=best.rho,
        x_plus=best.x_star, y_plus=best.y_star,
        pressure=0.5 * (normal.pressure + best.pressure))


@lru_cache(maxsize=64)
def find_transition_cached(beta, model, mu_lo=-10.0, mu_hi=10.0):
    """Memoised find_transition (used by modules that only need the data)."""
    return find_transition(beta, model, mu_lo=mu_lo, mu_hi=mu_hi)


@dataclass(frozen=True)
class DensityResult:
    """Density of the state(s) at fixed mu; two entries exactly at mu_c."""

    solutions: tuple

    @property
    def rho(self):
        if len(self.solutions) != 1:
            raise ValueError("two coexisting branches at mu_c; inspect "
                             ".solutions and pick one explicitly")
        return self.solutions[0].rho

    @property
    def rhos(self):
        return tuple(s.rho for s in self.solutions)


def density_of_mu(beta, mu, model: PotentialModel, tie_tol=1e-10) -> DensityResult:
    """Particle density rho = (mu - alpha*)/lambda0 at the dominant branch(es)."""
    res = pressure_sb(beta, mu, model, tie_tol=tie_tol)
    sols = tuple(sorted(res.maximizers, key=lambda s: s.rho))
    return DensityResult(solutions=sols)


def _normal_density(beta, mu, model):
    return (mu - inner_inf_alpha(beta, mu, 0.0, model).alpha_star) / model.lambda0


def _condensed_density(beta, mu, model, x_hint):
    """Track the condensed branch near a known x_hint without a full rescan.

    The window slides (rather than expands symmetrically) so the lower edge
    never sinks into the normal basin, where dF/dx < 0 on both sides of the
    window would fake a bracket.
    """
    F = _profile(beta, mu, model)
    lo, hi = x_hint / 3.0, x_hint * 3.0
    for _ in range(12):
        xs = np.geomspace(lo, hi, 14)
        vals = np.array([F(x) for x in xs])
        j = int(np.argmax(vals))
        if j == 0:
            lo, hi = lo / 4.0, xs[2]
            continue
        if j == len(xs) - 1:
            lo, hi = xs[-3], hi * 4.0
            continue
        x_lo, x_hi = xs[j - 1], xs[j + 1]
        if _dF_dx(beta, mu, x_lo, model) > 0.0 > _dF_dx(beta, mu, x_hi, model):
            x = brentq(lambda t: _dF_dx(beta, mu, t, model), x_lo, x_hi,
                       xtol=1e-16, rtol=8.9e-16, maxiter=200)
        else:
            r = minimize_scalar(lambda t: -F(t), bounds=(x_lo, x_hi),
                                method="bounded", options={"xatol": 1e-13})
            x = r.x
        sol = inner_inf_alpha(beta, mu, x, model)
        return _make_saddle(beta, mu, model, sol, x)
    raise BracketError(f"lost the condensed branch near mu={mu}")


def mu_of_rho(beta, rho, model: PotentialModel,
              transition: Optional[PhaseTransition] = None) -> float:
    """Chemical potential at fixed density (Maxwell construction).

    On the coexistence plateau rho in [rho-, rho+] this is mu_c exactly;
    outside, the strictly increasing branch density is inverted by bisection.
    Pass the PhaseTransition whenever one exists at this beta.
    """
    if rho <= 0:
        raise ValueError("density must be positive")
    if transition is not None and transition.rho_minus <= rho <= transition.rho_plus:
        return transition.mu_c

    if transition is None:
        def g(mu):
            res = pressure_sb(beta, mu, model)
            return max(s.rho for s in res.maximizers) - rho
        mu0 = model.lambda0 * rho
    elif rho < transition.rho_minus:
        def g(mu):
            return _normal_density(beta, mu, model) - rho
        mu0 = transition.mu_c
    else:
        x_hint = [transition.x_plus]

        def g(mu):
            sol = _condensed_density(beta, mu, model, x_hint[0])
            x_hint[0] = sol.x_star
            return sol.rho - rho
        mu0 = transition.mu_c

    step = max(1.0, model.lambda0 * rho * 0.5)
    lo = hi = mu0
    g0 = g(mu0)
    for _ in range(80):
        if g0 > 0:
            lo = lo - step
            if g(lo) <= 0:
                hi = lo + step
                break
        else:
            hi = hi + step
            if g(hi) >= 0:
                lo = hi - step
                break
        step *= 2.0
    else:
        raise BracketError(f"could not bracket mu for rho={rho}")
    return brentq(g, lo, hi, xtol=1e-13, rtol=8.9e-16, maxiter=200)


def condensate_of_rho(beta, rho, model: PotentialModel,
                      transition: Optional[PhaseTransition] = None) -> float:
    """Condensate density at fixed total density.

    Zero up to rho-, linear interpolation (rho - rho-)/(rho+ - rho-) * x+
    across the plateau, and the condensed-branch stationary value beyond.
    """
    if rho <= 0:
        raise ValueError("density must be positive")
    if transition is not None:
        if rho <= transition.rho_minus:
            return 0.0
        if rho <= transition.rho_plus:
            frac = (rho - transition.rho_minus) / (transition.rho_plus - transition.rho_minus)
            return frac * transition.x_plus
        mu = mu_of_rho(beta, rho, model, transition)
        return _condensed_density(beta, mu, model, transition.x_plus).x_star
    mu = mu_of_rho(beta, rho, model, None)
    res = pressure_sb(beta, mu, model)
    return max(s.x_star for s in res.maximizers)
