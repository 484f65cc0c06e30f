"""Closed-form limiting condensate laws and the quasi-average tilt.

At a fixed density inside the coexistence window the limiting law of the
(condensate, depletion) pair is a two-point mixture: weight 1 - kappa_rho on
the normal peak (0, rho-) and kappa_rho on the condensed peak (x+, y+), with

    kappa_rho = (rho - rho-) / (rho+ - rho-).

Tilting the chemical potential by gamma/(beta V) selects the mixture weight

    xi_gamma = 1 / (1 + exp(gamma (rho+ - rho-)))

on the normal peak; the tilt reproducing a given density is

    gamma_rho = ln((rho - rho-)/(rho+ - rho)) / (rho+ - rho-),

and xi_{gamma_rho} = 1 - kappa_rho identically. Everything here is exact
arithmetic on transition data; the measures are kept symbolic (atom
coordinates plus a uniform-phase flag), never sampled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from wibg.potential import PotentialModel
from wibg.variational import (PhaseTransition, find_transition_cached,
                              mu_of_rho, pressure_sb)


@dataclass(frozen=True)
class MixtureLaw:
    """Limiting law of (condensate, depletion): at most two atoms.

    The condensed atom carries a uniform phase on [0, 2pi); scalar
    expectations only see x = |c|^2.
    """

    weight_normal: float
    weight_condensed: float
    peak_normal: tuple            # (x, y) of the normal atom
    peak_condensed: Optional[tuple]  # (x, y) of the condensed atom, if any
    phase_uniform: bool = True

    def __post_init__(self):
        if abs(self.weight_normal + self.weight_condensed - 1.0) > 1e-12:
            raise ValueError("mixture weights must sum to 1")

    def expectation_x(self) -> float:
        """E[x] under the law (the condensate density)."""
        e = self.weight_normal * self.peak_normal[0]
        if self.peak_condensed is not None:
            e += self.weight_condensed * self.peak_condensed[0]
        return e

    def expectation_density(self) -> float:
        """E[x + y] under the law (the total density)."""
        e = self.weight_normal * sum(self.peak_normal)
        if self.peak_condensed is not None:
            e += self.weight_condensed * sum(self.peak_condensed)
        return e

    def as_dict(self):
        return {
            "weight_normal": self.weight_normal,
            "weight_condensed": self.weight_condensed,
            "peak_normal": list(self.peak_normal),
            "peak_condensed": (None if self.peak_condensed is None
                               else list(self.peak_condensed)),
            "phase_uniform": self.phase_uniform,
        }


def kappa(rho, transition: PhaseTransition) -> float:
    """Condensed-peak weight (rho - rho-)/(rho+ - rho-) on the plateau."""
    if not (transition.rho_minus <= rho <= transition.rho_plus):
        raise ValueError(
            f"rho={rho} outside the coexistence window "
            f"[{transition.rho_minus}, {transition.rho_plus}]")
    return ((rho - transition.rho_minus)
            / (transition.rho_plus - transition.rho_minus))


def xi(gamma, transition: PhaseTransition) -> float:
    """Normal-peak weight of the quasi-average mixture at tilt gamma."""
    d = transition.rho_plus - transition.rho_minus
    # stable on both tails of gamma
    z = gamma * d
    if z >= 0:
        return float(np.exp(-np.logaddexp(0.0, z)))
    return float(1.0 / (1.0 + np.exp(z)))


def gamma_of_rho(rho, transition: PhaseTransition) -> float:
    """Tilt whose mixture density equals rho; diverges at the endpoints."""
    if not (transition.rho_minus < rho < transition.rho_plus):
        raise ValueError(
            f"rho={rho} must lie strictly inside "
            f"({transition.rho_minus}, {transition.rho_plus}); the tilt "
            "diverges at the endpoints")
    d = transition.rho_plus - transition.rho_minus
    return float(np.log((rho - transition.rho_minus)
                        / (transition.rho_plus - rho)) / d)


def mixture_density(gamma, transition: PhaseTransition) -> float:
    """xi_gamma rho- + (1 - xi_gamma) rho+, the quasi-average density."""
    w = xi(gamma, transition)
    return w * transition.rho_minus + (1.0 - w) * transition.rho_plus


def limit_measure(beta, rho, model: PotentialModel,
                  transition: Optional[PhaseTransition] = None) -> MixtureLaw:
    """Limiting condensate/depletion law at fixed total density.

    Outside the coexistence window the law is a single atom at the branch
    saddle (with uniform phase when condensed); inside, the two-peak convex
    combination with weight kappa_rho on the condensed atom.
    """
    if rho <= 0:
        raise ValueError("density must be positive")
    if transition is None:
        transition = find_transition_cached(beta, model)

    if transition is not None and (transition.rho_minus <= rho <= transition.rho_plus):
        k = kappa(rho, transition)
        return MixtureLaw(
            weight_normal=1.0 - k, weight_condensed=k,
            peak_normal=(0.0, transition.rho_minus),
            peak_condensed=(transition.x_plus, transition.y_plus))

    mu = mu_of_rho(beta, rho, model, transition)
    sols = pressure_sb(beta, mu, model).maximizers
    # pick the branch matching the requested density
    sol = min(sols, key=lambda s: abs(s.rho - rho))
    if sol.x_star == 0.0:
        return MixtureLaw(weight_normal=1.0, weight_condensed=0.0,
                          peak_normal=(0.0, sol.rho), peak_condensed=None,
                          phase_uniform=False)
    return MixtureLaw(weight_normal=0.0, weight_condensed=1.0,
                      peak_normal=(0.0, 0.0),
                      peak_condensed=(sol.x_star, sol.y_star))
